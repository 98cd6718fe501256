//! The integrated instance: a mixed-integer design polyhedron, linear design
//! costs, and the scenario MDPs whose costs the design enters affinely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinRow, VarKind};
use crate::mdp::{policy_iteration, DecisionRule, ScenarioMdp, ValueFunction, PROB_TOL};

/// Default tolerance for design-feasibility checks, matching the MIP
/// integrality tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// The leader polyhedron: variable bounds, integrality, and linear rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    /// Per-variable (lower, upper); integer variables must be boxed.
    pub bounds: Vec<(f64, f64)>,
    pub integrality: Vec<VarKind>,
    /// Rows over all design variables; both the equality form and the
    /// inequality forms used by the instance generator are supported.
    pub constraints: Vec<LinRow>,
    pub var_names: Option<Vec<String>>,
}

impl DesignSpace {
    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    /// Count of continuous variables.
    pub fn n1(&self) -> usize {
        self.integrality
            .iter()
            .filter(|k| !k.is_integral())
            .count()
    }

    /// Count of integer and binary variables.
    pub fn n2(&self) -> usize {
        self.integrality.iter().filter(|k| k.is_integral()).count()
    }

    pub fn var_name(&self, j: usize) -> String {
        match &self.var_names {
            Some(names) => names[j].clone(),
            None => format!("x{j}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for msg in self.violations() {
            return Err(Error::InvalidModel(msg));
        }
        Ok(())
    }

    pub fn violations(&self) -> Vec<String> {
        let n = self.num_vars();
        let mut out = Vec::new();
        if self.integrality.len() != n {
            out.push(format!(
                "integrality list has length {}, expected {n}",
                self.integrality.len()
            ));
            return out;
        }
        for (j, (&(lo, hi), kind)) in self.bounds.iter().zip(&self.integrality).enumerate() {
            if lo > hi {
                out.push(format!("variable {j} has crossed bounds [{lo}, {hi}]"));
            }
            if kind.is_integral() && (!lo.is_finite() || !hi.is_finite()) {
                out.push(format!("integer variable {j} must have finite bounds"));
            }
            if *kind == VarKind::Binary && (lo < -PROB_TOL || hi > 1.0 + PROB_TOL) {
                out.push(format!("binary variable {j} has bounds outside [0, 1]"));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                out.push(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                ));
            }
        }
        out
    }
}

/// `true` iff `x` satisfies bounds, integrality, and every constraint row
/// within `tol`.
pub fn check_design_feasible(space: &DesignSpace, x: &[f64], tol: f64) -> bool {
    if x.len() != space.num_vars() {
        return false;
    }
    for (j, (&(lo, hi), kind)) in space.bounds.iter().zip(&space.integrality).enumerate() {
        if x[j] < lo - tol || x[j] > hi + tol {
            return false;
        }
        if kind.is_integral() && (x[j] - x[j].round()).abs() > tol {
            return false;
        }
    }
    space.constraints.iter().all(|row| row.violation(x) <= tol)
}

/// The full integrated problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMdpInstance {
    pub design: DesignSpace,
    /// Design cost vector `c`.
    pub design_cost: Vec<f64>,
    pub scenarios: Vec<ScenarioMdp>,
}

impl DesignMdpInstance {
    pub fn new(
        design: DesignSpace,
        design_cost: Vec<f64>,
        scenarios: Vec<ScenarioMdp>,
    ) -> Result<Self> {
        let instance = DesignMdpInstance {
            design,
            design_cost,
            scenarios,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn num_design_vars(&self) -> usize {
        self.design.num_vars()
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.violations();
        if all.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(all))
        }
    }

    /// Every invariant violation across the design space and all scenarios.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.design.violations();
        let n = self.design.num_vars();
        if self.design_cost.len() != n {
            out.push(format!(
                "design cost vector has length {}, expected {n}",
                self.design_cost.len()
            ));
        }
        if self.scenarios.is_empty() {
            out.push("instance must have at least one scenario".into());
        }
        let qsum: f64 = self.scenarios.iter().map(|s| s.probability).sum();
        if (qsum - 1.0).abs() > PROB_TOL {
            out.push(format!("scenario probabilities sum to {qsum}, not 1"));
        }
        for (k, scen) in self.scenarios.iter().enumerate() {
            for msg in scen.violations() {
                out.push(format!("scenario {k}: {msg}"));
            }
            if scen.num_states > 0 && scen.num_actions > 0 && scen.design_dim() != n {
                out.push(format!(
                    "scenario {k}: cost sensitivity length {} differs from design dimension {n}",
                    scen.design_dim()
                ));
            }
        }
        out
    }
}

/// Per-scenario piece of an integrated solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSolution {
    pub values: ValueFunction,
    pub rule: DecisionRule,
    /// Initial-distribution-weighted value of the scenario.
    pub u: f64,
}

/// How an integrated solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Enumeration,
    MipReformulation,
}

/// Counters and timings from an integrated solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratedStats {
    pub solve_ms: u64,
    /// Branch-and-bound nodes (MIP route) or candidate designs scored
    /// (enumeration route).
    pub nodes: u64,
    pub simplex_iterations: u64,
    /// Objective reported by the MIP before the policy-iteration re-solve;
    /// only the MIP route sets this.
    pub mip_objective: Option<f64>,
}

/// Optimal design with its objective and the per-scenario solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratedSolution {
    pub x: Vec<f64>,
    /// `c . x + sum_k q_k u_k`, always recomputed from the parts.
    pub objective: f64,
    pub per_scenario: Vec<ScenarioSolution>,
    pub method: SolveMethod,
    pub stats: IntegratedStats,
}

/// The integrated objective at a fixed feasible design: solves every
/// scenario MDP by policy iteration and combines the weighted values in
/// scenario order.
pub fn objective_at(
    instance: &DesignMdpInstance,
    x: &[f64],
) -> Result<(f64, Vec<ScenarioSolution>)> {
    objective_at_with_tol(instance, x, FEASIBILITY_TOL)
}

/// [`objective_at`] with an explicit feasibility tolerance.
pub fn objective_at_with_tol(
    instance: &DesignMdpInstance,
    x: &[f64],
    tol: f64,
) -> Result<(f64, Vec<ScenarioSolution>)> {
    if !check_design_feasible(&instance.design, x, tol) {
        return Err(Error::InfeasibleDesign);
    }
    let mut per_scenario = Vec::with_capacity(instance.scenarios.len());
    let mut objective: f64 = instance
        .design_cost
        .iter()
        .zip(x)
        .map(|(c, xi)| c * xi)
        .sum();
    for scen in &instance.scenarios {
        let (values, rule) = policy_iteration(scen, x)?;
        let u = values.weighted(&scen.initial_dist);
        objective += scen.probability * u;
        per_scenario.push(ScenarioSolution { values, rule, u });
    }
    Ok((objective, per_scenario))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::AffineCost;

    fn unconstrained_space(n: usize) -> DesignSpace {
        DesignSpace {
            bounds: vec![(0.0, 1.0); n],
            integrality: vec![VarKind::Binary; n],
            constraints: Vec::new(),
            var_names: None,
        }
    }

    fn self_loop_scenario(g: f64, discount: f64, probability: f64, n: usize) -> ScenarioMdp {
        ScenarioMdp::new(
            discount,
            vec![vec![vec![1.0]]],
            vec![vec![AffineCost::new(vec![0.0; n], g)]],
            vec![1.0],
            probability,
        )
        .unwrap()
    }

    #[test]
    fn feasibility_inside_bounds_no_rows() {
        let space = unconstrained_space(2);
        assert!(check_design_feasible(&space, &[0.0, 1.0], 1e-6));
    }

    #[test]
    fn fractional_binary_is_infeasible() {
        let space = unconstrained_space(1);
        assert!(!check_design_feasible(&space, &[0.5], 1e-6));
    }

    #[test]
    fn violated_row_is_infeasible() {
        let mut space = unconstrained_space(2);
        space.constraints.push(LinRow::new(
            vec![1.0, 1.0],
            crate::lp::Relation::Le,
            1.0,
        ));
        // violates the row by 1e-3
        assert!(!check_design_feasible(&space, &[1.0, 0.001], 1e-6));
        assert!(check_design_feasible(&space, &[1.0, 0.0], 1e-6));
    }

    #[test]
    fn objective_all_zero_costs() {
        let instance = DesignMdpInstance::new(
            unconstrained_space(1),
            vec![0.0],
            vec![self_loop_scenario(0.0, 0.9, 1.0, 1)],
        )
        .unwrap();
        let (obj, _) = objective_at(&instance, &[0.0]).unwrap();
        assert_eq!(obj, 0.0);
    }

    #[test]
    fn objective_single_self_loop() {
        let instance = DesignMdpInstance::new(
            unconstrained_space(1),
            vec![0.0],
            vec![self_loop_scenario(1.0, 0.9, 1.0, 1)],
        )
        .unwrap();
        let (obj, per) = objective_at(&instance, &[1.0]).unwrap();
        assert!((obj - 10.0).abs() < 1e-9);
        assert!((per[0].u - 10.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_design_is_rejected() {
        let instance = DesignMdpInstance::new(
            unconstrained_space(1),
            vec![0.0],
            vec![self_loop_scenario(1.0, 0.9, 1.0, 1)],
        )
        .unwrap();
        assert!(matches!(
            objective_at(&instance, &[0.5]),
            Err(Error::InfeasibleDesign)
        ));
    }

    #[test]
    fn scenario_probabilities_must_normalize() {
        let result = DesignMdpInstance::new(
            unconstrained_space(1),
            vec![0.0],
            vec![
                self_loop_scenario(1.0, 0.9, 0.5, 1),
                self_loop_scenario(2.0, 0.9, 0.4, 1),
            ],
        );
        assert!(result.is_err());
    }

    #[test]
    fn duplicating_a_scenario_with_split_probability_preserves_objective() {
        let original = DesignMdpInstance::new(
            unconstrained_space(1),
            vec![3.0],
            vec![self_loop_scenario(2.0, 0.8, 1.0, 1)],
        )
        .unwrap();
        let split = DesignMdpInstance::new(
            unconstrained_space(1),
            vec![3.0],
            vec![
                self_loop_scenario(2.0, 0.8, 0.5, 1),
                self_loop_scenario(2.0, 0.8, 0.5, 1),
            ],
        )
        .unwrap();
        let (a, _) = objective_at(&original, &[1.0]).unwrap();
        let (b, _) = objective_at(&split, &[1.0]).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn cost_shift_raises_objective_by_discounted_mass() {
        // adding delta to every g of a scenario raises the objective by
        // exactly q * delta / (1 - discount)
        let delta = 0.75;
        let base = DesignMdpInstance::new(
            unconstrained_space(1),
            vec![0.0],
            vec![
                self_loop_scenario(1.0, 0.9, 0.6, 1),
                self_loop_scenario(2.0, 0.5, 0.4, 1),
            ],
        )
        .unwrap();
        let mut shifted = base.clone();
        for row in &mut shifted.scenarios[0].cost {
            for c in row.iter_mut() {
                c.g += delta;
            }
        }
        let (a, _) = objective_at(&base, &[0.0]).unwrap();
        let (b, _) = objective_at(&shifted, &[0.0]).unwrap();
        let expect = 0.6 * delta / (1.0 - 0.9);
        assert!((b - a - expect).abs() < 1e-7);
    }
}
