//! Canonical JSON schemas for instances and solutions.
//!
//! The instance schema is versioned and self-contained; solution files
//! embed the instance they solve so they validate on their own. Unbounded
//! variable bounds are encoded as `null`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{
    DesignMdpInstance, DesignSpace, IntegratedSolution, IntegratedStats, SolveMethod,
};
use crate::error::{Error, Result};
use crate::lp::{LinRow, Relation, VarKind};
use crate::mdp::{policy_iteration, AffineCost, ScenarioMdp};

/// Schema version written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDto {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDto {
    pub probability: f64,
    pub discount: f64,
    pub num_states: usize,
    pub num_actions: usize,
    /// `transition[s][a][s']`.
    pub transition: Vec<Vec<Vec<f64>>>,
    /// `cost_f[s][a]` is the design-sensitivity vector of the pair.
    pub cost_f: Vec<Vec<Vec<f64>>>,
    /// `cost_g[s][a]` is the constant cost of the pair.
    pub cost_g: Vec<Vec<f64>>,
    pub initial_dist: Vec<f64>,
}

/// On-disk instance representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: u32,
    /// Continuous design variable count.
    pub n1: usize,
    /// Integer and binary design variable count.
    pub n2: usize,
    /// Per-variable (lower, upper); `null` encodes an infinite bound.
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
    pub integrality: Vec<VarKind>,
    pub constraints: Vec<ConstraintDto>,
    pub design_cost: Vec<f64>,
    pub scenarios: Vec<ScenarioDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_names: Option<Vec<String>>,
}

fn encode_bound(b: f64) -> Option<f64> {
    b.is_finite().then_some(b)
}

fn decode_bound(b: Option<f64>, positive: bool) -> f64 {
    b.unwrap_or(if positive {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    })
}

impl InstanceFile {
    pub fn from_instance(instance: &DesignMdpInstance) -> Self {
        InstanceFile {
            version: SCHEMA_VERSION,
            n1: instance.design.n1(),
            n2: instance.design.n2(),
            bounds: instance
                .design
                .bounds
                .iter()
                .map(|&(lo, hi)| (encode_bound(lo), encode_bound(hi)))
                .collect(),
            integrality: instance.design.integrality.clone(),
            constraints: instance
                .design
                .constraints
                .iter()
                .map(|row| ConstraintDto {
                    coeffs: row.coeffs.clone(),
                    rel: row.rel,
                    rhs: row.rhs,
                })
                .collect(),
            design_cost: instance.design_cost.clone(),
            scenarios: instance
                .scenarios
                .iter()
                .map(|scen| ScenarioDto {
                    probability: scen.probability,
                    discount: scen.discount,
                    num_states: scen.num_states,
                    num_actions: scen.num_actions,
                    transition: scen.transition.clone(),
                    cost_f: scen
                        .cost
                        .iter()
                        .map(|row| row.iter().map(|c| c.f.clone()).collect())
                        .collect(),
                    cost_g: scen
                        .cost
                        .iter()
                        .map(|row| row.iter().map(|c| c.g).collect())
                        .collect(),
                    initial_dist: scen.initial_dist.clone(),
                })
                .collect(),
            var_names: instance.design.var_names.clone(),
        }
    }

    /// Schema-level violations that block conversion (shape mismatches).
    pub fn schema_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.version != SCHEMA_VERSION {
            out.push(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.version
            ));
        }
        let n = self.n1 + self.n2;
        if self.bounds.len() != n {
            out.push(format!(
                "bounds has {} entries, expected n1 + n2 = {n}",
                self.bounds.len()
            ));
        }
        if self.integrality.len() != n {
            out.push(format!(
                "integrality has {} entries, expected {n}",
                self.integrality.len()
            ));
        }
        let continuous = self
            .integrality
            .iter()
            .filter(|k| !k.is_integral())
            .count();
        if self.integrality.len() == n && continuous != self.n1 {
            out.push(format!(
                "integrality lists {continuous} continuous variables but n1 = {}",
                self.n1
            ));
        }
        if self.design_cost.len() != n {
            out.push(format!(
                "design_cost has {} entries, expected {n}",
                self.design_cost.len()
            ));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                out.push(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                ));
            }
        }
        for (k, s) in self.scenarios.iter().enumerate() {
            let shape_ok = |name: &str, rows: usize, per_row: Option<usize>, out: &mut Vec<String>| {
                if rows != s.num_states {
                    out.push(format!("scenario {k}: {name} must have num_states rows"));
                    return false;
                }
                let _ = per_row;
                true
            };
            if shape_ok("transition", s.transition.len(), None, &mut out) {
                for (si, per_a) in s.transition.iter().enumerate() {
                    if per_a.len() != s.num_actions {
                        out.push(format!(
                            "scenario {k}: transition[{si}] must have num_actions rows"
                        ));
                    } else {
                        for (a, row) in per_a.iter().enumerate() {
                            if row.len() != s.num_states {
                                out.push(format!(
                                    "scenario {k}: transition[{si}][{a}] must have num_states entries"
                                ));
                            }
                        }
                    }
                }
            }
            if s.cost_f.len() != s.num_states || s.cost_g.len() != s.num_states {
                out.push(format!(
                    "scenario {k}: cost_f and cost_g must have num_states rows"
                ));
            } else {
                for si in 0..s.num_states {
                    if s.cost_f[si].len() != s.num_actions || s.cost_g[si].len() != s.num_actions {
                        out.push(format!(
                            "scenario {k}: cost_f[{si}] and cost_g[{si}] must have num_actions entries"
                        ));
                        continue;
                    }
                    for (a, f) in s.cost_f[si].iter().enumerate() {
                        if f.len() != n {
                            out.push(format!(
                                "scenario {k}: cost_f[{si}][{a}] must have {n} entries"
                            ));
                        }
                    }
                }
            }
            if s.initial_dist.len() != s.num_states {
                out.push(format!(
                    "scenario {k}: initial_dist must have num_states entries"
                ));
            }
        }
        out
    }

    /// Convert to the in-memory instance, reporting every schema and
    /// domain-invariant violation on failure.
    pub fn to_instance(&self) -> Result<DesignMdpInstance> {
        let schema = self.schema_violations();
        if !schema.is_empty() {
            return Err(Error::Validation(schema));
        }
        let design = DesignSpace {
            bounds: self
                .bounds
                .iter()
                .map(|&(lo, hi)| (decode_bound(lo, false), decode_bound(hi, true)))
                .collect(),
            integrality: self.integrality.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| LinRow::new(c.coeffs.clone(), c.rel, c.rhs))
                .collect(),
            var_names: self.var_names.clone(),
        };
        let scenarios = self
            .scenarios
            .iter()
            .map(|s| ScenarioMdp {
                num_states: s.num_states,
                num_actions: s.num_actions,
                discount: s.discount,
                transition: s.transition.clone(),
                cost: s
                    .cost_f
                    .iter()
                    .zip(&s.cost_g)
                    .map(|(frow, grow)| {
                        frow.iter()
                            .zip(grow)
                            .map(|(f, &g)| AffineCost::new(f.clone(), g))
                            .collect()
                    })
                    .collect(),
                initial_dist: s.initial_dist.clone(),
                probability: s.probability,
            })
            .collect();
        let instance = DesignMdpInstance {
            design,
            design_cost: self.design_cost.clone(),
            scenarios,
        };
        let violations = instance.violations();
        if violations.is_empty() {
            Ok(instance)
        } else {
            Err(Error::Validation(violations))
        }
    }
}

/// Serialize an instance to canonical pretty JSON (deterministic bytes).
pub fn instance_to_json(instance: &DesignMdpInstance) -> String {
    let file = InstanceFile::from_instance(instance);
    serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
}

/// Parse and fully validate an instance from JSON text.
pub fn instance_from_json(text: &str) -> Result<DesignMdpInstance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.to_instance()
}

pub fn write_instance(instance: &DesignMdpInstance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_json(instance) + "\n")?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<DesignMdpInstance> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}

/// Per-scenario block of a solution file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionScenarioDto {
    /// Weighted value of the scenario at the solution design.
    pub u: f64,
    pub values: Vec<f64>,
    pub rule: Vec<usize>,
}

/// On-disk solution representation; embeds its instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub version: u32,
    pub method: SolveMethod,
    pub objective: f64,
    pub x: Vec<f64>,
    pub scenarios: Vec<SolutionScenarioDto>,
    pub stats: IntegratedStats,
    pub instance: InstanceFile,
}

impl SolutionFile {
    pub fn from_solution(solution: &IntegratedSolution, instance: &DesignMdpInstance) -> Self {
        SolutionFile {
            version: SCHEMA_VERSION,
            method: solution.method,
            objective: solution.objective,
            x: solution.x.clone(),
            scenarios: solution
                .per_scenario
                .iter()
                .map(|s| SolutionScenarioDto {
                    u: s.u,
                    values: s.values.values.clone(),
                    rule: s.rule.action_of.clone(),
                })
                .collect(),
            stats: solution.stats.clone(),
            instance: InstanceFile::from_instance(instance),
        }
    }

    /// Consistency violations: invariant checks plus a re-solve of every
    /// scenario MDP at `x` confirming the recorded objective.
    pub fn consistency_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let instance = match self.instance.to_instance() {
            Ok(i) => i,
            Err(Error::Validation(list)) => return list,
            Err(e) => return vec![e.to_string()],
        };
        if self.x.len() != instance.num_design_vars() {
            out.push(format!(
                "solution x has {} entries, expected {}",
                self.x.len(),
                instance.num_design_vars()
            ));
            return out;
        }
        if self.scenarios.len() != instance.scenarios.len() {
            out.push("solution must carry one block per scenario".into());
            return out;
        }
        if !crate::design::check_design_feasible(&instance.design, &self.x, 1e-6) {
            out.push("solution design is infeasible for the design space".into());
        }

        let mut recombined: f64 = instance
            .design_cost
            .iter()
            .zip(&self.x)
            .map(|(c, xi)| c * xi)
            .sum();
        let mut rederived = recombined;
        for (k, (scen, block)) in instance.scenarios.iter().zip(&self.scenarios).enumerate() {
            // u must match the recorded values under the initial distribution
            let weighted: f64 = block
                .values
                .iter()
                .zip(&scen.initial_dist)
                .map(|(v, p)| v * p)
                .sum();
            if (weighted - block.u).abs() > 1e-8 * (1.0 + block.u.abs()) {
                out.push(format!(
                    "scenario {k}: recorded u {} differs from weighted values {weighted}",
                    block.u
                ));
            }
            recombined += scen.probability * block.u;
            match policy_iteration(scen, &self.x) {
                Ok((values, _)) => {
                    rederived += scen.probability * values.weighted(&scen.initial_dist);
                }
                Err(e) => out.push(format!("scenario {k}: re-solve failed: {e}")),
            }
        }
        if (recombined - self.objective).abs() > 1e-8 * (1.0 + self.objective.abs()) {
            out.push(format!(
                "objective {} does not recombine from its parts ({recombined})",
                self.objective
            ));
        }
        if (rederived - self.objective).abs() > 1e-6 * (1.0 + self.objective.abs()) {
            out.push(format!(
                "objective {} disagrees with the re-solved objective {rederived}",
                self.objective
            ));
        }
        out
    }
}

pub fn write_solution(
    solution: &IntegratedSolution,
    instance: &DesignMdpInstance,
    path: &Path,
) -> Result<()> {
    let file = SolutionFile::from_solution(solution, instance);
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_solution(path: &Path) -> Result<SolutionFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// What kind of file a JSON document is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Instance,
    Solution,
}

/// Sniff instance vs solution by shape: solutions embed an `instance` field.
pub fn sniff_kind(text: &str) -> Result<FileKind> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidModel("top-level JSON must be an object".into()))?;
    if obj.contains_key("instance") {
        Ok(FileKind::Solution)
    } else if obj.contains_key("scenarios") {
        Ok(FileKind::Instance)
    } else {
        Err(Error::InvalidModel(
            "file is neither an instance nor a solution".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate_instance, GenParams};

    fn sample() -> DesignMdpInstance {
        generate_instance(&GenParams {
            num_vars: 4,
            num_constraints: 2,
            num_scenarios: 2,
            num_states: 3,
            num_actions: 2,
            seed: 9,
        })
        .unwrap()
    }

    #[test]
    fn instance_round_trip_is_exact() {
        let instance = sample();
        let text = instance_to_json(&instance);
        let back = instance_from_json(&text).unwrap();
        assert_eq!(instance, back);
    }

    #[test]
    fn serialization_is_deterministic() {
        let a = instance_to_json(&sample());
        let b = instance_to_json(&sample());
        assert_eq!(a, b);
    }

    #[test]
    fn bad_transition_sum_is_reported_by_name() {
        let instance = sample();
        let mut file = InstanceFile::from_instance(&instance);
        file.scenarios[0].transition[0][0][0] += 0.1;
        let text = serde_json::to_string(&file).unwrap();
        match instance_from_json(&text) {
            Err(Error::Validation(list)) => {
                assert!(
                    list.iter().any(|m| m.contains("transition[0][0] sums to")),
                    "violations: {list:?}"
                );
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn solution_consistency_detects_tampering() {
        let instance = sample();
        let solution = crate::oracle::brute_force_solve(&instance).unwrap();
        let mut file = SolutionFile::from_solution(&solution, &instance);
        assert!(file.consistency_violations().is_empty());
        file.objective += 1.0;
        let violations = file.consistency_violations();
        assert!(!violations.is_empty());
        assert!(violations.iter().any(|m| m.contains("recombine")));
    }

    #[test]
    fn sniffing_distinguishes_the_two_schemas() {
        let instance = sample();
        let itext = instance_to_json(&instance);
        assert_eq!(sniff_kind(&itext).unwrap(), FileKind::Instance);
        let solution = crate::oracle::brute_force_solve(&instance).unwrap();
        let stext =
            serde_json::to_string(&SolutionFile::from_solution(&solution, &instance)).unwrap();
        assert_eq!(sniff_kind(&stext).unwrap(), FileKind::Solution);
    }

    #[test]
    fn infinite_bounds_encode_as_null() {
        let mut instance = sample();
        instance.design.bounds[0] = (0.0, 1.0);
        let mut file = InstanceFile::from_instance(&instance);
        // continuous unbounded variable round-trips through null
        file.bounds.push((None, None));
        file.integrality.push(VarKind::Continuous);
        file.design_cost.push(0.0);
        file.n1 += 1;
        // shape of scenario costs no longer matches; only check bound codec
        assert_eq!(decode_bound(None, true), f64::INFINITY);
        assert_eq!(decode_bound(None, false), f64::NEG_INFINITY);
        assert_eq!(encode_bound(f64::INFINITY), None);
        assert_eq!(encode_bound(2.5), Some(2.5));
    }
}
