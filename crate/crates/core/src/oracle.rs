//! Brute-force baseline: enumerate every feasible design and score each one
//! by solving all scenario MDPs. Exact but exponential; the reformulation
//! route is checked against it on small instances.

use crate::design::{
    check_design_feasible, objective_at, DesignMdpInstance, DesignSpace, IntegratedSolution,
    IntegratedStats, SolveMethod, FEASIBILITY_TOL,
};
use crate::error::{Error, Result};

/// Default cap on the number of box points the enumerator will visit.
pub const DEFAULT_POINT_CAP: u128 = 1_000_000;

/// Lexicographic iterator over the feasible integer points of a design
/// space. Requires a purely integer design with finite bounds.
pub struct DesignEnumerator<'a> {
    space: &'a DesignSpace,
    lows: Vec<i64>,
    highs: Vec<i64>,
    /// Next candidate, or `None` once exhausted.
    current: Option<Vec<i64>>,
    tol: f64,
}

impl<'a> DesignEnumerator<'a> {
    pub fn new(space: &'a DesignSpace) -> Result<Self> {
        Self::with_cap(space, DEFAULT_POINT_CAP)
    }

    pub fn with_cap(space: &'a DesignSpace, cap: u128) -> Result<Self> {
        space.validate()?;
        if space.n1() > 0 {
            return Err(Error::UnsupportedDesign(format!(
                "{} continuous design variable(s) present; enumeration requires a purely integer design",
                space.n1()
            )));
        }
        let mut lows = Vec::with_capacity(space.num_vars());
        let mut highs = Vec::with_capacity(space.num_vars());
        let mut points: u128 = 1;
        for (j, &(lo, hi)) in space.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::UnsupportedDesign(format!(
                    "integer design variable {j} has an infinite bound"
                )));
            }
            let l = lo.ceil() as i64;
            let h = hi.floor() as i64;
            if l > h {
                // empty box: no integer point within the bounds
                return Ok(DesignEnumerator {
                    space,
                    lows: Vec::new(),
                    highs: Vec::new(),
                    current: None,
                    tol: FEASIBILITY_TOL,
                });
            }
            points = points.saturating_mul((h - l + 1) as u128);
            lows.push(l);
            highs.push(h);
        }
        if points > cap {
            return Err(Error::EnumerationTooLarge { cap, points });
        }
        let current = Some(lows.clone());
        Ok(DesignEnumerator {
            space,
            lows,
            highs,
            current,
            tol: FEASIBILITY_TOL,
        })
    }

    fn advance(&mut self) {
        let Some(point) = &mut self.current else {
            return;
        };
        // last coordinate varies fastest: lexicographic order on vectors
        for j in (0..point.len()).rev() {
            if point[j] < self.highs[j] {
                point[j] += 1;
                return;
            }
            point[j] = self.lows[j];
        }
        self.current = None;
    }
}

impl Iterator for DesignEnumerator<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        loop {
            let point = self.current.as_ref()?;
            let x: Vec<f64> = point.iter().map(|&v| v as f64).collect();
            self.advance();
            if check_design_feasible(self.space, &x, self.tol) {
                return Some(x);
            }
        }
    }
}

/// Stream of feasible designs in lexicographic order.
pub fn enumerate_designs(space: &DesignSpace) -> Result<DesignEnumerator<'_>> {
    DesignEnumerator::new(space)
}

/// Exhaustive argmin of [`objective_at`] over the feasible designs; ties go
/// to the lexicographically smallest design.
pub fn brute_force_solve(instance: &DesignMdpInstance) -> Result<IntegratedSolution> {
    let started = crate::util::Stopwatch::start();
    let mut best: Option<IntegratedSolution> = None;
    let mut evaluated = 0u64;
    for x in enumerate_designs(&instance.design)? {
        let (objective, per_scenario) = objective_at(instance, &x)?;
        evaluated += 1;
        // strict improvement keeps the first (lexicographically smallest)
        // design among ties
        let improves = best.as_ref().map(|b| objective < b.objective).unwrap_or(true);
        if improves {
            best = Some(IntegratedSolution {
                x,
                objective,
                per_scenario,
                method: SolveMethod::Enumeration,
                stats: IntegratedStats::default(),
            });
        }
    }
    match best {
        Some(mut sol) => {
            sol.stats.nodes = evaluated;
            sol.stats.solve_ms = started.elapsed_ms();
            Ok(sol)
        }
        None => Err(Error::Infeasible),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LinRow, Relation, VarKind};
    use crate::mdp::{AffineCost, ScenarioMdp};

    fn binary_space(n: usize, constraints: Vec<LinRow>) -> DesignSpace {
        DesignSpace {
            bounds: vec![(0.0, 1.0); n],
            integrality: vec![VarKind::Binary; n],
            constraints,
            var_names: None,
        }
    }

    #[test]
    fn exactly_one_constraint_enumerates_two_points() {
        let space = binary_space(
            2,
            vec![LinRow::new(vec![1.0, 1.0], Relation::Eq, 1.0)],
        );
        let points: Vec<Vec<f64>> = enumerate_designs(&space).unwrap().collect();
        assert_eq!(points, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn integer_range_has_four_points() {
        let space = DesignSpace {
            bounds: vec![(0.0, 3.0)],
            integrality: vec![VarKind::Integer],
            constraints: Vec::new(),
            var_names: None,
        };
        let points: Vec<Vec<f64>> = enumerate_designs(&space).unwrap().collect();
        assert_eq!(points.len(), 4);
        assert_eq!(points[0], vec![0.0]);
        assert_eq!(points[3], vec![3.0]);
    }

    #[test]
    fn continuous_variables_are_rejected() {
        let space = DesignSpace {
            bounds: vec![(0.0, 1.0)],
            integrality: vec![VarKind::Continuous],
            constraints: Vec::new(),
            var_names: None,
        };
        assert!(matches!(
            enumerate_designs(&space),
            Err(Error::UnsupportedDesign(_))
        ));
    }

    #[test]
    fn oversized_box_is_rejected() {
        let space = DesignSpace {
            bounds: vec![(0.0, 9.0); 8],
            integrality: vec![VarKind::Integer; 8],
            constraints: Vec::new(),
            var_names: None,
        };
        assert!(matches!(
            DesignEnumerator::with_cap(&space, 1000),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn count_matches_filtered_box_sweep() {
        // random-ish constraint; count must equal a direct sweep of the box
        let space = binary_space(
            6,
            vec![LinRow::new(
                vec![1.0, 2.0, 1.0, 3.0, 1.0, 2.0],
                Relation::Le,
                4.0,
            )],
        );
        let enumerated = enumerate_designs(&space).unwrap().count();
        let mut direct = 0;
        for mask in 0..(1 << 6) {
            let x: Vec<f64> = (0..6).map(|j| ((mask >> (5 - j)) & 1) as f64).collect();
            if check_design_feasible(&space, &x, 1e-6) {
                direct += 1;
            }
        }
        assert_eq!(enumerated, direct);
    }

    fn tiny_instance(design_cost: Vec<f64>) -> DesignMdpInstance {
        let n = design_cost.len();
        let scen = ScenarioMdp::new(
            0.9,
            vec![vec![vec![1.0]]],
            vec![vec![AffineCost::new(vec![1.0; n], 1.0)]],
            vec![1.0],
            1.0,
        )
        .unwrap();
        DesignMdpInstance::new(binary_space(n, Vec::new()), design_cost, vec![scen]).unwrap()
    }

    #[test]
    fn single_feasible_point_is_returned() {
        let mut instance = tiny_instance(vec![2.0, 3.0]);
        instance
            .design
            .constraints
            .push(LinRow::new(vec![1.0, 0.0], Relation::Eq, 1.0));
        instance
            .design
            .constraints
            .push(LinRow::new(vec![0.0, 1.0], Relation::Eq, 1.0));
        let sol = brute_force_solve(&instance).unwrap();
        assert_eq!(sol.x, vec![1.0, 1.0]);
        let (expect, _) = objective_at(&instance, &[1.0, 1.0]).unwrap();
        assert_eq!(sol.objective, expect);
    }

    #[test]
    fn ties_break_lexicographically() {
        // symmetric costs: (0,1) and (1,0) tie; smaller is (0,1)
        let mut instance = tiny_instance(vec![5.0, 5.0]);
        instance
            .design
            .constraints
            .push(LinRow::new(vec![1.0, 1.0], Relation::Eq, 1.0));
        let sol = brute_force_solve(&instance).unwrap();
        assert_eq!(sol.x, vec![0.0, 1.0]);
    }

    #[test]
    fn empty_feasible_set_is_infeasible() {
        let mut instance = tiny_instance(vec![1.0]);
        instance
            .design
            .constraints
            .push(LinRow::new(vec![1.0], Relation::Ge, 2.0));
        assert!(matches!(
            brute_force_solve(&instance),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn oracle_lower_bounds_every_candidate() {
        let instance = tiny_instance(vec![4.0, -2.0, 1.0]);
        let sol = brute_force_solve(&instance).unwrap();
        for x in enumerate_designs(&instance.design).unwrap() {
            let (obj, _) = objective_at(&instance, &x).unwrap();
            assert!(sol.objective <= obj + 1e-9);
        }
    }
}
