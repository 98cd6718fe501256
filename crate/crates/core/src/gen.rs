//! Seeded random instance generator.
//!
//! Reproduces a fixed distributional protocol: normal draws for leader
//! data and relative probabilities, uniform draws for discounts and cost
//! coefficients, with all relative probabilities clamped at 0.01 before
//! normalization so every state keeps positive mass. Identical parameters
//! and seed produce bit-identical instances; the draw streams are split
//! per (field, scenario, state, action) under the [`crate::rng`] contract.
//!
//! Distribution summary (mean, standard deviation):
//!
//! | quantity                        | law                         |
//! |---------------------------------|-----------------------------|
//! | integer-variable upper bound    | round(Normal(12, 1)), min 1 |
//! | leader constraint coefficient   | Normal(12, 0.5)             |
//! | leader constraint rhs (`<=`)    | Normal(b, b/6), b = n/13    |
//! | scenario relative probability   | Normal(1, 0.2), clamp 0.01  |
//! | initial-state relative weight   | Normal(1, 0.2), clamp 0.01  |
//! | transition relative weight      | Normal(1, 0.4), clamp 0.01  |
//! | discount factor                 | Uniform[0.92, 0.97]         |
//! | design cost                     | Uniform[10, 100]            |
//! | cost sensitivity f              | Uniform[-1, 1]              |
//! | cost constant g                 | Uniform[10, 40]             |
//!
//! Design variables: the first `n/2` are binary in `[0, 1]`, the rest are
//! general integers in `[0, ub]` with `ub` drawn per variable; lower
//! bounds are 0 throughout.

use serde::{Deserialize, Serialize};

use crate::design::{DesignMdpInstance, DesignSpace};
use crate::error::{Error, Result};
use crate::lp::{LinRow, Relation, VarKind};
use crate::mdp::{AffineCost, ScenarioMdp};
use crate::rng::StreamRng;

/// Stream labels; part of the seed contract.
mod stream {
    pub const BOUNDS: u64 = 1;
    pub const CONSTRAINT_COEFFS: u64 = 2;
    pub const CONSTRAINT_RHS: u64 = 3;
    pub const SCENARIO_PROBS: u64 = 4;
    pub const DESIGN_COST: u64 = 5;
    pub const DISCOUNT: u64 = 6;
    pub const INITIAL_DIST: u64 = 7;
    pub const TRANSITION: u64 = 8;
    pub const COST_F: u64 = 9;
    pub const COST_G: u64 = 10;
}

const PROB_CLAMP: f64 = 0.01;
const COEFF_MEAN: f64 = 12.0;
const COEFF_STD: f64 = 0.5;

/// Generation parameters: problem dimensions plus the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    /// Total leader variables; must be even (split evenly between binary
    /// and general integer variables).
    pub num_vars: usize,
    /// Leader constraint rows.
    pub num_constraints: usize,
    pub num_scenarios: usize,
    pub num_states: usize,
    pub num_actions: usize,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_vars == 0 || self.num_vars % 2 != 0 {
            return Err(Error::InvalidModel(format!(
                "num_vars must be positive and even to split evenly between binary and integer variables, got {}",
                self.num_vars
            )));
        }
        if self.num_scenarios == 0 || self.num_states == 0 || self.num_actions == 0 {
            return Err(Error::InvalidModel(
                "scenario, state, and action counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn normalized_weights(rng: &mut StreamRng, len: usize, std_dev: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| rng.normal_with(1.0, std_dev).max(PROB_CLAMP))
        .collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    w
}

/// Generate a random instance under the documented protocol.
pub fn generate_instance(params: &GenParams) -> Result<DesignMdpInstance> {
    params.validate()?;
    let n = params.num_vars;
    let half = n / 2;
    let root = StreamRng::from_seed(params.seed);

    // variable bounds: binaries first, then general integers with drawn
    // upper bounds
    let mut bounds = vec![(0.0, 1.0); half];
    let mut integrality = vec![VarKind::Binary; half];
    let mut ub_rng = root.derive(stream::BOUNDS);
    for _ in 0..half {
        let ub = ub_rng.normal_with(12.0, 1.0).round().max(1.0);
        bounds.push((0.0, ub));
        integrality.push(VarKind::Integer);
    }

    // leader rows, all upper bounds
    let b_mean = n as f64 / (COEFF_MEAN + 2.0 * COEFF_STD);
    let mut constraints = Vec::with_capacity(params.num_constraints);
    let mut rhs_rng = root.derive(stream::CONSTRAINT_RHS);
    for i in 0..params.num_constraints {
        let mut coeff_rng = root.derive_path(&[stream::CONSTRAINT_COEFFS, i as u64]);
        let coeffs: Vec<f64> = (0..n)
            .map(|_| coeff_rng.normal_with(COEFF_MEAN, COEFF_STD))
            .collect();
        let rhs = rhs_rng.normal_with(b_mean, b_mean / 6.0);
        constraints.push(LinRow::new(coeffs, Relation::Le, rhs));
    }

    let design = DesignSpace {
        bounds,
        integrality,
        constraints,
        var_names: None,
    };

    let mut cost_rng = root.derive(stream::DESIGN_COST);
    let design_cost: Vec<f64> = (0..n).map(|_| cost_rng.uniform_range(10.0, 100.0)).collect();

    let mut q_rng = root.derive(stream::SCENARIO_PROBS);
    let probabilities = normalized_weights(&mut q_rng, params.num_scenarios, 0.2);

    let mut scenarios = Vec::with_capacity(params.num_scenarios);
    for (k, &q) in probabilities.iter().enumerate() {
        let k_id = k as u64;
        let mut disc_rng = root.derive_path(&[stream::DISCOUNT, k_id]);
        let discount = disc_rng.uniform_range(0.92, 0.97);

        let mut alpha_rng = root.derive_path(&[stream::INITIAL_DIST, k_id]);
        let initial_dist = normalized_weights(&mut alpha_rng, params.num_states, 0.2);

        let mut transition = Vec::with_capacity(params.num_states);
        let mut cost = Vec::with_capacity(params.num_states);
        for s in 0..params.num_states {
            let s_id = s as u64;
            let mut per_a = Vec::with_capacity(params.num_actions);
            let mut per_c = Vec::with_capacity(params.num_actions);
            for a in 0..params.num_actions {
                let a_id = a as u64;
                let mut t_rng = root.derive_path(&[stream::TRANSITION, k_id, s_id, a_id]);
                per_a.push(normalized_weights(&mut t_rng, params.num_states, 0.4));
                let mut f_rng = root.derive_path(&[stream::COST_F, k_id, s_id, a_id]);
                let f: Vec<f64> = (0..n).map(|_| f_rng.uniform_range(-1.0, 1.0)).collect();
                let mut g_rng = root.derive_path(&[stream::COST_G, k_id, s_id, a_id]);
                per_c.push(AffineCost::new(f, g_rng.uniform_range(10.0, 40.0)));
            }
            transition.push(per_a);
            cost.push(per_c);
        }
        scenarios.push(ScenarioMdp::new(
            discount, transition, cost, initial_dist, q,
        )?);
    }

    DesignMdpInstance::new(design, design_cost, scenarios)
}
