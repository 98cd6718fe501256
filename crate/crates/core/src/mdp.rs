//! Single-scenario discounted MDPs with design-affine immediate costs.
//!
//! A [`ScenarioMdp`] is one scenario of the integrated problem: finite state
//! and action spaces, a transition kernel, a discount factor, an initial
//! distribution, a scenario probability, and per-(state, action) costs that
//! are affine in the design vector. Solvers: policy evaluation by a dense
//! linear solve, value iteration, policy iteration, and construction of the
//! primal value LP and its occupancy-measure dual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, Matrix};
use crate::lp::{LinRow, LpModel, Relation, Sense};

/// Cost assigned to actions that a design renders unavailable; large enough
/// that no optimal decision rule uses them at sane model scales.
pub const PROHIBITIVE_COST: f64 = 1e6;

/// Tolerance for probability-vector normalization checks.
pub const PROB_TOL: f64 = 1e-9;

/// Immediate cost `f . x + g` for one (state, action) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCost {
    /// Sensitivity per design variable; length equals the design dimension.
    pub f: Vec<f64>,
    /// Constant term.
    pub g: f64,
}

impl AffineCost {
    pub fn constant(g: f64) -> Self {
        AffineCost { f: Vec::new(), g }
    }

    pub fn new(f: Vec<f64>, g: f64) -> Self {
        AffineCost { f, g }
    }
}

/// Evaluate an affine cost at a design vector.
pub fn evaluate_cost(cost: &AffineCost, x: &[f64]) -> Result<f64> {
    if cost.f.len() != x.len() {
        return Err(Error::DimensionMismatch {
            context: "affine-cost sensitivity vs design vector",
            expected: cost.f.len(),
            got: x.len(),
        });
    }
    Ok(cost.f.iter().zip(x).map(|(fi, xi)| fi * xi).sum::<f64>() + cost.g)
}

/// A stationary deterministic decision rule: one action per state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub action_of: Vec<usize>,
}

/// Expected total discounted cost per starting state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    pub values: Vec<f64>,
}

impl ValueFunction {
    /// Expectation under a distribution over starting states.
    pub fn weighted(&self, dist: &[f64]) -> f64 {
        self.values.iter().zip(dist).map(|(v, p)| v * p).sum()
    }
}

/// One scenario's discounted-cost MDP.
///
/// All actions are available in every state; designs that rule an action out
/// are modeled with [`PROHIBITIVE_COST`]. Costs may be negative throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMdp {
    pub num_states: usize,
    pub num_actions: usize,
    /// Discount factor, strictly inside (0, 1).
    pub discount: f64,
    /// `transition[s][a][s']`: probability of moving to `s'`.
    pub transition: Vec<Vec<Vec<f64>>>,
    /// `cost[s][a]`: immediate cost, affine in the design vector.
    pub cost: Vec<Vec<AffineCost>>,
    /// Distribution over starting states.
    pub initial_dist: Vec<f64>,
    /// Probability of this scenario occurring, in (0, 1].
    pub probability: f64,
}

impl ScenarioMdp {
    pub fn new(
        discount: f64,
        transition: Vec<Vec<Vec<f64>>>,
        cost: Vec<Vec<AffineCost>>,
        initial_dist: Vec<f64>,
        probability: f64,
    ) -> Result<Self> {
        let num_states = transition.len();
        let num_actions = transition.first().map_or(0, |row| row.len());
        let mdp = ScenarioMdp {
            num_states,
            num_actions,
            discount,
            transition,
            cost,
            initial_dist,
            probability,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    /// Check every structural invariant; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        for msg in self.violations() {
            return Err(Error::InvalidModel(msg));
        }
        Ok(())
    }

    /// All invariant violations, phrased for reporting.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.num_states == 0 {
            out.push("num_states must be positive".into());
        }
        if self.num_actions == 0 {
            out.push("num_actions must be positive".into());
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            out.push(format!("discount {} outside (0, 1)", self.discount));
        }
        if !(self.probability > 0.0 && self.probability <= 1.0) {
            out.push(format!(
                "scenario probability {} outside (0, 1]",
                self.probability
            ));
        }
        if self.transition.len() != self.num_states {
            out.push("transition kernel first index must run over states".into());
        }
        for (s, per_action) in self.transition.iter().enumerate() {
            if per_action.len() != self.num_actions {
                out.push(format!("transition[{s}] must have one row per action"));
                continue;
            }
            for (a, row) in per_action.iter().enumerate() {
                if row.len() != self.num_states {
                    out.push(format!("transition[{s}][{a}] has wrong length"));
                    continue;
                }
                if row.iter().any(|&p| p < 0.0) {
                    out.push(format!("transition[{s}][{a}] has a negative entry"));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    out.push(format!("transition[{s}][{a}] sums to {sum}, not 1"));
                }
            }
        }
        if self.cost.len() != self.num_states
            || self.cost.iter().any(|row| row.len() != self.num_actions)
        {
            out.push("cost table must be indexed [state][action]".into());
        } else {
            let n = self.cost[0][0].f.len();
            for (s, row) in self.cost.iter().enumerate() {
                for (a, c) in row.iter().enumerate() {
                    if c.f.len() != n {
                        out.push(format!(
                            "cost[{s}][{a}] sensitivity length {} differs from {}",
                            c.f.len(),
                            n
                        ));
                    }
                }
            }
        }
        if self.initial_dist.len() != self.num_states {
            out.push("initial distribution length must equal num_states".into());
        } else {
            if self.initial_dist.iter().any(|&p| p < 0.0) {
                out.push("initial distribution has a negative entry".into());
            }
            let sum: f64 = self.initial_dist.iter().sum();
            if (sum - 1.0).abs() > PROB_TOL {
                out.push(format!("initial distribution sums to {sum}, not 1"));
            }
        }
        out
    }

    /// Design dimension expected by the cost table.
    pub fn design_dim(&self) -> usize {
        self.cost[0][0].f.len()
    }

    fn rule_is_valid(&self, rule: &DecisionRule) -> bool {
        rule.action_of.len() == self.num_states
            && rule.action_of.iter().all(|&a| a < self.num_actions)
    }

    /// Immediate cost table at a fixed design.
    fn cost_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.cost
            .iter()
            .map(|row| row.iter().map(|c| evaluate_cost(c, x)).collect())
            .collect()
    }

    /// Sup-norm Bellman residual of a value function at design `x`.
    pub fn bellman_residual(&self, x: &[f64], value: &ValueFunction) -> Result<f64> {
        let cost = self.cost_at(x)?;
        let mut worst = 0.0f64;
        for s in 0..self.num_states {
            let best = (0..self.num_actions)
                .map(|a| self.q_value(&cost, &value.values, s, a))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max((value.values[s] - best).abs());
        }
        Ok(worst)
    }

    #[inline]
    fn q_value(&self, cost: &[Vec<f64>], v: &[f64], s: usize, a: usize) -> f64 {
        let future: f64 = self.transition[s][a]
            .iter()
            .zip(v)
            .map(|(p, vj)| p * vj)
            .sum();
        cost[s][a] + self.discount * future
    }
}

/// Expected discounted cost of following `rule` from every state, at design
/// `x`: the unique solution of `(I - discount * P_rule) v = h_rule(x)`,
/// computed by a dense LU solve.
pub fn policy_value(mdp: &ScenarioMdp, x: &[f64], rule: &DecisionRule) -> Result<ValueFunction> {
    if !mdp.rule_is_valid(rule) {
        return Err(Error::InvalidModel(
            "decision rule does not match the MDP's state/action counts".into(),
        ));
    }
    let n = mdp.num_states;
    let mut a = Matrix::zeros(n, n);
    let mut h = vec![0.0; n];
    for s in 0..n {
        let act = rule.action_of[s];
        for (j, &p) in mdp.transition[s][act].iter().enumerate() {
            a[(s, j)] = -mdp.discount * p;
        }
        a[(s, s)] += 1.0;
        h[s] = evaluate_cost(&mdp.cost[s][act], x)?;
    }
    Ok(ValueFunction {
        values: solve_dense(&a, &h)?,
    })
}

/// Value iteration to `eps`-optimality in sup-norm.
///
/// Iterates the Bellman operator until successive iterates differ by less
/// than `eps * (1 - discount) / (2 * discount)`, which guarantees the final
/// iterate is within `eps` of the optimal value. The returned rule is greedy
/// for the returned value function.
pub fn value_iteration(
    mdp: &ScenarioMdp,
    x: &[f64],
    eps: f64,
) -> Result<(ValueFunction, DecisionRule)> {
    assert!(eps > 0.0, "eps must be positive");
    let cost = mdp.cost_at(x)?;
    let n = mdp.num_states;
    let threshold = eps * (1.0 - mdp.discount) / (2.0 * mdp.discount);
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    loop {
        let mut diff = 0.0f64;
        for s in 0..n {
            let best = (0..mdp.num_actions)
                .map(|a| mdp.q_value(&cost, &v, s, a))
                .fold(f64::INFINITY, f64::min);
            next[s] = best;
            diff = diff.max((best - v[s]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        if diff < threshold {
            break;
        }
    }
    let rule = greedy_rule(mdp, &cost, &v);
    Ok((ValueFunction { values: v }, rule))
}

/// Greedy rule with lowest-index tie-breaking.
fn greedy_rule(mdp: &ScenarioMdp, cost: &[Vec<f64>], v: &[f64]) -> DecisionRule {
    let action_of = (0..mdp.num_states)
        .map(|s| {
            let mut best_a = 0;
            let mut best_q = f64::INFINITY;
            for a in 0..mdp.num_actions {
                let q = mdp.q_value(cost, v, s, a);
                if q < best_q {
                    best_q = q;
                    best_a = a;
                }
            }
            best_a
        })
        .collect();
    DecisionRule { action_of }
}

/// Policy iteration: exact Bellman-optimal rule in finitely many rounds.
///
/// Improvement only switches a state's action when the gain exceeds `1e-12`
/// (lowest action index on ties), which rules out cycling under floating
/// point. The returned value is `policy_value` of the final rule.
pub fn policy_iteration(mdp: &ScenarioMdp, x: &[f64]) -> Result<(ValueFunction, DecisionRule)> {
    let cost = mdp.cost_at(x)?;
    let mut rule = DecisionRule {
        action_of: vec![0; mdp.num_states],
    };
    loop {
        let value = policy_value(mdp, x, &rule)?;
        let mut changed = false;
        for s in 0..mdp.num_states {
            let current_q = mdp.q_value(&cost, &value.values, s, rule.action_of[s]);
            // lowest-index argmin, where later actions must win by 1e-12
            let mut best_a = 0;
            let mut best_q = f64::INFINITY;
            for a in 0..mdp.num_actions {
                let q = mdp.q_value(&cost, &value.values, s, a);
                if q < best_q - 1e-12 {
                    best_q = q;
                    best_a = a;
                }
            }
            if current_q - best_q > 1e-12 && best_a != rule.action_of[s] {
                rule.action_of[s] = best_a;
                changed = true;
            }
        }
        if !changed {
            return Ok((value, rule));
        }
    }
}

/// The value LP: `max 1'v` subject to one Bellman inequality per
/// (state, action) pair, at the fixed design `x`. Row order is state-major:
/// row `s * num_actions + a`.
pub fn build_primal_lp(mdp: &ScenarioMdp, x: &[f64]) -> Result<LpModel> {
    let cost = mdp.cost_at(x)?;
    let n = mdp.num_states;
    let mut lp = LpModel::new(Sense::Maximize, n);
    lp.objective = vec![1.0; n];
    // v is free
    for s in 0..n {
        for a in 0..mdp.num_actions {
            let mut coeffs = vec![0.0; n];
            for (j, &p) in mdp.transition[s][a].iter().enumerate() {
                coeffs[j] -= mdp.discount * p;
            }
            coeffs[s] += 1.0;
            lp.rows.push(LinRow::new(coeffs, Relation::Le, cost[s][a]));
        }
    }
    Ok(lp)
}

/// The occupancy-measure dual of the value LP with the given state weights:
/// `min sum gamma[s][a] * cost(s, a, x)` subject to one balance equality per
/// state. Weights of all ones dualize the value LP exactly; weights
/// `q * alpha` produce the scaled balance rows used by the single-level
/// reformulation. Column order is state-major: column `s * num_actions + a`.
pub fn build_dual_lp(mdp: &ScenarioMdp, x: &[f64], state_weights: &[f64]) -> Result<LpModel> {
    if state_weights.len() != mdp.num_states {
        return Err(Error::DimensionMismatch {
            context: "state weights vs state count",
            expected: mdp.num_states,
            got: state_weights.len(),
        });
    }
    if state_weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidModel(
            "dual state weights must be strictly positive".into(),
        ));
    }
    let cost = mdp.cost_at(x)?;
    let ns = mdp.num_states;
    let na = mdp.num_actions;
    let mut lp = LpModel::new(Sense::Minimize, ns * na);
    for s in 0..ns {
        for a in 0..na {
            let col = s * na + a;
            lp.objective[col] = cost[s][a];
            lp.var_bounds[col] = (0.0, f64::INFINITY);
        }
    }
    for s in 0..ns {
        let mut coeffs = vec![0.0; ns * na];
        for a in 0..na {
            coeffs[s * na + a] += 1.0;
            for j in 0..ns {
                coeffs[j * na + a] -= mdp.discount * mdp.transition[j][a][s];
            }
        }
        lp.rows
            .push(LinRow::new(coeffs, Relation::Eq, state_weights[s]));
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_lp;
    use crate::rng::StreamRng;

    fn single_state(g: f64, discount: f64) -> ScenarioMdp {
        ScenarioMdp::new(
            discount,
            vec![vec![vec![1.0]]],
            vec![vec![AffineCost::new(vec![], g)]],
            vec![1.0],
            1.0,
        )
        .unwrap()
    }

    /// Deterministic two-state chain that swaps states each step.
    fn swap_chain(g: [f64; 2], discount: f64) -> ScenarioMdp {
        ScenarioMdp::new(
            discount,
            vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
            vec![
                vec![AffineCost::new(vec![], g[0])],
                vec![AffineCost::new(vec![], g[1])],
            ],
            vec![1.0, 0.0],
            1.0,
        )
        .unwrap()
    }

    /// Random dense MDP with costs affine in a design of dimension `n`.
    pub(crate) fn random_mdp(
        rng: &mut StreamRng,
        ns: usize,
        na: usize,
        n_design: usize,
    ) -> ScenarioMdp {
        let discount = rng.uniform_range(0.5, 0.97);
        let mut transition = Vec::with_capacity(ns);
        let mut cost = Vec::with_capacity(ns);
        for _ in 0..ns {
            let mut per_a = Vec::with_capacity(na);
            let mut per_a_cost = Vec::with_capacity(na);
            for _ in 0..na {
                let mut row: Vec<f64> = (0..ns).map(|_| rng.uniform_range(0.01, 1.0)).collect();
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= sum);
                per_a.push(row);
                let f: Vec<f64> = (0..n_design).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
                per_a_cost.push(AffineCost::new(f, rng.uniform_range(-5.0, 40.0)));
            }
            transition.push(per_a);
            cost.push(per_a_cost);
        }
        let mut alpha: Vec<f64> = (0..ns).map(|_| rng.uniform_range(0.01, 1.0)).collect();
        let sum: f64 = alpha.iter().sum();
        alpha.iter_mut().for_each(|p| *p /= sum);
        ScenarioMdp::new(discount, transition, cost, alpha, 1.0).unwrap()
    }

    #[test]
    fn evaluate_cost_examples() {
        let zero = AffineCost::new(vec![0.0, 0.0], 5.0);
        assert_eq!(evaluate_cost(&zero, &[7.0, -3.0]).unwrap(), 5.0);
        let sym = AffineCost::new(vec![1.0, -1.0], 0.0);
        assert_eq!(evaluate_cost(&sym, &[3.0, 3.0]).unwrap(), 0.0);
        let half = AffineCost::new(vec![0.5], 10.0);
        assert_eq!(evaluate_cost(&half, &[4.0]).unwrap(), 12.0);
        assert!(evaluate_cost(&half, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn policy_value_geometric_series() {
        let mdp = single_state(1.0, 0.9);
        let rule = DecisionRule { action_of: vec![0] };
        let v = policy_value(&mdp, &[], &rule).unwrap();
        assert!((v.values[0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn policy_value_zero_costs() {
        let mdp = swap_chain([0.0, 0.0], 0.7);
        let rule = DecisionRule {
            action_of: vec![0, 0],
        };
        let v = policy_value(&mdp, &[], &rule).unwrap();
        assert!(v.values.iter().all(|&vi| vi.abs() < 1e-12));
    }

    #[test]
    fn policy_value_matches_truncated_sum_oracle() {
        // 200-step truncated discounted sum along the deterministic chain;
        // truncation error <= 0.5^200 * 2 / 0.5, far below the tolerance.
        let g = [1.0, 2.0];
        let discount: f64 = 0.5;
        let truncated = |start: usize| -> f64 {
            let mut total = 0.0;
            let mut s = start;
            for t in 0..200 {
                total += discount.powi(t) * g[s];
                s = 1 - s;
            }
            total
        };
        let expect = [truncated(0), truncated(1)];
        // frozen closed forms the oracle must reproduce: 8/3 and 10/3
        assert!((expect[0] - 8.0 / 3.0).abs() < 1e-12);
        assert!((expect[1] - 10.0 / 3.0).abs() < 1e-12);

        let mdp = swap_chain(g, discount);
        let rule = DecisionRule {
            action_of: vec![0, 0],
        };
        let v = policy_value(&mdp, &[], &rule).unwrap();
        assert!((v.values[0] - expect[0]).abs() < 1e-9);
        assert!((v.values[1] - expect[1]).abs() < 1e-9);
    }

    #[test]
    fn value_iteration_single_state() {
        let mdp = single_state(1.0, 0.9);
        let (v, rule) = value_iteration(&mdp, &[], 1e-8).unwrap();
        assert!((v.values[0] - 10.0).abs() < 1e-8);
        assert_eq!(rule.action_of, vec![0]);
    }

    #[test]
    fn value_iteration_zero_cost_converges_immediately() {
        let mdp = swap_chain([0.0, 0.0], 0.9);
        let (v, _) = value_iteration(&mdp, &[], 1e-10).unwrap();
        assert!(v.values.iter().all(|&vi| vi == 0.0));
    }

    #[test]
    fn policy_iteration_single_action() {
        let mdp = swap_chain([1.0, 2.0], 0.5);
        let (v, rule) = policy_iteration(&mdp, &[]).unwrap();
        assert_eq!(rule.action_of, vec![0, 0]);
        let direct = policy_value(&mdp, &[], &rule).unwrap();
        assert_eq!(v, direct);
    }

    #[test]
    fn policy_iteration_prefers_dominant_action() {
        // action 1 strictly dominates: same dynamics, lower cost everywhere
        let mdp = ScenarioMdp::new(
            0.8,
            vec![
                vec![vec![0.5, 0.5], vec![0.5, 0.5]],
                vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            ],
            vec![
                vec![AffineCost::constant(5.0), AffineCost::constant(1.0)],
                vec![AffineCost::constant(7.0), AffineCost::constant(2.0)],
            ],
            vec![0.5, 0.5],
            1.0,
        )
        .unwrap();
        let (_, rule) = policy_iteration(&mdp, &[]).unwrap();
        assert_eq!(rule.action_of, vec![1, 1]);
    }

    #[test]
    fn cross_solver_agreement_on_random_mdp() {
        let mut rng = StreamRng::from_seed(42);
        let mdp = random_mdp(&mut rng, 4, 3, 2);
        let x = [0.3, -0.7];
        let (vi, _) = value_iteration(&mdp, &x, 1e-8).unwrap();
        let (pi, rule) = policy_iteration(&mdp, &x).unwrap();
        for s in 0..4 {
            assert!((vi.values[s] - pi.values[s]).abs() < 1e-6);
        }
        assert!(mdp.bellman_residual(&x, &pi).unwrap() < 1e-6);
        // greedy rule of policy iteration evaluates to the same value
        let again = policy_value(&mdp, &x, &rule).unwrap();
        assert_eq!(again, pi);

        let lp = build_primal_lp(&mdp, &x).unwrap();
        let sol = solve_lp(&lp).unwrap();
        for s in 0..4 {
            assert!((sol.primal[s] - pi.values[s]).abs() < 1e-6);
        }
    }

    #[test]
    fn primal_lp_shape() {
        let mdp = single_state(1.0, 0.9);
        let lp = build_primal_lp(&mdp, &[]).unwrap();
        assert_eq!(lp.num_vars(), 1);
        assert_eq!(lp.num_rows(), 1);

        let mdp2 = ScenarioMdp::new(
            0.9,
            vec![
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            ],
            vec![
                vec![AffineCost::constant(1.0), AffineCost::constant(2.0)],
                vec![AffineCost::constant(3.0), AffineCost::constant(4.0)],
            ],
            vec![0.5, 0.5],
            1.0,
        )
        .unwrap();
        let lp2 = build_primal_lp(&mdp2, &[]).unwrap();
        assert_eq!(lp2.num_vars(), 2);
        assert_eq!(lp2.num_rows(), 4);
    }

    #[test]
    fn dual_lp_self_loop_occupancy() {
        let mdp = single_state(3.0, 0.9);
        let dual = build_dual_lp(&mdp, &[], &[1.0]).unwrap();
        let sol = solve_lp(&dual).unwrap();
        assert!((sol.primal[0] - 10.0).abs() < 1e-8);
        assert!((sol.objective - 30.0).abs() < 1e-7);
    }

    #[test]
    fn strong_duality_and_total_occupancy() {
        let mut rng = StreamRng::from_seed(7);
        let mdp = random_mdp(&mut rng, 5, 3, 0);
        let primal = solve_lp(&build_primal_lp(&mdp, &[]).unwrap()).unwrap();
        let weights = vec![1.0; 5];
        let dual_model = build_dual_lp(&mdp, &[], &weights).unwrap();
        let dual = solve_lp(&dual_model).unwrap();
        let gap = (primal.objective - dual.objective).abs() / (1.0 + primal.objective.abs());
        assert!(gap < 1e-8, "gap = {gap}");
        // summing the balance rows: total occupancy = |S| / (1 - discount)
        let total: f64 = dual.primal.iter().sum();
        let expect = 5.0 / (1.0 - mdp.discount);
        assert!((total - expect).abs() < 1e-7 * expect);
    }

    #[test]
    fn ten_state_occupancy_is_one_hundred() {
        // |S| = 10, discount 0.9, unit weights: occupancy mass 10 / 0.1 = 100
        let mut rng = StreamRng::from_seed(11);
        let mut mdp = random_mdp(&mut rng, 10, 2, 0);
        mdp.discount = 0.9;
        let dual = solve_lp(&build_dual_lp(&mdp, &[], &vec![1.0; 10]).unwrap()).unwrap();
        let total: f64 = dual.primal.iter().sum();
        assert!((total - 100.0).abs() < 1e-7 * 100.0);
    }

    #[test]
    fn rejects_bad_transition_row() {
        let err = ScenarioMdp::new(
            0.9,
            vec![vec![vec![0.5, 0.4]], vec![vec![0.5, 0.5]]],
            vec![
                vec![AffineCost::constant(0.0)],
                vec![AffineCost::constant(0.0)],
            ],
            vec![1.0, 0.0],
            1.0,
        );
        assert!(err.is_err());
    }
}
