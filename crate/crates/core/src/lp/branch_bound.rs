//! LP-based branch-and-bound for mixed-integer models.
//!
//! Best-first search on the relaxation bound, branching on the most
//! fractional integer variable (lowest index on ties). Deterministic:
//! identical models produce identical incumbents and node counts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::{solve_lp_with, SimplexConfig};
use super::{MipModel, SolveResult, SolveStats, Status, VarKind};
use crate::error::{Error, Result};
use crate::util::Stopwatch;

/// Branch-and-bound knobs.
#[derive(Debug, Clone)]
pub struct MipConfig {
    /// Node cap; the search stops with [`Status::NodeLimit`] beyond it.
    pub max_nodes: u64,
    /// Optional wall-clock cap in milliseconds ([`Status::TimeLimit`]).
    pub max_millis: Option<u64>,
    /// A value at most `epsilon` above an attainable objective may be given
    /// to prune early; the search still proves optimality of the result.
    pub initial_cutoff: Option<f64>,
    /// Values within this distance of an integer count as integral.
    pub int_tol: f64,
    pub simplex: SimplexConfig,
}

impl Default for MipConfig {
    fn default() -> Self {
        MipConfig {
            max_nodes: 1_000_000,
            max_millis: None,
            initial_cutoff: None,
            int_tol: 1e-6,
            simplex: SimplexConfig::default(),
        }
    }
}

/// Solve with default configuration.
pub fn solve_mip(model: &MipModel) -> Result<SolveResult> {
    solve_mip_with(model, &MipConfig::default())
}

struct Node {
    /// Relaxation bound inherited from the parent, in minimization scale.
    score: f64,
    id: u64,
    bounds: Vec<(f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.score == other.score && self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap; invert so the lowest score (ties: lowest id)
    // pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Solve with an explicit configuration.
pub fn solve_mip_with(model: &MipModel, config: &MipConfig) -> Result<SolveResult> {
    model.validate()?;
    for (j, kind) in model.integrality.iter().enumerate() {
        if kind.is_integral() {
            let (lo, hi) = model.lp.var_bounds[j];
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "integer variable {j} must have finite bounds for branch-and-bound"
                )));
            }
        }
    }

    let dir = match model.lp.sense {
        super::Sense::Minimize => 1.0,
        super::Sense::Maximize => -1.0,
    };
    let started = Stopwatch::start();
    let deadline_ms = config.max_millis;

    let mut stats = SolveStats::default();
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Node {
        score: f64::NEG_INFINITY,
        id: next_id,
        bounds: model.lp.var_bounds.clone(),
    });
    next_id += 1;

    let mut incumbent: Option<(Vec<f64>, f64)> = None; // (x, score)
    let cutoff_limit = config
        .initial_cutoff
        .map(|c| dir * c + 1e-7 * (1.0 + (dir * c).abs()))
        .unwrap_or(f64::INFINITY);
    let mut limit_hit: Option<Status> = None;

    let mut lp = model.lp.clone();
    while let Some(node) = heap.pop() {
        let prune_at = incumbent
            .as_ref()
            .map(|(_, s)| s - 1e-9 * (1.0 + s.abs()))
            .unwrap_or(f64::INFINITY)
            .min(cutoff_limit);
        if node.score >= prune_at {
            // best-first: every remaining node is at least as bad
            break;
        }
        if stats.nodes >= config.max_nodes {
            limit_hit = Some(Status::NodeLimit);
            break;
        }
        if let Some(ms) = deadline_ms {
            if started.elapsed_ms() >= ms {
                limit_hit = Some(Status::TimeLimit);
                break;
            }
        }

        lp.var_bounds.clone_from(&node.bounds);
        let relax = solve_lp_with(&lp, &config.simplex)?;
        stats.nodes += 1;
        stats.iterations += relax.stats.iterations;

        match relax.status {
            Status::Infeasible => continue,
            Status::Unbounded => {
                // with all integer variables boxed this certifies an
                // unbounded continuous direction of the full problem
                return Ok(SolveResult {
                    stats,
                    ..SolveResult::status_only(Status::Unbounded)
                });
            }
            Status::IterationLimit => {
                return Err(Error::SolverStopped(format!(
                    "node LP hit the simplex iteration cap after {} pivots",
                    relax.stats.iterations
                )));
            }
            Status::Optimal => {}
            Status::NodeLimit | Status::TimeLimit => unreachable!(),
        }

        let score = dir * relax.objective;
        if score >= prune_at {
            continue;
        }

        match most_fractional(&relax.primal, &model.integrality, config.int_tol) {
            None => {
                // integer feasible: snap and recompute the exact objective
                let mut x = relax.primal.clone();
                for (j, kind) in model.integrality.iter().enumerate() {
                    if kind.is_integral() {
                        x[j] = x[j].round();
                    }
                }
                let val = dir * model.lp.objective_at(&x);
                let better = match &incumbent {
                    None => true,
                    Some((_, best)) => val < best - 1e-12 * (1.0 + best.abs()),
                };
                if better {
                    incumbent = Some((x, val));
                }
            }
            Some((j, frac)) => {
                let lo_child = {
                    let mut b = node.bounds.clone();
                    b[j].1 = frac.floor();
                    b
                };
                let hi_child = {
                    let mut b = node.bounds.clone();
                    b[j].0 = frac.ceil();
                    b
                };
                for bounds in [lo_child, hi_child] {
                    if bounds[j].0 <= bounds[j].1 + 1e-9 {
                        heap.push(Node {
                            score,
                            id: next_id,
                            bounds,
                        });
                        next_id += 1;
                    }
                }
            }
        }
    }

    match incumbent {
        Some((x, score)) => {
            let objective = dir * score;
            Ok(SolveResult {
                status: limit_hit.unwrap_or(Status::Optimal),
                primal: x,
                dual: Vec::new(),
                objective,
                stats,
            })
        }
        None => Ok(SolveResult {
            stats,
            ..SolveResult::status_only(limit_hit.unwrap_or(Status::Infeasible))
        }),
    }
}

/// Index and value of the most fractional integer variable, or `None` if
/// the point is integer feasible. Ties go to the lowest index.
fn most_fractional(x: &[f64], kinds: &[VarKind], tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None; // (index, value, fractionality)
    for (j, kind) in kinds.iter().enumerate() {
        if !kind.is_integral() {
            continue;
        }
        let frac = (x[j] - x[j].round()).abs();
        if frac <= tol {
            continue;
        }
        let dist = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        match best {
            Some((_, _, bd)) if dist <= bd => {}
            _ => best = Some((j, x[j], dist)),
        }
    }
    best.map(|(j, v, _)| (j, v))
}
