//! Self-contained linear and mixed-integer programming.
//!
//! A dense two-phase primal simplex ([`solve_lp`]) and an LP-based
//! best-first branch-and-bound ([`solve_mip`]) back every optimization in
//! this crate, so there is no external-solver dependency. Both are
//! correctness-first reference implementations; a different engine can be
//! plugged in behind [`MipSolve`] without touching callers.

mod branch_bound;
mod simplex;

pub use branch_bound::{solve_mip, solve_mip_with, MipConfig};
pub use simplex::{solve_lp, solve_lp_with, SimplexConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Row relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `coeffs · x <= rhs`
    Le,
    /// `coeffs · x == rhs`
    Eq,
    /// `coeffs · x >= rhs`
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// One linear constraint row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinRow {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

impl LinRow {
    pub fn new(coeffs: Vec<f64>, rel: Relation, rhs: f64) -> Self {
        LinRow { coeffs, rel, rhs }
    }

    /// Signed violation of the row at `x`: positive means violated.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match self.rel {
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Per-variable integrality marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

/// A linear program in natural (row) form.
///
/// Variable bounds may be infinite; free variables are split into
/// differences of nonnegatives inside the solver, transparently to callers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<LinRow>,
    /// Per-variable (lower, upper); use `f64::NEG_INFINITY` / `f64::INFINITY`.
    pub var_bounds: Vec<(f64, f64)>,
    pub var_names: Option<Vec<String>>,
}

impl LpModel {
    pub fn new(sense: Sense, num_vars: usize) -> Self {
        LpModel {
            sense,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            var_bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); num_vars],
            var_names: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.var_bounds.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Check the structural invariants: consistent lengths, ordered bounds.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.objective.len() != n {
            return Err(Error::DimensionMismatch {
                context: "objective length vs variable count",
                expected: n,
                got: self.objective.len(),
            });
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "row coefficient length vs variable count",
                    expected: n,
                    got: row.coeffs.len(),
                });
            }
            if !row.rhs.is_finite() {
                return Err(Error::InvalidModel(format!("row {i} has non-finite rhs")));
            }
        }
        for (j, &(lo, hi)) in self.var_bounds.iter().enumerate() {
            if lo > hi {
                return Err(Error::InvalidModel(format!(
                    "variable {j} has lower bound {lo} above upper bound {hi}"
                )));
            }
        }
        if let Some(names) = &self.var_names {
            if names.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "variable names vs variable count",
                    expected: n,
                    got: names.len(),
                });
            }
        }
        Ok(())
    }

    fn name_of(&self, j: usize) -> String {
        match &self.var_names {
            Some(names) => names[j].clone(),
            None => format!("x{j}"),
        }
    }

    /// Objective value of the model at `x`.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Maximum primal violation of rows and bounds at `x`.
    pub fn primal_infeasibility(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.rows {
            worst = worst.max(row.violation(x));
        }
        for (j, &(lo, hi)) in self.var_bounds.iter().enumerate() {
            worst = worst.max(lo - x[j]).max(x[j] - hi);
        }
        worst
    }

    /// Debug dump in LP text format (objective, rows, bounds).
    pub fn to_lp_text(&self) -> String {
        lp_text(self, None)
    }
}

/// A mixed-integer program: an LP plus per-variable integrality flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipModel {
    pub lp: LpModel,
    pub integrality: Vec<VarKind>,
}

impl MipModel {
    pub fn new(lp: LpModel, integrality: Vec<VarKind>) -> Self {
        MipModel { lp, integrality }
    }

    /// All-continuous wrapper around an LP.
    pub fn continuous(lp: LpModel) -> Self {
        let n = lp.num_vars();
        MipModel {
            lp,
            integrality: vec![VarKind::Continuous; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        if self.integrality.len() != self.lp.num_vars() {
            return Err(Error::DimensionMismatch {
                context: "integrality flags vs variable count",
                expected: self.lp.num_vars(),
                got: self.integrality.len(),
            });
        }
        for (j, kind) in self.integrality.iter().enumerate() {
            let (lo, hi) = self.lp.var_bounds[j];
            if *kind == VarKind::Binary && (lo < -1e-9 || hi > 1.0 + 1e-9) {
                return Err(Error::InvalidModel(format!(
                    "binary variable {j} has bounds outside [0, 1]: [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Debug dump in LP text format including integrality sections.
    pub fn to_lp_text(&self) -> String {
        lp_text(&self.lp, Some(&self.integrality))
    }
}

/// Solver termination status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NodeLimit,
    TimeLimit,
}

/// Iteration and node counters for a solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Simplex pivots, totalled over both phases (and over all nodes for MIPs).
    pub iterations: u64,
    /// Branch-and-bound nodes solved (1 for a problem solved at the root).
    pub nodes: u64,
}

/// Result of an LP or MIP solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    /// Variable values (meaningful when `status` is `Optimal`, or for the
    /// incumbent when a limit status is returned).
    pub primal: Vec<f64>,
    /// Row multipliers, LP solves only (empty for MIPs). Signs are chosen so
    /// that for rows alone `sum(dual[i] * rhs[i])` plus the reduced-cost
    /// contribution of active bounds equals the optimal objective; for
    /// models whose optimum has no active finite bounds (e.g. free-variable
    /// programs) the row term alone reproduces the objective.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub stats: SolveStats,
}

impl SolveResult {
    pub(crate) fn status_only(status: Status) -> Self {
        SolveResult {
            status,
            primal: Vec::new(),
            dual: Vec::new(),
            objective: f64::NAN,
            stats: SolveStats::default(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Pluggable MIP engine. The internal branch-and-bound is the default and
/// the only implementation exercised by the test suite; an external solver
/// can be swapped in behind this trait.
pub trait MipSolve {
    fn solve(&self, model: &MipModel) -> Result<SolveResult>;
}

/// The built-in solver as a [`MipSolve`] implementation.
#[derive(Debug, Clone, Default)]
pub struct InternalSolver {
    pub config: MipConfig,
}

impl MipSolve for InternalSolver {
    fn solve(&self, model: &MipModel) -> Result<SolveResult> {
        solve_mip_with(model, &self.config)
    }
}

/// Report from [`check_kkt`]: worst-case violations of the optimality system.
#[derive(Debug, Clone, Copy, Default)]
pub struct KktReport {
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementary_slackness: f64,
    /// |primal objective - dual objective| / (1 + |primal objective|).
    pub relative_gap: f64,
}

/// Verify an optimal LP result against the Karush-Kuhn-Tucker system of the
/// model. Used by tests and debug assertions; tolerances are the caller's
/// concern.
pub fn check_kkt(model: &LpModel, result: &SolveResult) -> KktReport {
    let n = model.num_vars();
    let x = &result.primal;
    let y = &result.dual;
    let mut rep = KktReport {
        primal_infeasibility: model.primal_infeasibility(x),
        ..KktReport::default()
    };

    // sign convention: internally treat as minimization
    let sgn = match model.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    // reduced costs d_j = c_j - sum_i y_i a_ij (minimization orientation)
    let mut reduced = vec![0.0; n];
    for j in 0..n {
        reduced[j] = sgn * model.objective[j];
    }
    for (i, row) in model.rows.iter().enumerate() {
        let yi = sgn * y[i];
        for j in 0..n {
            reduced[j] -= yi * row.coeffs[j];
        }
    }

    // dual feasibility on rows: for Le rows of a min problem y <= 0, for Ge
    // rows y >= 0 (with the internal orientation y_i * sgn).
    for (i, row) in model.rows.iter().enumerate() {
        let yi = sgn * y[i];
        match row.rel {
            Relation::Le => rep.dual_infeasibility = rep.dual_infeasibility.max(yi),
            Relation::Ge => rep.dual_infeasibility = rep.dual_infeasibility.max(-yi),
            Relation::Eq => {}
        }
        let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        let slack = (lhs - row.rhs).abs();
        rep.complementary_slackness = rep.complementary_slackness.max(yi.abs() * slack);
    }

    // dual feasibility on bounds, and bound contribution to the dual objective
    let mut bound_term = 0.0;
    let btol = 1e-7;
    for j in 0..n {
        let (lo, hi) = model.var_bounds[j];
        let at_lo = lo.is_finite() && (x[j] - lo).abs() <= btol;
        let at_hi = hi.is_finite() && (hi - x[j]).abs() <= btol;
        let d = reduced[j];
        if at_lo && d > 0.0 {
            bound_term += d * lo;
        } else if at_hi && d < 0.0 {
            bound_term += d * hi;
        } else {
            // interior variable: reduced cost must vanish
            rep.dual_infeasibility = rep.dual_infeasibility.max(d.abs());
        }
    }

    let dual_obj: f64 = model
        .rows
        .iter()
        .zip(y)
        .map(|(row, yi)| sgn * yi * row.rhs)
        .sum::<f64>()
        + bound_term;
    let primal_obj = sgn * model.objective_at(x);
    rep.relative_gap = (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs());
    rep
}

fn fmt_coeff(first: bool, c: f64, name: &str) -> Option<String> {
    if c == 0.0 {
        return None;
    }
    let sign = if c < 0.0 {
        "- "
    } else if first {
        ""
    } else {
        "+ "
    };
    let mag = c.abs();
    if (mag - 1.0).abs() < 1e-15 {
        Some(format!("{sign}{name}"))
    } else {
        Some(format!("{sign}{mag} {name}"))
    }
}

fn lp_text(lp: &LpModel, integrality: Option<&[VarKind]>) -> String {
    let mut out = String::new();
    out.push_str(match lp.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        if let Some(term) = fmt_coeff(first, c, &lp.name_of(j)) {
            out.push(' ');
            out.push_str(&term);
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        out.push_str(&format!(" r{i}:"));
        let mut first = true;
        for (j, &c) in row.coeffs.iter().enumerate() {
            if let Some(term) = fmt_coeff(first, c, &lp.name_of(j)) {
                out.push(' ');
                out.push_str(&term);
                first = false;
            }
        }
        if first {
            out.push_str(" 0");
        }
        out.push_str(&format!(" {} {}\n", row.rel.symbol(), row.rhs));
    }
    out.push_str("Bounds\n");
    for (j, &(lo, hi)) in lp.var_bounds.iter().enumerate() {
        let name = lp.name_of(j);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => out.push_str(&format!(" {lo} <= {name} <= {hi}\n")),
            (true, false) => out.push_str(&format!(" {name} >= {lo}\n")),
            (false, true) => out.push_str(&format!(" {name} <= {hi}\n")),
            (false, false) => out.push_str(&format!(" {name} free\n")),
        }
    }
    if let Some(kinds) = integrality {
        let generals: Vec<String> = kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == VarKind::Integer)
            .map(|(j, _)| lp.name_of(j))
            .collect();
        let binaries: Vec<String> = kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == VarKind::Binary)
            .map(|(j, _)| lp.name_of(j))
            .collect();
        if !generals.is_empty() {
            out.push_str("General\n ");
            out.push_str(&generals.join(" "));
            out.push('\n');
        }
        if !binaries.is_empty() {
            out.push_str("Binary\n ");
            out.push_str(&binaries.join(" "));
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}
