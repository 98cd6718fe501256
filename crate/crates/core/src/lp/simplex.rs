//! Two-phase primal simplex on a dense tableau.
//!
//! The solver standardizes the model (shift lower bounds to zero, mirror
//! upper-bounded-only variables, split free variables, add slack/surplus and
//! artificial columns, scale rows), runs phase 1 to feasibility and phase 2
//! to optimality, and reads row multipliers off the final reduced-cost row.
//! Dantzig pricing is used until a degeneracy streak, after which Bland's
//! rule takes over to rule out cycling.

use super::{LpModel, Relation, Sense, SolveResult, SolveStats, Status};
use crate::error::Result;

/// Knobs for the simplex; the defaults match the documented contract.
#[derive(Debug, Clone)]
pub struct SimplexConfig {
    /// Pivot cap; `None` means `100 * (rows + vars)`.
    pub max_iterations: Option<u64>,
    /// Number of consecutive non-improving pivots before Bland's rule engages.
    pub degeneracy_streak: u64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        SimplexConfig {
            max_iterations: None,
            degeneracy_streak: 50,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;

/// Solve with default configuration.
pub fn solve_lp(model: &LpModel) -> Result<SolveResult> {
    solve_lp_with(model, &SimplexConfig::default())
}

/// Solve with an explicit configuration.
pub fn solve_lp_with(model: &LpModel, config: &SimplexConfig) -> Result<SolveResult> {
    model.validate()?;
    let mut std = Standardized::build(model);
    let cap = config
        .max_iterations
        .unwrap_or(100 * (model.num_rows() + model.num_vars()) as u64);
    let outcome = std.run(cap, config.degeneracy_streak);
    Ok(std.extract(model, outcome))
}

/// How an original variable maps into standardized columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lo + y[col]`
    Shifted { col: usize, lo: f64 },
    /// `x = hi - y[col]`
    Mirrored { col: usize, hi: f64 },
    /// `x = y[pos] - y[neg]`
    Split { pos: usize, neg: usize },
}

enum RunOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

struct Standardized {
    /// Tableau body: `m` rows, each `ncols + 1` wide (last entry is rhs).
    tab: Vec<f64>,
    /// Phase-2 reduced-cost row, `ncols + 1` wide.
    obj: Vec<f64>,
    /// Phase-1 reduced-cost row (dropped after phase 1).
    obj1: Vec<f64>,
    m: usize,
    ncols: usize,
    basis: Vec<usize>,
    var_maps: Vec<VarMap>,
    /// Per standardized row: signed scale `s` such that std row = s * original row.
    row_scale: Vec<f64>,
    /// Per structural column: power-of-two equilibration factor `d` such
    /// that the true variable value is `d` times the tableau value.
    col_scale: Vec<f64>,
    /// Column index of the slack/surplus/artificial whose reduced cost
    /// reveals the row's multiplier, with the sign to apply.
    dual_probe: Vec<(usize, f64)>,
    /// First artificial column (artificials are barred from entering in phase 2).
    art_start: usize,
    num_user_rows: usize,
    /// Objective sign: +1 minimize, -1 maximize (internally we minimize).
    obj_sign: f64,
    iterations: u64,
    /// Bland's rule engaged.
    bland: bool,
}

/// Nearest power of two to `1 / magnitude`; powers of two keep scaling
/// exact in floating point.
fn pow2_inverse(magnitude: f64) -> f64 {
    if magnitude <= 0.0 || !magnitude.is_finite() {
        return 1.0;
    }
    let exp = magnitude.log2().round();
    (-exp).exp2()
}

impl Standardized {
    fn build(model: &LpModel) -> Standardized {
        let n = model.num_vars();
        let obj_sign = match model.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };

        // assign structural columns
        let mut var_maps = Vec::with_capacity(n);
        let mut next_col = 0usize;
        let mut upper_rows: Vec<(usize, f64)> = Vec::new(); // (col, ub on the shifted var)
        for &(lo, hi) in &model.var_bounds {
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => {
                    var_maps.push(VarMap::Shifted { col: next_col, lo });
                    upper_rows.push((next_col, hi - lo));
                    next_col += 1;
                }
                (true, false) => {
                    var_maps.push(VarMap::Shifted { col: next_col, lo });
                    next_col += 1;
                }
                (false, true) => {
                    var_maps.push(VarMap::Mirrored { col: next_col, hi });
                    next_col += 1;
                }
                (false, false) => {
                    var_maps.push(VarMap::Split {
                        pos: next_col,
                        neg: next_col + 1,
                    });
                    next_col += 2;
                }
            }
        }
        let n_struct = next_col;
        let num_user_rows = model.rows.len();
        let m = num_user_rows + upper_rows.len();

        // standardized rows over structural columns, before slacks
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
        for row in &model.rows {
            let mut coeffs = vec![0.0; n_struct];
            let mut rhs = row.rhs;
            for (j, &a) in row.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match var_maps[j] {
                    VarMap::Shifted { col, lo } => {
                        coeffs[col] += a;
                        rhs -= a * lo;
                    }
                    VarMap::Mirrored { col, hi } => {
                        coeffs[col] -= a;
                        rhs -= a * hi;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs[pos] += a;
                        coeffs[neg] -= a;
                    }
                }
            }
            rows.push((coeffs, row.rel, rhs));
        }
        for &(col, ub) in &upper_rows {
            let mut coeffs = vec![0.0; n_struct];
            coeffs[col] = 1.0;
            rows.push((coeffs, Relation::Le, ub));
        }

        // equilibrate: two row passes around a column pass, all powers of
        // two, so the tableau mixes big-M rows with unit rows without
        // catastrophic magnitude spread; then make rhs nonnegative
        let mut row_scale = vec![1.0; m];
        let mut col_scale = vec![1.0; n_struct];
        for pass in 0..2 {
            for (i, (coeffs, _, rhs)) in rows.iter_mut().enumerate() {
                let maxc = coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
                let s = pow2_inverse(maxc);
                if s != 1.0 {
                    coeffs.iter_mut().for_each(|c| *c *= s);
                    *rhs *= s;
                    row_scale[i] *= s;
                }
            }
            if pass == 0 {
                for j in 0..n_struct {
                    let maxc = rows
                        .iter()
                        .fold(0.0f64, |acc, (coeffs, _, _)| acc.max(coeffs[j].abs()));
                    let d = pow2_inverse(maxc);
                    if d != 1.0 {
                        for (coeffs, _, _) in rows.iter_mut() {
                            coeffs[j] *= d;
                        }
                        col_scale[j] *= d;
                    }
                }
            }
        }
        for (i, (coeffs, rel, rhs)) in rows.iter_mut().enumerate() {
            if *rhs < 0.0 {
                coeffs.iter_mut().for_each(|c| *c = -*c);
                *rhs = -*rhs;
                row_scale[i] = -row_scale[i];
                *rel = match *rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        // slack / surplus / artificial layout
        let mut num_slack = 0usize;
        let mut num_art = 0usize;
        for (_, rel, _) in &rows {
            match rel {
                Relation::Le => num_slack += 1,
                Relation::Ge => {
                    num_slack += 1;
                    num_art += 1;
                }
                Relation::Eq => num_art += 1,
            }
        }
        let slack_start = n_struct;
        let art_start = slack_start + num_slack;
        let ncols = art_start + num_art;
        let width = ncols + 1;

        let mut tab = vec![0.0; m * width];
        let mut basis = vec![0usize; m];
        let mut dual_probe = vec![(0usize, 0.0f64); m];
        let mut obj1 = vec![0.0; width];
        let mut next_slack = slack_start;
        let mut next_art = art_start;

        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            let base = i * width;
            tab[base..base + n_struct].copy_from_slice(coeffs);
            tab[base + ncols] = *rhs;
            match rel {
                Relation::Le => {
                    tab[base + next_slack] = 1.0;
                    basis[i] = next_slack;
                    dual_probe[i] = (next_slack, -1.0);
                    next_slack += 1;
                }
                Relation::Ge => {
                    tab[base + next_slack] = -1.0;
                    dual_probe[i] = (next_slack, 1.0);
                    next_slack += 1;
                    tab[base + next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    tab[base + next_art] = 1.0;
                    basis[i] = next_art;
                    dual_probe[i] = (next_art, -1.0);
                    next_art += 1;
                }
            }
        }

        // phase-1 reduced costs: cost 1 on artificials, basic artificials
        // priced out by subtracting their rows
        for c in art_start..ncols {
            obj1[c] = 1.0;
        }
        for i in 0..m {
            if basis[i] >= art_start {
                let base = i * width;
                for j in 0..width {
                    obj1[j] -= tab[base + j];
                }
            }
        }

        // phase-2 reduced costs: structural costs (initial basis has cost
        // 0), in equilibrated column units
        let mut obj = vec![0.0; width];
        for (j, &c) in model.objective.iter().enumerate() {
            let c = obj_sign * c;
            if c == 0.0 {
                continue;
            }
            match var_maps[j] {
                VarMap::Shifted { col, .. } => obj[col] += c,
                VarMap::Mirrored { col, .. } => obj[col] -= c,
                VarMap::Split { pos, neg } => {
                    obj[pos] += c;
                    obj[neg] -= c;
                }
            }
        }
        for j in 0..n_struct {
            obj[j] *= col_scale[j];
        }

        Standardized {
            tab,
            obj,
            obj1,
            m,
            ncols,
            basis,
            var_maps,
            row_scale,
            col_scale,
            dual_probe,
            art_start,
            num_user_rows,
            obj_sign,
            iterations: 0,
            bland: false,
        }
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.tab[i * (self.ncols + 1) + self.ncols]
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.tab[i * (self.ncols + 1) + j]
    }

    fn run(&mut self, cap: u64, degeneracy_streak: u64) -> RunOutcome {
        // phase 1: minimize the artificial sum
        if self.art_start < self.ncols {
            match self.iterate(true, cap, degeneracy_streak) {
                PhaseEnd::Converged => {}
                PhaseEnd::Unbounded => unreachable!("phase-1 objective is bounded below by 0"),
                PhaseEnd::IterationLimit => return RunOutcome::IterationLimit,
            }
            let infeas: f64 = (0..self.m)
                .filter(|&i| self.basis[i] >= self.art_start)
                .map(|i| self.rhs(i))
                .sum();
            if infeas > FEAS_TOL * (1.0 + self.max_rhs()) {
                return RunOutcome::Infeasible;
            }
            self.drive_out_artificials();
        }
        // phase 2
        match self.iterate(false, cap, degeneracy_streak) {
            PhaseEnd::Converged => RunOutcome::Optimal,
            PhaseEnd::Unbounded => RunOutcome::Unbounded,
            PhaseEnd::IterationLimit => RunOutcome::IterationLimit,
        }
    }

    fn max_rhs(&self) -> f64 {
        (0..self.m).fold(0.0f64, |acc, i| acc.max(self.rhs(i).abs()))
    }

    /// Pivot basic artificials out on any usable non-artificial column.
    /// Rows where none exists are redundant (all-zero) and stay inert.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] < self.art_start {
                continue;
            }
            let mut col = None;
            for j in 0..self.art_start {
                if self.at(i, j).abs() > PIVOT_TOL {
                    col = Some(j);
                    break;
                }
            }
            if let Some(j) = col {
                self.pivot(i, j);
            }
        }
    }

    fn iterate(&mut self, phase1: bool, cap: u64, degeneracy_streak: u64) -> PhaseEnd {
        self.bland = false;
        let mut streak = 0u64;
        let mut last_obj = f64::INFINITY;
        loop {
            if self.iterations >= cap {
                return PhaseEnd::IterationLimit;
            }
            let enter = if phase1 {
                self.price(true, self.ncols)
            } else {
                self.price(false, self.art_start)
            };
            let Some(j) = enter else {
                return PhaseEnd::Converged;
            };
            let Some(row) = self.ratio_test(j) else {
                return PhaseEnd::Unbounded;
            };
            self.pivot(row, j);
            self.iterations += 1;

            // the rhs cell of a reduced-cost row carries -z
            let cur = if phase1 {
                -self.obj1[self.ncols]
            } else {
                -self.obj[self.ncols]
            };
            if cur < last_obj - 1e-12 {
                streak = 0;
            } else {
                streak += 1;
                if streak >= degeneracy_streak {
                    self.bland = true;
                }
            }
            last_obj = cur;
        }
    }

    /// Entering column: most negative reduced cost (Dantzig), or first
    /// negative (Bland). Columns at or beyond `limit` may not enter.
    fn price(&self, phase1: bool, limit: usize) -> Option<usize> {
        let costs: &[f64] = if phase1 { &self.obj1 } else { &self.obj };
        if self.bland {
            (0..limit).find(|&j| costs[j] < -COST_TOL)
        } else {
            let mut best = None;
            let mut best_val = -COST_TOL;
            for (j, &c) in costs.iter().enumerate().take(limit) {
                if c < best_val {
                    best_val = c;
                    best = Some(j);
                }
            }
            best
        }
    }

    /// Leaving row: minimum ratio, ties to the smallest basis variable index.
    fn ratio_test(&self, j: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let a = self.at(i, j);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(i) / a;
            match best {
                None => best = Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br - 1e-12
                        || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi])
                    {
                        best = Some((i, ratio));
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.ncols + 1;
        let pbase = row * width;
        let pivot = self.tab[pbase + col];
        let inv = 1.0 / pivot;
        for j in 0..width {
            self.tab[pbase + j] *= inv;
        }
        self.tab[pbase + col] = 1.0;

        for i in 0..self.m {
            if i == row {
                continue;
            }
            let base = i * width;
            let factor = self.tab[base + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..width {
                self.tab[base + j] -= factor * self.tab[pbase + j];
            }
            self.tab[base + col] = 0.0;
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for j in 0..width {
                self.obj[j] -= factor * self.tab[pbase + j];
            }
            self.obj[col] = 0.0;
        }
        let factor = self.obj1[col];
        if factor != 0.0 {
            for j in 0..width {
                self.obj1[j] -= factor * self.tab[pbase + j];
            }
            self.obj1[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn extract(&self, model: &LpModel, outcome: RunOutcome) -> SolveResult {
        let status = match outcome {
            RunOutcome::Optimal => Status::Optimal,
            RunOutcome::Infeasible => Status::Infeasible,
            RunOutcome::Unbounded => Status::Unbounded,
            RunOutcome::IterationLimit => Status::IterationLimit,
        };
        let stats = SolveStats {
            iterations: self.iterations,
            nodes: 0,
        };
        if status != Status::Optimal {
            return SolveResult {
                status,
                stats,
                ..SolveResult::status_only(status)
            };
        }

        let mut y_std = vec![0.0; self.ncols];
        for i in 0..self.m {
            y_std[self.basis[i]] = self.rhs(i);
        }
        for (j, &d) in self.col_scale.iter().enumerate() {
            y_std[j] *= d;
        }
        let primal: Vec<f64> = self
            .var_maps
            .iter()
            .map(|vm| match *vm {
                VarMap::Shifted { col, lo } => lo + y_std[col],
                VarMap::Mirrored { col, hi } => hi - y_std[col],
                VarMap::Split { pos, neg } => y_std[pos] - y_std[neg],
            })
            .collect();

        // row multipliers from the reduced costs of each row's probe column,
        // mapped back through scaling and objective sign
        let mut dual = Vec::with_capacity(self.num_user_rows);
        for i in 0..self.num_user_rows {
            let (col, sign) = self.dual_probe[i];
            let y_min = sign * self.obj[col];
            dual.push(self.obj_sign * self.row_scale[i] * y_min);
        }

        let objective = model.objective_at(&primal);
        SolveResult {
            status,
            primal,
            dual,
            objective,
            stats,
        }
    }
}

enum PhaseEnd {
    Converged,
    Unbounded,
    IterationLimit,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{check_kkt, LinRow};

    fn lp(sense: Sense, n: usize) -> LpModel {
        LpModel::new(sense, n)
    }

    #[test]
    fn single_constraint_mdp_lp() {
        // max v s.t. v <= 1 + 0.9 v  ->  v = 10
        let mut m = lp(Sense::Maximize, 1);
        m.objective = vec![1.0];
        m.rows.push(LinRow::new(vec![0.1], Relation::Le, 1.0));
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - 10.0).abs() < 1e-9);
        assert!((r.primal[0] - 10.0).abs() < 1e-9);
        // occupancy of the self-loop: dual * rhs must equal the objective
        assert!((r.dual[0] * 1.0 - 10.0).abs() < 1e-8);
    }

    #[test]
    fn equality_fixes_variable() {
        // min 0 s.t. x = 1
        let mut m = lp(Sense::Minimize, 1);
        m.rows.push(LinRow::new(vec![1.0], Relation::Eq, 1.0));
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!(r.objective.abs() < 1e-12);
        assert!((r.primal[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut m = lp(Sense::Minimize, 1);
        m.var_bounds = vec![(0.0, 1.0)];
        m.rows.push(LinRow::new(vec![1.0], Relation::Ge, 2.0));
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut m = lp(Sense::Maximize, 1);
        m.objective = vec![1.0];
        m.var_bounds = vec![(0.0, f64::INFINITY)];
        m.rows.push(LinRow::new(vec![-1.0], Relation::Le, 1.0));
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, Status::Unbounded);
    }

    #[test]
    fn respects_two_sided_bounds() {
        // min x + y, 1 <= x <= 3, y in [-2, 5], x + y >= 2
        let mut m = lp(Sense::Minimize, 2);
        m.objective = vec![1.0, 1.0];
        m.var_bounds = vec![(1.0, 3.0), (-2.0, 5.0)];
        m.rows.push(LinRow::new(vec![1.0, 1.0], Relation::Ge, 2.0));
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn free_variables_take_negative_values() {
        // min x s.t. x >= -5 as a row (variable itself free)
        let mut m = lp(Sense::Minimize, 1);
        m.objective = vec![1.0];
        m.rows.push(LinRow::new(vec![1.0], Relation::Ge, -5.0));
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.primal[0] + 5.0).abs() < 1e-9);
    }

    #[test]
    fn kkt_holds_on_classic_lp() {
        // max x + 2y s.t. x + y <= 4, 2x + y >= 2, 0 <= x, 0 <= y <= 3
        let mut m = lp(Sense::Maximize, 2);
        m.objective = vec![1.0, 2.0];
        m.var_bounds = vec![(0.0, f64::INFINITY), (0.0, 3.0)];
        m.rows.push(LinRow::new(vec![1.0, 1.0], Relation::Le, 4.0));
        m.rows.push(LinRow::new(vec![2.0, 1.0], Relation::Ge, 2.0));
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - 7.0).abs() < 1e-9);
        let rep = check_kkt(&m, &r);
        assert!(rep.primal_infeasibility < 1e-7, "{rep:?}");
        assert!(rep.dual_infeasibility < 1e-7, "{rep:?}");
        assert!(rep.complementary_slackness < 1e-7, "{rep:?}");
        assert!(rep.relative_gap < 1e-8, "{rep:?}");
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling-prone example (Beale); Bland's rule must save it
        let mut m = lp(Sense::Minimize, 4);
        m.objective = vec![-0.75, 150.0, -0.02, 6.0];
        m.var_bounds = vec![(0.0, f64::INFINITY); 4];
        m.rows
            .push(LinRow::new(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0));
        m.rows
            .push(LinRow::new(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0));
        m.rows.push(LinRow::new(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0));
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective + 0.05).abs() < 1e-9);
    }
}
