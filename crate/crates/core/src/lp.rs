//! Dense two-phase primal simplex for small-to-moderate linear programs.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    cᵀx
//! subject to  A_eq x  = b_eq
//!             A_in x <= b_in
//!             lower <= x <= upper      (bounds may be infinite)
//! ```
//!
//! Internally every variable is shifted onto `[0, u]` (free variables are
//! split into a positive and a negative part), inequality rows receive a slack
//! column and rows without a usable slack receive an artificial column. Finite
//! upper bounds are handled implicitly by the bounded-variable ratio test, so a
//! box-constrained parameter vector costs no extra rows.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! switches to Bland's smallest-index rule until progress resumes, which rules
//! out cycling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Feasibility tolerance used inside the simplex iterations.
pub const INTERNAL_FEAS_TOL: f64 = 1e-9;
/// Feasibility tolerance guaranteed to callers for optimal solutions.
pub const FEAS_TOL: f64 = 1e-7;
/// Smallest magnitude accepted as a pivot element.
pub const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
// Pivots between two fresh factorizations of the basis.
const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub a_in: DMatrix<f64>,
    pub b_in: DVector<f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point, present iff `status == Optimal`.
    pub x: Option<DVector<f64>>,
    /// Objective value, present iff `status == Optimal`.
    pub objective_value: Option<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn terminal(status: LpStatus, iterations: usize) -> Self {
        LpSolution {
            status,
            x: None,
            objective_value: None,
            iterations,
        }
    }
}

impl LinearProgram {
    /// A program over `n` variables with zero objective, no rows and free bounds.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: DVector::zeros(n),
            a_eq: DMatrix::zeros(0, n),
            b_eq: DVector::zeros(0),
            a_in: DMatrix::zeros(0, n),
            b_in: DVector::zeros(0),
            lower: DVector::from_element(n, f64::NEG_INFINITY),
            upper: DVector::from_element(n, f64::INFINITY),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let check = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::dim(format!("{what}: expected {want}, got {got}")))
            }
        };
        check("A_eq width", self.a_eq.ncols(), n)?;
        check("A_in width", self.a_in.ncols(), n)?;
        check("b_eq height", self.b_eq.len(), self.a_eq.nrows())?;
        check("b_in height", self.b_in.len(), self.a_in.nrows())?;
        check("lower bound length", self.lower.len(), n)?;
        check("upper bound length", self.upper.len(), n)?;
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::InvalidInput(format!(
                    "variable {j} has unusable bounds [{lo}, {hi}]"
                )));
            }
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.a_eq.iter().all(|v| v.is_finite())
            && self.b_eq.iter().all(|v| v.is_finite())
            && self.a_in.iter().all(|v| v.is_finite())
            && self.b_in.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("LP data contains non-finite entries".into()));
        }
        Ok(())
    }

    /// Maximum constraint and bound violation of `x`.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let mut worst = 0.0_f64;
        if self.a_eq.nrows() > 0 {
            let r = &self.a_eq * x - &self.b_eq;
            worst = worst.max(r.amax());
        }
        if self.a_in.nrows() > 0 {
            let r = &self.a_in * x - &self.b_in;
            worst = worst.max(r.max().max(0.0));
        }
        for j in 0..x.len() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution> {
        solve(self)
    }
}

/// How an original variable maps onto internal non-negative columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// x = offset + col
    Shift { col: usize, offset: f64 },
    /// x = offset - col
    Mirror { col: usize, offset: f64 },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
    /// lower == upper
    Fixed(f64),
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows x cols` body, kept equal to B⁻¹ [A | S | R].
    t: Vec<f64>,
    /// Values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    /// Upper bound of every internal column (lower bound is always zero).
    upper: Vec<f64>,
    /// Current value of every column (meaningful for non-basic ones).
    value: Vec<f64>,
    is_basic: Vec<bool>,
    /// Columns that may never enter the basis again.
    frozen: Vec<bool>,
    /// Reduced costs of the current phase.
    d: Vec<f64>,
    /// Costs of the current phase.
    cost: Vec<f64>,
    /// Initial `[A | S | R]` and right-hand side, used to refactor.
    orig: DMatrix<f64>,
    orig_rhs: DVector<f64>,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn set_costs(&mut self, cost: &[f64]) {
        // d_j = c_j - c_Bᵀ B⁻¹ a_j
        self.cost.copy_from_slice(cost);
        self.d.copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.cols..(i + 1) * self.cols];
                for (dj, tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for i in 0..self.rows {
            self.d[self.basis[i]] = 0.0;
        }
    }

    /// Rebuilds body, basic values and reduced costs from the original rows.
    /// Returns false (leaving the tableau alone) if the basis looks singular.
    fn refactor(&mut self) -> bool {
        self.since_refactor = 0;
        let rows = self.rows;
        if rows == 0 {
            return true;
        }
        let mut bmat = DMatrix::zeros(rows, rows);
        for (k, &bj) in self.basis.iter().enumerate() {
            bmat.set_column(k, &self.orig.column(bj));
        }
        let mut r = self.orig_rhs.clone();
        for j in 0..self.cols {
            if !self.is_basic[j] && self.value[j] != 0.0 {
                r.axpy(-self.value[j], &self.orig.column(j), 1.0);
            }
        }
        let lu = bmat.lu();
        let (Some(beta), Some(body)) = (lu.solve(&r), lu.solve(&self.orig)) else {
            return false;
        };
        if !beta.iter().chain(body.iter()).all(|v| v.is_finite()) {
            return false;
        }
        // A refactor is a correction; a large jump means the basis is close to
        // singular and the fresh values are less trustworthy than the old ones.
        let scale = 1.0 + self.beta.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let drift = (0..rows).fold(0.0_f64, |m, i| m.max((beta[i] - self.beta[i]).abs()));
        if drift > 1e-6 * scale {
            return false;
        }
        for i in 0..rows {
            self.beta[i] = beta[i];
            for j in 0..self.cols {
                self.t[i * self.cols + j] = body[(i, j)];
            }
        }
        // Snap the basis columns to exact unit vectors.
        for (k, &bj) in self.basis.iter().enumerate() {
            for i in 0..rows {
                self.t[i * self.cols + bj] = if i == k { 1.0 } else { 0.0 };
            }
        }
        let cost = self.cost.clone();
        self.set_costs(&cost);
        true
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols {
            if self.is_basic[j] || self.frozen[j] || self.upper[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let at_upper = self.upper[j].is_finite() && self.value[j] >= self.upper[j];
            let dir = if !at_upper && dj < -COST_TOL {
                1.0
            } else if at_upper && dj > COST_TOL {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            let score = dj.abs();
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + q];
        {
            let row = &mut self.t[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for chunk in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = chunk[q];
            if f != 0.0 {
                for (v, pv) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                chunk[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, pv) in self.d.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            self.d[q] = 0.0;
        }
    }

    fn run_phase(&mut self) -> Result<PhaseOutcome> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let entering = match self.choose_entering(bland) {
                None if self.since_refactor > 0 && self.refactor() => self.choose_entering(bland),
                e => e,
            };
            let Some((q, dir)) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            self.since_refactor += 1;
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::IterationLimit {
                    iterations: self.iterations,
                });
            }

            // Harris two-pass ratio test. Basic i moves by -dir * t_iq * step.
            // Pass one finds the longest step allowed when every bound is
            // relaxed by the feasibility tolerance; pass two picks, among the
            // rows blocking within that step, the one with the largest pivot.
            let col_max = (0..self.rows).fold(0.0_f64, |m, i| m.max(self.t[i * self.cols + q].abs()));
            let piv_tol = PIVOT_TOL.max(1e-9 * col_max);
            let ratio = |i: usize, relax: f64| -> Option<(f64, bool, f64)> {
                let alpha = dir * self.t[i * self.cols + q];
                let bvar = self.basis[i];
                if alpha > piv_tol {
                    Some(((self.beta[i] + relax).max(0.0) / alpha, false, alpha.abs()))
                } else if alpha < -piv_tol && self.upper[bvar].is_finite() {
                    Some((((self.upper[bvar] - self.beta[i]) + relax).max(0.0) / (-alpha), true, alpha.abs()))
                } else {
                    None
                }
            };
            let mut leave: Option<(usize, bool)> = None;
            let mut step = self.upper[q];
            if bland {
                // Exact ratios, smallest basic index on ties.
                for i in 0..self.rows {
                    let Some((limit, to_upper, _)) = ratio(i, 0.0) else { continue };
                    let better = match leave {
                        _ if limit < step - 1e-12 => true,
                        Some((li, _)) if limit <= step + 1e-12 => self.basis[i] < self.basis[li],
                        None if limit <= step + 1e-12 && step.is_finite() => true,
                        _ => false,
                    };
                    if better {
                        step = limit;
                        leave = Some((i, to_upper));
                    }
                }
            } else {
                let mut bound = f64::INFINITY;
                for i in 0..self.rows {
                    if let Some((limit, _, _)) = ratio(i, INTERNAL_FEAS_TOL) {
                        bound = bound.min(limit);
                    }
                }
                let mut best_mag = 0.0;
                let mut best_limit = f64::INFINITY;
                if bound.is_finite() {
                    for i in 0..self.rows {
                        let Some((limit, to_upper, mag)) = ratio(i, 0.0) else { continue };
                        if limit <= bound && mag > best_mag {
                            best_mag = mag;
                            best_limit = limit;
                            leave = Some((i, to_upper));
                        }
                    }
                }
                // A bound flip wins only when strictly shorter; otherwise pivot
                // (this drives artificials out of the basis in phase one).
                if leave.is_some() && self.upper[q] < best_limit {
                    leave = None;
                } else if leave.is_some() {
                    step = best_limit;
                }
            }

            if !step.is_finite() {
                return Ok(PhaseOutcome::Unbounded);
            }
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            for i in 0..self.rows {
                let alpha = dir * self.t[i * self.cols + q];
                if alpha != 0.0 {
                    self.beta[i] -= alpha * step;
                }
            }
            let entering_value = self.value[q] + dir * step;

            match leave {
                None => {
                    // Bound flip.
                    self.value[q] = if dir > 0.0 { self.upper[q] } else { 0.0 };
                }
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    self.value[out] = if to_upper { self.upper[out] } else { 0.0 };
                    self.is_basic[out] = false;
                    self.pivot(r, q);
                    self.basis[r] = q;
                    self.is_basic[q] = true;
                    self.beta[r] = entering_value;
                    self.value[q] = entering_value;
                }
            }
        }
    }
}

/// Solves `lp` with the two-phase bounded-variable simplex method.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Column layout for the structural variables.
    let mut maps = Vec::with_capacity(n);
    let mut col_upper: Vec<f64> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo > hi + INTERNAL_FEAS_TOL {
            return Ok(LpSolution::terminal(LpStatus::Infeasible, 0));
        }
        let m = if lo.is_finite() && hi.is_finite() && hi - lo <= 0.0 {
            VarMap::Fixed(lo)
        } else if lo.is_finite() {
            col_upper.push(hi - lo);
            VarMap::Shift {
                col: col_upper.len() - 1,
                offset: lo,
            }
        } else if hi.is_finite() {
            col_upper.push(f64::INFINITY);
            VarMap::Mirror {
                col: col_upper.len() - 1,
                offset: hi,
            }
        } else {
            col_upper.push(f64::INFINITY);
            col_upper.push(f64::INFINITY);
            VarMap::Split {
                pos: col_upper.len() - 2,
                neg: col_upper.len() - 1,
            }
        };
        maps.push(m);
    }
    let n_struct = col_upper.len();

    // Internal cost vector; constant terms are dropped.
    let mut cost = vec![0.0; n_struct];
    for (j, m) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *m {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Mirror { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
            VarMap::Fixed(_) => {}
        }
    }

    // Rows: equalities first, then inequalities.
    let m_eq = lp.a_eq.nrows();
    let m_in = lp.a_in.nrows();
    let rows = m_eq + m_in;
    let mut body = vec![0.0; rows * n_struct];
    let mut rhs = vec![0.0; rows];
    let fill_row = |r: usize, coeffs: &dyn Fn(usize) -> f64, b: f64, body: &mut [f64]| {
        let mut b = b;
        for (j, m) in maps.iter().enumerate() {
            let a = coeffs(j);
            if a == 0.0 {
                continue;
            }
            match *m {
                VarMap::Shift { col, offset } => {
                    body[r * n_struct + col] += a;
                    b -= a * offset;
                }
                VarMap::Mirror { col, offset } => {
                    body[r * n_struct + col] -= a;
                    b -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    body[r * n_struct + pos] += a;
                    body[r * n_struct + neg] -= a;
                }
                VarMap::Fixed(v) => b -= a * v,
            }
        }
        b
    };
    for i in 0..m_eq {
        rhs[i] = fill_row(i, &|j| lp.a_eq[(i, j)], lp.b_eq[i], &mut body);
    }
    for i in 0..m_in {
        rhs[m_eq + i] = fill_row(m_eq + i, &|j| lp.a_in[(i, j)], lp.b_in[i], &mut body);
    }

    // Equilibrate rows; the solution is unchanged.
    for i in 0..rows {
        let m = body[i * n_struct..(i + 1) * n_struct]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if m > 0.0 && (m > 2.0 || m < 0.5) {
            let inv = 1.0 / m;
            for v in &mut body[i * n_struct..(i + 1) * n_struct] {
                *v *= inv;
            }
            rhs[i] *= inv;
        }
    }

    // Slack per inequality row; artificial where no +1 slack is available.
    let n_slack = m_in;
    let mut needs_art = vec![false; rows];
    let mut sign = vec![1.0; rows];
    for i in 0..rows {
        if rhs[i] < 0.0 {
            sign[i] = -1.0;
        }
        needs_art[i] = i < m_eq || sign[i] < 0.0;
    }
    let n_art = needs_art.iter().filter(|&&v| v).count();
    let cols = n_struct + n_slack + n_art;

    let mut t = vec![0.0; rows * cols];
    let mut basis = vec![0usize; rows];
    let mut upper = col_upper.clone();
    upper.extend(std::iter::repeat(f64::INFINITY).take(n_slack + n_art));
    let mut art_index = n_struct + n_slack;
    let mut beta = vec![0.0; rows];
    for i in 0..rows {
        let s = sign[i];
        for j in 0..n_struct {
            t[i * cols + j] = s * body[i * n_struct + j];
        }
        if i >= m_eq {
            t[i * cols + n_struct + (i - m_eq)] = s;
        }
        beta[i] = s * rhs[i];
        if needs_art[i] {
            t[i * cols + art_index] = 1.0;
            basis[i] = art_index;
            art_index += 1;
        } else {
            basis[i] = n_struct + (i - m_eq);
        }
    }
    let mut is_basic = vec![false; cols];
    for &b in &basis {
        is_basic[b] = true;
    }
    let orig = DMatrix::from_row_slice(rows, cols, &t);
    let orig_rhs = DVector::from_column_slice(&beta);
    let mut tab = Tableau {
        rows,
        cols,
        t,
        beta,
        basis,
        upper,
        value: vec![0.0; cols],
        is_basic,
        frozen: vec![false; cols],
        d: vec![0.0; cols],
        cost: vec![0.0; cols],
        orig,
        orig_rhs,
        since_refactor: 0,
        iterations: 0,
        max_iterations: 50 * (rows + cols).max(1),
    };
    let art_start = n_struct + n_slack;
    let rhs_scale = 1.0 + tab.beta.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        tab.set_costs(&phase1);
        match tab.run_phase()? {
            PhaseOutcome::Optimal => {}
            // Cannot happen for a bounded-below objective; treat defensively.
            PhaseOutcome::Unbounded => {
                return Err(Error::Numerical("phase one reported unboundedness".into()))
            }
        }
        let infeas: f64 = (0..rows)
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.beta[i].max(0.0))
            .sum();
        if infeas > FEAS_TOL * rhs_scale {
            return Ok(LpSolution::terminal(LpStatus::Infeasible, tab.iterations));
        }
        for j in art_start..cols {
            tab.upper[j] = 0.0;
            tab.frozen[j] = true;
            tab.value[j] = 0.0;
        }
        for i in 0..rows {
            if tab.basis[i] >= art_start {
                tab.beta[i] = 0.0;
            }
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n_struct].copy_from_slice(&cost);
    tab.set_costs(&phase2);
    if let PhaseOutcome::Unbounded = tab.run_phase()? {
        return Ok(LpSolution::terminal(LpStatus::Unbounded, tab.iterations));
    }

    // Internal column values.
    let mut val = tab.value.clone();
    for i in 0..rows {
        val[tab.basis[i]] = tab.beta[i];
    }
    polish_basic_values(&tab, &body, &rhs, n_struct, m_eq, &mut val);

    let mut x = DVector::zeros(n);
    for (j, m) in maps.iter().enumerate() {
        x[j] = match *m {
            VarMap::Shift { col, offset } => offset + val[col],
            VarMap::Mirror { col, offset } => offset - val[col],
            VarMap::Split { pos, neg } => val[pos] - val[neg],
            VarMap::Fixed(v) => v,
        };
    }
    // Clamp tiny bound excursions left by round-off.
    for j in 0..n {
        if x[j] < lp.lower[j] {
            x[j] = lp.lower[j];
        }
        if x[j] > lp.upper[j] {
            x[j] = lp.upper[j];
        }
    }
    // Last line of defence against a numerically broken basis.
    let data_scale = 1.0
        + lp.b_eq.iter().chain(lp.b_in.iter()).fold(0.0_f64, |m, v| m.max(v.abs()))
        + x.amax();
    let viol = lp.max_violation(&x);
    if viol > 1e-6 * data_scale {
        return Err(Error::Numerical(format!(
            "simplex returned a point violating the constraints by {viol:e}"
        )));
    }
    let objective_value = lp.objective.dot(&x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x: Some(x),
        objective_value: Some(objective_value),
        iterations: tab.iterations,
    })
}

/// Recomputes the basic values from the original rows to remove the drift
/// accumulated by repeated tableau updates.
fn polish_basic_values(
    tab: &Tableau,
    body: &[f64],
    rhs: &[f64],
    n_struct: usize,
    m_eq: usize,
    val: &mut [f64],
) {
    let rows = tab.rows;
    if rows == 0 {
        return;
    }
    let n_slack_start = n_struct;
    let art_start = n_struct + (rows - m_eq);
    // Original (unsigned) column of the internal variable `j` in row `i`.
    let coeff = |i: usize, j: usize| -> f64 {
        if j < n_struct {
            body[i * n_struct + j]
        } else if j < art_start {
            if i >= m_eq && j - n_slack_start == i - m_eq {
                1.0
            } else {
                0.0
            }
        } else {
            0.0
        }
    };
    // Artificial columns are fixed at zero in the final basis; their rows are
    // solved with a unit column so the system stays square.
    let mut bmat = DMatrix::zeros(rows, rows);
    let mut r = DVector::from_column_slice(rhs);
    for (k, &bj) in tab.basis.iter().enumerate() {
        if bj >= art_start {
            // Locate the row this artificial belongs to via the tableau's
            // identity structure: fall back to keeping values as they are.
            return;
        }
        for i in 0..rows {
            bmat[(i, k)] = coeff(i, bj);
        }
    }
    for j in 0..tab.cols {
        if tab.is_basic[j] || val[j] == 0.0 {
            continue;
        }
        for i in 0..rows {
            let a = coeff(i, j);
            if a != 0.0 {
                r[i] -= a * val[j];
            }
        }
    }
    let lu = bmat.lu();
    if let Some(sol) = lu.solve(&r) {
        let mut max_change = 0.0_f64;
        for (k, &bj) in tab.basis.iter().enumerate() {
            max_change = max_change.max((sol[k] - val[bj]).abs());
        }
        // Only accept a polish that is a correction, not a different point.
        if max_change.is_finite() && max_change < 1e-6 {
            for (k, &bj) in tab.basis.iter().enumerate() {
                val[bj] = sol[k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp1(c: f64) -> LinearProgram {
        let mut lp = LinearProgram::new(1);
        lp.objective[0] = c;
        lp
    }

    #[test]
    fn active_lower_bound() {
        let mut lp = lp1(1.0);
        lp.lower[0] = 3.0;
        lp.upper[0] = 10.0;
        let s = lp.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x.unwrap()[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_equalities() {
        let mut lp = lp1(0.0);
        lp.a_eq = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        lp.b_eq = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn simplex_corner() {
        // Vertices of {x + y <= 1, x, y >= 0}: (0,0), (1,0), (0,1); -x-y is -1 on the last two.
        let mut lp = LinearProgram::new(2);
        lp.objective = DVector::from_vec(vec![-1.0, -1.0]);
        lp.a_in = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        lp.b_in = DVector::from_vec(vec![1.0]);
        lp.lower = DVector::zeros(2);
        let s = lp.solve().unwrap();
        assert!((s.objective_value.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = lp1(-1.0);
        lp.lower[0] = 0.0;
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_split() {
        // min |x - 2| written as min t s.t. x - t <= 2, -x - t <= -2, x free.
        let mut lp = LinearProgram::new(2);
        lp.objective = DVector::from_vec(vec![0.0, 1.0]);
        lp.a_in = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, -1.0]);
        lp.b_in = DVector::from_vec(vec![2.0, -2.0]);
        let s = lp.solve().unwrap();
        let x = s.x.unwrap();
        assert!((x[0] - 2.0).abs() < 1e-9);
        assert!(x[1].abs() < 1e-9);
    }

    #[test]
    fn upper_bounded_only() {
        let mut lp = lp1(-1.0);
        lp.upper[0] = 4.0;
        let s = lp.solve().unwrap();
        assert!((s.x.unwrap()[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_variable_and_bound_flip() {
        let mut lp = LinearProgram::new(3);
        lp.objective = DVector::from_vec(vec![-1.0, -2.0, 1.0]);
        lp.lower = DVector::from_vec(vec![0.0, 0.0, 1.5]);
        lp.upper = DVector::from_vec(vec![1.0, 1.0, 1.5]);
        lp.a_in = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        lp.b_in = DVector::from_vec(vec![5.0]);
        let s = lp.solve().unwrap();
        assert!((s.objective_value.unwrap() - (-3.0 + 1.5)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut lp = LinearProgram::new(2);
        lp.a_eq = DMatrix::zeros(1, 3);
        lp.b_eq = DVector::zeros(1);
        assert!(matches!(lp.solve(), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn deterministic() {
        let mut lp = LinearProgram::new(3);
        lp.objective = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        lp.a_eq = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        lp.b_eq = DVector::from_vec(vec![1.0]);
        lp.lower = DVector::from_element(3, -1.0);
        lp.upper = DVector::from_element(3, 1.0);
        let a = lp.solve().unwrap().x.unwrap();
        let b = lp.solve().unwrap().x.unwrap();
        assert_eq!(a, b);
    }
}
