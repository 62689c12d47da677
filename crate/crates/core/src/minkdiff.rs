//! Under-approximating `CZ ⊖ Z` for a constrained zonotope `CZ` and a zonotope `Z`.
//!
//! Step I encloses `Z` in `CZ_s = ⟨G diag(σ̄), c', A diag(σ̄), 0⟩`, a copy of the
//! minuend's own template scaled by `σ̄ ∈ [0,1]^N`, by solving
//!
//! ```text
//! min ‖|Γ|1‖₁   s.t.  [G; A] Γ = [G'; 0],  |Γ|1 ≤ 1,     σ̄ = |Γ|1.
//! ```
//!
//! Step II returns `CZ_d = ⟨G diag(1-σ̄), c - c', A diag(1-σ̄), b⟩ ⊆ CZ ⊖ CZ_s ⊆ CZ ⊖ Z`.
//!
//! The objective is separable across the columns of `Γ`, so the LP is solved
//! column by column; only when the per-column optima violate the shared row
//! budget `|Γ|1 ≤ 1` is the coupled program assembled.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, scale_columns};
use crate::lp::{LinearProgram, LpStatus, FEAS_TOL};
use crate::sets::{ConstrainedZonotope, HPolytope, Zonotope};

/// Subtrahend generators shorter than this are treated as zero.
pub const TINY_GENERATOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinOutSolution {
    #[serde(with = "linalg::serde_vec")]
    pub sigma_bar: DVector<f64>,
    #[serde(with = "linalg::serde_mat")]
    pub gamma: DMatrix<f64>,
    #[serde(with = "linalg::serde_vec")]
    pub c_s: DVector<f64>,
    #[serde(with = "linalg::serde_vec")]
    pub b_s: DVector<f64>,
    pub lp_iterations: usize,
}

impl MinOutSolution {
    pub fn objective(&self) -> f64 {
        self.sigma_bar.sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffResult {
    /// `CZ_d`, the under-approximation of the difference.
    pub difference: ConstrainedZonotope,
    pub shrink: MinOutSolution,
    /// `CZ_s`, the template-shaped enclosure of the subtrahend.
    pub enclosing: ConstrainedZonotope,
    pub exactness_certificate: bool,
}

/// Options for Step I.
#[derive(Clone, Debug, Default)]
pub struct MinOutOptions {
    /// Positive weights on the entries of `σ̄`; all ones when `None`.
    pub weights: Option<DVector<f64>>,
}

fn check_dims(minuend: &ConstrainedZonotope, subtrahend: &Zonotope) -> Result<()> {
    if minuend.dim() != subtrahend.dim() {
        return Err(Error::dim(format!(
            "minuend lives in dimension {}, subtrahend in {}",
            minuend.dim(),
            subtrahend.dim()
        )));
    }
    Ok(())
}

fn weights_for(opts: &MinOutOptions, n: usize) -> Result<DVector<f64>> {
    match &opts.weights {
        None => Ok(DVector::from_element(n, 1.0)),
        Some(w) if w.len() == n && w.iter().all(|v| *v > 0.0 && v.is_finite()) => Ok(w.clone()),
        Some(w) => Err(Error::InvalidInput(format!(
            "objective weights must be {n} positive numbers, got {} entries",
            w.len()
        ))),
    }
}

/// Column LP: `min wᵀ(γ⁺+γ⁻)` s.t. `[G;A](γ⁺-γ⁻) = [g'; 0]`, `γ± ∈ [0,1]`.
fn column_lp(stacked: &DMatrix<f64>, rhs: &DVector<f64>, w: &DVector<f64>) -> LinearProgram {
    let n = stacked.ncols();
    let mut lp = LinearProgram::new(2 * n);
    lp.objective = linalg::vcat_vec(w, w);
    lp.a_eq = linalg::hcat(stacked, &(-stacked));
    lp.b_eq = rhs.clone();
    lp.lower = DVector::zeros(2 * n);
    lp.upper = DVector::from_element(2 * n, 1.0);
    lp
}

/// Coupled Step-I program, optionally carrying a parameter `θ` with
/// `|θ| ≤ 1 - |Γ|1` and `Aθ = b` so that the resulting `CZ_d` is nonempty.
///
/// Variable layout: `[γ⁺_1, γ⁻_1, ..., γ⁺_{N'}, γ⁻_{N'}, θ]`.
fn coupled_lp(
    minuend: &ConstrainedZonotope,
    g_sub: &DMatrix<f64>,
    w: &DVector<f64>,
    with_theta: bool,
) -> LinearProgram {
    let n_gen = minuend.num_generators();
    let n = minuend.dim();
    let m = minuend.num_constraints();
    let k = g_sub.ncols();
    let rows = n + m;
    let stacked = linalg::vcat(minuend.g(), minuend.a());
    let n_theta = if with_theta { n_gen } else { 0 };
    let vars = 2 * n_gen * k + n_theta;

    let mut lp = LinearProgram::new(vars);
    let mut a_eq = DMatrix::zeros(rows * k + if with_theta { m } else { 0 }, vars);
    let mut b_eq = DVector::zeros(a_eq.nrows());
    for col in 0..k {
        let off = 2 * n_gen * col;
        for r in 0..rows {
            for j in 0..n_gen {
                a_eq[(rows * col + r, off + j)] = stacked[(r, j)];
                a_eq[(rows * col + r, off + n_gen + j)] = -stacked[(r, j)];
            }
            b_eq[rows * col + r] = if r < n { g_sub[(r, col)] } else { 0.0 };
        }
        for j in 0..n_gen {
            lp.objective[off + j] = w[j];
            lp.objective[off + n_gen + j] = w[j];
        }
    }
    let theta0 = 2 * n_gen * k;
    if with_theta {
        for r in 0..m {
            for j in 0..n_gen {
                a_eq[(rows * k + r, theta0 + j)] = minuend.a()[(r, j)];
            }
            b_eq[rows * k + r] = minuend.b()[r];
        }
    }
    // Row budget: Σ_k (γ⁺_ik + γ⁻_ik) ± θ_i ≤ 1.
    let n_budget = if with_theta { 2 * n_gen } else { n_gen };
    let mut a_in = DMatrix::zeros(n_budget, vars);
    for i in 0..n_gen {
        for col in 0..k {
            let off = 2 * n_gen * col;
            a_in[(i, off + i)] = 1.0;
            a_in[(i, off + n_gen + i)] = 1.0;
            if with_theta {
                a_in[(n_gen + i, off + i)] = 1.0;
                a_in[(n_gen + i, off + n_gen + i)] = 1.0;
            }
        }
        if with_theta {
            a_in[(i, theta0 + i)] = 1.0;
            a_in[(n_gen + i, theta0 + i)] = -1.0;
        }
    }
    lp.a_eq = a_eq;
    lp.b_eq = b_eq;
    lp.a_in = a_in;
    lp.b_in = DVector::from_element(n_budget, 1.0);
    lp.lower = DVector::zeros(vars);
    lp.upper = DVector::from_element(vars, 1.0);
    for j in theta0..vars {
        lp.lower[j] = -1.0;
    }
    lp
}

fn gamma_from_coupled(x: &DVector<f64>, n_gen: usize, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n_gen, k, |i, col| {
        let off = 2 * n_gen * col;
        x[off + i] - x[off + n_gen + i]
    })
}

fn finish(gamma: DMatrix<f64>, c_prime: &DVector<f64>, m: usize, iterations: usize) -> MinOutSolution {
    let sigma_bar = linalg::abs_row_sums(&gamma).map(|s| s.clamp(0.0, 1.0));
    MinOutSolution {
        sigma_bar,
        gamma,
        c_s: c_prime.clone(),
        b_s: DVector::zeros(m),
        lp_iterations: iterations,
    }
}

/// Step I with all-ones weights.
pub fn min_out_simple(minuend: &ConstrainedZonotope, subtrahend: &Zonotope) -> Result<MinOutSolution> {
    min_out_simple_with(minuend, subtrahend, &MinOutOptions::default())
}

/// Step I. Errors with [`Error::NoEnclosure`] when the program is infeasible.
pub fn min_out_simple_with(
    minuend: &ConstrainedZonotope,
    subtrahend: &Zonotope,
    opts: &MinOutOptions,
) -> Result<MinOutSolution> {
    check_dims(minuend, subtrahend)?;
    let n_gen = minuend.num_generators();
    let n = minuend.dim();
    let m = minuend.num_constraints();
    let w = weights_for(opts, n_gen)?;
    let k = subtrahend.num_generators();
    let stacked = linalg::vcat(minuend.g(), minuend.a());

    let mut gamma = DMatrix::zeros(n_gen, k);
    let mut iterations = 0;
    for col in 0..k {
        let g = subtrahend.g().column(col);
        if g.norm() < TINY_GENERATOR {
            continue;
        }
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&g);
        let sol = column_lp(&stacked, &rhs, &w).solve()?;
        iterations += sol.iterations;
        match sol.status {
            LpStatus::Optimal => {
                let x = sol.x.expect("optimal");
                for i in 0..n_gen {
                    gamma[(i, col)] = x[i] - x[n_gen + i];
                }
            }
            _ => return Err(Error::NoEnclosure),
        }
    }

    let budget_ok = linalg::abs_row_sums(&gamma).iter().all(|s| *s <= 1.0 + FEAS_TOL);
    if !budget_ok {
        let tiny: Vec<usize> = (0..k)
            .filter(|&c| subtrahend.g().column(c).norm() >= TINY_GENERATOR)
            .collect();
        let g_sub = subtrahend.g().select_columns(&tiny);
        let sol = coupled_lp(minuend, &g_sub, &w, false).solve()?;
        iterations += sol.iterations;
        if sol.status != LpStatus::Optimal {
            return Err(Error::NoEnclosure);
        }
        let reduced = gamma_from_coupled(&sol.x.expect("optimal"), n_gen, tiny.len());
        gamma = DMatrix::zeros(n_gen, k);
        for (r, &c) in tiny.iter().enumerate() {
            gamma.set_column(c, &reduced.column(r));
        }
    }
    Ok(finish(gamma, subtrahend.c(), m, iterations))
}

/// Step II: builds `CZ_d` and `CZ_s` from a Step-I solution. Never fails; the
/// difference may be empty.
pub fn step_two(minuend: &ConstrainedZonotope, sol: &MinOutSolution) -> Result<DiffResult> {
    if sol.sigma_bar.len() != minuend.num_generators() || sol.c_s.len() != minuend.dim() {
        return Err(Error::dim("Step-I solution does not match the minuend"));
    }
    let keep = sol.sigma_bar.map(|s| 1.0 - s);
    let difference = ConstrainedZonotope::new(
        scale_columns(minuend.g(), &keep),
        minuend.c() - &sol.c_s,
        scale_columns(minuend.a(), &keep),
        minuend.b().clone(),
    )?;
    let enclosing = ConstrainedZonotope::new(
        scale_columns(minuend.g(), &sol.sigma_bar),
        sol.c_s.clone(),
        scale_columns(minuend.a(), &sol.sigma_bar),
        DVector::zeros(minuend.num_constraints()),
    )?;
    Ok(DiffResult {
        difference,
        shrink: sol.clone(),
        enclosing,
        exactness_certificate: false,
    })
}

/// Both steps. With `ensure_nonempty`, Step I also requires the resulting
/// difference to be nonempty whenever some feasible `Γ` allows it; when none
/// does, the plain Step-I result is returned (its difference is then empty).
pub fn minkdiff_two_step(
    minuend: &ConstrainedZonotope,
    subtrahend: &Zonotope,
    ensure_nonempty: bool,
) -> Result<DiffResult> {
    minkdiff_two_step_with(minuend, subtrahend, ensure_nonempty, &MinOutOptions::default())
}

pub fn minkdiff_two_step_with(
    minuend: &ConstrainedZonotope,
    subtrahend: &Zonotope,
    ensure_nonempty: bool,
    opts: &MinOutOptions,
) -> Result<DiffResult> {
    let sol = min_out_simple_with(minuend, subtrahend, opts)?;
    let result = step_two(minuend, &sol)?;
    if !ensure_nonempty || minuend.num_constraints() == 0 || !result.difference.is_empty()? {
        return Ok(result);
    }
    // The unconstrained optimum leaves nothing behind; search among all
    // feasible Γ for one that keeps a parameter alive.
    let n_gen = minuend.num_generators();
    let w = weights_for(opts, n_gen)?;
    let live: Vec<usize> = (0..subtrahend.num_generators())
        .filter(|&c| subtrahend.g().column(c).norm() >= TINY_GENERATOR)
        .collect();
    let g_sub = subtrahend.g().select_columns(&live);
    let lp = coupled_lp(minuend, &g_sub, &w, true);
    let full = lp.solve()?;
    if full.status != LpStatus::Optimal {
        return Ok(result);
    }
    let reduced = gamma_from_coupled(&full.x.expect("optimal"), n_gen, live.len());
    let mut gamma = DMatrix::zeros(n_gen, subtrahend.num_generators());
    for (r, &c) in live.iter().enumerate() {
        gamma.set_column(c, &reduced.column(r));
    }
    let sol = finish(
        gamma,
        subtrahend.c(),
        minuend.num_constraints(),
        sol.lp_iterations + full.iterations,
    );
    step_two(minuend, &sol)
}

/// Exact difference of an H-polytope and a zonotope: every offset `a_i`
/// shrinks by the subtrahend's support value `h_iᵀc' + ‖h_iᵀG'‖₁`.
pub fn exact_hrep_diff(minuend: &HPolytope, subtrahend: &Zonotope) -> Result<HPolytope> {
    if minuend.dim() != subtrahend.dim() {
        return Err(Error::dim("H-polytope and zonotope dimensions differ"));
    }
    let a = DVector::from_fn(minuend.num_halfspaces(), |i, _| {
        minuend.a()[i] - subtrahend.support(&minuend.row(i))
    });
    HPolytope::new(minuend.h().clone(), a)
}

/// Radius of the smallest cube centred at `c` containing `bounds`, with a 10% margin.
fn enclosing_radius(bounds: &crate::sets::Hyperbox, c: &DVector<f64>) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..c.len() {
        r = r.max((bounds.upper()[i] - c[i]).abs()).max((c[i] - bounds.lower()[i]).abs());
    }
    (1.1 * r).max(1e-9)
}

/// Halfspace-by-halfspace CG-Rep of `P` centred at `c` inside the cube of radius `r`.
fn rich_from_center(p: &HPolytope, c: &DVector<f64>, r: f64) -> Result<ConstrainedZonotope> {
    let n = p.dim();
    let l = p.num_halfspaces();
    let mut g = DMatrix::zeros(n, n + l);
    for i in 0..n {
        g[(i, i)] = r;
    }
    let mut a = DMatrix::zeros(l, n + l);
    let mut b = DVector::zeros(l);
    for i in 0..l {
        let h = p.row(i);
        let hc = h.dot(c);
        let h1 = h.iter().map(|v| v.abs()).sum::<f64>();
        let d = p.a()[i] - hc + r * h1;
        for j in 0..n {
            a[(i, j)] = r * h[j];
        }
        a[(i, n + i)] = d / 2.0;
        b[i] = (p.a()[i] - hc - r * h1) / 2.0;
    }
    ConstrainedZonotope::new(g, c.clone(), a, b)
}

/// Bounded, zero-row-free copy of `P` plus its bounding box.
fn prepare(p: &HPolytope) -> Result<(HPolytope, crate::sets::Hyperbox)> {
    let p = p.without_zero_rows()?;
    let bounds = p
        .bounding_box()?
        .ok_or_else(|| Error::EmptySet("minuend H-polytope is empty".into()))?;
    Ok((p, bounds))
}

/// The rich CG-Rep of `P` relative to the subtrahend `Z`, for which the
/// two-step method is exact. Requires `P` bounded and `P ⊖ Z` nonempty.
pub fn rich_cgrep(p: &HPolytope, z: &Zonotope) -> Result<ConstrainedZonotope> {
    if p.dim() != z.dim() {
        return Err(Error::dim("H-polytope and zonotope dimensions differ"));
    }
    let (p, bounds) = prepare(p)?;
    let diff = exact_hrep_diff(&p, z)?;
    let (center, _) = diff
        .chebyshev_center()?
        .ok_or_else(|| Error::EmptySet("the exact difference is empty".into()))?;
    let c = center + z.c();
    let r = enclosing_radius(&bounds, &c);
    rich_from_center(&p, &c, r)
}

/// Two-step difference on the rich CG-Rep. `Ok(None)` is the empty verdict.
///
/// When `P ⊖ Z` is empty no admissible centre exists; the representation is
/// then centred at an interior point of `P` and the verdict comes from the
/// two-step result itself (infeasible Step I or empty `CZ_d`).
pub fn minkdiff_exact_via_rich(p: &HPolytope, z: &Zonotope) -> Result<Option<DiffResult>> {
    if p.dim() != z.dim() {
        return Err(Error::dim("H-polytope and zonotope dimensions differ"));
    }
    let (p, bounds) = prepare(&p.clone())?;
    let diff = exact_hrep_diff(&p, z)?;
    let c = match diff.chebyshev_center()? {
        Some((center, _)) => center + z.c(),
        None => {
            p.chebyshev_center()?
                .ok_or_else(|| Error::EmptySet("minuend H-polytope is empty".into()))?
                .0
        }
    };
    let r = enclosing_radius(&bounds, &c);
    let rich = rich_from_center(&p, &c, r)?;
    let mut result = match minkdiff_two_step(&rich, z, false) {
        Ok(res) => res,
        Err(Error::NoEnclosure) => return Ok(None),
        Err(e) => return Err(e),
    };
    if result.difference.is_empty()? {
        return Ok(None);
    }
    result.exactness_certificate = true;
    Ok(Some(result))
}

/// Adds the redundant cut `hᵀx ≤ a` to the representation of `S` without
/// changing the set. Errors when the cut is not redundant.
pub fn enrich_halfspace(s: &ConstrainedZonotope, h: &DVector<f64>, a: f64) -> Result<ConstrainedZonotope> {
    let support = s.support(h)?;
    if a < support - FEAS_TOL * (1.0 + support.abs()) {
        return Err(Error::NotRedundant { offset: a, support });
    }
    Ok(s.append_halfspace(h, a))
}
