//! Independent reference computations: grid differences, the unsimplified
//! enclosure LP, and one-step control certificates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::brs::subtract;
use crate::dynamics::Linearization;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus};
use crate::sets::{ConstrainedZonotope, Hyperbox, Zonotope};
use crate::validation::polygon::polygon_2d;

/// Slack for grid membership against an exact polygon.
pub const GRID_TOL: f64 = 1e-9;

/// `resolution × resolution` points spanning the box, boundary included.
pub fn grid_2d(bx: &Hyperbox, resolution: usize) -> Vec<DVector<f64>> {
    let step = |i: usize, k: usize| {
        if resolution < 2 {
            0.5 * (bx.lower()[k] + bx.upper()[k])
        } else {
            bx.lower()[k] + (bx.upper()[k] - bx.lower()[k]) * i as f64 / (resolution - 1) as f64
        }
    };
    let mut pts = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            pts.push(DVector::from_vec(vec![step(i, 0), step(j, 1)]));
        }
    }
    pts
}

/// Vertices (all sign patterns) plus 100 random members of a zonotope.
pub fn zonotope_probe_points(z: &Zonotope) -> Result<Vec<DVector<f64>>> {
    let k = z.num_generators();
    if k > 16 {
        return Err(Error::InvalidInput(format!("{k} generators are too many to enumerate sign patterns")));
    }
    let mut pts = Vec::with_capacity((1 << k) + 100);
    for mask in 0..(1usize << k) {
        let s = DVector::from_fn(k, |i, _| if mask >> i & 1 == 1 { 1.0 } else { -1.0 });
        pts.push(z.g() * s + z.c());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xb7);
    for _ in 0..100 {
        let s = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..=1.0));
        pts.push(z.g() * s + z.c());
    }
    Ok(pts)
}

/// Grid points `x` of the minuend's interval closure with `x + v` inside the
/// minuend for every probe `v`.
pub fn brute_force_diff_2d_points(
    minuend: &ConstrainedZonotope,
    probes: &[DVector<f64>],
    resolution: usize,
) -> Result<Vec<DVector<f64>>> {
    if minuend.dim() != 2 || probes.iter().any(|p| p.len() != 2) {
        return Err(Error::dim("the grid difference oracle is planar only"));
    }
    let poly = polygon_2d(minuend)?;
    Ok(grid_2d(&minuend.interval_closure()?, resolution)
        .into_iter()
        .filter(|x| probes.iter().all(|v| poly.contains(&(x + v), GRID_TOL)))
        .collect())
}

/// Grid approximation of `minuend ⊖ subtrahend` (planar).
pub fn brute_force_diff_2d(minuend: &ConstrainedZonotope, subtrahend: &Zonotope, resolution: usize) -> Result<Vec<DVector<f64>>> {
    if subtrahend.dim() != 2 {
        return Err(Error::dim("the grid difference oracle is planar only"));
    }
    brute_force_diff_2d_points(minuend, &zonotope_probe_points(subtrahend)?, resolution)
}

/// Optimal `‖σ̄‖₁` of the enclosure program with free `c_s`, `b_s`, `β` and
/// explicit Farkas multipliers `Λ ≥ 0`:
///
/// ```text
/// G Γ = G',  G β = c_s − c',  Λ [I; −I] = M Γ,  Λ 1 ≤ [b_s; −b_s; σ̄; σ̄] + M β,
/// M = [A; −A; I; −I],  0 ≤ σ̄ ≤ 1.
/// ```
///
/// `None` when infeasible.
pub fn full_min_out_objective(minuend: &ConstrainedZonotope, subtrahend: &Zonotope) -> Result<Option<f64>> {
    if minuend.dim() != subtrahend.dim() {
        return Err(Error::dim("minuend and subtrahend dimensions differ"));
    }
    let (g, a) = (minuend.g(), minuend.a());
    let (n, nn, m) = (minuend.dim(), minuend.num_generators(), minuend.num_constraints());
    let k = subtrahend.num_generators();
    let r = 2 * m + 2 * nn;
    let mut mm = DMatrix::zeros(r, nn);
    mm.view_mut((0, 0), (m, nn)).copy_from(a);
    mm.view_mut((m, 0), (m, nn)).copy_from(&-a);
    mm.view_mut((2 * m, 0), (nn, nn)).fill_with_identity();
    mm.view_mut((2 * m + nn, 0), (nn, nn)).copy_from(&-DMatrix::<f64>::identity(nn, nn));

    let sig = 0;
    let cs = sig + nn;
    let bs = cs + n;
    let gam = bs + m;
    let beta = gam + nn * k;
    let lam = beta + nn;
    let vars = lam + r * 2 * k;
    let gi = |l: usize, j: usize| gam + j * nn + l;
    let li = |row: usize, col: usize| lam + col * r + row;

    let n_eq = n * k + n + r * k;
    let mut a_eq = DMatrix::zeros(n_eq, vars);
    let mut b_eq = DVector::zeros(n_eq);
    let mut row = 0;
    for i in 0..n {
        for j in 0..k {
            for l in 0..nn {
                a_eq[(row, gi(l, j))] = g[(i, l)];
            }
            b_eq[row] = subtrahend.g()[(i, j)];
            row += 1;
        }
    }
    for i in 0..n {
        for l in 0..nn {
            a_eq[(row, beta + l)] = g[(i, l)];
        }
        a_eq[(row, cs + i)] = -1.0;
        b_eq[row] = -subtrahend.c()[i];
        row += 1;
    }
    for q in 0..r {
        for j in 0..k {
            a_eq[(row, li(q, j))] = 1.0;
            a_eq[(row, li(q, k + j))] = -1.0;
            for l in 0..nn {
                a_eq[(row, gi(l, j))] -= mm[(q, l)];
            }
            row += 1;
        }
    }
    let mut a_in = DMatrix::zeros(r, vars);
    for q in 0..r {
        for col in 0..2 * k {
            a_in[(q, li(q, col))] = 1.0;
        }
        for l in 0..nn {
            a_in[(q, beta + l)] = -mm[(q, l)];
        }
        if q < m {
            a_in[(q, bs + q)] = -1.0;
        } else if q < 2 * m {
            a_in[(q, bs + q - m)] = 1.0;
        } else {
            a_in[(q, sig + (q - 2 * m) % nn)] = -1.0;
        }
    }
    let mut lp = LinearProgram::new(vars);
    for l in 0..nn {
        lp.objective[sig + l] = 1.0;
        lp.lower[sig + l] = 0.0;
        lp.upper[sig + l] = 1.0;
    }
    for v in lam..vars {
        lp.lower[v] = 0.0;
    }
    lp.a_eq = a_eq;
    lp.b_eq = b_eq;
    lp.a_in = a_in;
    lp.b_in = DVector::zeros(r);
    let sol = lp.solve()?;
    Ok(match sol.status {
        LpStatus::Optimal => sol.objective_value,
        _ => None,
    })
}

/// An input `u ∈ U` with `A x + B u ∈ D`, if one exists.
pub fn certificate_into(
    x: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    d: &ConstrainedZonotope,
    inputs: &ConstrainedZonotope,
) -> Result<Option<DVector<f64>>> {
    let n = d.dim();
    if x.len() != n || a.shape() != (n, n) || b.shape() != (n, inputs.dim()) {
        return Err(Error::dim("certificate data dimensions disagree"));
    }
    let (nu, nd) = (inputs.num_generators(), d.num_generators());
    let (mu, md) = (inputs.num_constraints(), d.num_constraints());
    let mut lp = LinearProgram::new(nu + nd);
    lp.lower = DVector::from_element(nu + nd, -1.0);
    lp.upper = DVector::from_element(nu + nd, 1.0);
    let mut a_eq = DMatrix::zeros(n + mu + md, nu + nd);
    a_eq.view_mut((0, 0), (n, nu)).copy_from(&(b * inputs.g()));
    a_eq.view_mut((0, nu), (n, nd)).copy_from(&-d.g());
    a_eq.view_mut((n, 0), (mu, nu)).copy_from(inputs.a());
    a_eq.view_mut((n + mu, nu), (md, nd)).copy_from(d.a());
    let mut b_eq = DVector::zeros(n + mu + md);
    b_eq.rows_mut(0, n).copy_from(&(d.c() - a * x - b * inputs.c()));
    b_eq.rows_mut(n, mu).copy_from(inputs.b());
    b_eq.rows_mut(n + mu, md).copy_from(d.b());
    lp.a_eq = a_eq;
    lp.b_eq = b_eq;
    let sol = lp.solve()?;
    Ok(match sol.status {
        LpStatus::Optimal => {
            let theta = sol.x.expect("optimal");
            Some(inputs.g() * theta.rows(0, nu) + inputs.c())
        }
        _ => None,
    })
}

/// One-step certificate for `x`: some `u ∈ U` drives the linearized successor
/// `A x + B u` into `target ⊖ (W ⊕ L)`, where `L` (centred at the
/// linearization offset) covers the remainder. Returns the input.
pub fn control_certificate(
    x: &DVector<f64>,
    lin: &Linearization,
    target: &ConstrainedZonotope,
    inputs: &ConstrainedZonotope,
    disturbance: &Zonotope,
    error_set: &Zonotope,
) -> Result<Option<DVector<f64>>> {
    let Some(d) = subtract(target, &error_set.minkowski_sum(disturbance)?)? else {
        return Ok(None);
    };
    certificate_into(x, &lin.a, &lin.b, &d, inputs)
}
