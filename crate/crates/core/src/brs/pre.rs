//! One-step predecessor sets: the linear recursion and its lifted
//! state-input form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, condition_number};
use crate::minkdiff::{minkdiff_two_step, TINY_GENERATOR};
use crate::sets::{ConstrainedZonotope, HPolytope, SafeSet, Zonotope};

/// Above this, `A` counts as singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Below this the lifted predecessor is parametrized through `A⁻¹` directly.
const DIRECT_CONDITION: f64 = 1e8;

/// `X ⊖ Z`. A subtrahend without generators is a pure shift. `None` means the
/// template cannot enclose `Z`, i.e. the under-approximation is empty.
pub fn subtract(x: &ConstrainedZonotope, z: &Zonotope) -> Result<Option<ConstrainedZonotope>> {
    let z = z.simplify(TINY_GENERATOR);
    if z.num_generators() == 0 {
        return Ok(Some(x.translate(&-z.c())?));
    }
    match minkdiff_two_step(x, &z, true) {
        Ok(r) => Ok(Some(r.difference)),
        Err(Error::NoEnclosure) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Applies every halfspace of `p` to the first `p.dim()` coordinates of `s`.
pub fn cut_polytope(s: &ConstrainedZonotope, p: &HPolytope) -> Result<Option<ConstrainedZonotope>> {
    let pad = s.dim() - p.dim();
    let mut cur = s.clone();
    for i in 0..p.num_halfspaces() {
        let h = linalg::vcat_vec(&p.row(i), &DVector::zeros(pad));
        match cur.cut(&h, p.a()[i])? {
            Some(next) => cur = next,
            None => return Ok(None),
        }
    }
    Ok(Some(cur))
}

fn single_piece(safe: &SafeSet) -> Result<&HPolytope> {
    match safe.pieces() {
        [p] => Ok(p),
        _ => Err(Error::InvalidInput(format!(
            "a convex predecessor needs a single safe polytope, got {} pieces",
            safe.pieces().len()
        ))),
    }
}

fn check_system(x: &ConstrainedZonotope, a: &DMatrix<f64>, b: &DMatrix<f64>, u: &ConstrainedZonotope) -> Result<()> {
    let n = x.dim();
    if a.shape() != (n, n) || b.nrows() != n || b.ncols() != u.dim() {
        return Err(Error::dim(format!(
            "A {:?}, B {:?} incompatible with state dimension {n} and input dimension {}",
            a.shape(),
            b.shape(),
            u.dim()
        )));
    }
    Ok(())
}

fn inverse(a: &DMatrix<f64>, limit: f64) -> Option<DMatrix<f64>> {
    let cond = condition_number(a);
    if !cond.is_finite() || cond > limit {
        return None;
    }
    a.clone().try_inverse()
}

/// `A⁻¹(X ⊖ W ⊕ (−B U)) ∩ X_safe` for `x⁺ = A x + B u + w`.
/// An empty result is returned as an (explicitly) empty set.
pub fn pre_linear(
    xprev: &ConstrainedZonotope,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    u: &ConstrainedZonotope,
    w: &Zonotope,
    safe: &SafeSet,
) -> Result<ConstrainedZonotope> {
    check_system(xprev, a, b, u)?;
    let ainv = inverse(a, MAX_CONDITION).ok_or_else(|| Error::Singular(condition_number(a)))?;
    let n = xprev.dim();
    let Some(d) = subtract(xprev, w)? else {
        return Ok(ConstrainedZonotope::empty(n));
    };
    let pushed = d.minkowski_sum(&u.linear_map(&-b)?)?.linear_map(&ainv)?;
    Ok(cut_polytope(&pushed, single_piece(safe)?)?.unwrap_or_else(|| ConstrainedZonotope::empty(n)))
}

/// `{[x; u] | x ∈ X_safe, u ∈ U, A x + B u ∈ X ⊖ (L ⊕ W)}`; without a safe set
/// the state is unconstrained. `l` is the linearization error set.
pub fn pre_xu(
    x: &ConstrainedZonotope,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    u: &ConstrainedZonotope,
    w: &Zonotope,
    l: &Zonotope,
    safe: Option<&SafeSet>,
) -> Result<ConstrainedZonotope> {
    check_system(x, a, b, u)?;
    let n = x.dim();
    let q = u.dim();
    let safe = safe.map(single_piece).transpose()?;
    let Some(d) = subtract(x, &l.minkowski_sum(w)?)? else {
        return Ok(ConstrainedZonotope::empty(n + q));
    };
    let lifted = match inverse(a, DIRECT_CONDITION) {
        Some(ainv) => direct(&d, &ainv, b, u)?,
        None => {
            // Never inverts A: intersect a bounded state box × U with the
            // preimage of D under [A, B].
            let Some(p) = safe else {
                return Err(Error::Singular(condition_number(a)));
            };
            let Some(bx) = p.bounding_box()? else {
                return Ok(ConstrainedZonotope::empty(n + q));
            };
            let domain = bx.to_cz().product(u);
            preimage_intersection(&domain, &linalg::hcat(a, b), &d)?
        }
    };
    match safe {
        Some(p) => Ok(cut_polytope(&lifted, p)?.unwrap_or_else(|| ConstrainedZonotope::empty(n + q))),
        None => Ok(lifted),
    }
}

/// `x = A⁻¹(d − B u)`, `d ∈ D`, `u ∈ U`, stacked as `[x; u]`.
fn direct(d: &ConstrainedZonotope, ainv: &DMatrix<f64>, b: &DMatrix<f64>, u: &ConstrainedZonotope) -> Result<ConstrainedZonotope> {
    let n = d.dim();
    let q = u.dim();
    let (nd, nu) = (d.num_generators(), u.num_generators());
    let mut g = DMatrix::zeros(n + q, nd + nu);
    g.view_mut((0, 0), (n, nd)).copy_from(&(ainv * d.g()));
    g.view_mut((0, nd), (n, nu)).copy_from(&(-(ainv * b) * u.g()));
    g.view_mut((n, nd), (q, nu)).copy_from(u.g());
    let c = linalg::vcat_vec(&(ainv * (d.c() - b * u.c())), u.c());
    ConstrainedZonotope::new(
        g,
        c,
        linalg::blkdiag(d.a(), u.a()),
        linalg::vcat_vec(d.b(), u.b()),
    )
}

/// `{z ∈ Z | R z ∈ Y}`.
pub fn preimage_intersection(z: &ConstrainedZonotope, r: &DMatrix<f64>, y: &ConstrainedZonotope) -> Result<ConstrainedZonotope> {
    if r.ncols() != z.dim() || r.nrows() != y.dim() {
        return Err(Error::dim("preimage map does not fit the sets"));
    }
    let (nz, ny) = (z.num_generators(), y.num_generators());
    let g = linalg::hcat(z.g(), &DMatrix::zeros(z.dim(), ny));
    let a = linalg::vcat(&linalg::blkdiag(z.a(), y.a()), &linalg::hcat(&(r * z.g()), &-y.g()));
    let b = linalg::vcat_vec(&linalg::vcat_vec(z.b(), y.b()), &(y.c() - r * z.c()));
    debug_assert_eq!(a.ncols(), nz + ny);
    ConstrainedZonotope::new(g, z.c().clone(), a, b)
}

/// Keeps the first `n` coordinates.
pub fn project_x(z: &ConstrainedZonotope, n: usize) -> Result<ConstrainedZonotope> {
    if n > z.dim() {
        return Err(Error::dim(format!("cannot project dimension {} onto {n} coordinates", z.dim())));
    }
    let mut sel = DMatrix::zeros(n, z.dim());
    sel.view_mut((0, 0), (n, n)).fill_with_identity();
    z.linear_map(&sel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::double_integrator_2d;
    use crate::sets::{Hyperbox, Sampler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square(c: &[f64], r: f64) -> ConstrainedZonotope {
        let c = DVector::from_column_slice(c);
        Hyperbox::from_center_radius(&c, &DVector::from_element(c.len(), r)).unwrap().to_cz()
    }

    fn zero_zono(n: usize) -> Zonotope {
        Zonotope::point(DVector::zeros(n))
    }

    #[test]
    fn identity_recursion() {
        let x = square(&[1.0, -1.0], 0.5);
        let u = square(&[0.0], 1.0);
        let big = SafeSet::single(HPolytope::from_box(&Hyperbox::from_slices(&[-100.0, -100.0], &[100.0, 100.0]).unwrap()));
        let out = pre_linear(&x, &DMatrix::identity(2, 2), &DMatrix::zeros(2, 1), &u, &zero_zono(2), &big).unwrap();
        for h in linalg::test_directions(2, 16, 3) {
            assert!((out.support(&h).unwrap() - x.support(&h).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn wide_disturbance_gives_empty() {
        let x = square(&[0.0, 0.0], 0.5);
        let u = square(&[0.0], 1.0);
        let w = Zonotope::new(DMatrix::identity(2, 2) * 0.8, DVector::zeros(2)).unwrap();
        let out = pre_linear(&x, &DMatrix::identity(2, 2), &DMatrix::zeros(2, 1), &u, &w, &SafeSet::everything(2)).unwrap();
        assert!(out.is_empty().unwrap());
    }

    #[test]
    fn singular_dynamics_rejected() {
        let x = square(&[0.0, 0.0], 0.5);
        let u = square(&[0.0], 1.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let r = pre_linear(&x, &a, &DMatrix::zeros(2, 1), &u, &zero_zono(2), &SafeSet::everything(2));
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    #[test]
    fn singleton_error_set_is_a_shift() {
        let x = square(&[0.0, 0.0], 0.5);
        let shifted = subtract(&x, &Zonotope::point(DVector::from_vec(vec![0.2, -0.1]))).unwrap().unwrap();
        assert_eq!(shifted.g(), x.g());
        assert_eq!(shifted.c(), &DVector::from_vec(vec![-0.2, 0.1]));
    }

    #[test]
    fn trivial_lift_projects_to_target_in_safe_set() {
        let x = square(&[0.0, 0.0], 1.0);
        let u = square(&[0.0], 1.0);
        let safe = SafeSet::single(HPolytope::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), DVector::from_vec(vec![0.5])).unwrap());
        let z = pre_xu(&x, &DMatrix::identity(2, 2), &DMatrix::zeros(2, 1), &u, &zero_zono(2), &zero_zono(2), Some(&safe)).unwrap();
        let p = project_x(&z, 2).unwrap();
        let expected = x.cut(&DVector::from_vec(vec![1.0, 1.0]), 0.5).unwrap().unwrap();
        for h in linalg::test_directions(2, 32, 5) {
            assert!((p.support(&h).unwrap() - expected.support(&h).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn lifted_encoding_matches_direct() {
        // Same predecessor through the inverse-free encoding.
        let m = double_integrator_2d();
        let x = square(&[0.5, 0.0], 1.0);
        let u = square(&[0.0], 1.5);
        let w = Zonotope::new(DMatrix::identity(2, 2) * 0.05, DVector::zeros(2)).unwrap();
        let d = subtract(&x, &w).unwrap().unwrap();
        let bx = Hyperbox::from_slices(&[-5.0, -5.0], &[5.0, 5.0]).unwrap();
        let lifted = preimage_intersection(&bx.to_cz().product(&u), &linalg::hcat(m.a(), m.b()), &d).unwrap();
        let direct = pre_xu(&x, m.a(), m.b(), &u, &w, &zero_zono(2), None).unwrap();
        for h in linalg::test_directions(3, 24, 9) {
            let s1 = lifted.support(&h).unwrap();
            let s2 = direct.support(&h).unwrap();
            assert!((s1 - s2).abs() < 1e-6, "{s1} vs {s2}");
        }
    }

    #[test]
    fn example2_one_step_members_reach_target() {
        let m = double_integrator_2d();
        let x0 = square(&[1.5, 0.0], 0.5);
        let u = square(&[0.0], 1.5);
        let w = Zonotope::new(DMatrix::from_row_slice(2, 2, &[0.1997, 0.002396, -0.01498, 0.1997]), DVector::zeros(2)).unwrap();
        let z = pre_xu(&x0, m.a(), m.b(), &u, &w, &zero_zono(2), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = subtract(&x0, &w).unwrap().unwrap();
        for p in Sampler::new(&z).unwrap().points(200, &mut rng) {
            let (xs, us) = (p.rows(0, 2).into_owned(), p.rows(2, 1).into_owned());
            assert!(u.contains_point(&us).unwrap());
            let next = m.a() * &xs + m.b() * &us;
            assert!(d.contains_point(&next).unwrap());
            // every corner disturbance keeps the successor in X0
            for s in [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
                let wv = w.g() * DVector::from_row_slice(&s);
                assert!(x0.contains_point_tol(&(&next + wv), 1e-6).unwrap());
            }
        }
    }

    #[test]
    fn projection_of_product() {
        let a = square(&[1.0, 2.0], 0.3);
        let b = square(&[5.0], 1.0);
        let p = project_x(&a.product(&b), 2).unwrap();
        for h in linalg::test_directions(2, 8, 1) {
            assert!((p.support(&h).unwrap() - a.support(&h).unwrap()).abs() < 1e-12);
        }
        assert!(project_x(&ConstrainedZonotope::empty(3), 2).unwrap().is_empty().unwrap());
    }
}
