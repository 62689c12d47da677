//! Linearization and the Lagrange-remainder enclosure of the linearization error.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::interval::Interval;
use crate::dynamics::models::SystemModel;
use crate::error::{Error, Result};
use crate::sets::{ConstrainedZonotope, Hyperbox, Zonotope};

/// First-order model `f(x, u) ≈ A x + B u + offset` around `z*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linearization {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub z_star: DVector<f64>,
}

/// Box enclosing `f(z) - A x - B u` over a state-input set.
#[derive(Clone, Debug, PartialEq)]
pub struct LinErrorBox {
    pub bounds: Hyperbox,
}

impl LinErrorBox {
    /// `⟨diag(half_widths), center⟩`.
    pub fn from_center(center: &DVector<f64>, half_widths: &DVector<f64>) -> Result<Self> {
        Ok(LinErrorBox { bounds: Hyperbox::from_center_radius(center, half_widths)? })
    }

    pub fn center(&self) -> DVector<f64> {
        self.bounds.center()
    }

    pub fn half_widths(&self) -> DVector<f64> {
        self.bounds.radius()
    }

    pub fn contains(&self, other: &LinErrorBox, tol: f64) -> bool {
        self.bounds.contains_box(&other.bounds, tol)
    }

    /// Multiplies the half-widths by `alpha`, keeping the centre.
    pub fn enlarged(&self, alpha: f64) -> LinErrorBox {
        LinErrorBox {
            bounds: Hyperbox::from_center_radius(&self.center(), &(self.half_widths() * alpha))
                .expect("finite box"),
        }
    }

    pub fn to_zonotope(&self) -> Zonotope {
        self.bounds.to_zonotope()
    }
}

pub fn linearize(model: &dyn SystemModel, z_star: &DVector<f64>) -> Result<Linearization> {
    let n = model.state_dim();
    let q = model.input_dim();
    if z_star.len() != n + q {
        return Err(Error::dim(format!("linearization point has length {}, expected {}", z_star.len(), n + q)));
    }
    let (a, b) = model.jacobian(z_star)?;
    let fz = model.eval_z(z_star)?;
    let x = z_star.rows(0, n);
    let u = z_star.rows(n, q);
    let offset = fz - &a * x - &b * u;
    Ok(Linearization { a, b, offset, z_star: z_star.clone() })
}

/// Interval enclosure of the second-order remainder `f(z) - f(z*) - J(z - z*)`
/// over the box `zbox`, one interval per state component.
pub fn remainder_intervals(model: &dyn SystemModel, z_star: &DVector<f64>, zbox: &Hyperbox) -> Result<Vec<Interval>> {
    let n = model.state_dim();
    let k = n + model.input_dim();
    if zbox.dim() != k || z_star.len() != k {
        return Err(Error::dim("remainder: state-input dimensions disagree"));
    }
    if model.is_linear() {
        return Ok(vec![Interval::ZERO; n]);
    }
    let xi_domain = zbox.hull_point(z_star);
    let d: Vec<Interval> = (0..k)
        .map(|j| Interval { lo: zbox.lower()[j] - z_star[j], hi: zbox.upper()[j] - z_star[j] })
        .collect();
    (0..n)
        .map(|i| Ok(model.hessian_bounds(i, &xi_domain)?.half_quadratic_form(&d)))
        .collect()
}

/// Enclosure of `{f(z) - A x - B u | z ∈ Z}` as offset plus remainder box.
pub fn lagrange_remainder(model: &dyn SystemModel, lin: &Linearization, zset: &ConstrainedZonotope) -> Result<LinErrorBox> {
    let zbox = zset.interval_closure()?;
    lagrange_remainder_box(model, lin, &zbox)
}

pub fn lagrange_remainder_box(model: &dyn SystemModel, lin: &Linearization, zbox: &Hyperbox) -> Result<LinErrorBox> {
    let r = remainder_intervals(model, &lin.z_star, zbox)?;
    let lo = DVector::from_fn(r.len(), |i, _| lin.offset[i] + r[i].lo);
    let hi = DVector::from_fn(r.len(), |i, _| lin.offset[i] + r[i].hi);
    Ok(LinErrorBox { bounds: Hyperbox::new(lo, hi)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::models::{double_integrator_2d, dubins_car, water_tanks_10d};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn cube(center: &DVector<f64>, r: f64) -> Hyperbox {
        Hyperbox::from_center_radius(center, &DVector::from_element(center.len(), r)).unwrap()
    }

    #[test]
    fn linear_model_has_zero_remainder() {
        let m = double_integrator_2d();
        let z = v(&[1.0, 0.5, 0.2]);
        let lin = linearize(&m, &z).unwrap();
        assert_eq!(lin.a, m.a().clone());
        assert!(lin.offset.amax() < 1e-15);
        let le = lagrange_remainder(&m, &lin, &cube(&z, 0.3).to_cz()).unwrap();
        assert!(le.half_widths().amax() == 0.0);
    }

    #[test]
    fn dubins_hand_bound() {
        // Around z* = (0, 0, 0, 0.06, 0.02) with radius 0.01: over the box
        // |u1| ≤ 0.07 and |x3| ≤ 0.01, so
        //   f1: ½·0.07·r² + sin(0.01)·r²,   f2: ½·0.07·sin(0.01)·r² + 1·r².
        // The bilinear term u1·x3 of f2 dominates: its true remainder reaches
        // (u1 - 0.06)·x3 ≈ r², well above ½·0.08·(2r)².
        let m = dubins_car();
        let z = v(&[0.0, 0.0, 0.0, 0.06, 0.02]);
        let lin = linearize(&m, &z).unwrap();
        let r = 0.01;
        let le = lagrange_remainder_box(&m, &lin, &cube(&z, r)).unwrap();
        let hw = le.half_widths();
        let s = 0.01f64.sin();
        assert!(hw[0] <= 0.5 * 0.07 * r * r + s * r * r + 1e-15);
        assert!(hw[1] <= 0.5 * 0.07 * s * r * r + r * r + 1e-15);
        assert_eq!(hw[2], 0.0);
        let corner = v(&[0.0, 0.0, r, 0.06 + r, 0.02]);
        let err = m.eval_z(&corner).unwrap()[1]
            - (&lin.a * corner.rows(0, 3) + &lin.b * corner.rows(3, 2) + &lin.offset)[1];
        assert!(err > 0.5 * 0.08 * (2.0 * r) * (2.0 * r));
        assert!(le.bounds.contains(&(&lin.offset + DVector::from_vec(vec![0.0, err, 0.0])), 1e-15));
    }

    #[test]
    fn quadratic_shrinkage() {
        let m = dubins_car();
        let z = v(&[0.3, -0.2, 0.7, 0.06, 0.02]);
        let lin = linearize(&m, &z).unwrap();
        let big = lagrange_remainder_box(&m, &lin, &cube(&z, 0.02)).unwrap().half_widths();
        let small = lagrange_remainder_box(&m, &lin, &cube(&z, 0.01)).unwrap().half_widths();
        for i in 0..2 {
            assert!(big[i] >= 3.9 * small[i], "component {i}: {} vs {}", big[i], small[i]);
        }
    }

    fn soundness(model: &dyn SystemModel, z: &DVector<f64>, radius: f64, seed: u64) {
        let lin = linearize(model, z).unwrap();
        let zbox = cube(z, radius);
        let le = lagrange_remainder(model, &lin, &zbox.to_cz()).unwrap();
        let n = model.state_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let p = DVector::from_fn(z.len(), |j, _| rng.gen_range(zbox.lower()[j]..=zbox.upper()[j]));
            let err = model.eval_z(&p).unwrap() - (&lin.a * p.rows(0, n) + &lin.b * p.rows(n, z.len() - n));
            assert!(le.bounds.contains(&err, 1e-14), "{}: {err} outside", model.name());
        }
    }

    #[test]
    fn remainder_soundness_dubins() {
        soundness(&dubins_car(), &v(&[0.1, 0.2, 1.2, 0.06, 0.02]), 0.05, 1);
        soundness(&dubins_car(), &v(&[0.0, 0.0, -0.4, 0.05, 0.01]), 0.3, 2);
    }

    #[test]
    fn remainder_soundness_tanks() {
        let mut z = DVector::from_element(11, 4.0);
        z[10] = 0.14;
        soundness(&water_tanks_10d(), &z, 0.1, 3);
        let mut z = DVector::from_fn(11, |i, _| 0.5 + 0.3 * i as f64);
        z[10] = 0.14;
        soundness(&water_tanks_10d(), &z, 0.4, 4);
    }
}
