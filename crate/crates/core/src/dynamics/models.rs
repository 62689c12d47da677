//! System models `x⁺ = f(x, u)` with analytic Jacobians and interval Hessians.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::interval::{Interval, IntervalMatrix};
use crate::error::{Error, Result};
use crate::sets::Hyperbox;

/// Discrete-time dynamics. The stacked state-input vector is `z = [x; u]`.
pub trait SystemModel: Debug + Send + Sync {
    fn name(&self) -> &str;
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>>;
    /// `(∂f/∂x, ∂f/∂u)` at `z`.
    fn jacobian(&self, z: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)>;
    /// Interval enclosure of `∂²f_i/∂z²` over `domain` (a box in z-space).
    fn hessian_bounds(&self, i: usize, domain: &Hyperbox) -> Result<IntervalMatrix>;
    fn is_linear(&self) -> bool {
        false
    }

    fn eval_z(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.state_dim();
        self.eval(&z.rows(0, n).into_owned(), &z.rows(n, self.input_dim()).into_owned())
    }
}

pub type ModelRef = Arc<dyn SystemModel>;

fn check_z(model: &dyn SystemModel, len: usize) -> Result<()> {
    let want = model.state_dim() + model.input_dim();
    if len == want {
        Ok(())
    } else {
        Err(Error::dim(format!("{}: state-input vector has length {len}, expected {want}", model.name())))
    }
}

/// `x⁺ = A x + B u`.
#[derive(Clone, Debug)]
pub struct LinearModel {
    name: String,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl LinearModel {
    pub fn new(name: impl Into<String>, a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.nrows() {
            return Err(Error::dim(format!(
                "linear model needs square A and matching B rows, got A {:?}, B {:?}",
                a.shape(),
                b.shape()
            )));
        }
        Ok(LinearModel { name: name.into(), a, b })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
}

impl SystemModel for LinearModel {
    fn name(&self) -> &str {
        &self.name
    }
    fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    fn input_dim(&self) -> usize {
        self.b.ncols()
    }
    fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.state_dim() || u.len() != self.input_dim() {
            return Err(Error::dim(format!("{}: bad state or input length", self.name)));
        }
        Ok(&self.a * x + &self.b * u)
    }
    fn jacobian(&self, z: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        check_z(self, z.len())?;
        Ok((self.a.clone(), self.b.clone()))
    }
    fn hessian_bounds(&self, _i: usize, domain: &Hyperbox) -> Result<IntervalMatrix> {
        Ok(IntervalMatrix::zeros(domain.dim()))
    }
    fn is_linear(&self) -> bool {
        true
    }
}

/// The 2-D example system with `A = [0.9962, 0.02394; -0.1496, 0.9962]`,
/// `B = [-0.004034; 0.08025]`.
pub fn double_integrator_2d() -> LinearModel {
    LinearModel::new(
        "double_integrator_2d",
        DMatrix::from_row_slice(2, 2, &[0.9962, 0.02394, -0.1496, 0.9962]),
        DMatrix::from_row_slice(2, 1, &[-0.004034, 0.08025]),
    )
    .expect("constant data")
}

/// Stand-in for a 10-D linear benchmark: three discretised double
/// integrators (states 1–6, one input each) and four slowly coupled
/// integrator states (7–10), sampled at `dt = 0.1`.
pub fn linear_10d() -> LinearModel {
    let dt = 0.1;
    let mut a = DMatrix::identity(10, 10);
    let mut b = DMatrix::zeros(10, 3);
    for k in 0..3 {
        let p = 2 * k;
        a[(p, p + 1)] = dt;
        b[(p, k)] = 0.5 * dt * dt;
        b[(p + 1, k)] = dt;
    }
    for (row, src) in [(6, 1), (7, 3), (8, 5), (9, 1)] {
        a[(row, src)] = 0.01;
    }
    LinearModel::new("linear_10d", a, b).expect("constant data")
}

/// Unicycle with unit time step: `x1⁺ = x1 + u1 cos x3`, `x2⁺ = x2 + u1 sin x3`, `x3⁺ = x3 + u2`.
#[derive(Clone, Debug, Default)]
pub struct DubinsCar;

pub fn dubins_car() -> DubinsCar {
    DubinsCar
}

impl SystemModel for DubinsCar {
    fn name(&self) -> &str {
        "dubins_car"
    }
    fn state_dim(&self) -> usize {
        3
    }
    fn input_dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != 3 || u.len() != 2 {
            return Err(Error::dim("dubins_car: expects 3 states and 2 inputs"));
        }
        Ok(DVector::from_vec(vec![
            x[0] + u[0] * x[2].cos(),
            x[1] + u[0] * x[2].sin(),
            x[2] + u[1],
        ]))
    }
    fn jacobian(&self, z: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        check_z(self, z.len())?;
        let (th, v) = (z[2], z[3]);
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, -v * th.sin(), 0.0, 1.0, v * th.cos(), 0.0, 0.0, 1.0]);
        let b = DMatrix::from_row_slice(3, 2, &[th.cos(), 0.0, th.sin(), 0.0, 0.0, 1.0]);
        Ok((a, b))
    }
    fn hessian_bounds(&self, i: usize, domain: &Hyperbox) -> Result<IntervalMatrix> {
        check_z(self, domain.dim())?;
        let th = Interval { lo: domain.lower()[2], hi: domain.upper()[2] };
        let v = Interval { lo: domain.lower()[3], hi: domain.upper()[3] };
        let mut h = IntervalMatrix::zeros(5);
        match i {
            0 => {
                h.set(2, 2, -(v * th.cos()));
                h.set_sym(2, 3, -th.sin());
            }
            1 => {
                h.set(2, 2, -(v * th.sin()));
                h.set_sym(2, 3, th.cos());
            }
            2 => {}
            _ => return Err(Error::IndexOutOfRange { index: i, count: 3 }),
        }
        Ok(h)
    }
}

/// Cascade of ten tanks draining by Torricelli's law, inflow into tank 1 and
/// a feedback leak from tank 10.
#[derive(Clone, Debug)]
pub struct WaterTanks {
    pub dt: f64,
    pub k1: f64,
    pub k2: f64,
    pub g: f64,
}

pub fn water_tanks_10d() -> WaterTanks {
    WaterTanks { dt: 0.01, k1: 0.015, k2: 0.01, g: 9.81 }
}

/// Smallest level admitted inside interval evaluations.
const LEVEL_FLOOR: f64 = 1e-9;

impl WaterTanks {
    const N: usize = 10;

    fn outflow(&self, level: f64) -> Result<f64> {
        if level < 0.0 {
            return Err(Error::Domain(format!("negative tank level {level}")));
        }
        Ok((2.0 * self.g * level).sqrt())
    }

    /// Enclosure of `x^(-3/2)` with the level floor applied.
    fn curvature(&self, x: Interval) -> Result<Interval> {
        if x.lo < 0.0 {
            return Err(Error::Domain(format!("tank level interval {x} reaches below zero")));
        }
        Interval { lo: x.lo.max(LEVEL_FLOOR), hi: x.hi.max(LEVEL_FLOOR) }.powf_pos(-1.5)
    }
}

impl SystemModel for WaterTanks {
    fn name(&self) -> &str {
        "water_tanks_10d"
    }
    fn state_dim(&self) -> usize {
        Self::N
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != Self::N || u.len() != 1 {
            return Err(Error::dim("water_tanks_10d: expects 10 states and 1 input"));
        }
        let mut out = x.clone();
        out[0] += self.dt * (u[0] - self.k2 * x[9] - self.k1 * self.outflow(x[0])?);
        for i in 1..Self::N {
            out[i] += self.dt * self.k1 * (self.outflow(x[i - 1])? - self.outflow(x[i])?);
        }
        Ok(out)
    }
    fn jacobian(&self, z: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        check_z(self, z.len())?;
        // d/dx sqrt(2 g x) = g / sqrt(2 g x)
        let slope = |x: f64| -> Result<f64> {
            if x <= 0.0 {
                return Err(Error::Domain(format!("tank level {x} has no derivative")));
            }
            Ok(self.g / self.outflow(x)?)
        };
        let mut a = DMatrix::identity(Self::N, Self::N);
        a[(0, 0)] -= self.dt * self.k1 * slope(z[0])?;
        a[(0, 9)] -= self.dt * self.k2;
        for i in 1..Self::N {
            a[(i, i - 1)] += self.dt * self.k1 * slope(z[i - 1])?;
            a[(i, i)] -= self.dt * self.k1 * slope(z[i])?;
        }
        let mut b = DMatrix::zeros(Self::N, 1);
        b[(0, 0)] = self.dt;
        Ok((a, b))
    }
    fn hessian_bounds(&self, i: usize, domain: &Hyperbox) -> Result<IntervalMatrix> {
        check_z(self, domain.dim())?;
        if i >= Self::N {
            return Err(Error::IndexOutOfRange { index: i, count: Self::N });
        }
        // d²/dx² sqrt(2 g x) = -sqrt(2g)/4 · x^(-3/2)
        let c = self.dt * self.k1 * (2.0 * self.g).sqrt() / 4.0;
        let level = |k: usize| Interval { lo: domain.lower()[k], hi: domain.upper()[k] };
        let mut h = IntervalMatrix::zeros(Self::N + 1);
        h.set(i, i, self.curvature(level(i))?.scale(c));
        if i > 0 {
            h.set(i - 1, i - 1, self.curvature(level(i - 1))?.scale(-c));
        }
        Ok(h)
    }
}

/// Builtin model by name.
pub fn builtin(name: &str) -> Option<ModelRef> {
    match name {
        "double_integrator_2d" => Some(Arc::new(double_integrator_2d())),
        "linear_10d" => Some(Arc::new(linear_10d())),
        "dubins_car" => Some(Arc::new(dubins_car())),
        "water_tanks_10d" => Some(Arc::new(water_tanks_10d())),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["double_integrator_2d", "linear_10d", "dubins_car", "water_tanks_10d"];

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn finite_difference(model: &dyn SystemModel, z: &DVector<f64>) -> DMatrix<f64> {
        let n = model.state_dim();
        let k = z.len();
        let mut j = DMatrix::zeros(n, k);
        for c in 0..k {
            let h = 1e-6 * (1.0 + z[c].abs());
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[c] += h;
            zm[c] -= h;
            let d = (model.eval_z(&zp).unwrap() - model.eval_z(&zm).unwrap()) / (2.0 * h);
            j.set_column(c, &d);
        }
        j
    }

    #[test]
    fn example2_constants() {
        let m = double_integrator_2d();
        assert_eq!(m.b().as_slice(), &[-0.004034, 0.08025]);
        assert_eq!(m.a()[(1, 0)], -0.1496);
    }

    #[test]
    fn dubins_jacobian_at_rest() {
        let (a, b) = dubins_car().jacobian(&v(&[0.0, 0.0, 0.0, 0.06, 0.02])).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.06, 0.0, 0.0, 1.0]));
        assert_eq!(b, DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn tank_first_derivative() {
        let m = water_tanks_10d();
        let mut z = DVector::from_element(11, 4.0);
        z[10] = 0.14;
        let (a, _) = m.jacobian(&z).unwrap();
        let expected = 1.0 - 0.01 * 0.015 * 9.81 / (2.0 * 9.81 * 4.0f64).sqrt();
        assert!((a[(0, 0)] - expected).abs() < 1e-15);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let models: Vec<ModelRef> = vec![Arc::new(dubins_car()), Arc::new(water_tanks_10d())];
        for m in &models {
            for _ in 0..20 {
                let k = m.state_dim() + m.input_dim();
                let z = DVector::from_fn(k, |_, _| rng.gen_range(0.5..4.0));
                let (a, b) = m.jacobian(&z).unwrap();
                let fd = finite_difference(m.as_ref(), &z);
                let exact = crate::linalg::hcat(&a, &b);
                let err = (&fd - &exact).amax() / exact.amax().max(1.0);
                assert!(err < 1e-4, "{}: relative error {err}", m.name());
            }
        }
    }

    #[test]
    fn tank_domain_guard() {
        let m = water_tanks_10d();
        let mut x = DVector::from_element(10, 1.0);
        x[3] = -0.1;
        assert!(matches!(m.eval(&x, &v(&[0.14])), Err(Error::Domain(_))));
        let mut lo = DVector::from_element(11, 1.0);
        lo[2] = -0.5;
        let bx = Hyperbox::new(lo, DVector::from_element(11, 2.0)).unwrap();
        assert!(m.hessian_bounds(2, &bx).is_err());
    }

    #[test]
    fn builtins_resolve() {
        for name in BUILTIN_NAMES {
            assert_eq!(builtin(name).unwrap().name(), name);
        }
        assert!(builtin("nope").is_none());
    }
}
