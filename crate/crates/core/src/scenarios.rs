//! The benchmark problems: a planar constrained zonotope with a visible
//! difference gap, a linear double integrator, a unicycle among obstacles and
//! a ten-tank cascade.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::brs::{Method, ReachProblem};
use crate::dynamics::{double_integrator_2d, dubins_car, linear_10d, water_tanks_10d};
use crate::sets::{ConstrainedZonotope, HPolytope, Hyperbox, SafeSet, Zonotope};

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn cube(lo: &[f64], hi: &[f64]) -> Hyperbox {
    Hyperbox::from_slices(lo, hi).expect("constant box")
}

fn halfspace(h: &[f64], a: f64) -> HPolytope {
    HPolytope::new(DMatrix::from_row_slice(1, h.len(), h), v(&[a])).expect("constant halfspace")
}

/// Planar set whose template difference leaves a gap:
/// `G = [1 0 0 0.1; 0 1 0 0.8]`, `c = 0`, `A = [−1 1 0.3 1]`, `b = 1`.
pub fn gap_example() -> ConstrainedZonotope {
    ConstrainedZonotope::new(
        DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.1, 0.0, 1.0, 0.0, 0.8]),
        DVector::zeros(2),
        DMatrix::from_row_slice(1, 4, &[-1.0, 1.0, 0.3, 1.0]),
        v(&[1.0]),
    )
    .expect("constant data")
}

/// Shrink factors used with [`gap_example`].
pub fn gap_example_sigma_bar() -> DVector<f64> {
    DVector::from_element(4, 0.2)
}

/// Double integrator with `U = [−1.5, 1.5]`, a sheared box disturbance, target
/// `⟨0.5 I, (1.5, 0)⟩` and safe set `{−x1 ≤ 2, 2 x1 + x2 ≤ 5}`.
pub fn double_integrator_problem(horizon: usize) -> ReachProblem {
    ReachProblem::new(
        Arc::new(double_integrator_2d()),
        Zonotope::new(DMatrix::identity(2, 2) * 0.5, v(&[1.5, 0.0])).expect("constant").to_cz(),
        cube(&[-1.5], &[1.5]).to_cz(),
        Zonotope::new(DMatrix::from_row_slice(2, 2, &[0.1997, 0.002396, -0.01498, 0.1997]), DVector::zeros(2))
            .expect("constant"),
        SafeSet::single(
            HPolytope::new(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 2.0, 1.0]), v(&[2.0, 5.0])).expect("constant"),
        ),
        horizon,
        Method::Scaling,
    )
}

/// Ten-state linear system with three inputs and box uncertainty; its
/// dynamics are a stand-in (see [`linear_10d`]).
pub fn linear_10d_problem(horizon: usize) -> ReachProblem {
    let mut w = vec![0.0; 10];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = match i {
            0 | 2 | 4 => 0.12,
            1 | 3 | 5 => 0.2,
            _ => 0.1,
        };
    }
    let mut lo = vec![9.5; 10];
    let mut hi = vec![10.5; 10];
    for i in 6..10 {
        lo[i] = 8.0;
        hi[i] = 12.0;
    }
    let mut p = ReachProblem::new(
        Arc::new(linear_10d()),
        cube(&lo, &hi).to_cz(),
        cube(&[-0.5; 3], &[0.5; 3]).to_cz(),
        Zonotope::new(DMatrix::from_diagonal(&v(&w)), DVector::zeros(10)).expect("constant"),
        SafeSet::everything(10),
        horizon,
        Method::Splitting,
    );
    p.max_branches = 16;
    p
}

/// Unicycle with `u ∈ [0.04, 0.08] × [0, 0.04]`, target box of half-width 0.1
/// about the origin, and a rectangular obstacle `[−0.3, −0.2] × [−0.04, 0.04]`
/// behind it (safe set = union of the four complementary halfspaces).
pub fn dubins_problem(horizon: usize) -> ReachProblem {
    let safe = SafeSet::new(vec![
        halfspace(&[1.0, 0.0, 0.0], -0.3),
        halfspace(&[-1.0, 0.0, 0.0], 0.2),
        halfspace(&[0.0, 1.0, 0.0], -0.04),
        halfspace(&[0.0, -1.0, 0.0], -0.04),
    ])
    .expect("constant");
    let mut p = ReachProblem::new(
        Arc::new(dubins_car()),
        cube(&[-0.1; 3], &[0.1; 3]).to_cz(),
        cube(&[0.04, 0.0], &[0.08, 0.04]).to_cz(),
        Zonotope::new(DMatrix::from_diagonal(&v(&[0.001, 0.001, 0.0005])), DVector::zeros(3)).expect("constant"),
        safe,
        horizon,
        Method::Splitting,
    );
    p.l_bar = v(&[0.002, 0.002, 0.001]);
    p.max_branches = 64;
    p
}

/// Tank cascade with inflow `u ∈ [0.135, 0.145]`, target `[3.9, 4.1]^10`,
/// small level disturbances and an obstacle `{x1 > 4.08, x2 < 3.92}`.
pub fn tank_problem(horizon: usize) -> ReachProblem {
    let mut e1 = vec![0.0; 10];
    e1[0] = 1.0;
    let mut e2 = vec![0.0; 10];
    e2[1] = -1.0;
    let safe = SafeSet::new(vec![halfspace(&e1, 4.08), halfspace(&e2, -3.92)]).expect("constant");
    let mut p = ReachProblem::new(
        Arc::new(water_tanks_10d()),
        cube(&[3.9; 10], &[4.1; 10]).to_cz(),
        cube(&[0.135], &[0.145]).to_cz(),
        Zonotope::new(DMatrix::identity(10, 10) * 1e-4, DVector::zeros(10)).expect("constant"),
        safe,
        horizon,
        Method::Splitting,
    );
    p.l_bar = DVector::from_element(10, 1e-5);
    p.max_branches = 16;
    p
}
