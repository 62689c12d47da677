//! Geometric set types and their CG-Rep manipulations.

mod constrained;
mod hpolytope;
mod hyperbox;
pub mod sampling;
mod zonotope;

pub use constrained::{ConstrainedZonotope, MEMBERSHIP_TOL};
pub use hpolytope::{HPolytope, SafeSet, HPOLY_TOL};
pub use hyperbox::Hyperbox;
pub use sampling::Sampler;
pub use zonotope::Zonotope;
