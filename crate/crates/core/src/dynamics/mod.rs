//! Interval arithmetic, system models and linearization error.

pub mod interval;
pub mod models;
pub mod remainder;

pub use interval::{Interval, IntervalMatrix};
pub use models::{builtin, double_integrator_2d, dubins_car, linear_10d, water_tanks_10d, DubinsCar, LinearModel, ModelRef, SystemModel, WaterTanks};
pub use remainder::{lagrange_remainder, lagrange_remainder_box, linearize, remainder_intervals, LinErrorBox, Linearization};
