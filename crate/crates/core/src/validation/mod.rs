//! Reference oracles and Monte-Carlo utilities for checking results.

pub mod oracles;
pub mod polygon;
pub mod volume;

pub use oracles::{
    brute_force_diff_2d, brute_force_diff_2d_points, certificate_into, control_certificate, full_min_out_objective,
    grid_2d, zonotope_probe_points,
};
pub use polygon::{polygon_2d, Polygon};
pub use volume::{bounding_box_volume, mc_volume, union_volume, VolumeEstimate, DEFAULT_VOLUME_SAMPLES, DEFAULT_VOLUME_SEED};
