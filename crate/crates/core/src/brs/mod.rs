//! Backward reachable sets by linearization with a bounded error set.

mod engine;
pub mod pre;
pub mod split;

pub use engine::{
    run, scaling_brs_step, splitting_brs_step, Method, PieceRecord, ReachProblem, ReachResult, StepDiagnostics,
    StepOutput, Termination, DEFAULT_ALPHA, DEFAULT_MAX_SCALE_ITERS, DEFAULT_MAX_SPLIT_DEPTH,
};
pub use pre::{pre_linear, pre_xu, project_x, subtract};
pub use split::{farthest_point_sample, select_split_generator, split};
