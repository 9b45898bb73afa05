//! Time stepping: the split exponential scheme, full trajectories and the mild (Picard) formulation.

mod mild;
mod model;
mod single_point;
mod steps;
mod trajectory;

pub use mild::{
    convolution_s_diamond, convolution_s_star, free_evolution, mild_map, picard_iterate_mild,
    MildPath, PicardOutcome, DIVERGENCE_FACTOR,
};
pub use model::Model;
pub use single_point::{log_log_slope, weak_consistency, WeakConsistency, WeakConsistencySetup};
pub use steps::{
    ito_director, ito_point, renormalize_director, rotate_director, rotate_point,
    step_director_deterministic, step_director_noise_ito, step_director_noise_rotation,
    step_velocity,
};
pub use trajectory::{integrate, run_trajectory, run_trajectory_with};
