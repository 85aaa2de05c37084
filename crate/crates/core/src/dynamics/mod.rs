//! Box dynamics: exact momentum-space evolution, time averages, infinite-time limits, escape norms.

pub mod evolve;
pub mod fft;
pub mod measure;
pub mod rage;
pub mod state;

pub use evolve::{
    evolve, evolve_direct, evolve_with, node_eigensystems, DirectStepper, DEFAULT_GROUP_TOL,
};
pub use measure::{fqe_limit, limit_measure, time_avg_measure, LimitMeasure, PositionMeasure};
pub use rage::rage_escape;
pub use state::{dft_forward, dft_inverse, BoxState, CompactState, MomentumState};
