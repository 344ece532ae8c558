//! Finite-activity Monte Carlo for `Y_t = ∫_0^t f dX` and its masked parts.

pub mod monte_carlo;
pub mod path;
pub mod sampler;

pub use monte_carlo::{monte_carlo, simulate_samples, summarize, MonteCarloConfig, MonteCarloReport, StatRow, DEFAULT_DELTA, Z99};
pub use path::{drift_rate, integrate_path, sample_path, sample_path_indexed, small_jump_moments, IntegralSample, PathPlan, PathRealization, SmallJumpWindow};
pub use sampler::JumpSampler;
