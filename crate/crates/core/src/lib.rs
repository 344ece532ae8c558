//! Membership of infinitely divisible laws in the domains of improper
//! stochastic integrals `∫_0^{∞-} f(s) dX_s`, explicit counterexamples to
//! monotonicity of those domains in `f`, and Monte Carlo for the associated
//! martingale Lévy processes.

pub mod classify;
pub mod counterexample;
pub mod error;
pub mod integrand;
pub mod measure;
pub mod numerics;
pub mod schema;
pub mod simulate;
pub mod triplet;

pub use error::{Error, Result};
