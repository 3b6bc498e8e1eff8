//! Simulation and estimation of measurable quasi-probability functionals for
//! weak sequential and simultaneous quantum measurements.
//!
//! - [`systems`]: closed-form distributions, characteristic functions and
//!   exact `K` for the single-photon position/momentum example and the
//!   two-step spin example, plus a generic finite-dimensional engine.
//! - [`sampling`]: seeded exact samplers and record persistence.
//! - [`estimation`]: empirical characteristic functions, the cutoff
//!   estimator of `K`, repeat-trial statistics.
//! - [`harness`]: configuration, sweeps and output files behind the `kqpd`
//!   command-line tool.

pub mod error;
pub mod estimation;
pub mod grid;
pub mod harness;
pub mod sampling;
pub mod systems;

pub use error::{KqpdError, Result};

/// Version string written into every manifest.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seconds since the Unix epoch (0 if the clock is before it).
pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
