//! Heat kernel, survival and Green function estimates for symmetric Lévy
//! processes killed on leaving an open set, with Monte Carlo checks.
//!
//! The analytic side lives in [`bernstein`], [`levy_kernel`] and [`bounds`];
//! [`simulate`] produces empirical estimates and [`verify`] compares the two
//! through ratio spreads.

pub mod bernstein;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod laplace;
pub mod levy_kernel;
pub mod quad;
pub mod report;
pub mod simulate;
pub mod verify;

pub use bernstein::{BernsteinFunction, Family, ScalingCertificate, ScalingGrid};
pub use error::{Error, Result};
pub use geometry::Domain;
pub use levy_kernel::{JumpMode, ProcessSpec};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
