//! Deterministic numerical laboratory for the symmetric KL divergence between
//! standardized sums of independent variables and the standard Gaussian.
//!
//! Modules, bottom up:
//!
//! - [`dist`]: analytic summand families
//! - [`grid`]: grid densities and the convolution engine
//! - [`info`]: entropy, KL, symmetric KL, L1 distance, entropy jump
//! - [`edgeworth`]: local expansion of the sum density
//! - [`stein`]: Stein equation, zero bias, coupling bound
//! - [`verify`]: minorization propagation, tail property, truncation decomposition
//! - [`ratelab`]: sweeps over `n` and rate fitting
//! - [`cli`]: command-line front end

pub mod cli;
pub mod dist;
pub mod edgeworth;
pub mod error;
pub mod grid;
pub mod info;
pub mod quad;
pub mod ratelab;
pub mod special;
pub mod stein;
pub mod verify;

pub use dist::{cumulant_summary, CumulantSummary, DistributionSpec, Family, FamilyKind};
pub use error::{Error, Result};
pub use grid::{GridDensity, GridSpec};
