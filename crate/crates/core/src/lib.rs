//! Bayesian inference for population attributable risk (PAR) and
//! population attributable fraction (PAF) from 2x2 exposure-disease tables.

pub mod chain;
pub mod cli;
pub mod designs;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod measures;
pub mod misclass;
pub mod samplers;
pub mod special;
pub mod types;

pub use chain::{ChainResult, PosteriorSummary, SamplerKind};
pub use error::{Error, Result};
pub use measures::{paf, par, Quantity};
pub use types::{BetaParams, ContingencyTable, Design, PopulationParams, Theta};
