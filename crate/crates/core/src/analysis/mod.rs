//! SQNR, crossover, hardware cost, and sweep generation.

pub mod crossover;
pub mod hardware;
pub mod montecarlo;
pub mod sqnr;
pub mod sweep;

use serde::Serialize;
use thiserror::Error;

use crate::signals::DistributionKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AdcKind {
    /// Clipping n-bit converter.
    Standard,
    /// Folding converter with n-2 code bits and two reset bits.
    Udr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqnrQuery {
    pub distribution: DistributionKind,
    pub n: u32,
    pub gamma: f64,
    pub adc: AdcKind,
}

/// `10 log10(ratio)`.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub use crossover::crossover_gamma;
pub use hardware::{dynamic_power_ratio, flash_area_model, FlashArea, HwQuery};
pub use montecarlo::{McEstimate, MonteCarlo, Sampling};
pub use sqnr::{overload_variance, psi, q_function, sqnr_std, sqnr_udr};
