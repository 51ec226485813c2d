//! Closed-form SQNR of a clipping n-bit ADC and of the folding ADC that
//! spends two of its n bits on reset information.
//!
//! Everything is normalized to unit input variance, with the loading
//! factor `gamma = V_ref / sigma_x`. Under the high-rate model the
//! quantization noise is `Delta^2 / 12`:
//!
//! * standard: `Delta = 2 V_ref / 2^n`, noise `gamma^2 / (3 * 4^n)`
//! * folding:  `Delta = 2 V_ref / 2^(n-2)`, noise `16 gamma^2 / (3 * 4^n)`
//!
//! Only the standard ADC clips. Its overload distortion is
//! `2 * integral_{V_ref}^{inf} (x - V_ref)^2 f(x) dx`, which in closed form is
//!
//! * uniform:   `(1 - gamma / sqrt 3)^3` for `gamma <= sqrt 3`, else 0
//! * gaussian:  `2 psi(gamma)`, `psi(g) = (1 + g^2) Q(g) - g phi(g)`
//! * laplacian: `exp(-sqrt 2 * gamma)`
//!
//! `psi` is the single-tail integral, so the two-tail Gaussian overload is
//! twice `psi`.

use std::f64::consts::{PI, SQRT_2};

use super::{AdcKind, AnalysisError, SqnrQuery};
use crate::signals::DistributionKind;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Standard normal tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `psi(g) = (1 + g^2) Q(g) - g exp(-g^2 / 2) / sqrt(2 pi)`, the overload
/// of one Gaussian tail in units of the input variance.
pub fn psi(gamma: f64) -> f64 {
    (1.0 + gamma * gamma) * q_function(gamma) - gamma * normal_pdf(gamma)
}

/// Overload distortion of the clipping ADC over the input variance.
pub fn overload_variance(distribution: DistributionKind, gamma: f64) -> Result<f64, AnalysisError> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(AnalysisError::Domain(format!(
            "loading factor must be finite and >= 0, got {gamma}"
        )));
    }
    Ok(match distribution {
        DistributionKind::Uniform => {
            if gamma <= SQRT_3 {
                (1.0 - gamma / SQRT_3).powi(3)
            } else {
                0.0
            }
        }
        DistributionKind::Gaussian => 2.0 * psi(gamma),
        DistributionKind::Laplacian => (-SQRT_2 * gamma).exp(),
    })
}

fn check(n: u32, gamma: f64) -> Result<(), AnalysisError> {
    if n < 3 {
        return Err(AnalysisError::Domain(format!("need n >= 3, got {n}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(AnalysisError::Domain(format!(
            "loading factor must be > 0, got {gamma}"
        )));
    }
    Ok(())
}

fn four_pow(n: u32) -> f64 {
    4f64.powi(n as i32)
}

/// Quantization noise of the standard n-bit ADC over the input variance.
pub fn quantization_noise_std(n: u32, gamma: f64) -> f64 {
    gamma * gamma / (3.0 * four_pow(n))
}

/// `3 * 4^n / (16 gamma^2)`; independent of the input distribution.
pub fn sqnr_udr(n: u32, gamma: f64) -> Result<f64, AnalysisError> {
    check(n, gamma)?;
    Ok(3.0 * four_pow(n) / (16.0 * gamma * gamma))
}

pub fn sqnr_std(distribution: DistributionKind, n: u32, gamma: f64) -> Result<f64, AnalysisError> {
    check(n, gamma)?;
    Ok(1.0 / (quantization_noise_std(n, gamma) + overload_variance(distribution, gamma)?))
}

impl SqnrQuery {
    /// Closed-form SQNR (linear ratio).
    pub fn closed_form(&self) -> Result<f64, AnalysisError> {
        match self.adc {
            AdcKind::Standard => sqnr_std(self.distribution, self.n, self.gamma),
            AdcKind::Udr => sqnr_udr(self.n, self.gamma),
        }
    }
}
