//! Flash-ADC area and quantizer dynamic-power comparisons.
//!
//! For the same step size a standard converter covering `V_max = lambda V_ref`
//! needs `n2 = n1 + ceil(log2 lambda)` bits. A flash converter with `n` bits
//! uses `2^(n-1)` comparators and `2^n` resistors. Scaling the quantizer
//! supply by `1 / lambda` scales its dynamic power by `1 / lambda^2`.

use serde::Serialize;

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HwQuery {
    /// Bits of the folding converter.
    pub n1: u32,
    /// Folding factor `V_max / V_ref`.
    pub lambda: f64,
}

impl HwQuery {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.n1 < 1 {
            return Err(AnalysisError::Domain(format!("need n1 >= 1, got {}", self.n1)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 1.0) {
            return Err(AnalysisError::Domain(format!(
                "folding factor must be >= 1, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FlashArea {
    pub n2: u32,
    pub comparators_std: u64,
    pub resistors_std: u64,
    pub comparators_udr: u64,
    pub resistors_udr: u64,
}

/// Smallest `k` with `2^k >= lambda`, without going through `log2`.
pub fn extra_bits(lambda: f64) -> u32 {
    let mut k = 0;
    while 2f64.powi(k as i32) < lambda {
        k += 1;
    }
    k
}

pub fn flash_area_model(q: &HwQuery) -> Result<FlashArea, AnalysisError> {
    q.validate()?;
    let n2 = q.n1 + extra_bits(q.lambda);
    if n2 > 63 {
        return Err(AnalysisError::Domain(format!("n2 = {n2} overflows the counts")));
    }
    Ok(FlashArea {
        n2,
        comparators_std: 1 << (n2 - 1),
        resistors_std: 1 << n2,
        comparators_udr: 1 << (q.n1 - 1),
        resistors_udr: 1 << q.n1,
    })
}

/// `P_UDR / P_STD = 1 / lambda^2`.
pub fn dynamic_power_ratio(lambda: f64) -> Result<f64, AnalysisError> {
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(AnalysisError::Domain(format!(
            "folding factor must be >= 1, got {lambda}"
        )));
    }
    Ok(1.0 / (lambda * lambda))
}

/// Dynamic power in arbitrary units (unit capacitance and clock), taking the
/// supply equal to the converter's full-scale voltage. For step `delta` and
/// `n1` bits the folding converter runs at `V_ref = delta 2^n1 / 2` and the
/// standard one at `lambda V_ref`. Returns `(p_std, p_udr)`.
pub fn dynamic_power_au(delta: f64, n1: u32, lambda: f64) -> Result<(f64, f64), AnalysisError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(AnalysisError::Domain(format!("step must be > 0, got {delta}")));
    }
    let ratio = dynamic_power_ratio(lambda)?;
    let v_ref = delta * 2f64.powi(n1 as i32) / 2.0;
    let p_std = (lambda * v_ref).powi(2);
    Ok((p_std, p_std * ratio))
}
