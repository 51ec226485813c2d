//! Undo the fold: `x[n] = y[n] + z[n]`, where `z` is the running sum of the
//! reset impulses times the fold step.

use thiserror::Error;

use crate::codec::ModuloStream;
use crate::frontend::ResetCode;
use crate::signals::{SampleStream, SignalError};

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("length mismatch: reference has {reference} samples, estimate {estimate}")]
    LengthMismatch { reference: usize, estimate: usize },
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Running fold count: `sum_{k <= n} d[k]`.
pub fn fold_counts(resets: &[ResetCode]) -> Vec<i64> {
    resets
        .iter()
        .scan(0i64, |acc, r| {
            *acc += r.impulse();
            Some(*acc)
        })
        .collect()
}

/// `z[n] = 2 v_ref * sum_{k <= n} d[k]`. Each entry is an exact integer
/// multiple of `2 v_ref` (no floating-point drift from summing volts).
pub fn accumulate_resets(resets: &[ResetCode], v_ref: f64) -> Vec<f64> {
    let step = 2.0 * v_ref;
    fold_counts(resets)
        .into_iter()
        .map(|m| m as f64 * step)
        .collect()
}

/// Rebuild the input estimate from a converter stream.
pub fn reconstruct(stream: &ModuloStream) -> Result<SampleStream, ReconstructError> {
    let config = stream.config();
    let q = config.quantizer();
    let step = config.fold_step();
    let mut fold = 0i64;
    let samples = stream
        .records()
        .iter()
        .map(|r| {
            fold += r.reset.impulse();
            q.value(r.code) + fold as f64 * step
        })
        .collect();
    Ok(SampleStream::new(samples, stream.sample_rate())?)
}

/// Signal-to-reconstruction-error ratio in dB. Identical streams give `+inf`.
pub fn srer(reference: &SampleStream, estimate: &SampleStream) -> Result<f64, ReconstructError> {
    srer_slices(reference.samples(), estimate.samples())
}

pub fn srer_slices(reference: &[f64], estimate: &[f64]) -> Result<f64, ReconstructError> {
    if reference.len() != estimate.len() {
        return Err(ReconstructError::LengthMismatch {
            reference: reference.len(),
            estimate: estimate.len(),
        });
    }
    let (signal, error) = reference
        .iter()
        .zip(estimate)
        .fold((0.0, 0.0), |(s, e), (r, x)| (s + r * r, e + (r - x) * (r - x)));
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / error).log10())
}
