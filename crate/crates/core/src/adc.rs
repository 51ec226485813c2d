//! Sample-by-sample converter: hold, fold, quantize, emit reset bits.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{CodecError, ModuloStream, Record};
use crate::frontend::{fold_sample, AdcConfig, FoldError, FoldState, ResetCode};
use crate::quantizer::{sar_quantize, QuantizerError};
use crate::signals::SampleStream;

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error("sample {index}: {source}")]
    Fold { index: usize, source: FoldError },
    #[error("sample {index}: {source}")]
    Quantize {
        index: usize,
        source: QuantizerError,
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ResetCounts {
    pub none: usize,
    pub positive: usize,
    pub negative: usize,
}

/// Summary of one conversion run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversionReport {
    pub samples: usize,
    pub resets: ResetCounts,
    /// Fold count -> number of samples.
    pub fold_histogram: BTreeMap<i64, usize>,
    pub max_abs_fold: u64,
    pub max_cycles_used: u32,
    /// Samples whose fold moved by more than one step, or that needed more
    /// than two counter cycles.
    pub growth_violations: usize,
    pub first_growth_violation: Option<usize>,
    /// Samples where the running sum of reset impulses differs from the
    /// true fold count; a reconstruction would be off by whole folds there.
    pub unwrap_failures: usize,
    pub max_increment: f64,
    /// `max |x[k] - x[k-1]| <= fold step`, the sampling-rate condition.
    pub growth_condition_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conversion {
    pub stream: ModuloStream,
    /// True fold count per sample, for diagnostics.
    pub folds: Vec<i64>,
    pub report: ConversionReport,
}

/// Behavioral unlimited-dynamic-range ADC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UdrAdc {
    config: AdcConfig,
    max_cycles: u32,
}

impl UdrAdc {
    pub const DEFAULT_MAX_CYCLES: u32 = 1024;

    pub fn new(config: AdcConfig) -> Self {
        Self {
            config,
            max_cycles: Self::DEFAULT_MAX_CYCLES,
        }
    }

    pub fn with_max_cycles(mut self, max_cycles: u32) -> Self {
        self.max_cycles = max_cycles;
        self
    }

    pub fn config(&self) -> &AdcConfig {
        &self.config
    }

    /// Convert a whole stream, starting from a cleared counter.
    pub fn convert(&self, input: &SampleStream) -> Result<Conversion, ConvertError> {
        let mut state = FoldState::default();
        let mut records = Vec::with_capacity(input.len());
        let mut folds = Vec::with_capacity(input.len());
        let mut resets = ResetCounts::default();
        let mut fold_histogram = BTreeMap::new();
        let mut max_cycles_used = 0;
        let mut growth_violations = 0;
        let mut first_growth_violation = None;
        let mut unwrap_failures = 0;
        let mut accumulated = 0i64;

        for (index, &x) in input.samples().iter().enumerate() {
            let (fold, next) = fold_sample(state, x, &self.config, self.max_cycles)
                .map_err(|source| ConvertError::Fold { index, source })?;
            state = next;
            let word = sar_quantize(fold.v_mod, &self.config)
                .map_err(|source| ConvertError::Quantize { index, source })?;

            match fold.reset {
                ResetCode::NoReset => resets.none += 1,
                ResetCode::Positive => resets.positive += 1,
                ResetCode::Negative => resets.negative += 1,
            }
            *fold_histogram.entry(fold.fold_count).or_insert(0) += 1;
            max_cycles_used = max_cycles_used.max(fold.cycles_used);
            if fold.growth_violation {
                growth_violations += 1;
                first_growth_violation.get_or_insert(index);
            }
            accumulated += fold.reset.impulse();
            if accumulated != fold.fold_count {
                unwrap_failures += 1;
            }

            folds.push(fold.fold_count);
            records.push(Record {
                reset: fold.reset,
                code: word.code,
            });
        }

        let max_increment = input.max_increment();
        let report = ConversionReport {
            samples: input.len(),
            resets,
            max_abs_fold: folds.iter().map(|m| m.unsigned_abs()).max().unwrap_or(0),
            fold_histogram,
            max_cycles_used,
            growth_violations,
            first_growth_violation,
            unwrap_failures,
            max_increment,
            growth_condition_holds: max_increment <= self.config.fold_step(),
        };
        Ok(Conversion {
            stream: ModuloStream::new(&self.config, input.sample_rate(), records)?,
            folds,
            report,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn in_range_input_has_no_resets() {
        let x = SampleStream::new(vec![0.0, 0.1, -0.15, 0.19], 1000.0).unwrap();
        let c = UdrAdc::new(AdcConfig::new(0.2, 11).unwrap()).convert(&x).unwrap();
        assert_eq!(c.report.resets.positive + c.report.resets.negative, 0);
        assert_eq!(c.report.max_cycles_used, 1);
        assert_eq!(c.folds, vec![0; 4]);
    }

    #[test]
    fn jump_is_counted_as_violation() {
        let x = SampleStream::new(vec![0.0, 1.0, 1.1], 1000.0).unwrap();
        let c = UdrAdc::new(AdcConfig::new(0.2, 11).unwrap()).convert(&x).unwrap();
        assert_eq!(c.report.growth_violations, 1);
        assert_eq!(c.report.first_growth_violation, Some(1));
        assert_eq!(c.report.unwrap_failures, 2);
        assert!(!c.report.growth_condition_holds);
        assert_eq!(c.report.max_abs_fold, 3);
    }

    #[test]
    fn saturation_reports_sample_index() {
        let cfg = AdcConfig::new(0.2, 11).unwrap().with_counter_bits(1).unwrap();
        let x = SampleStream::new(vec![0.0, 0.3, 0.7], 1000.0).unwrap();
        match UdrAdc::new(cfg).convert(&x) {
            Err(ConvertError::Fold { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected saturation, got {other:?}"),
        }
    }
}
