//! Behavioral simulator and analysis toolkit for an unlimited-dynamic-range
//! (modulo, self-reset) analog-to-digital converter.
//!
//! The pipeline is `signals` -> `frontend` (fold) -> `quantizer` -> `codec`,
//! with `reconstruct` undoing the fold from the two reset bits per sample.
//! `analysis` holds the SQNR, crossover and hardware-cost models.

pub mod adc;
pub mod analysis;
pub mod cli;
pub mod codec;
pub mod frontend;
pub mod presets;
pub mod quantizer;
pub mod reconstruct;
pub mod signals;

pub use adc::{Conversion, ConversionReport, ConvertError, UdrAdc};
pub use codec::{pack, unpack, CodecError, ModuloStream, Record};
pub use frontend::{
    fold_sample, fold_step, modulo_fold, truth_table, validate_timing, AdcConfig, ClockTiming,
    ConfigError, FoldError, FoldResult, FoldState, Polarity, ResetCode,
};
pub use quantizer::{dequantize, quantize_standard, sar_quantize, CodeWord, UniformQuantizer};
pub use reconstruct::{accumulate_resets, reconstruct, srer, ReconstructError};
pub use signals::{generate, DistributionKind, SampleStream, SignalError, SignalKind, SignalSpec};
