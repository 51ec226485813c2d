//! Modulo-folding front end.
//!
//! Two models of the same circuit live here. [`modulo_fold`] is the ideal
//! one-shot centered modulo. [`fold_step`] / [`fold_sample`] are a
//! cycle-level model of the counter and feedback loop: every counter-clock
//! cycle the subtractor forms `v_mod = v_in - sign(v_in) * CNT_OUT * 2 V_ref`,
//! the comparators produce `EoM`, `SIGN_MOD` and `SIGN_IN`, and the counter
//! moves according to [`truth_table`]. The counter is carried from one sample
//! to the next, so a slowly varying input settles in at most two cycles.
//!
//! Fold cells are half-open, `[-V_ref, V_ref)`: an input of exactly `+V_ref`
//! folds to `-V_ref` with a fold count of `+1`. `sign(0)` is positive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantizer::UniformQuantizer;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid converter configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FoldError {
    #[error("counter saturated at {counter} (width allows 0..{limit})")]
    CounterSaturation { counter: u32, limit: u64 },
    #[error("modulo loop did not settle within {cycles} counter cycles")]
    NonConvergence { cycles: u32 },
}

/// Input range handled by the quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// `[-V_ref, V_ref)`, folds of `2 V_ref`.
    #[default]
    Bipolar,
    /// `[0, V_ref)`, folds of `V_ref`, for positive-only quantizers.
    Unipolar,
}

/// Clock periods of the sample-and-hold and counter, plus quantizer delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockTiming {
    pub t_clk_sh: f64,
    pub t_clk_cnt: f64,
    pub tau: f64,
}

/// Whether the hold period covers two counter cycles plus the quantizer:
/// `T_CLK_SH >= 2 T_CLK_CNT + tau`.
pub fn validate_timing(timing: &ClockTiming) -> Result<bool, ConfigError> {
    let ClockTiming {
        t_clk_sh,
        t_clk_cnt,
        tau,
    } = *timing;
    if [t_clk_sh, t_clk_cnt, tau]
        .iter()
        .any(|t| !t.is_finite() || *t < 0.0)
    {
        return Err(ConfigError::Invalid(format!(
            "clock periods must be finite and >= 0, got {timing:?}"
        )));
    }
    Ok(t_clk_sh >= 2.0 * t_clk_cnt + tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdcConfig {
    pub v_ref: f64,
    /// Bits per sample, including the two reset bits.
    pub total_bits: u32,
    pub counter_bits: u32,
    pub polarity: Polarity,
    pub timing: Option<ClockTiming>,
}

impl AdcConfig {
    pub const DEFAULT_COUNTER_BITS: u32 = 8;
    pub const MAX_TOTAL_BITS: u32 = 32;

    pub fn new(v_ref: f64, total_bits: u32) -> Result<Self, ConfigError> {
        let config = Self {
            v_ref,
            total_bits,
            counter_bits: Self::DEFAULT_COUNTER_BITS,
            polarity: Polarity::Bipolar,
            timing: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_counter_bits(mut self, bits: u32) -> Result<Self, ConfigError> {
        self.counter_bits = bits;
        self.validate()?;
        Ok(self)
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }

    pub fn with_timing(mut self, timing: ClockTiming) -> Result<Self, ConfigError> {
        validate_timing(&timing)?;
        self.timing = Some(timing);
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.v_ref.is_finite() && self.v_ref > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "v_ref must be > 0, got {}",
                self.v_ref
            )));
        }
        if !(3..=Self::MAX_TOTAL_BITS).contains(&self.total_bits) {
            return Err(ConfigError::Invalid(format!(
                "total bits must be in 3..={}, got {}",
                Self::MAX_TOTAL_BITS,
                self.total_bits
            )));
        }
        if !(1..=31).contains(&self.counter_bits) {
            return Err(ConfigError::Invalid(format!(
                "counter bits must be in 1..=31, got {}",
                self.counter_bits
            )));
        }
        if let Some(t) = &self.timing {
            validate_timing(t)?;
        }
        Ok(())
    }

    /// Bits left for amplitude after the two reset bits.
    pub fn quant_bits(&self) -> u32 {
        self.total_bits - 2
    }

    /// Half-width of the quantizer window.
    pub fn half_range(&self) -> f64 {
        match self.polarity {
            Polarity::Bipolar => self.v_ref,
            Polarity::Unipolar => 0.5 * self.v_ref,
        }
    }

    /// Center of the quantizer window.
    pub fn center(&self) -> f64 {
        match self.polarity {
            Polarity::Bipolar => 0.0,
            Polarity::Unipolar => 0.5 * self.v_ref,
        }
    }

    /// `[lo, hi)` of the folded signal.
    pub fn input_range(&self) -> (f64, f64) {
        (self.center() - self.half_range(), self.center() + self.half_range())
    }

    /// Voltage removed per fold (`2 V_ref` bipolar, `V_ref` unipolar).
    pub fn fold_step(&self) -> f64 {
        2.0 * self.half_range()
    }

    /// Quantization step `Delta_UDR`.
    pub fn delta(&self) -> f64 {
        self.fold_step() / 2f64.powi(self.quant_bits() as i32)
    }

    pub fn counter_limit(&self) -> u64 {
        1u64 << self.counter_bits
    }

    pub fn quantizer(&self) -> UniformQuantizer {
        UniformQuantizer::new(self.center(), self.half_range(), self.quant_bits())
    }

    /// Ideal fold of `x` for this configuration.
    pub fn fold(&self, x: f64) -> (f64, i64) {
        let (v, m) = modulo_fold(x - self.center(), self.half_range());
        (v + self.center(), m)
    }
}

/// Two-bit reset side information `R1 R0`. The pattern `10` is unused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResetCode {
    NoReset,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("reset pattern {0:#04b} is not a valid code")]
pub struct InvalidResetPattern(pub u8);

impl ResetCode {
    pub fn bits(self) -> u8 {
        match self {
            Self::NoReset => 0b00,
            Self::Positive => 0b01,
            Self::Negative => 0b11,
        }
    }

    pub fn from_bits(bits: u8) -> Result<Self, InvalidResetPattern> {
        match bits {
            0b00 => Ok(Self::NoReset),
            0b01 => Ok(Self::Positive),
            0b11 => Ok(Self::Negative),
            other => Err(InvalidResetPattern(other)),
        }
    }

    /// Impulse `d[n]`: change of the fold count at this sample.
    pub fn impulse(self) -> i64 {
        match self {
            Self::NoReset => 0,
            Self::Positive => 1,
            Self::Negative => -1,
        }
    }

    pub fn from_impulse(d: i64) -> Self {
        match d.signum() {
            0 => Self::NoReset,
            1 => Self::Positive,
            _ => Self::Negative,
        }
    }
}

/// One row of the counter/reset truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableRow {
    pub delta_cnt: i8,
    /// Change of `z`, in units of the fold step.
    pub delta_z: i8,
    pub reset: ResetCode,
}

/// Counter and reset logic, indexed by `(EoM, SIGN_MOD, SIGN_IN)`.
pub fn truth_table(eom: bool, sign_mod: bool, sign_in: bool) -> TableRow {
    let (delta_cnt, delta_z, reset) = match (eom, sign_mod, sign_in) {
        (true, _, _) => (0, 0, ResetCode::NoReset),
        (false, true, true) => (1, 1, ResetCode::Positive),
        (false, false, true) => (-1, -1, ResetCode::Negative),
        (false, true, false) => (-1, 1, ResetCode::Positive),
        (false, false, false) => (1, -1, ResetCode::Negative),
    };
    TableRow {
        delta_cnt,
        delta_z,
        reset,
    }
}

/// Ideal centered modulo: returns `(v_mod, m)` with `x = v_mod + 2 m v_ref`
/// and `v_mod` in `[-v_ref, v_ref)`.
pub fn modulo_fold(x: f64, v_ref: f64) -> (f64, i64) {
    let step = 2.0 * v_ref;
    let mut m = ((x + v_ref) / step).floor();
    // floor() can be off by one after rounding; settle against the same
    // residue expression the state machine uses.
    for _ in 0..4 {
        let v = residue(x, m, step);
        if v < -v_ref {
            m -= 1.0;
        } else if v >= v_ref {
            m += 1.0;
        } else {
            return (v, m as i64);
        }
    }
    // Only reachable when |x| / step exceeds 2^53 and folds are no longer
    // resolvable in f64.
    (residue(x, m, step).clamp(-v_ref, v_ref), m as i64)
}

#[inline]
fn residue(x: f64, m: f64, step: f64) -> f64 {
    x - m * step
}

/// Registers of the modulo circuit between counter-clock edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldState {
    pub cnt_out: u32,
    pub sign_in: bool,
    pub sign_mod: bool,
    pub eom: bool,
}

impl Default for FoldState {
    fn default() -> Self {
        Self {
            cnt_out: 0,
            sign_in: true,
            sign_mod: true,
            eom: true,
        }
    }
}

impl FoldState {
    /// Counter value with the input polarity applied.
    pub fn signed_fold(&self) -> i64 {
        let c = i64::from(self.cnt_out);
        if self.sign_in {
            c
        } else {
            -c
        }
    }
}

/// One counter-clock cycle.
///
/// The returned state carries the comparator outputs for the subtractor
/// value formed with the incoming counter, and the counter after the
/// truth-table update.
pub fn fold_step(
    state: FoldState,
    v_in: f64,
    config: &AdcConfig,
) -> Result<FoldState, FoldError> {
    let half = config.half_range();
    let v = v_in - config.center();
    let sign_in = v >= 0.0;
    let m = if sign_in {
        i64::from(state.cnt_out)
    } else {
        -i64::from(state.cnt_out)
    };
    let v_mod = residue(v, m as f64, config.fold_step());
    let eom = (-half..half).contains(&v_mod);
    let sign_mod = v_mod >= 0.0;

    let row = truth_table(eom, sign_mod, sign_in);
    let next = i64::from(state.cnt_out) + i64::from(row.delta_cnt);
    if next < 0 || next as u64 >= config.counter_limit() {
        return Err(FoldError::CounterSaturation {
            counter: state.cnt_out,
            limit: config.counter_limit(),
        });
    }
    Ok(FoldState {
        cnt_out: next as u32,
        sign_in,
        sign_mod,
        eom,
    })
}

/// Outcome of folding one held sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    /// Folded voltage, inside the quantizer window.
    pub v_mod: f64,
    /// Signed fold count `m`, so that `v_in = v_mod + m * fold_step`.
    pub fold_count: i64,
    pub reset: ResetCode,
    pub cycles_used: u32,
    /// The sample moved more than one fold from its predecessor, or needed
    /// more than two counter cycles. The two reset bits cannot describe it.
    pub growth_violation: bool,
}

/// Run the counter loop on one sample, starting from the previous sample's
/// registers, until `EoM` goes high.
pub fn fold_sample(
    prev: FoldState,
    v_in: f64,
    config: &AdcConfig,
    max_cycles: u32,
) -> Result<(FoldResult, FoldState), FoldError> {
    let previous_fold = prev.signed_fold();
    let mut state = prev;
    let mut cycles = 0;
    loop {
        if cycles >= max_cycles {
            return Err(FoldError::NonConvergence { cycles });
        }
        state = fold_step(state, v_in, config)?;
        cycles += 1;
        if state.eom {
            break;
        }
    }

    let fold_count = state.signed_fold();
    let v_mod =
        residue(v_in - config.center(), fold_count as f64, config.fold_step()) + config.center();
    let jump = fold_count - previous_fold;
    let result = FoldResult {
        v_mod,
        fold_count,
        reset: ResetCode::from_impulse(jump),
        cycles_used: cycles,
        growth_violation: jump.abs() > 1 || cycles > 2,
    };
    Ok((result, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(v_ref: f64) -> AdcConfig {
        AdcConfig::new(v_ref, 11).unwrap()
    }

    #[test]
    fn fold_examples() {
        assert_eq!(modulo_fold(0.1, 0.2), (0.1, 0));
        let (v, m) = modulo_fold(0.5, 0.2);
        assert!((v - 0.1).abs() < 1e-15);
        assert_eq!(m, 1);
        let (v, m) = modulo_fold(-0.5, 0.2);
        assert!((v + 0.1).abs() < 1e-15);
        assert_eq!(m, -1);
    }

    #[test]
    fn fold_boundaries_are_half_open() {
        assert_eq!(modulo_fold(0.2, 0.2), (-0.2, 1));
        assert_eq!(modulo_fold(-0.2, 0.2), (-0.2, 0));
        assert_eq!(modulo_fold(0.75, 0.25), (-0.25, 2));
    }

    #[test]
    fn reset_code_patterns() {
        assert_eq!(ResetCode::NoReset.bits(), 0b00);
        assert_eq!(ResetCode::Positive.bits(), 0b01);
        assert_eq!(ResetCode::Negative.bits(), 0b11);
        assert_eq!(ResetCode::from_bits(0b10), Err(InvalidResetPattern(0b10)));
        for code in [ResetCode::NoReset, ResetCode::Positive, ResetCode::Negative] {
            assert_eq!(ResetCode::from_bits(code.bits()), Ok(code));
        }
    }

    #[test]
    fn table_rows() {
        let row = truth_table(false, true, true);
        assert_eq!((row.delta_cnt, row.delta_z, row.reset), (1, 1, ResetCode::Positive));
        let row = truth_table(false, true, false);
        assert_eq!((row.delta_cnt, row.delta_z, row.reset), (-1, 1, ResetCode::Positive));
        let row = truth_table(true, false, true);
        assert_eq!((row.delta_cnt, row.delta_z, row.reset), (0, 0, ResetCode::NoReset));
    }

    #[test]
    fn in_range_sample_takes_one_cycle() {
        let (r, s) = fold_sample(FoldState::default(), 0.1, &cfg(0.2), 16).unwrap();
        assert_eq!(r.v_mod, 0.1);
        assert_eq!(r.reset, ResetCode::NoReset);
        assert_eq!(r.cycles_used, 1);
        assert_eq!(s.cnt_out, 0);
    }

    #[test]
    fn one_fold_takes_two_cycles() {
        let (r, s) = fold_sample(FoldState::default(), 0.5, &cfg(0.2), 16).unwrap();
        assert!((r.v_mod - 0.1).abs() < 1e-15);
        assert_eq!(r.reset, ResetCode::Positive);
        assert_eq!(r.cycles_used, 2);
        assert_eq!(s.cnt_out, 1);

        let (r2, _) = fold_sample(s, 0.1, &cfg(0.2), 16).unwrap();
        assert_eq!(r2.reset, ResetCode::Negative);
        assert_eq!(r2.fold_count, 0);
        assert!(!r2.growth_violation);
    }

    #[test]
    fn crossing_zero_reinterprets_counter() {
        let c = cfg(0.2);
        let (_, s) = fold_sample(FoldState::default(), 0.3, &c, 16).unwrap();
        assert_eq!(s.signed_fold(), 1);
        let (r, s) = fold_sample(s, -0.05, &c, 16).unwrap();
        assert_eq!(r.fold_count, 0);
        assert_eq!(r.cycles_used, 2);
        assert_eq!(r.reset, ResetCode::Negative);
        let (r, _) = fold_sample(s, -0.3, &c, 16).unwrap();
        assert_eq!(r.fold_count, -1);
        assert_eq!(r.reset, ResetCode::Negative);
    }

    #[test]
    fn large_jump_is_flagged_not_fatal() {
        let (r, _) = fold_sample(FoldState::default(), 1.2, &cfg(0.2), 16).unwrap();
        assert_eq!(r.fold_count, 3);
        assert_eq!(r.cycles_used, 4);
        assert!(r.growth_violation);
    }

    #[test]
    fn cycle_budget_and_counter_width_are_enforced() {
        assert_eq!(
            fold_sample(FoldState::default(), 1.2, &cfg(0.2), 3),
            Err(FoldError::NonConvergence { cycles: 3 })
        );
        let narrow = cfg(0.2).with_counter_bits(2).unwrap();
        assert!(matches!(
            fold_sample(FoldState::default(), 1.5, &narrow, 16),
            Err(FoldError::CounterSaturation { counter: 3, limit: 4 })
        ));
    }

    #[test]
    fn timing_examples() {
        let t = |sh, cnt, tau| validate_timing(&ClockTiming { t_clk_sh: sh, t_clk_cnt: cnt, tau });
        assert_eq!(t(1e-5, 1e-6, 2e-6), Ok(true));
        assert_eq!(t(3e-6, 1e-6, 2e-6), Ok(false));
        assert_eq!(t(2e-6, 1e-6, 0.0), Ok(true));
        assert!(t(-1.0, 1e-6, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AdcConfig::new(0.0, 11).is_err());
        assert!(AdcConfig::new(0.2, 2).is_err());
        assert!(AdcConfig::new(0.2, 11).unwrap().with_counter_bits(0).is_err());
        let c = AdcConfig::new(0.2, 11).unwrap();
        assert_eq!(c.quant_bits(), 9);
        assert!((c.delta() - 0.4 / 512.0).abs() < 1e-18);
    }

    #[test]
    fn unipolar_window() {
        let c = AdcConfig::new(1.65, 12).unwrap().with_polarity(Polarity::Unipolar);
        assert_eq!(c.input_range(), (0.0, 1.65));
        assert_eq!(c.fold_step(), 1.65);
        let (v, m) = c.fold(5.0);
        assert_eq!(m, 3);
        assert!((v - (5.0 - 3.0 * 1.65)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn fold_identity(x in -1e6f64..1e6, v_ref in 1e-3f64..10.0) {
            let (v, m) = modulo_fold(x, v_ref);
            prop_assert!((-v_ref..v_ref).contains(&v));
            let back = v + m as f64 * 2.0 * v_ref;
            prop_assert!((back - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(v_ref));
        }

        #[test]
        fn in_range_is_identity(x in -1.0f64..1.0) {
            prop_assert_eq!(modulo_fold(x * 0.2, 0.2), (x * 0.2, 0));
        }

        #[test]
        fn state_machine_matches_ideal_fold(
            start in -0.19f64..0.19,
            steps in proptest::collection::vec(-0.399f64..=0.399, 1..200),
        ) {
            let c = cfg(0.2);
            let mut x = start;
            let mut state = FoldState::default();
            let mut previous = 0i64;
            for (k, dx) in std::iter::once(0.0).chain(steps).enumerate() {
                x += dx;
                let (r, next) = fold_sample(state, x, &c, 64).unwrap();
                let (v, m) = modulo_fold(x, 0.2);
                prop_assert_eq!(r.fold_count, m, "sample {}", k);
                prop_assert!((r.v_mod - v).abs() <= 1e-12);
                prop_assert!(r.cycles_used <= 2);
                prop_assert!(!r.growth_violation);
                prop_assert_eq!(r.reset.impulse(), m - previous);
                prop_assert_ne!(r.reset.bits(), 0b10);
                previous = m;
                state = next;
            }
        }
    }
}
