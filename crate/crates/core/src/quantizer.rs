//! Behavioral bipolar SAR quantizer and the clipping "standard ADC" baseline.
//!
//! Codes are offset-binary over `2^bits` mid-rise cells. Decision thresholds
//! come from a single level function, `level(i) = half * 2i / 2^bits`
//! relative to the window center, which is odd-symmetric in `i` even after
//! rounding. Both search orders below compare against those levels, so they
//! agree bit for bit on every input, including exact cell edges:
//!
//! * [`UniformQuantizer::sar_code`] is a plain binary search over the
//!   offset-binary code; [`UniformQuantizer::code`] finds the same code
//!   directly from a floor estimate.
//! * [`UniformQuantizer::sign_magnitude`] mirrors the circuit: `SIGN_MOD`
//!   picks the DAC polarity, the SAR searches the magnitude (strictly for
//!   negative inputs), and the magnitude bits are XORed with `!SIGN_MOD`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::AdcConfig;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuantizerError {
    #[error("{value} V is outside the quantizer window [{lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
}

/// Quantizer output: an offset-binary code plus the sign comparator bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeWord {
    pub code: u32,
    pub sign_mod: bool,
}

/// Uniform mid-rise quantizer over `[center - half, center + half)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizer {
    center: f64,
    half: f64,
    bits: u32,
    /// `half / 2^bits`; exact, so `unit * 2i` rounds once.
    unit: f64,
}

impl UniformQuantizer {
    pub const MAX_BITS: u32 = 31;

    /// # Panics
    /// If `bits` is outside `1..=31` or `half` is not a positive finite number.
    pub fn new(center: f64, half: f64, bits: u32) -> Self {
        assert!(
            (1..=Self::MAX_BITS).contains(&bits),
            "quantizer bits must be in 1..={}, got {bits}",
            Self::MAX_BITS
        );
        assert!(half.is_finite() && half > 0.0, "half range must be > 0");
        Self {
            center,
            half,
            bits,
            unit: half / f64::from(1u32 << bits),
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn levels(&self) -> u32 {
        1 << self.bits
    }

    pub fn step(&self) -> f64 {
        2.0 * self.unit
    }

    pub fn range(&self) -> (f64, f64) {
        (self.center - self.half, self.center + self.half)
    }

    /// Threshold `i` steps from the center, relative to the center.
    #[inline]
    fn level(&self, i: i64) -> f64 {
        self.unit * (2 * i) as f64
    }

    /// Offset-binary code: the largest `k` with `v - center >= level(k - mid)`.
    /// Inputs outside the window saturate at the end codes. Same result as
    /// [`Self::sar_code`], without the bit loop.
    pub fn code(&self, v: f64) -> u32 {
        let u = v - self.center;
        let mid = 1i64 << (self.bits - 1);
        let top = i64::from(self.levels()) - 1;
        // Shifted estimate; truncation is floor once it is non-negative, and
        // NaN lands on 0.
        let t = u / self.step() + mid as f64;
        let mut k = if t >= 0.0 { (t as i64).min(top) } else { 0 };
        // One loop rather than two `while`s: LLVM turned the pair into a
        // much slower sequence, and this is the Monte Carlo hot path.
        loop {
            if k < top && u >= self.level(k + 1 - mid) {
                k += 1;
            } else if k > 0 && u < self.level(k - mid) {
                k -= 1;
            } else {
                return k as u32;
            }
        }
    }

    /// Bit-by-bit successive approximation over the offset-binary code.
    pub fn sar_code(&self, v: f64) -> u32 {
        let u = v - self.center;
        let mid = 1i64 << (self.bits - 1);
        let mut code = 0u32;
        for b in (0..self.bits).rev() {
            let trial = code | (1 << b);
            if u >= self.level(i64::from(trial) - mid) {
                code = trial;
            }
        }
        code
    }

    /// Sign-magnitude SAR with the final XOR against `!SIGN_MOD`.
    pub fn sign_magnitude(&self, v: f64) -> CodeWord {
        let u = v - self.center;
        let sign_mod = u >= 0.0;
        let magnitude = u.abs();
        let mag_bits = self.bits - 1;
        let mut sar = 0u32;
        for b in (0..mag_bits).rev() {
            let trial = sar | (1 << b);
            let dac = self.level(i64::from(trial));
            let keep = if sign_mod {
                magnitude >= dac
            } else {
                magnitude > dac
            };
            if keep {
                sar = trial;
            }
        }
        let mask = (1u32 << mag_bits) - 1;
        let xor = if sign_mod { 0 } else { mask };
        CodeWord {
            code: (u32::from(sign_mod) << mag_bits) | ((sar ^ xor) & mask),
            sign_mod,
        }
    }

    /// Mid-cell reconstruction level of `code`.
    pub fn value(&self, code: u32) -> f64 {
        let offset = 2 * i64::from(code) + 1 - i64::from(self.levels());
        self.center + self.unit * offset as f64
    }

    pub fn quantize(&self, v: f64) -> f64 {
        self.value(self.code(v))
    }
}

/// Quantize a folded sample. The value must already lie in the window.
pub fn sar_quantize(v_mod: f64, config: &AdcConfig) -> Result<CodeWord, QuantizerError> {
    let (lo, hi) = config.input_range();
    if !(lo..hi).contains(&v_mod) {
        return Err(QuantizerError::OutOfRange {
            value: v_mod,
            lo,
            hi,
        });
    }
    let q = config.quantizer();
    Ok(CodeWord {
        code: q.code(v_mod),
        sign_mod: v_mod >= config.center(),
    })
}

/// `-V_ref + (code + 1/2) * Delta_UDR` (shifted for unipolar windows).
pub fn dequantize(word: CodeWord, config: &AdcConfig) -> f64 {
    config.quantizer().value(word.code)
}

/// Conventional ADC: clip to `[-v_ref, v_ref]`, then quantize with `bits`
/// bits over the full window.
pub fn quantize_standard(x: f64, v_ref: f64, bits: u32) -> f64 {
    UniformQuantizer::new(0.0, v_ref, bits).quantize(x.clamp(-v_ref, v_ref))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn cfg() -> AdcConfig {
        AdcConfig::new(0.2, 11).unwrap()
    }

    #[test]
    fn code_examples() {
        assert_eq!(sar_quantize(0.0, &cfg()).unwrap().code, 256);
        assert_eq!(sar_quantize(-0.2, &cfg()).unwrap().code, 0);
        assert_eq!(sar_quantize(0.1, &cfg()).unwrap().code, 384);
        assert_eq!(sar_quantize(0.2 - 1e-12, &cfg()).unwrap().code, 511);
    }

    #[test]
    fn out_of_window_is_a_contract_violation() {
        assert!(sar_quantize(0.2, &cfg()).is_err());
        assert!(sar_quantize(-0.2000001, &cfg()).is_err());
    }

    #[test]
    fn dequantize_examples() {
        let d = 0.4 / 512.0;
        let low = dequantize(CodeWord { code: 0, sign_mod: false }, &cfg());
        assert!((low - (-0.2 + 0.5 * d)).abs() < 1e-15);
        assert!((low + 0.19961).abs() < 1e-5);
        let mid = dequantize(CodeWord { code: 256, sign_mod: true }, &cfg());
        assert!((mid - d / 2.0).abs() < 1e-15);
        assert!((mid - 3.906e-4).abs() < 1e-7);
    }

    #[test]
    fn round_trip_error_is_half_step() {
        let c = cfg();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let worst = (0..10_000)
            .map(|_| {
                let v = rng.random_range(-0.2..0.2);
                (dequantize(sar_quantize(v, &c).unwrap(), &c) - v).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= c.delta() / 2.0 * (1.0 + 1e-12));
    }

    #[test]
    fn error_variance_is_step_squared_over_twelve() {
        let q = UniformQuantizer::new(0.0, 0.2, 9);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000;
        let var = (0..n)
            .map(|_| {
                let v = rng.random_range(-0.2..0.2);
                (q.quantize(v) - v).powi(2)
            })
            .sum::<f64>()
            / n as f64;
        let model = q.step().powi(2) / 12.0;
        assert!((var / model - 1.0).abs() < 0.02, "{var} vs {model}");
    }

    #[test]
    fn standard_quantizer_clips() {
        let d = 0.4 / 2048.0;
        assert!((quantize_standard(0.4, 0.2, 11) - (0.2 - d / 2.0)).abs() < 1e-15);
        assert!((quantize_standard(-5.0, 0.2, 11) - (-0.2 + d / 2.0)).abs() < 1e-15);
        assert!((quantize_standard(0.0, 0.2, 11) - d / 2.0).abs() < 1e-15);
        assert!((quantize_standard(0.123, 0.2, 11) - 0.123).abs() <= d / 2.0);
    }

    #[test]
    fn sign_magnitude_agrees_exhaustively() {
        for bits in 1..=10u32 {
            for half in [0.2, 1.0, 1.65 / 2.0, 0.3] {
                let q = UniformQuantizer::new(0.0, half, bits);
                let step = q.step();
                for k in 0..=q.levels() {
                    let edge = -half + k as f64 * step;
                    let probes = [
                        edge,
                        q.level(i64::from(k) - (1i64 << (bits - 1))),
                        edge - step / 2.0,
                        edge + step / 2.0,
                        edge.next_up(),
                        edge.next_down(),
                        edge + 1e-12,
                        edge - 1e-12,
                    ];
                    for v in probes {
                        let sm = q.sign_magnitude(v);
                        assert_eq!(sm.code, q.code(v), "bits={bits} half={half} v={v}");
                        assert_eq!(q.sar_code(v), q.code(v), "bits={bits} half={half} v={v}");
                        assert_eq!(sm.sign_mod, v >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn midpoints_follow_floor_formula() {
        let q = UniformQuantizer::new(0.0, 0.2, 9);
        for k in 0..512u32 {
            let v = q.value(k);
            assert_eq!(q.code(v), k);
            assert_eq!(((v + 0.2) / q.step()).floor() as u32, k);
        }
    }

    proptest! {
        #[test]
        fn standard_is_clip_then_quantize_and_monotone(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantize_standard(lo, 0.2, 8) <= quantize_standard(hi, 0.2, 8));
            let q = UniformQuantizer::new(0.0, 0.2, 8);
            prop_assert_eq!(quantize_standard(a, 0.2, 8), q.quantize(a.clamp(-0.2, 0.2)));
        }

        #[test]
        fn paths_agree_on_random_inputs(v in -0.3f64..0.3, bits in 1u32..16) {
            let q = UniformQuantizer::new(0.0, 0.2, bits);
            prop_assert_eq!(q.sign_magnitude(v).code, q.code(v));
            prop_assert_eq!(q.sar_code(v), q.code(v));
        }
    }
}
