//! Named experiment configurations.
//!
//! * `fig5`: four-tone mixture, 53 kHz, `V_ref = 0.2 V`, 11 bits (9 + 2).
//!   Each tone has amplitude 0.3 V and all four crest together at
//!   `t = 50 ms`, giving a 1.2 V peak; the mixture starts at 0 V.
//! * `fig6`: speech from a WAV file, `V_ref = 0.2 V`, 11 bits, full scale
//!   of the audio mapped to 1.2 V.
//! * `proto`: positive-only 12-bit converter (10 + 2) at 200 ksps with
//!   `V_ref = 1.65 V` and a 5 V peak input.

use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use serde::Serialize;

use crate::frontend::{AdcConfig, Polarity};
use crate::signals::{Sinusoid, SignalKind, SignalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    Fig5,
    Fig6,
    Proto,
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig5" => Ok(Self::Fig5),
            "fig6" => Ok(Self::Fig6),
            "proto" => Ok(Self::Proto),
            other => Err(format!("unknown preset '{other}' (fig5, fig6, proto)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub config: AdcConfig,
    /// Hertz; `None` when the rate comes from the input file.
    pub sample_rate: Option<f64>,
    /// Synthetic input, if the preset defines one.
    pub signal: Option<SignalSpec>,
    /// Volts at digital full scale, for PCM input.
    pub full_scale: Option<f64>,
}

pub const FIG5_RATE: f64 = 53_000.0;
pub const FIG5_TONES: [f64; 4] = [30.0, 70.0, 200.0, 300.0];
pub const FIG5_AMPLITUDE: f64 = 0.3;
pub const FIG5_DURATION: f64 = 0.1;
/// Instant at which every tone reaches its crest.
pub const FIG5_PEAK_TIME: f64 = 0.05;
pub const PROTO_RATE: f64 = 200_000.0;

pub fn preset(name: PresetName) -> Preset {
    match name {
        PresetName::Fig5 => Preset {
            name,
            config: AdcConfig::new(0.2, 11).expect("valid preset"),
            sample_rate: Some(FIG5_RATE),
            signal: Some(fig5_signal()),
            full_scale: None,
        },
        PresetName::Fig6 => Preset {
            name,
            config: AdcConfig::new(0.2, 11).expect("valid preset"),
            sample_rate: None,
            signal: None,
            full_scale: Some(1.2),
        },
        PresetName::Proto => Preset {
            name,
            config: AdcConfig::new(1.65, 12)
                .expect("valid preset")
                .with_polarity(Polarity::Unipolar),
            sample_rate: Some(PROTO_RATE),
            signal: Some(proto_signal()),
            full_scale: None,
        },
    }
}

pub fn fig5_signal() -> SignalSpec {
    SignalSpec {
        kind: SignalKind::SinusoidMixture(
            FIG5_TONES
                .iter()
                .map(|&f| {
                    let phase = FRAC_PI_2 - 2.0 * PI * f * FIG5_PEAK_TIME;
                    Sinusoid::new(FIG5_AMPLITUDE, f, phase.rem_euclid(2.0 * PI))
                })
                .collect(),
        ),
        duration: FIG5_DURATION,
        sample_rate: FIG5_RATE,
    }
}

/// `2.5 - 1.5 cos(2 pi 500 t) - cos(2 pi 1500 t)`: starts at 0 V, stays in
/// `[0, 5]` V and reaches 5 V at `t = 1 ms`. The constant is a
/// zero-frequency term.
pub fn proto_signal() -> SignalSpec {
    let minus_cos = 3.0 * FRAC_PI_2;
    SignalSpec {
        kind: SignalKind::SinusoidMixture(vec![
            Sinusoid::new(2.5, 0.0, FRAC_PI_2),
            Sinusoid::new(1.5, 500.0, minus_cos),
            Sinusoid::new(1.0, 1500.0, minus_cos),
        ]),
        duration: 0.01,
        sample_rate: PROTO_RATE,
    }
}
