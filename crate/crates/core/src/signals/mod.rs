//! Input sample streams: synthetic generation, growth-rate analysis and file I/O.
//!
//! A [`SampleStream`] is the `x[n]` side of the converter: real-valued volts
//! taken at a fixed rate. Streams come from [`generate`] (sinusoid mixtures
//! or i.i.d. random processes), from CSV files, or from 16-bit mono WAV.

mod io;

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{read_csv, read_pcm_audio, write_csv, write_pcm_audio};

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sample stream is empty")]
    Empty,
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("audio format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Amplitude distribution of an i.i.d. random input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Uniform,
    Gaussian,
    Laplacian,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 3] = [Self::Uniform, Self::Gaussian, Self::Laplacian];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Gaussian => "gaussian",
            Self::Laplacian => "laplacian",
        }
    }

    /// Draw one zero-mean sample with standard deviation `sigma`.
    ///
    /// Uniform is supported on `[-sqrt(3) sigma, sqrt(3) sigma]`; Laplacian
    /// has scale `b = sigma / sqrt(2)` and is drawn by inverting its CDF.
    pub fn sample<R: Rng + ?Sized>(self, sigma: f64, rng: &mut R) -> f64 {
        match self {
            Self::Uniform => {
                let half = 3f64.sqrt() * sigma;
                rng.random_range(-half..half)
            }
            Self::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                sigma * z
            }
            Self::Laplacian => {
                let b = sigma / SQRT_2;
                let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    }
}

impl std::str::FromStr for DistributionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Self::Uniform),
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "laplacian" | "laplace" => Ok(Self::Laplacian),
            other => Err(format!("unknown distribution '{other}'")),
        }
    }
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One term `amplitude * sin(2 pi frequency t + phase)` of a mixture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl Sinusoid {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SignalKind {
    SinusoidMixture(Vec<Sinusoid>),
    RandomProcess {
        distribution: DistributionKind,
        sigma: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub kind: SignalKind,
    /// Seconds.
    pub duration: f64,
    /// Hertz.
    pub sample_rate: f64,
}

impl SignalSpec {
    pub fn validate(&self) -> Result<(), SignalError> {
        let bad = |m: String| Err(SignalError::InvalidSpec(m));
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return bad(format!("sample rate must be > 0, got {}", self.sample_rate));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be > 0, got {}", self.duration));
        }
        match &self.kind {
            SignalKind::SinusoidMixture(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if !(t.amplitude.is_finite() && t.amplitude >= 0.0) {
                        return bad(format!("term {i}: amplitude must be >= 0"));
                    }
                    if !(t.frequency.is_finite() && t.frequency >= 0.0) {
                        return bad(format!("term {i}: frequency must be >= 0"));
                    }
                    if !t.phase.is_finite() {
                        return bad(format!("term {i}: phase must be finite"));
                    }
                }
            }
            SignalKind::RandomProcess { sigma, .. } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return bad(format!("sigma must be > 0, got {sigma}"));
                }
            }
        }
        Ok(())
    }

    /// Number of samples `round(duration * sample_rate)`, at least one.
    pub fn sample_count(&self) -> usize {
        ((self.duration * self.sample_rate).round() as usize).max(1)
    }
}

/// Real-valued samples in volts at a fixed rate. Never empty, always finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStream {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl SampleStream {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::Empty);
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite { index });
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(SignalError::Domain(format!(
                "sample rate must be > 0, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Sampling period `T = 1 / sample_rate`.
    pub fn period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|x[k] - x[k-1]|`; zero for a single sample.
    pub fn max_increment(&self) -> f64 {
        self.samples
            .windows(2)
            .fold(0.0, |m, w| m.max((w[1] - w[0]).abs()))
    }
}

/// Materialize `spec`. Deterministic for a fixed `(spec, seed)`.
pub fn generate(spec: &SignalSpec, seed: u64) -> Result<SampleStream, SignalError> {
    spec.validate()?;
    let count = spec.sample_count();
    let period = 1.0 / spec.sample_rate;
    let samples = match &spec.kind {
        SignalKind::SinusoidMixture(terms) => (0..count)
            .map(|n| {
                let t = n as f64 * period;
                terms
                    .iter()
                    .map(|s| s.amplitude * (2.0 * PI * s.frequency * t + s.phase).sin())
                    .sum()
            })
            .collect(),
        SignalKind::RandomProcess {
            distribution,
            sigma,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| distribution.sample(*sigma, &mut rng))
                .collect()
        }
    };
    SampleStream::new(samples, spec.sample_rate)
}

/// Exact bound `sum a_i * 2 pi f_i` on `|dx/dt|` for a sinusoid mixture.
pub fn lipschitz_bound(spec: &SignalSpec) -> Result<f64, SignalError> {
    match &spec.kind {
        SignalKind::SinusoidMixture(terms) => Ok(terms
            .iter()
            .map(|s| s.amplitude * 2.0 * PI * s.frequency)
            .sum()),
        SignalKind::RandomProcess { .. } => Err(SignalError::Unsupported(
            "random processes have no finite Lipschitz bound",
        )),
    }
}

/// Largest sampling period that keeps consecutive samples within one fold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingBound {
    /// Constant input; it never wraps, so any period works.
    Unconstrained,
    AtMost(f64),
}

impl SamplingBound {
    pub fn admits(self, period: f64) -> bool {
        match self {
            Self::Unconstrained => true,
            Self::AtMost(t) => period <= t,
        }
    }
}

/// `T <= 2 v_ref / alpha`.
pub fn max_sampling_period(alpha: f64, v_ref: f64) -> Result<SamplingBound, SignalError> {
    if !(alpha >= 0.0 && v_ref > 0.0) || !alpha.is_finite() || !v_ref.is_finite() {
        return Err(SignalError::Domain(format!(
            "need alpha >= 0 and v_ref > 0, got alpha={alpha}, v_ref={v_ref}"
        )));
    }
    if alpha == 0.0 {
        return Ok(SamplingBound::Unconstrained);
    }
    Ok(SamplingBound::AtMost(2.0 * v_ref / alpha))
}
