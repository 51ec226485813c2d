//! Empirical SQNR by simulation, with `sigma_x = 1` and `V_ref = gamma`.
//!
//! The standard path clips and quantizes with `n` bits; a clipped sample's
//! error is its distance to the clip level, matching the overload integral.
//! The folding path folds, quantizes with `n - 2` bits and unwraps with the
//! true fold count.
//!
//! Overload is a rare event for large `gamma`, so the default estimator
//! splits the input into two strata, `|x| <= V_ref` and `|x| > V_ref`, draws
//! half the samples from each conditional distribution, and weights the
//! stratum means by their exact probabilities.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use serde::Serialize;

use super::{AdcKind, AnalysisError, SqnrQuery};
use crate::frontend::modulo_fold;
use crate::quantizer::UniformQuantizer;
use crate::signals::DistributionKind;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Iid,
    #[default]
    Stratified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonteCarlo {
    pub samples: u64,
    pub seed: u64,
    /// Number of independent streams. Results depend on it, so it is part
    /// of the reproducibility key together with the seed.
    pub workers: usize,
    pub sampling: Sampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    /// Linear SQNR.
    pub sqnr: f64,
    /// Standard error of `sqnr`.
    pub std_error: f64,
    pub samples: u64,
    pub workers: usize,
    pub sampling: Sampling,
}

impl McEstimate {
    pub fn db(&self) -> f64 {
        super::to_db(self.sqnr)
    }

    /// Standard error in dB (first order).
    pub fn db_std_error(&self) -> f64 {
        10.0 / std::f64::consts::LN_10 * self.std_error / self.sqnr
    }
}

impl MonteCarlo {
    pub const MIN_SAMPLES: u64 = 10_000;
    pub const DEFAULT_WORKERS: usize = 4;

    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            workers: Self::DEFAULT_WORKERS,
            sampling: Sampling::Stratified,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn estimate(&self, query: &SqnrQuery) -> Result<McEstimate, AnalysisError> {
        if self.samples < Self::MIN_SAMPLES {
            return Err(AnalysisError::Domain(format!(
                "need at least {} samples, got {}",
                Self::MIN_SAMPLES,
                self.samples
            )));
        }
        if self.workers == 0 {
            return Err(AnalysisError::Domain("need at least one worker".into()));
        }
        if !(3..=UniformQuantizer::MAX_BITS).contains(&query.n) {
            return Err(AnalysisError::Domain(format!(
                "need 3 <= n <= {}, got {}",
                UniformQuantizer::MAX_BITS,
                query.n
            )));
        }
        if !(query.gamma.is_finite() && query.gamma > 0.0) {
            return Err(AnalysisError::Domain(format!(
                "loading factor must be > 0, got {}",
                query.gamma
            )));
        }

        let plan = Plan::new(query, self.sampling, self.samples);
        let workers = self.workers as u64;
        let totals = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let plan = &plan;
                    let seed = self.seed;
                    scope.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(w);
                        plan.strata.map(|s| {
                            let share = s.count / workers + u64::from(w < s.count % workers);
                            plan.run(s.region, share, &mut rng)
                        })
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("monte carlo worker panicked"))
                .fold([Moments::default(); 2], |acc, part| {
                    [acc[0].merge(&part[0]), acc[1].merge(&part[1])]
                })
        });

        let mut distortion = 0.0;
        let mut variance = 0.0;
        for (s, m) in plan.strata.iter().zip(&totals) {
            if s.count == 0 {
                continue;
            }
            distortion += s.weight * m.mean;
            variance += s.weight * s.weight * m.sample_variance() / m.n as f64;
        }
        if distortion.is_nan() || distortion <= 0.0 {
            return Err(AnalysisError::Domain(
                "measured distortion is zero; SQNR is unbounded".into(),
            ));
        }
        let sqnr = 1.0 / distortion;
        Ok(McEstimate {
            sqnr,
            std_error: sqnr * variance.sqrt() / distortion,
            samples: self.samples,
            workers: self.workers,
            sampling: self.sampling,
        })
    }
}

/// Shorthand for `MonteCarlo::new(samples, seed).estimate(query)`.
pub fn monte_carlo_sqnr(
    query: &SqnrQuery,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, AnalysisError> {
    MonteCarlo::new(samples, seed).estimate(query)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Region {
    All,
    Inside,
    Outside,
}

#[derive(Debug, Clone, Copy)]
struct Stratum {
    region: Region,
    weight: f64,
    count: u64,
}

struct Plan {
    distribution: DistributionKind,
    adc: AdcKind,
    gamma: f64,
    strata: [Stratum; 2],
    quantizer: UniformQuantizer,
}

impl Plan {
    fn new(query: &SqnrQuery, sampling: Sampling, samples: u64) -> Self {
        let gamma = query.gamma;
        let quantizer = match query.adc {
            AdcKind::Standard => UniformQuantizer::new(0.0, gamma, query.n),
            AdcKind::Udr => UniformQuantizer::new(0.0, gamma, query.n - 2),
        };
        let empty = Stratum {
            region: Region::Outside,
            weight: 0.0,
            count: 0,
        };
        let strata = match sampling {
            Sampling::Iid => [
                Stratum {
                    region: Region::All,
                    weight: 1.0,
                    count: samples,
                },
                empty,
            ],
            Sampling::Stratified => {
                let (p_in, p_out) = tail_split(query.distribution, gamma);
                if p_out == 0.0 || p_in == 0.0 {
                    let region = if p_out == 0.0 { Region::Inside } else { Region::Outside };
                    [
                        Stratum {
                            region,
                            weight: 1.0,
                            count: samples,
                        },
                        empty,
                    ]
                } else {
                    let half = samples / 2;
                    [
                        Stratum {
                            region: Region::Inside,
                            weight: p_in,
                            count: samples - half,
                        },
                        Stratum {
                            region: Region::Outside,
                            weight: p_out,
                            count: half,
                        },
                    ]
                }
            }
        };
        Self {
            distribution: query.distribution,
            adc: query.adc,
            gamma,
            strata,
            quantizer,
        }
    }

    fn run(&self, region: Region, count: u64, rng: &mut ChaCha8Rng) -> Moments {
        let sampler = match region {
            Region::All => None,
            _ => Some(AbsSampler::new(self.distribution, self.gamma, region == Region::Inside)),
        };
        let mut m = Moments::default();
        let mut block = Vec::with_capacity(BLOCK);
        let mut signs = 0u64;
        for i in 0..count {
            let x = match &sampler {
                None => self.distribution.sample(1.0, rng),
                Some(s) => {
                    if i % 64 == 0 {
                        signs = rng.random();
                    }
                    let a = s.draw(rng);
                    let negative = (signs >> (i % 64)) & 1 == 1;
                    if negative {
                        -a
                    } else {
                        a
                    }
                }
            };
            let e = self.error(x);
            block.push(e * e);
            if block.len() == BLOCK {
                m = m.merge(&Moments::of(&block));
                block.clear();
            }
        }
        m.merge(&Moments::of(&block))
    }

    fn error(&self, x: f64) -> f64 {
        match self.adc {
            AdcKind::Standard => {
                if x.abs() > self.gamma {
                    x.abs() - self.gamma
                } else {
                    self.quantizer.quantize(x) - x
                }
            }
            AdcKind::Udr => {
                let (v, m) = modulo_fold(x, self.gamma);
                self.quantizer.quantize(v) + m as f64 * 2.0 * self.gamma - x
            }
        }
    }
}

/// `(P(|x| <= gamma), P(|x| > gamma))` for unit variance.
fn tail_split(distribution: DistributionKind, gamma: f64) -> (f64, f64) {
    use libm::{erf, erfc};
    match distribution {
        DistributionKind::Uniform => {
            if gamma >= SQRT_3 {
                (1.0, 0.0)
            } else {
                (gamma / SQRT_3, 1.0 - gamma / SQRT_3)
            }
        }
        DistributionKind::Gaussian => (erf(gamma / SQRT_2), erfc(gamma / SQRT_2)),
        DistributionKind::Laplacian => (-(-SQRT_2 * gamma).exp_m1(), (-SQRT_2 * gamma).exp()),
    }
}

fn open01(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(Open01)
}

fn half_normal(rng: &mut ChaCha8Rng) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z.abs()
}

/// Draws `|x|` conditioned on `|x| <= v` (`inside`) or `|x| > v`.
struct AbsSampler {
    distribution: DistributionKind,
    v: f64,
    inside: bool,
    /// Laplacian: `P(|x| <= v)`, the span of the inverted CDF.
    mass: f64,
}

impl AbsSampler {
    fn new(distribution: DistributionKind, v: f64, inside: bool) -> Self {
        Self {
            distribution,
            v,
            inside,
            mass: -(-SQRT_2 * v).exp_m1(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (v, inside) = (self.v, self.inside);
        match self.distribution {
            DistributionKind::Uniform => {
                let u: f64 = rng.random();
                if inside {
                    u * v.min(SQRT_3)
                } else {
                    v + u * (SQRT_3 - v)
                }
            }
            DistributionKind::Laplacian => {
                let b = 1.0 / SQRT_2;
                if inside {
                    // Truncated exponential by inversion.
                    let u: f64 = rng.random();
                    (-b * (-u * self.mass).ln_1p()).min(v)
                } else {
                    v - b * open01(rng).ln()
                }
            }
            DistributionKind::Gaussian => {
                if inside {
                    if v <= 2.0 {
                        loop {
                            let x = v * rng.random::<f64>();
                            if rng.random::<f64>() < (-0.5 * x * x).exp() {
                                return x;
                            }
                        }
                    }
                    loop {
                        let x = half_normal(rng);
                        if x <= v {
                            return x;
                        }
                    }
                } else if v < 1.0 {
                    loop {
                        let x = half_normal(rng);
                        if x > v {
                            return x;
                        }
                    }
                } else {
                    // Marsaglia's tail method.
                    loop {
                        let x = (v * v - 2.0 * open01(rng).ln()).sqrt();
                        if open01(rng) * x < v {
                            return x;
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
fn draw_abs(distribution: DistributionKind, v: f64, inside: bool, rng: &mut ChaCha8Rng) -> f64 {
    AbsSampler::new(distribution, v, inside).draw(rng)
}

/// Squared errors are summarized in blocks of this many samples.
const BLOCK: usize = 4096;

/// Mean and sum of squared deviations, mergeable across workers.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    /// Exact two-pass moments of a block.
    fn of(ys: &[f64]) -> Self {
        if ys.is_empty() {
            return Self::default();
        }
        let n = ys.len() as f64;
        let mean = ys.iter().sum::<f64>() / n;
        let m2 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
        Self {
            n: ys.len() as u64,
            mean,
            m2,
        }
    }

    #[cfg(test)]
    fn push(&mut self, y: f64) {
        self.n += 1;
        let d = y - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (y - self.mean);
    }

    fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Self {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * w,
        }
    }

    fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::sqnr::{overload_variance, sqnr_std, sqnr_udr};

    fn query(distribution: DistributionKind, n: u32, gamma: f64, adc: AdcKind) -> SqnrQuery {
        SqnrQuery {
            distribution,
            n,
            gamma,
            adc,
        }
    }

    #[test]
    fn udr_uniform_example() {
        let q = query(DistributionKind::Uniform, 11, 1.0, AdcKind::Udr);
        let est = monte_carlo_sqnr(&q, 1_000_000, 1).unwrap();
        assert!((est.db() - 58.96).abs() < 0.2, "{}", est.db());
    }

    #[test]
    fn standard_laplacian_example() {
        let q = query(DistributionKind::Laplacian, 11, 0.5, AdcKind::Standard);
        let est = monte_carlo_sqnr(&q, 1_000_000, 2).unwrap();
        let exact = crate::analysis::to_db(sqnr_std(DistributionKind::Laplacian, 11, 0.5).unwrap());
        assert!((est.db() - exact).abs() < 0.2, "{} vs {exact}", est.db());
    }

    #[test]
    fn no_overload_uniform_matches_quantization_only() {
        let g = SQRT_3 * 1.5;
        let q = query(DistributionKind::Uniform, 8, g, AdcKind::Standard);
        let est = monte_carlo_sqnr(&q, 1_000_000, 3).unwrap();
        let exact = crate::analysis::to_db(3.0 * 4f64.powi(8) / (g * g));
        assert!((est.db() - exact).abs() < 0.2, "{} vs {exact}", est.db());
    }

    #[test]
    fn iid_and_stratified_agree_within_standard_errors() {
        for d in DistributionKind::ALL {
            for adc in [AdcKind::Standard, AdcKind::Udr] {
                let q = query(d, 8, 1.2, adc);
                let exact = match adc {
                    AdcKind::Standard => sqnr_std(d, 8, 1.2).unwrap(),
                    AdcKind::Udr => sqnr_udr(8, 1.2).unwrap(),
                };
                for sampling in [Sampling::Iid, Sampling::Stratified] {
                    let est = MonteCarlo::new(200_000, 9)
                        .with_sampling(sampling)
                        .estimate(&q)
                        .unwrap();
                    let z = (est.sqnr - exact).abs() / est.std_error;
                    assert!(z < 4.0, "{d} {adc:?} {sampling:?}: z = {z}");
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed_and_worker_count() {
        let q = query(DistributionKind::Gaussian, 11, 2.0, AdcKind::Standard);
        let a = MonteCarlo::new(20_000, 5).estimate(&q).unwrap();
        let b = MonteCarlo::new(20_000, 5).estimate(&q).unwrap();
        assert_eq!(a, b);
        let c = MonteCarlo::new(20_000, 5).with_workers(3).estimate(&q).unwrap();
        assert_ne!(a.sqnr, c.sqnr);
        assert_eq!(c.workers, 3);
    }

    #[test]
    fn rejects_small_runs() {
        let q = query(DistributionKind::Gaussian, 11, 2.0, AdcKind::Standard);
        assert!(monte_carlo_sqnr(&q, 9_999, 0).is_err());
        assert!(MonteCarlo::new(20_000, 0).with_workers(0).estimate(&q).is_err());
    }

    #[test]
    fn conditional_draws_respect_strata() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in DistributionKind::ALL {
            for v in [0.3, 0.9, 1.5, 2.5, 4.0] {
                for _ in 0..2000 {
                    let a = draw_abs(d, v, true, &mut rng);
                    assert!((0.0..=v).contains(&a), "{d} in {v}: {a}");
                    if d == DistributionKind::Uniform && v >= SQRT_3 {
                        continue;
                    }
                    let b = draw_abs(d, v, false, &mut rng);
                    assert!(b >= v, "{d} out {v}: {b}");
                }
            }
        }
    }

    #[test]
    fn tail_mean_square_matches_overload() {
        // E[(|x| - v)^2 | |x| > v] * P(|x| > v) is the overload variance.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in DistributionKind::ALL {
            for v in [0.5, 1.0, 1.6, 3.0] {
                let (_, p) = tail_split(d, v);
                if p == 0.0 {
                    continue;
                }
                let n = 200_000;
                let m = (0..n)
                    .map(|_| (draw_abs(d, v, false, &mut rng) - v).powi(2))
                    .sum::<f64>()
                    / n as f64;
                let exact = overload_variance(d, v).unwrap();
                assert!((m * p / exact - 1.0).abs() < 0.02, "{d} {v}: {} vs {exact}", m * p);
            }
        }
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let ys: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.01).collect();
        let mut whole = Moments::default();
        ys.iter().for_each(|&y| whole.push(y));
        let mut a = Moments::default();
        let mut b = Moments::default();
        ys[..333].iter().for_each(|&y| a.push(y));
        ys[333..].iter().for_each(|&y| b.push(y));
        let m = a.merge(&b);
        assert_eq!(m.n, whole.n);
        assert!((m.mean - whole.mean).abs() < 1e-12);
        assert!((m.m2 - whole.m2).abs() < 1e-9);
        let blocks = Moments::of(&ys[..100]).merge(&Moments::of(&ys[100..]));
        assert_eq!(blocks.n, whole.n);
        assert!((blocks.mean - whole.mean).abs() < 1e-12);
        assert!((blocks.m2 - whole.m2).abs() < 1e-9);
        assert_eq!(Moments::of(&[]).n, 0);
    }
}
