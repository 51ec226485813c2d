//! Parameter sweeps and their CSV layouts.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::crossover::crossover_gamma;
use super::hardware::{dynamic_power_au, dynamic_power_ratio, flash_area_model, HwQuery};
use super::montecarlo::MonteCarlo;
use super::sqnr::{sqnr_std, sqnr_udr};
use super::{to_db, AdcKind, AnalysisError, SqnrQuery};
use crate::signals::DistributionKind;

/// `count` log-spaced points from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, AnalysisError> {
    LogRange { lo, hi, count }.points()
}

/// `lo:hi:count` on a log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl LogRange {
    pub fn points(&self) -> Result<Vec<f64>, AnalysisError> {
        let LogRange { lo, hi, count } = *self;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(AnalysisError::Domain(format!(
                "need 0 < lo <= hi, got {lo}:{hi}"
            )));
        }
        if count == 0 || (count == 1 && lo != hi) {
            return Err(AnalysisError::Domain(format!(
                "need at least two points for {lo}:{hi}, got {count}"
            )));
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        let last = (count - 1) as f64;
        Ok((0..count)
            .map(|i| match i {
                0 => lo,
                i if i == count - 1 => hi,
                i => (a + (b - a) * i as f64 / last).exp(),
            })
            .collect())
    }
}

impl FromStr for LogRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(format!("expected lo:hi:count, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        let range = LogRange {
            lo: num(lo)?,
            hi: num(hi)?,
            count: count
                .trim()
                .parse()
                .map_err(|e| format!("'{count}': {e}"))?,
        };
        range.points().map_err(|e| e.to_string())?;
        Ok(range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McColumns {
    pub std_db: f64,
    pub std_se_db: f64,
    pub udr_db: f64,
    pub udr_se_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqnrRow {
    pub distribution: DistributionKind,
    pub n: u32,
    pub gamma: f64,
    pub sqnr_std_db: f64,
    pub sqnr_udr_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McColumns>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverRow {
    pub distribution: DistributionKind,
    pub n: u32,
    pub crossover_gamma: Option<f64>,
}

pub fn sqnr_sweep(
    distributions: &[DistributionKind],
    bits: &[u32],
    gammas: &LogRange,
    monte_carlo: Option<&MonteCarlo>,
) -> Result<Vec<SqnrRow>, AnalysisError> {
    let grid = gammas.points()?;
    let mut rows = Vec::with_capacity(distributions.len() * bits.len() * grid.len());
    for &distribution in distributions {
        for &n in bits {
            for &gamma in &grid {
                let mc = match monte_carlo {
                    None => None,
                    Some(mc) => {
                        let run = |adc| {
                            mc.estimate(&SqnrQuery {
                                distribution,
                                n,
                                gamma,
                                adc,
                            })
                        };
                        let s = run(AdcKind::Standard)?;
                        let u = run(AdcKind::Udr)?;
                        Some(McColumns {
                            std_db: s.db(),
                            std_se_db: s.db_std_error(),
                            udr_db: u.db(),
                            udr_se_db: u.db_std_error(),
                        })
                    }
                };
                rows.push(SqnrRow {
                    distribution,
                    n,
                    gamma,
                    sqnr_std_db: to_db(sqnr_std(distribution, n, gamma)?),
                    sqnr_udr_db: to_db(sqnr_udr(n, gamma)?),
                    monte_carlo: mc,
                });
            }
        }
    }
    Ok(rows)
}

pub fn crossover_rows(
    distributions: &[DistributionKind],
    bits: &[u32],
) -> Result<Vec<CrossoverRow>, AnalysisError> {
    let mut rows = Vec::new();
    for &distribution in distributions {
        for &n in bits {
            rows.push(CrossoverRow {
                distribution,
                n,
                crossover_gamma: crossover_gamma(distribution, n)?,
            });
        }
    }
    Ok(rows)
}

/// SQNR rows, then (if any) a blank line and the crossover section.
pub fn write_sqnr_csv<W: Write>(
    mut out: W,
    rows: &[SqnrRow],
    crossovers: &[CrossoverRow],
) -> csv::Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let with_mc = rows.iter().any(|r| r.monte_carlo.is_some());
        let mut header = vec!["distribution", "n", "gamma", "sqnr_std_db", "sqnr_udr_db"];
        if with_mc {
            header.extend(["mc_std_db", "mc_std_se_db", "mc_udr_db", "mc_udr_se_db"]);
        }
        w.write_record(&header)?;
        for r in rows {
            let mut rec = vec![
                r.distribution.to_string(),
                r.n.to_string(),
                r.gamma.to_string(),
                r.sqnr_std_db.to_string(),
                r.sqnr_udr_db.to_string(),
            ];
            if let Some(m) = r.monte_carlo {
                rec.extend([m.std_db, m.std_se_db, m.udr_db, m.udr_se_db].map(|v| v.to_string()));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    if !crossovers.is_empty() {
        out.write_all(b"\n")?;
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["distribution", "n", "crossover_gamma"])?;
        for c in crossovers {
            w.write_record([
                c.distribution.to_string(),
                c.n.to_string(),
                c.crossover_gamma
                    .map_or_else(|| "none".to_string(), |g| g.to_string()),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

pub const AREA_BITS: std::ops::RangeInclusive<u32> = 4..=14;
pub const AREA_LAMBDAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaRow {
    pub n_bits: u32,
    pub lambda: f64,
    pub comparators_std: u64,
    pub comparators_udr: u64,
}

pub fn area_sweep(
    bits: impl IntoIterator<Item = u32>,
    lambdas: &[f64],
) -> Result<Vec<AreaRow>, AnalysisError> {
    let mut rows = Vec::new();
    for n1 in bits {
        for &lambda in lambdas {
            let a = flash_area_model(&HwQuery { n1, lambda })?;
            rows.push(AreaRow {
                n_bits: n1,
                lambda,
                comparators_std: a.comparators_std,
                comparators_udr: a.comparators_udr,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerRow {
    pub resolution_volts: f64,
    pub lambda: f64,
    pub power_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_std_au: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_udr_au: Option<f64>,
}

/// Power rows over a grid of step sizes. `absolute` adds the arbitrary-unit
/// curves for a folding converter with `n1` bits.
pub fn power_sweep(
    resolutions: &LogRange,
    lambdas: &[f64],
    absolute: Option<u32>,
) -> Result<Vec<PowerRow>, AnalysisError> {
    let mut rows = Vec::new();
    for delta in resolutions.points()? {
        for &lambda in lambdas {
            let au = absolute.map(|n1| dynamic_power_au(delta, n1, lambda)).transpose()?;
            rows.push(PowerRow {
                resolution_volts: delta,
                lambda,
                power_ratio: dynamic_power_ratio(lambda)?,
                p_std_au: au.map(|p| p.0),
                p_udr_au: au.map(|p| p.1),
            });
        }
    }
    Ok(rows)
}

pub fn write_area_csv<W: Write>(out: W, rows: &[AreaRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_bits", "lambda", "comparators_std", "comparators_udr"])?;
    for r in rows {
        w.write_record([
            r.n_bits.to_string(),
            r.lambda.to_string(),
            r.comparators_std.to_string(),
            r.comparators_udr.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_power_csv<W: Write>(out: W, rows: &[PowerRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let absolute = rows.first().is_some_and(|r| r.p_std_au.is_some());
    let mut header = vec!["resolution_volts", "lambda", "power_ratio"];
    if absolute {
        header.extend(["p_std_au", "p_udr_au"]);
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.resolution_volts.to_string(),
            r.lambda.to_string(),
            r.power_ratio.to_string(),
        ];
        if let (Some(s), Some(u)) = (r.p_std_au, r.p_udr_au) {
            rec.push(s.to_string());
            rec.push(u.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = log_grid(0.1, 10.0, 200).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!((g[0], g[199]), (0.1, 10.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(0.0, 1.0, 5).is_err());
        assert!(log_grid(2.0, 1.0, 5).is_err());
        assert!(log_grid(1.0, 2.0, 1).is_err());
        assert_eq!(log_grid(1.0, 1.0, 1).unwrap(), vec![1.0]);
    }

    #[test]
    fn range_parsing() {
        let r: LogRange = "0.1:10:200".parse().unwrap();
        assert_eq!(r, LogRange { lo: 0.1, hi: 10.0, count: 200 });
        assert!("0.1:10".parse::<LogRange>().is_err());
        assert!("-1:10:5".parse::<LogRange>().is_err());
        assert!("a:10:5".parse::<LogRange>().is_err());
    }

    #[test]
    fn uniform_rows_show_twelve_db_without_overload() {
        let r = LogRange { lo: 0.1, hi: 10.0, count: 200 };
        let rows = sqnr_sweep(&[DistributionKind::Uniform], &[11], &r, None).unwrap();
        assert_eq!(rows.len(), 200);
        for row in rows.iter().filter(|r| r.gamma >= 3f64.sqrt()) {
            assert!((row.sqnr_std_db - row.sqnr_udr_db - 12.041_199_826_559_248).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_layouts() {
        let rows = area_sweep(AREA_BITS, &AREA_LAMBDAS).unwrap();
        assert_eq!(rows.len(), 44);
        let mut buf = Vec::new();
        write_area_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n_bits,lambda,comparators_std,comparators_udr\n"));
        assert!(text.contains("\n9,4,1024,256\n"));

        let p = power_sweep(&LogRange { lo: 1e-3, hi: 1e-3, count: 1 }, &[2.0], None).unwrap();
        let mut buf = Vec::new();
        write_power_csv(&mut buf, &p).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "resolution_volts,lambda,power_ratio\n0.001,2,0.25\n"
        );

        let cross = crossover_rows(&[DistributionKind::Gaussian], &[11]).unwrap();
        let mut buf = Vec::new();
        write_sqnr_csv(&mut buf, &[], &cross).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\n\ndistribution,n,crossover_gamma\ngaussian,11,"));
    }
}
