//! Loading factor at which the two converters have equal SQNR.

use super::sqnr::{sqnr_std, sqnr_udr};
use super::AnalysisError;
use crate::signals::DistributionKind;

pub const SCAN_LO: f64 = 1e-3;
pub const SCAN_HI: f64 = 10.0;
pub const SCAN_POINTS: usize = 400;

/// `ln SQNR_UDR - ln SQNR_STD`; positive where the folding converter wins.
pub fn log_advantage(distribution: DistributionKind, n: u32, gamma: f64) -> Result<f64, AnalysisError> {
    Ok(sqnr_udr(n, gamma)?.ln() - sqnr_std(distribution, n, gamma)?.ln())
}

/// First sign change of [`log_advantage`] on a 400-point log grid over
/// `[1e-3, 10]`, refined by bisection. `None` when the grid shows no sign
/// change.
pub fn crossover_gamma(distribution: DistributionKind, n: u32) -> Result<Option<f64>, AnalysisError> {
    let f = |g: f64| log_advantage(distribution, n, g);
    let grid = super::sweep::log_grid(SCAN_LO, SCAN_HI, SCAN_POINTS)?;
    let mut lo = grid[0];
    let mut f_lo = f(lo)?;
    for &hi in &grid[1..] {
        let f_hi = f(hi)?;
        if f_lo == 0.0 {
            return Ok(Some(lo));
        }
        if f_lo.signum() != f_hi.signum() {
            return bisect(f, lo, hi, f_lo).map(Some);
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(None)
}

fn bisect(
    f: impl Fn(f64) -> Result<f64, AnalysisError>,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
) -> Result<f64, AnalysisError> {
    let lo_sign = f_lo.signum();
    // Far tighter than needed, so stored values are stable to the last digits.
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_crossover_is_below_sqrt3() {
        for n in [4, 8, 11, 16] {
            let g = crossover_gamma(DistributionKind::Uniform, n).unwrap().unwrap();
            assert!(g > 0.0 && g < 3f64.sqrt(), "n={n}: {g}");
        }
    }

    #[test]
    fn sign_flips_across_the_crossover() {
        for d in DistributionKind::ALL {
            for n in [8, 11] {
                let g = crossover_gamma(d, n).unwrap().unwrap();
                assert!(log_advantage(d, n, g * (1.0 - 1e-6)).unwrap() > 0.0, "{d} {n}");
                assert!(log_advantage(d, n, g * (1.0 + 1e-6)).unwrap() < 0.0, "{d} {n}");
            }
        }
    }

    #[test]
    fn crossover_moves_with_bits() {
        for d in DistributionKind::ALL {
            let a = crossover_gamma(d, 8).unwrap().unwrap();
            let b = crossover_gamma(d, 11).unwrap().unwrap();
            assert!(b > a, "{d}: {a} {b}");
        }
    }

    #[test]
    fn rejects_bad_bits() {
        assert!(crossover_gamma(DistributionKind::Gaussian, 2).is_err());
    }
}
