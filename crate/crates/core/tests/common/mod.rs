//! Independent numerical oracles. Nothing here calls the closed forms under
//! test; they integrate the defining densities directly.

#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

use udr_adc::DistributionKind;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * h, (k - g).abs() * h)
}

/// Globally adaptive Gauss-Kronrod 7/15: keep bisecting the interval with
/// the largest error estimate until the summed estimate meets `rel_tol`
/// or the interval budget runs out.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = kronrod(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || parts.len() >= MAX_INTERVALS {
            return total;
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (x, y) in [(lo, mid), (mid, hi)] {
            let (v, e) = kronrod(f, x, y);
            parts.push((x, y, v, e));
        }
    }
}

pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Unit-variance density of each input model.
pub fn density(d: DistributionKind, x: f64) -> f64 {
    match d {
        DistributionKind::Uniform => {
            let a = 3f64.sqrt();
            if x.abs() <= a {
                0.5 / a
            } else {
                0.0
            }
        }
        DistributionKind::Gaussian => normal_density(x),
        DistributionKind::Laplacian => {
            let b = 1.0 / SQRT_2;
            (-x.abs() / b).exp() / (2.0 * b)
        }
    }
}

/// `Q(x)` by quadrature of the normal density over `[x, x + 40]`.
pub fn q_oracle(x: f64) -> f64 {
    integrate(&normal_density, x, x + 40.0, 1e-15)
}

/// `2 * integral_{g}^{inf} (x - g)^2 f(x) dx`, integrated to relative
/// accuracy 1e-13 over `[g, g + 64]` (the uniform support ends at sqrt 3).
pub fn overload_oracle(d: DistributionKind, gamma: f64) -> f64 {
    let end = match d {
        DistributionKind::Uniform => 3f64.sqrt(),
        _ => gamma + 64.0,
    };
    if gamma >= end {
        return 0.0;
    }
    let f = move |x: f64| (x - gamma).powi(2) * density(d, x);
    // Split near the clip level, where the integrand does its work.
    let knees = [gamma, gamma + 0.5, gamma + 2.0, gamma + 8.0, end];
    let mut total = 0.0;
    for w in knees.windows(2) {
        let (a, b) = (w[0].min(end), w[1].min(end));
        if b > a {
            total += integrate(&f, a, b, 1e-14);
        }
    }
    2.0 * total
}

/// SQNR of the clipping converter from the quadrature overload.
pub fn sqnr_std_oracle(d: DistributionKind, n: u32, gamma: f64) -> f64 {
    1.0 / (gamma * gamma / (3.0 * 4f64.powi(n as i32)) + overload_oracle(d, gamma))
}

pub fn sqnr_udr_oracle(n: u32, gamma: f64) -> f64 {
    let delta = 2.0 * gamma / 2f64.powi(n as i32 - 2);
    12.0 / (delta * delta)
}

/// Illinois (modified regula falsi) root of `f` inside a sign-changing
/// bracket.
pub fn illinois(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    assert!(fa * fb < 0.0, "bracket [{a}, {b}] does not change sign");
    for _ in 0..500 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            // Retained endpoint: halve its weight so it eventually moves.
            fa *= 0.5;
        }
        b = c;
        fb = fc;
        if (b - a).abs() <= tol * b.abs() {
            return b;
        }
    }
    b
}

/// Crossover from the quadrature oracle: scan a 1000-point geometric grid
/// on `[1e-3, 10]` for the first sign change, then Illinois.
pub fn crossover_oracle(d: DistributionKind, n: u32) -> Option<f64> {
    let f = move |g: f64| sqnr_udr_oracle(n, g).ln() - sqnr_std_oracle(d, n, g).ln();
    let points = 1000;
    let grid: Vec<f64> = (0..points)
        .map(|i| 1e-3 * (1e4f64).powf(i as f64 / (points - 1) as f64))
        .collect();
    for w in grid.windows(2) {
        if f(w[0]) * f(w[1]) < 0.0 {
            return Some(illinois(&f, w[0], w[1], 1e-13));
        }
    }
    None
}
