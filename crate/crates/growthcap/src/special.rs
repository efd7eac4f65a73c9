//! Special functions and adaptive quadrature.
//!
//! The regularized incomplete gamma ratio backs the false-alarm bound of the
//! side-information test; the Gauss–Kronrod integrator backs ergodic-capacity
//! expectations over parametric gain distributions.

use crate::error::{Error, Result};

const GAMMAINC_MAX_ITERS: usize = 400;
const GAMMAINC_EPS: f64 = 1e-16;
const GAMMAINC_FPMIN: f64 = 1e-300;

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn log_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection formula
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - log_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(s, x) = γ(s, x) / Γ(s).
///
/// Series expansion for x < s + 1, continued fraction for the complement
/// otherwise; relative accuracy well below 1e-10 over the test shapes.
pub fn reg_lower_gamma(s: f64, x: f64) -> f64 {
    assert!(s > 0.0, "shape must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < s + 1.0 {
        lower_gamma_series(s, x)
    } else {
        1.0 - upper_gamma_cf(s, x)
    }
}

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
pub fn reg_upper_gamma(s: f64, x: f64) -> f64 {
    assert!(s > 0.0, "shape must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < s + 1.0 {
        1.0 - lower_gamma_series(s, x)
    } else {
        upper_gamma_cf(s, x)
    }
}

fn lower_gamma_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut a = s;
    for _ in 0..GAMMAINC_MAX_ITERS {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term.abs() < sum.abs() * GAMMAINC_EPS {
            break;
        }
    }
    sum * (-x + s * x.ln() - log_gamma(s)).exp()
}

// Lentz's continued fraction for Q(s, x), valid for x >= s + 1.
fn upper_gamma_cf(s: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / GAMMAINC_FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMAINC_MAX_ITERS {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < GAMMAINC_FPMIN {
            d = GAMMAINC_FPMIN;
        }
        c = b + an / c;
        if c.abs() < GAMMAINC_FPMIN {
            c = GAMMAINC_FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMAINC_EPS {
            break;
        }
    }
    (-x + s * x.ln() - log_gamma(s)).exp() * h
}

// Gauss-Kronrod 7-15 pair on [-1, 1] (QUADPACK abscissae/weights).
const KRONROD_NODES: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_5,
    0.405_845_151_377_397_2,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_4,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_812_6,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.209_482_141_084_727_8,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_9,
    0.104_790_010_322_250_2,
    0.063_092_092_629_978_55,
    0.022_935_322_010_529_22,
];
// Gauss-7 weights, aligned with the odd Kronrod nodes (indices 0, 2, 4, 6).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let f_mid = f(mid);
    let mut kronrod = KRONROD_WEIGHTS[0] * f_mid;
    let mut gauss = GAUSS_WEIGHTS[0] * f_mid;
    for i in 1..8 {
        let offset = half * KRONROD_NODES[i];
        let pair = f(mid - offset) + f(mid + offset);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 0 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Splits the interval with the largest error estimate until the summed
/// estimate meets `rel_tol * |value|` (or an absolute floor of 1e-14).
/// Errors out with the achieved tolerance when the subdivision budget is
/// exhausted.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 4096;
    let (value, err) = gauss_kronrod(&f, a, b);
    let mut intervals = vec![(a, b, value, err)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        let target = (rel_tol * total.abs()).max(1e-14);
        if total_err <= target {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNonConvergence {
                achieved: total_err / total.abs().max(1e-300),
                requested: rel_tol,
            });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod(&f, lo, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}
