//! Chi-square distribution functions and the `½χ²_r + ½χ²_{r−1}` mixture.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`, accurate in the upper tail.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// CDF of χ²_r; `r = 0` is the point mass at zero.
pub fn chi2_cdf(r: usize, x: f64) -> f64 {
    if r == 0 {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    gamma_p(r as f64 / 2.0, x / 2.0)
}

/// Upper tail `P(χ²_r > x)`.
pub fn chi2_sf(r: usize, x: f64) -> f64 {
    if r == 0 {
        return if x >= 0.0 { 0.0 } else { 1.0 };
    }
    gamma_q(r as f64 / 2.0, x / 2.0)
}

pub fn mixture_cdf(r: usize, x: f64) -> f64 {
    0.5 * chi2_cdf(r, x) + 0.5 * chi2_cdf(r.saturating_sub(1), x)
}

pub fn mixture_sf(r: usize, x: f64) -> f64 {
    0.5 * chi2_sf(r, x) + 0.5 * chi2_sf(r.saturating_sub(1), x)
}

fn check(r: usize, prob: f64) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument(
            "degrees of freedom must be at least 1".into(),
        ));
    }
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "probability {prob} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Inverts a continuous increasing CDF on `[0, ∞)` by bracketing and bisection.
fn invert<F: Fn(f64) -> f64>(cdf: F, prob: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while cdf(hi) < prob {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Quantile of χ²_r.
pub fn chi2_quantile(r: usize, prob: f64) -> Result<f64> {
    check(r, prob)?;
    Ok(invert(|x| chi2_cdf(r, x), prob))
}

/// Quantile of `½χ²_r + ½χ²_{r−1}` with χ²_0 the point mass at zero.
pub fn mixture_quantile(r: usize, prob: f64) -> Result<f64> {
    check(r, prob)?;
    if r == 1 && prob <= 0.5 {
        return Ok(0.0);
    }
    Ok(invert(|x| mixture_cdf(r, x), prob))
}

/// Two-sided standard normal critical value for `level`.
pub fn normal_critical(level: f64) -> Result<f64> {
    Ok(chi2_quantile(1, level)?.sqrt())
}

/// Reference distribution for region thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileFamily {
    #[default]
    PlainChiSq,
    Mixture,
}

impl QuantileFamily {
    pub fn quantile(self, r: usize, level: f64) -> Result<f64> {
        match self {
            QuantileFamily::PlainChiSq => chi2_quantile(r, level),
            QuantileFamily::Mixture => mixture_quantile(r, level),
        }
    }

    pub fn survival(self, r: usize, x: f64) -> f64 {
        match self {
            QuantileFamily::PlainChiSq => chi2_sf(r, x),
            QuantileFamily::Mixture => mixture_sf(r, x),
        }
    }
}
