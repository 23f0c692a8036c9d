//! Pearson chi-square goodness of fit.

use alloc::vec::Vec;

/// Expected counts below this are pooled into one bin.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Tests `observed` counts against `expected` probabilities.
///
/// Bins with expected count below [`MIN_EXPECTED`] are pooled. A bin with
/// zero expectation but nonzero observations rejects outright (`p = 0`).
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquare {
    debug_assert_eq!(observed.len(), expected.len());
    let n: u64 = observed.iter().sum();
    let n = n as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = n * p.max(0.0);
        if e >= MIN_EXPECTED {
            bins.push((o as f64, e));
        } else {
            pooled_o += o as f64;
            pooled_e += e;
        }
    }
    if pooled_o > 0.0 || pooled_e > 0.0 {
        bins.push((pooled_o, pooled_e));
    }
    let mut statistic = 0.0;
    let mut support = 0usize;
    for &(o, e) in &bins {
        if e <= 0.0 {
            if o > 0.0 {
                return ChiSquare { statistic: f64::INFINITY, dof: 0, p_value: 0.0 };
            }
            continue;
        }
        support += 1;
        statistic += (o - e) * (o - e) / e;
    }
    let dof = support.saturating_sub(1);
    let p_value = if dof == 0 { 1.0 } else { chi_square_sf(statistic, dof as f64) };
    ChiSquare { statistic, dof, p_value }
}

/// Survival function of the chi-square distribution.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(0.5 * dof, 0.5 * x)
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut term = sum;
    let mut ap = a;
    for _ in 0..1000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - libm::lgamma(a))
}

// Lentz's method for the continued fraction of Q(a, x).
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - libm::lgamma(a)) * h
}
