//! Special functions used across the crate.

use core::f64::consts::{PI, SQRT_2};
use num_traits::Float;

/// `1 / sqrt(2π)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF, accurate in both tails.
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Normal density with the given mean and variance.
#[inline]
pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let sd = var.sqrt();
    std_normal_pdf((x - mean) / sd) / sd
}

#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln B(a, b)`.
#[inline]
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `n!` as a float; exact for the small orders used here.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Differential entropy of a normal law with variance `var`, in nats.
#[inline]
pub fn gaussian_entropy(var: f64) -> f64 {
    0.5 * (2.0 * PI * core::f64::consts::E * var).ln()
}

/// Logistic density with location 0 and the given scale.
#[inline]
pub fn logistic_pdf(z: f64, scale: f64) -> f64 {
    // symmetric form avoids overflow of exp(-z/s) for large negative z
    let t = (-(z.abs()) / scale).exp();
    t / (scale * (1.0 + t) * (1.0 + t))
}

#[inline]
pub fn logistic_cdf(z: f64, scale: f64) -> f64 {
    let t = z / scale;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}
