//! Holomorphic scalar functions used by the ansatzes.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_2_SQRT_PI, LN_2, SQRT_2};

/// `ln cosh θ`, evaluated as `±θ + ln(1 + e^{∓2θ}) − ln 2` so that large
/// `|Re θ|` never overflows.
#[inline]
pub fn log_cosh(theta: C64) -> C64 {
    let (lead, rest) = if theta.re >= 0.0 { (theta, -2.0 * theta) } else { (-theta, 2.0 * theta) };
    lead + ln_one_plus(rest.exp()) - LN_2
}

/// `ln(1 + e)` for `|e| <= 1`.
#[inline]
fn ln_one_plus(e: C64) -> C64 {
    C64::new(0.5 * (2.0 * e.re + e.norm_sqr()).ln_1p(), e.im.atan2(1.0 + e.re))
}

/// `tanh θ` without the `sinh/cosh` overflow of the textbook formula.
#[inline]
pub fn tanh(theta: C64) -> C64 {
    if theta.re >= 0.0 {
        let e = (-2.0 * theta).exp();
        (1.0 - e) / (1.0 + e)
    } else {
        let e = (2.0 * theta).exp();
        (e - 1.0) / (e + 1.0)
    }
}

/// `(ln cosh θ, tanh θ)` from a single exponential.
#[inline]
pub fn log_cosh_and_tanh(theta: C64) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    if theta.re >= 0.0 {
        let e = (-2.0 * theta).exp();
        (theta + ln_one_plus(e) - LN_2, (one - e) / (one + e))
    } else {
        let e = (2.0 * theta).exp();
        (-theta + ln_one_plus(e) - LN_2, (e - one) / (e + one))
    }
}

/// Complex error function.
///
/// Maclaurin series where it is well conditioned (`|Re z| < 1.5`), otherwise
/// the Laplace continued fraction for `erfc` evaluated with modified Lentz.
pub fn erf(z: C64) -> C64 {
    if z.re < 0.0 {
        return -erf(-z);
    }
    if z.re < 1.5 && z.norm() < 8.0 {
        erf_series(z)
    } else {
        C64::new(1.0, 0.0) - erfc_continued_fraction(z)
    }
}

fn erf_series(z: C64) -> C64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let threshold = z2.norm();
    for k in 1..2000 {
        term = -term * z2 / k as f64;
        let contribution = term / (2 * k + 1) as f64;
        sum += contribution;
        if (k as f64) > threshold && contribution.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum * FRAC_2_SQRT_PI
}

// erfc(z) = e^{-z²}/√π / g with g = z + (1/2)/(z + 1/(z + (3/2)/(z + ...))), Re z ≥ 0.
fn erfc_continued_fraction(z: C64) -> C64 {
    const TINY: f64 = 1e-300;
    let tiny = C64::new(TINY, 0.0);
    let mut g = if z.norm() < TINY { tiny } else { z };
    let mut c = g;
    let mut d = C64::new(0.0, 0.0);
    for j in 1..5000 {
        let a = j as f64 / 2.0;
        d = z + a * d;
        if d.norm() < TINY {
            d = tiny;
        }
        c = z + a / c;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        g *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / g * (FRAC_2_SQRT_PI / 2.0)
}

/// Gaussian error linear unit `x/2 · (1 + erf(x/√2))`, continued to complex `x`.
#[inline]
pub fn gelu(x: C64) -> C64 {
    0.5 * x * (1.0 + erf(x / SQRT_2))
}

/// Derivative of [`gelu`].
#[inline]
pub fn gelu_derivative(x: C64) -> C64 {
    let gauss = (-0.5 * x * x).exp() * (FRAC_2_SQRT_PI / (2.0 * SQRT_2));
    0.5 * (1.0 + erf(x / SQRT_2)) + x * gauss
}

/// Both `gelu(x)` and its derivative, sharing one `erf` evaluation.
#[inline]
pub fn gelu_with_derivative(x: C64) -> (C64, C64) {
    let phi = 0.5 * (1.0 + erf(x / SQRT_2));
    let gauss = (-0.5 * x * x).exp() * (FRAC_2_SQRT_PI / (2.0 * SQRT_2));
    (x * phi, phi + x * gauss)
}
