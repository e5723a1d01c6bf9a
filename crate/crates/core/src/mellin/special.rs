//! Complex log-gamma, digamma and the regularized incomplete gamma pair.
//!
//! Log-gamma is the principal branch: analytic on the plane cut along the
//! non-positive real axis, real on the positive axis, and equal to the limit
//! from above on the cut itself.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::MellinError;

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Stirling threshold: below this modulus the argument is shifted upward.
const STIRLING_MIN: f64 = 15.0;

/// B_{2k} / (2k (2k - 1)) for k = 1..=9.
const STIRLING_COEFFS: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
];

/// B_{2k} / (2k) for k = 1..=9.
const DIGAMMA_COEFFS: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43_867.0 / 14_364.0,
];

fn nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal-branch `ln Γ(z)`.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64, MellinError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(MellinError::Domain(format!("log-gamma of non-finite {z}")));
    }
    if nonpositive_integer(z) {
        return Err(MellinError::GammaPole { at: z.re });
    }
    Ok(log_gamma_unchecked(z))
}

/// Real `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma needs a positive argument, got {x}");
    log_gamma_unchecked(Complex64::new(x, 0.0)).re
}

/// `ln B(x, y)` for positive arguments.
pub fn ln_beta(x: f64, y: f64) -> f64 {
    ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)
}

pub(crate) fn log_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return log_gamma_upper(z.conj()).conj();
    }
    log_gamma_upper(z)
}

// Im z >= 0 from here on.
fn log_gamma_upper(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Reflection with a log-sine that is continuous on the closed upper
        // half plane: sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z}).
        let w = Complex64::new(0.0, 2.0 * PI) * z;
        let log_sin = (Complex64::new(1.0, 0.0) - w.exp()).ln()
            - Complex64::new(0.0, PI) * z
            + Complex64::new(-std::f64::consts::LN_2, PI / 2.0);
        return Complex64::new(LN_PI, 0.0) - log_sin - log_gamma_upper(1.0 - z);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < STIRLING_MIN {
        shift += w.ln();
        w += 1.0;
    }
    stirling(w) - shift
}

/// `ln Γ(z)` up to an unspecified multiple of `2πi`.
///
/// Cheaper than the principal branch because the upward shift is applied
/// as one product and one logarithm. Only valid where the caller
/// exponentiates the result or uses its real part.
pub(crate) fn log_gamma_mod_2pi(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return log_gamma_mod_2pi_upper(z.conj()).conj();
    }
    log_gamma_mod_2pi_upper(z)
}

fn log_gamma_mod_2pi_upper(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let w = Complex64::new(0.0, 2.0 * PI) * z;
        let log_sin = (Complex64::new(1.0, 0.0) - w.exp()).ln()
            - Complex64::new(0.0, PI) * z
            + Complex64::new(-std::f64::consts::LN_2, PI / 2.0);
        return Complex64::new(LN_PI, 0.0) - log_sin - log_gamma_mod_2pi_upper(1.0 - z);
    }
    let mut prod = Complex64::new(1.0, 0.0);
    let mut w = z;
    while w.norm_sqr() < STIRLING_MIN * STIRLING_MIN {
        prod *= w;
        w += 1.0;
    }
    if prod == Complex64::new(1.0, 0.0) {
        stirling(w)
    } else {
        stirling(w) - prod.ln()
    }
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING_COEFFS.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + LN_2PI_HALF + series * inv
}

/// Complex digamma `ψ(z) = Γ'(z)/Γ(z)`.
pub fn digamma_complex(z: Complex64) -> Result<Complex64, MellinError> {
    if nonpositive_integer(z) {
        return Err(MellinError::GammaPole { at: z.re });
    }
    Ok(digamma_unchecked(z))
}

pub(crate) fn digamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let cot = (PI * z).cos() / (PI * z).sin();
        return digamma_unchecked(1.0 - z) - PI * cot;
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < STIRLING_MIN {
        shift += w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in DIGAMMA_COEFFS.iter().rev() {
        series = series * inv2 + c;
    }
    w.ln() - 0.5 * inv - series * inv2 - shift
}

const INC_GAMMA_MAX_ITER: usize = 100_000;

/// Regularized lower incomplete gamma `P(shape, x) = γ(shape, x) / Γ(shape)`.
pub fn regularized_lower_gamma(shape: f64, x: f64) -> Result<f64, MellinError> {
    Ok(regularized_gamma_pair(shape, x)?.0)
}

/// Regularized upper incomplete gamma `Q(shape, x) = 1 - P(shape, x)`.
pub fn regularized_upper_gamma(shape: f64, x: f64) -> Result<f64, MellinError> {
    Ok(regularized_gamma_pair(shape, x)?.1)
}

/// `(P, Q)` computed together so that whichever is small keeps full
/// relative accuracy.
pub fn regularized_gamma_pair(shape: f64, x: f64) -> Result<(f64, f64), MellinError> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(MellinError::Domain(format!(
            "incomplete gamma needs shape > 0, got {shape}"
        )));
    }
    if !(x >= 0.0) {
        return Err(MellinError::Domain(format!(
            "incomplete gamma needs x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let log_prefactor = shape * x.ln() - x - ln_gamma(shape);
    if x < shape + 1.0 {
        let p = lower_series(shape, x, log_prefactor)?;
        Ok((p, 1.0 - p))
    } else {
        let q = upper_continued_fraction(shape, x, log_prefactor)?;
        Ok((1.0 - q, q))
    }
}

/// `ln P(shape, x)`, usable deep in the lower tail where `P` underflows.
pub fn ln_regularized_lower_gamma(shape: f64, x: f64) -> Result<f64, MellinError> {
    if x > 0.0 && x < shape + 1.0 && shape > 0.0 {
        let log_prefactor = shape * x.ln() - x - ln_gamma(shape);
        let sum = lower_series_sum(shape, x)?;
        return Ok(log_prefactor + sum.ln());
    }
    Ok(regularized_lower_gamma(shape, x)?.ln())
}

fn lower_series_sum(shape: f64, x: f64) -> Result<f64, MellinError> {
    let mut term = 1.0 / shape;
    let mut sum = term;
    let mut denom = shape;
    for _ in 0..INC_GAMMA_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() <= sum.abs() * f64::EPSILON * 0.5 {
            return Ok(sum);
        }
    }
    Err(MellinError::NoConvergence(format!(
        "incomplete gamma series, shape {shape}, x {x}"
    )))
}

fn lower_series(shape: f64, x: f64, log_prefactor: f64) -> Result<f64, MellinError> {
    let sum = lower_series_sum(shape, x)?;
    Ok((log_prefactor + sum.ln()).exp().min(1.0))
}

// Modified Lentz evaluation of the continued fraction for Q.
fn upper_continued_fraction(shape: f64, x: f64, log_prefactor: f64) -> Result<f64, MellinError> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - shape;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..INC_GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - shape);
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
        if (delta - 1.0).abs() <= f64::EPSILON {
            return Ok((log_prefactor + h.ln()).exp().min(1.0));
        }
    }
    Err(MellinError::NoConvergence(format!(
        "incomplete gamma continued fraction, shape {shape}, x {x}"
    )))
}
