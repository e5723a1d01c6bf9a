//! Integrand tables for one- and two-variable Mellin–Barnes integrals.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::special::{digamma_unchecked, log_gamma_mod_2pi};
use super::MellinError;

/// `Γ(c + a·s + b·ζ)` in the numerator or the denominator.
///
/// For a numerator term, `crossed` is the number of its poles that lie on
/// the wrong side of the contour: zero means the argument keeps a positive
/// real part, `k > 0` means the real part stays inside `(-k, -k + 1)`.
/// Denominator terms only produce zeros and impose nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerm {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub numerator: bool,
    pub crossed: u32,
}

impl GammaTerm {
    pub fn num(c: f64, a: f64, b: f64) -> Self {
        Self {
            c,
            a,
            b,
            numerator: true,
            crossed: 0,
        }
    }

    pub fn den(c: f64, a: f64, b: f64) -> Self {
        Self {
            c,
            a,
            b,
            numerator: false,
            crossed: 0,
        }
    }

    pub fn crossing(mut self, k: u32) -> Self {
        self.crossed = k;
        self
    }
}

/// `(c + a·s + b·ζ)^power`.
///
/// With a negative power the factor has a pole where the argument vanishes;
/// `left_of_pole` keeps the real part of the argument negative instead of
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTerm {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub power: i32,
    pub left_of_pole: bool,
}

/// Extra requirement `lo < a·Re s + b·Re ζ < hi` on the contour position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBound {
    pub a: f64,
    pub b: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Multiplies the integrand by `constant + Σ coef·ψ(c + a·s + b·ζ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DigammaWeight {
    pub constant: f64,
    pub terms: Vec<(f64, GammaTerm)>,
}

/// `prefactor · Π Γ(...)^{±1} · Π (linear)^{p} · exp(s·log_arg[0] + ζ·log_arg[1])`,
/// optionally times a digamma weight. Integrated as
/// `(1/2πi)^d ∮ ... ds [dζ]` with `d` = number of contour variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MellinKernel {
    pub gammas: Vec<GammaTerm>,
    pub linears: Vec<LinearTerm>,
    pub bounds: Vec<LinearBound>,
    pub log_arg: [f64; 2],
    pub prefactor: f64,
    pub weight: Option<DigammaWeight>,
}

impl Default for MellinKernel {
    fn default() -> Self {
        Self {
            gammas: Vec::new(),
            linears: Vec::new(),
            bounds: Vec::new(),
            log_arg: [0.0, 0.0],
            prefactor: 1.0,
            weight: None,
        }
    }
}

/// One admissibility condition `lo < c + a·σ + b·τ < hi` on the real parts
/// of the contour abscissae `(σ, τ)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Constraint {
    pub term: usize,
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Constraint {
    fn value(&self, sigma: f64, tau: f64) -> f64 {
        self.c + self.a * sigma + self.b * tau
    }

    fn slack(&self, sigma: f64, tau: f64) -> f64 {
        let v = self.value(sigma, tau);
        (v - self.lo).min(self.hi - v)
    }
}

impl MellinKernel {
    pub fn is_bivariate(&self) -> bool {
        self.gammas.iter().any(|g| g.b != 0.0)
            || self.linears.iter().any(|l| l.b != 0.0)
            || self.bounds.iter().any(|l| l.b != 0.0)
            || self.log_arg[1] != 0.0
            || self
                .weight
                .as_ref()
                .is_some_and(|w| w.terms.iter().any(|(_, g)| g.b != 0.0))
    }

    pub(crate) fn constraints(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        for (i, g) in self.gammas.iter().enumerate() {
            if !g.numerator {
                continue;
            }
            let (lo, hi) = if g.crossed == 0 {
                (0.0, f64::INFINITY)
            } else {
                let k = g.crossed as f64;
                (-k, -k + 1.0)
            };
            out.push(Constraint {
                term: i,
                c: g.c,
                a: g.a,
                b: g.b,
                lo,
                hi,
            });
        }
        let offset = self.gammas.len();
        for (i, l) in self.linears.iter().enumerate() {
            if l.power >= 0 {
                continue;
            }
            let (lo, hi) = if l.left_of_pole {
                (f64::NEG_INFINITY, 0.0)
            } else {
                (0.0, f64::INFINITY)
            };
            out.push(Constraint {
                term: offset + i,
                c: l.c,
                a: l.a,
                b: l.b,
                lo,
                hi,
            });
        }
        let offset = offset + self.linears.len();
        for (i, bd) in self.bounds.iter().enumerate() {
            out.push(Constraint {
                term: offset + i,
                c: 0.0,
                a: bd.a,
                b: bd.b,
                lo: bd.lo,
                hi: bd.hi,
            });
        }
        out
    }

    /// Smallest distance from the abscissae to a forbidden pole, with the
    /// index of the term responsible. Negative when a condition is violated.
    pub(crate) fn pole_distance(&self, sigma: f64, tau: f64) -> (f64, usize) {
        self.constraints()
            .iter()
            .filter(|c| c.a != 0.0 || c.b != 0.0)
            .map(|c| (c.slack(sigma, tau), c.term))
            .fold((f64::INFINITY, usize::MAX), |acc, x| if x.0 < acc.0 { x } else { acc })
    }

    /// Interval of `σ` allowed at a fixed `τ`.
    #[cfg(test)]
    pub(crate) fn sigma_interval(&self, tau: f64, margin: f64) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for c in self.constraints() {
            let lo_c = c.lo + margin;
            let hi_c = c.hi - margin;
            if lo_c >= hi_c {
                return None;
            }
            let rest = c.c + c.b * tau;
            if c.a == 0.0 {
                if c.b != 0.0 && !(rest > lo_c && rest < hi_c) {
                    return None;
                }
                continue;
            }
            let (x, y) = ((lo_c - rest) / c.a, (hi_c - rest) / c.a);
            let (l, h) = if c.a > 0.0 { (x, y) } else { (y, x) };
            lo = lo.max(l);
            hi = hi.min(h);
        }
        (lo < hi).then_some((lo, hi))
    }

    /// Interval of `τ` allowed by the conditions that do not involve `σ`.
    pub(crate) fn tau_interval(&self, margin: f64) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for c in self.constraints() {
            if c.a != 0.0 || c.b == 0.0 {
                continue;
            }
            let (x, y) = ((c.lo + margin - c.c) / c.b, (c.hi - margin - c.c) / c.b);
            let (l, h) = if c.b > 0.0 { (x, y) } else { (y, x) };
            lo = lo.max(l);
            hi = hi.min(h);
        }
        (lo < hi).then_some((lo, hi))
    }

    /// Log of the part of the integrand that does not depend on `s` or `ζ`.
    /// `Ok(None)` means a constant denominator gamma sits on a pole, so the
    /// whole integral vanishes.
    pub(crate) fn constant_log(&self) -> Result<Option<Complex64>, MellinError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for g in self.gammas.iter().filter(|g| g.a == 0.0 && g.b == 0.0) {
            let at_pole = g.c <= 0.0 && g.c == g.c.round();
            match (at_pole, g.numerator) {
                (true, true) => return Err(MellinError::GammaPole { at: g.c }),
                (true, false) => return Ok(None),
                (false, true) => acc += log_gamma_mod_2pi(Complex64::new(g.c, 0.0)),
                (false, false) => acc -= log_gamma_mod_2pi(Complex64::new(g.c, 0.0)),
            }
        }
        for l in self.linears.iter().filter(|l| l.a == 0.0 && l.b == 0.0) {
            if l.c == 0.0 {
                if l.power < 0 {
                    return Err(MellinError::Domain("constant linear factor 1/0".into()));
                }
                if l.power > 0 {
                    return Ok(None);
                }
            } else {
                acc += Complex64::new(l.c, 0.0).ln() * l.power as f64;
            }
        }
        Ok(Some(acc))
    }

    /// Log of the variable part of the integrand at `(s, ζ)`, modulo `2πi`.
    /// A real part of `-∞` marks an exact zero.
    pub(crate) fn log_variable(&self, s: Complex64, z: Complex64) -> Complex64 {
        let mut acc = s * self.log_arg[0] + z * self.log_arg[1];
        for g in &self.gammas {
            if g.a == 0.0 && g.b == 0.0 {
                continue;
            }
            acc += log_gamma_term(g, s, z);
        }
        for l in &self.linears {
            if l.a == 0.0 && l.b == 0.0 {
                continue;
            }
            acc += log_linear_term(l, s, z);
        }
        acc
    }

    pub(crate) fn weight_at(&self, s: Complex64, z: Complex64) -> Complex64 {
        match &self.weight {
            None => Complex64::new(1.0, 0.0),
            Some(w) => {
                let mut acc = Complex64::new(w.constant, 0.0);
                for (coef, g) in &w.terms {
                    acc += digamma_unchecked(g.c + g.a * s + g.b * z) * *coef;
                }
                acc
            }
        }
    }

    /// Exponential decay rate of |integrand| along direction `θ` in the
    /// `(Im s, Im ζ)` plane.
    pub(crate) fn decay_rate(&self, theta: f64) -> f64 {
        let (cs, sn) = (theta.cos(), theta.sin());
        let mut rate = 0.0;
        for g in &self.gammas {
            let r = (g.a * cs + g.b * sn).abs();
            rate += if g.numerator { r } else { -r };
        }
        rate * PI / 2.0
    }

    /// Worst-case decay rate over all directions of the imaginary parts
    /// that the kernel actually depends on.
    pub(crate) fn min_decay_rate(&self) -> f64 {
        if self.is_bivariate() {
            (0..720)
                .map(|i| self.decay_rate(i as f64 * PI / 360.0))
                .fold(f64::INFINITY, f64::min)
        } else {
            self.decay_rate(0.0)
        }
    }
}

pub(crate) fn log_gamma_term(g: &GammaTerm, s: Complex64, z: Complex64) -> Complex64 {
    let arg = g.c + g.a * s + g.b * z;
    if arg.im == 0.0 && arg.re <= 0.0 && arg.re == arg.re.round() {
        return if g.numerator {
            Complex64::new(f64::INFINITY, 0.0)
        } else {
            Complex64::new(f64::NEG_INFINITY, 0.0)
        };
    }
    let lg = log_gamma_mod_2pi(arg);
    if g.numerator {
        lg
    } else {
        -lg
    }
}

pub(crate) fn log_linear_term(l: &LinearTerm, s: Complex64, z: Complex64) -> Complex64 {
    let arg = l.c + l.a * s + l.b * z;
    if arg == Complex64::new(0.0, 0.0) {
        return Complex64::new(
            if l.power > 0 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            },
            0.0,
        );
    }
    arg.ln() * l.power as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn incomplete_gamma_kernel(a: f64) -> MellinKernel {
        MellinKernel {
            gammas: vec![
                GammaTerm::num(a + 1.0, 1.0, 0.0),
                GammaTerm::num(0.0, -1.0, 0.0),
                GammaTerm::den(1.0, -1.0, 0.0),
            ],
            ..Default::default()
        }
    }

    #[test]
    fn strip_of_incomplete_gamma_kernel() {
        let k = incomplete_gamma_kernel(2.5);
        let (lo, hi) = k.sigma_interval(0.0, 0.01).unwrap();
        assert!((lo + 3.49).abs() < 1e-12 && (hi + 0.01).abs() < 1e-12);
        assert!(k.sigma_interval(0.0, 2.0).is_none());
    }

    #[test]
    fn crossed_term_restricts_to_unit_strip() {
        let k = MellinKernel {
            gammas: vec![GammaTerm::num(0.0, 1.0, 0.0).crossing(3)],
            ..Default::default()
        };
        let (lo, hi) = k.sigma_interval(0.0, 0.0).unwrap();
        assert_eq!((lo, hi), (-3.0, -2.0));
    }

    #[test]
    fn bivariate_detection_and_tau_range() {
        let mut k = incomplete_gamma_kernel(1.0);
        assert!(!k.is_bivariate());
        k.gammas.push(GammaTerm::num(0.0, 0.0, 1.0));
        k.linears.push(LinearTerm {
            c: 3.0,
            a: 0.0,
            b: -1.0,
            power: -1,
            left_of_pole: false,
        });
        assert!(k.is_bivariate());
        let (lo, hi) = k.tau_interval(0.0).unwrap();
        assert_eq!((lo, hi), (0.0, 3.0));
    }

    #[test]
    fn decay_rate_counts_gamma_balance() {
        let k = incomplete_gamma_kernel(1.0);
        assert!((k.min_decay_rate() - PI / 2.0).abs() < 1e-15);
        let flat = MellinKernel {
            gammas: vec![GammaTerm::num(1.0, 1.0, 0.0), GammaTerm::den(2.0, 1.0, 0.0)],
            ..Default::default()
        };
        assert_eq!(flat.min_decay_rate(), 0.0);
    }

    #[test]
    fn log_variable_matches_direct_product() {
        let k = incomplete_gamma_kernel(2.5);
        let s = Complex64::new(-1.2, 0.7);
        let direct = (super::super::log_gamma_complex(3.5 + s).unwrap()
            + super::super::log_gamma_complex(-s).unwrap()
            - super::super::log_gamma_complex(1.0 - s).unwrap())
        .exp();
        let got = k.log_variable(s, Complex64::new(0.0, 0.0)).exp();
        assert!((got - direct).norm() < 1e-13 * direct.norm());
    }
}
