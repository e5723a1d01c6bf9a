//! Numerical Mellin–Barnes integration.
//!
//! Everything here reduces to one object, a [`MellinKernel`]: a product of
//! gamma functions and linear factors in one or two contour variables, times
//! a power of the argument. The engine places the vertical contour(s),
//! finds where the integrand has decayed to noise, and integrates with the
//! trapezoidal rule, which converges geometrically for integrands analytic in
//! a strip around the contour.
//!
//! [`FoxHSpec`], [`MeijerGSpec`] and [`BivariateFoxHSpec`] are thin front ends
//! that build kernels from the usual parameter tables.

mod contour;
mod foxh;
mod kernel;
pub mod special;

pub use contour::{auto_placement, dump_integrand_csv, eval_kernel_1d, eval_kernel_2d, Placement};
pub use foxh::{
    eval_bivariate_fox_h, eval_fox_h, eval_meijer_g, BivariateFoxHSpec, FoxHSpec, GammaFactor,
    GammaFactorGroup, JointGammaFactor, MeijerGSpec,
};
pub use kernel::{DigammaWeight, GammaTerm, LinearBound, LinearTerm, MellinKernel};
pub use special::{
    digamma_complex, ln_beta, ln_gamma, ln_regularized_lower_gamma, log_gamma_complex,
    regularized_gamma_pair, regularized_lower_gamma, regularized_upper_gamma,
};

use thiserror::Error;

/// Failures of the special functions and the contour integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MellinError {
    #[error("gamma function pole at {at}")]
    GammaPole { at: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("no feasible contour: {0}")]
    ContourInfeasible(String),
    #[error("contour passes within {distance:.3e} of a pole of term {term} (margin {margin:.3e})")]
    PoleOnContour {
        term: usize,
        distance: f64,
        margin: f64,
    },
    #[error("integrand does not decay along the contour: {0}")]
    NoDecay(String),
    #[error("error estimate {error:.3e} above tolerance for value {value:.6e}")]
    ToleranceNotMet { value: f64, error: f64 },
    #[error("imaginary part {imag:.3e} too large for real result {value:.6e}")]
    ImaginaryResidue { value: f64, imag: f64 },
    #[error("failed to write integrand dump: {0}")]
    Dump(String),
}

/// How finely the truncated contour is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refinement {
    /// Single pass with this many nodes per contour. The error estimate
    /// compares against the pass with half as many.
    Nodes(usize),
    /// Halve the step until successive passes agree to `rel_tol`.
    Adaptive { rel_tol: f64, max_halvings: u32 },
}

/// Placement and resolution of one vertical contour `Re s = abscissa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    /// `None` lets the engine choose the line inside the admissible strip.
    pub abscissa: Option<f64>,
    /// `None` lets the engine scan for the height where the integrand has
    /// fallen below 1e-16 of its peak.
    pub half_height: Option<f64>,
    pub refinement: Refinement,
    /// Minimum distance between the contour and any pole it must avoid.
    pub pole_margin: f64,
    /// Adaptive refinement also stops once successive passes differ by
    /// less than this. Useful when the integral is one small piece of a
    /// larger sum.
    pub abs_tol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            abscissa: None,
            half_height: None,
            refinement: Refinement::Adaptive {
                rel_tol: 1e-11,
                max_halvings: 9,
            },
            pole_margin: 1e-2,
            abs_tol: 0.0,
        }
    }
}

impl ContourSpec {
    pub fn at(abscissa: f64) -> Self {
        Self {
            abscissa: Some(abscissa),
            ..Self::default()
        }
    }

    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        let max_halvings = match self.refinement {
            Refinement::Adaptive { max_halvings, .. } => max_halvings,
            Refinement::Nodes(_) => 9,
        };
        self.refinement = Refinement::Adaptive {
            rel_tol,
            max_halvings,
        };
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Result of a contour integral, real part only plus diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbEstimate {
    pub value: f64,
    /// Step-halving difference plus a rounding floor proportional to the
    /// integral of |integrand|.
    pub error: f64,
    pub imag: f64,
    /// `(1/2π)^d ∫|f|`, the scale that bounds achievable absolute accuracy.
    pub l1: f64,
    /// Abscissae actually used, `[s, ζ]` (ζ is NaN for univariate kernels).
    pub abscissa: [f64; 2],
    pub half_height: [f64; 2],
    pub step: [f64; 2],
    pub nodes: usize,
}

impl MbEstimate {
    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.error *= factor.abs();
        self.imag *= factor;
        self.l1 *= factor.abs();
        self
    }
}
