//! Fox H, Meijer G and bivariate Fox H parameter tables.

use super::contour::{eval_kernel_1d, eval_kernel_2d};
use super::kernel::{GammaTerm, MellinKernel};
use super::{ContourSpec, MbEstimate, MellinError};

/// `Γ(offset + scale·s)`. Scales may be negative so that right-pole
/// factors such as `Γ(1 - s)` can be written directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFactor {
    pub offset: f64,
    pub scale: f64,
    /// Poles of this factor that the contour leaves on the wrong side.
    pub crossed: u32,
}

impl GammaFactor {
    pub fn new(offset: f64, scale: f64) -> Self {
        Self {
            offset,
            scale,
            crossed: 0,
        }
    }
}

/// `Π Γ(upper) / Π Γ(lower)` in a single contour variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GammaFactorGroup {
    pub upper: Vec<GammaFactor>,
    pub lower: Vec<GammaFactor>,
}

/// `H^{m,n}_{p,q}(x | (a_j, A_j); (b_j, B_j))` in the standard convention
///
/// `(1/2πi) ∮ Π_{j≤m} Γ(b_j + B_j s) Π_{j≤n} Γ(1 - a_j - A_j s)
///   / [Π_{j>m} Γ(1 - b_j - B_j s) Π_{j>n} Γ(a_j + A_j s)] x^{-s} ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoxHSpec {
    pub m: usize,
    pub n: usize,
    /// `(a_j, A_j)`, length `p`.
    pub upper: Vec<(f64, f64)>,
    /// `(b_j, B_j)`, length `q`.
    pub lower: Vec<(f64, f64)>,
    pub argument: f64,
}

/// `G^{m,n}_{p,q}(x | a; b)`, the unit-scale special case of [`FoxHSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub argument: f64,
}

impl From<&MeijerGSpec> for FoxHSpec {
    fn from(g: &MeijerGSpec) -> Self {
        FoxHSpec {
            m: g.m,
            n: g.n,
            upper: g.upper.iter().map(|&a| (a, 1.0)).collect(),
            lower: g.lower.iter().map(|&b| (b, 1.0)).collect(),
            argument: g.argument,
        }
    }
}

impl FoxHSpec {
    fn validate(&self) -> Result<(), MellinError> {
        if self.m > self.lower.len() || self.n > self.upper.len() {
            return Err(MellinError::Domain(format!(
                "index split m={}, n={} inconsistent with p={}, q={}",
                self.m,
                self.n,
                self.upper.len(),
                self.lower.len()
            )));
        }
        if !(self.argument > 0.0) || !self.argument.is_finite() {
            return Err(MellinError::Domain(format!(
                "argument must be positive and finite, got {}",
                self.argument
            )));
        }
        let bad_scale = self
            .upper
            .iter()
            .chain(&self.lower)
            .find(|(_, s)| !(*s > 0.0) || !s.is_finite());
        if let Some((_, s)) = bad_scale {
            return Err(MellinError::Domain(format!("scales must be positive, got {s}")));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<MellinKernel, MellinError> {
        self.validate()?;
        let mut gammas = Vec::with_capacity(self.upper.len() + self.lower.len());
        for (j, &(b, bs)) in self.lower.iter().enumerate() {
            gammas.push(if j < self.m {
                GammaTerm::num(b, bs, 0.0)
            } else {
                GammaTerm::den(1.0 - b, -bs, 0.0)
            });
        }
        for (j, &(a, as_)) in self.upper.iter().enumerate() {
            gammas.push(if j < self.n {
                GammaTerm::num(1.0 - a, -as_, 0.0)
            } else {
                GammaTerm::den(a, as_, 0.0)
            });
        }
        Ok(MellinKernel {
            gammas,
            log_arg: [-self.argument.ln(), 0.0],
            ..Default::default()
        })
    }
}

pub fn eval_fox_h(spec: &FoxHSpec, contour: &ContourSpec) -> Result<MbEstimate, MellinError> {
    eval_kernel_1d(&spec.kernel()?, contour)
}

pub fn eval_meijer_g(spec: &MeijerGSpec, contour: &ContourSpec) -> Result<MbEstimate, MellinError> {
    eval_fox_h(&FoxHSpec::from(spec), contour)
}

/// `Γ(offset + scale_s·s + scale_z·ζ)` shared by both contour variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointGammaFactor {
    pub offset: f64,
    pub scale_s: f64,
    pub scale_z: f64,
    pub numerator: bool,
    pub crossed: u32,
}

/// Double Mellin–Barnes integral
/// `(1/2πi)² ∮∮ Π joint · group_s(s) · group_z(ζ) · x^{-s} y^{-ζ} ds dζ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BivariateFoxHSpec {
    pub joint: Vec<JointGammaFactor>,
    pub group_s: GammaFactorGroup,
    pub group_z: GammaFactorGroup,
    pub x: f64,
    pub y: f64,
}

impl BivariateFoxHSpec {
    pub fn kernel(&self) -> Result<MellinKernel, MellinError> {
        for (name, v) in [("x", self.x), ("y", self.y)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(MellinError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let mut gammas = Vec::new();
        for j in &self.joint {
            gammas.push(GammaTerm {
                c: j.offset,
                a: j.scale_s,
                b: j.scale_z,
                numerator: j.numerator,
                crossed: j.crossed,
            });
        }
        for (group, axis) in [(&self.group_s, 0), (&self.group_z, 1)] {
            for (factors, numerator) in [(&group.upper, true), (&group.lower, false)] {
                for f in factors {
                    let (a, b) = if axis == 0 { (f.scale, 0.0) } else { (0.0, f.scale) };
                    gammas.push(GammaTerm {
                        c: f.offset,
                        a,
                        b,
                        numerator,
                        crossed: f.crossed,
                    });
                }
            }
        }
        Ok(MellinKernel {
            gammas,
            log_arg: [-self.x.ln(), -self.y.ln()],
            ..Default::default()
        })
    }
}

pub fn eval_bivariate_fox_h(
    spec: &BivariateFoxHSpec,
    contour_s: &ContourSpec,
    contour_z: &ContourSpec,
) -> Result<MbEstimate, MellinError> {
    eval_kernel_2d(&spec.kernel()?, contour_s, contour_z)
}
