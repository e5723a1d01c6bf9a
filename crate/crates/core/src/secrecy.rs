//! Secrecy outage probability (SOP) and average secrecy capacity (ASC).
//!
//! Each metric has three independent evaluations:
//!
//! * `*_quadrature`: one-dimensional adaptive quadrature over the Gamma law
//!   of one receiver. This is the reference.
//! * `*_exact`: Mellin–Barnes contour integrals, with residues taken where
//!   needed so that the straight-line contours exist and cancellation is
//!   small.
//! * `*_asymptotic`: leading behaviour as the main-link SNR grows.
//!
//! Rates are in nats, capacities are reported in bits.

use std::f64::consts::{LN_2, PI};
use thiserror::Error;

use crate::channel::{ChannelError, GammaSumApprox};
use crate::mellin::{
    auto_placement, eval_kernel_1d, eval_kernel_2d, ln_gamma, ln_regularized_lower_gamma,
    log_gamma_complex, BivariateFoxHSpec, ContourSpec, DigammaWeight, GammaFactor,
    GammaFactorGroup, GammaTerm, JointGammaFactor, LinearBound, LinearTerm, MbEstimate,
    MeijerGSpec, MellinError, MellinKernel,
};
use crate::quadrature::{integrate_log_positive, QuadratureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SecrecyError {
    #[error(transparent)]
    Mellin(#[from] MellinError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("invalid secrecy configuration: {0}")]
    Config(String),
    #[error("{quantity} evaluated to {value:.9e}, outside its range by more than {tolerance:.2e}")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        tolerance: f64,
    },
    #[error("{quantity}: contour value {closed:.12e} and quadrature {oracle:.12e} differ by {deviation:.2e} relative (allowed {allowed:.2e})")]
    OracleMismatch {
        quantity: &'static str,
        closed: f64,
        oracle: f64,
        deviation: f64,
        allowed: f64,
    },
}

/// Target rate and the SNR laws of the legitimate receiver and the
/// eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyConfig {
    /// Target secrecy rate `R_s` in nats.
    pub rate_nats: f64,
    pub main: GammaSumApprox,
    pub eve: GammaSumApprox,
}

impl SecrecyConfig {
    pub fn new(rate_nats: f64, main: GammaSumApprox, eve: GammaSumApprox) -> Result<Self, SecrecyError> {
        let cfg = Self {
            rate_nats,
            main,
            eve,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SecrecyError> {
        if !(self.rate_nats >= 0.0) || !self.rate_nats.is_finite() {
            return Err(SecrecyError::Config(format!(
                "rate must be finite and nonnegative, got {}",
                self.rate_nats
            )));
        }
        self.main.validate()?;
        self.eve.validate()?;
        Ok(())
    }

    /// `R_t = e^{R_s}`.
    pub fn rt(&self) -> f64 {
        self.rate_nats.exp()
    }

    /// `R̄_t = R_t - 1`.
    pub fn rt_bar(&self) -> f64 {
        self.rate_nats.exp_m1()
    }

    /// Same laws with the roles of the two receivers exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            main: self.eve,
            eve: self.main,
            ..*self
        }
    }
}

/// A value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: f64,
    pub error: f64,
}

/// Instantaneous secrecy capacity in nats.
pub fn secrecy_capacity(gamma_b: f64, gamma_e: f64) -> f64 {
    (gamma_b.ln_1p() - gamma_e.ln_1p()).max(0.0)
}

fn ln_gamma_pdf(u: f64, shape_offset: f64) -> f64 {
    shape_offset * u.ln() - u - ln_gamma(shape_offset + 1.0)
}

fn ln_log2_1p(x: f64) -> f64 {
    (x.ln_1p() / LN_2).ln()
}

const QUAD_REL_TOL: f64 = 1e-12;

/// SOP as `E_E[F_B(R_t γ_E + R̄_t)]` by adaptive quadrature.
pub fn sop_quadrature(cfg: &SecrecyConfig) -> Result<Evaluated, SecrecyError> {
    cfg.validate()?;
    let (rt, rt_bar) = (cfg.rt(), cfg.rt_bar());
    let (a, b, gb) = (cfg.main.a, cfg.main.b, cfg.main.avg_snr);
    let (ae, ce) = (cfg.eve.a, cfg.eve.snr_scale());
    let denom = b * gb.sqrt();
    let r = integrate_log_positive(
        |u| {
            let x = (rt * ce * u * u + rt_bar).sqrt() / denom;
            let lp = if x > 0.0 {
                ln_regularized_lower_gamma(a + 1.0, x).unwrap_or(f64::NAN)
            } else {
                f64::NEG_INFINITY
            };
            lp + ln_gamma_pdf(u, ae)
        },
        QUAD_REL_TOL,
    )?;
    Ok(Evaluated {
        value: r.value,
        error: r.error,
    })
}

/// Which contour representation [`sop_exact`] used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SopForm {
    /// `1 + E·J / Γ(a+1)` with the double integral on the right of `ζ = 0`.
    Upper,
    /// `(Σ_{k≤K} S_k + E·J) / Γ(a+1)` after taking `K + 1` residue families.
    Lower { residues: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SopExact {
    pub value: f64,
    pub error: f64,
    pub form: SopForm,
}

const SOP_REL_TOL: f64 = 1e-11;

fn contour() -> ContourSpec {
    ContourSpec::default().with_tolerance(SOP_REL_TOL)
}

const POLE_MARGIN: f64 = 0.02;

/// The double integral `J` in the upper (`residues = None`) or lower form.
///
/// Integrand over `(s, ζ)`:
/// `X^ζ Y^s Γ(ζ/2 + s - 1) Γ(a+1+ζ) / (-ζ Γ(ζ/2)) · Γ(1-s) Γ(2s + a' - 1)`
/// with `X = b √γ̄_B / √R̄_t` and `Y = b'² R_t γ̄_E / R̄_t`.
fn sop_double_kernel(cfg: &SecrecyConfig, residues: Option<u32>) -> MellinKernel {
    let (rt, rt_bar) = (cfg.rt(), cfg.rt_bar());
    let (a, b, gb) = (cfg.main.a, cfg.main.b, cfg.main.avg_snr);
    let ae = cfg.eve.a;
    let x = b * gb.sqrt() / rt_bar.sqrt();
    let y = cfg.eve.snr_scale() * rt / rt_bar;
    let e = rt_bar / (rt * cfg.eve.snr_scale()) * (-ln_gamma(ae + 1.0)).exp();
    let coupling = GammaTerm::num(-1.0, 1.0, 0.5);
    let mut k = MellinKernel {
        gammas: vec![
            coupling,
            GammaTerm::num(a + 1.0, 0.0, 1.0),
            GammaTerm::den(0.0, 0.0, 0.5),
            GammaTerm::num(1.0, -1.0, 0.0),
            GammaTerm::num(ae - 1.0, 2.0, 0.0),
        ],
        linears: vec![LinearTerm {
            c: 0.0,
            a: 0.0,
            b: -1.0,
            power: -1,
            left_of_pole: residues.is_none(),
        }],
        log_arg: [y.ln(), x.ln()],
        prefactor: e * (-ln_gamma(a + 1.0)).exp(),
        ..Default::default()
    };
    if let Some(kk) = residues {
        k.gammas[0] = coupling.crossing(kk + 1);
        let kf = kk as f64;
        k.bounds.push(LinearBound {
            a: 0.0,
            b: 1.0,
            lo: -2.0 * kf - 2.0,
            hi: -2.0 * kf,
        });
    }
    k
}

/// Residue term `S_k / Γ(a+1)` of the lower form, a single integral in ζ:
/// `c_k ∮ Γ(a+1+ζ) (ζ/2)_k Γ(a'+1-2k-ζ) W^ζ / (-ζ) dζ` with
/// `W = b √γ̄_B / (√R_t b' √γ̄_E)`.
fn sop_residue_kernel(cfg: &SecrecyConfig, k: u32) -> MellinKernel {
    let (rt, rt_bar) = (cfg.rt(), cfg.rt_bar());
    let (a, ae) = (cfg.main.a, cfg.eve.a);
    let w = (cfg.main.snr_scale() / (rt * cfg.eve.snr_scale())).sqrt();
    let kf = k as f64;
    let mut linears = vec![LinearTerm {
        c: 0.0,
        a: -1.0,
        b: 0.0,
        power: -1,
        left_of_pole: false,
    }];
    for j in 0..k {
        linears.push(LinearTerm {
            c: j as f64,
            a: 0.5,
            b: 0.0,
            power: 1,
            left_of_pole: false,
        });
    }
    let ln_ratio = if k == 0 {
        0.0
    } else {
        kf * (rt_bar / (rt * cfg.eve.snr_scale())).ln()
    };
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let prefactor =
        sign * (ln_ratio - ln_gamma(kf + 1.0) - ln_gamma(ae + 1.0) - ln_gamma(a + 1.0)).exp();
    MellinKernel {
        gammas: vec![
            GammaTerm::num(a + 1.0, 1.0, 0.0),
            GammaTerm::num(ae + 1.0 - 2.0 * kf, -1.0, 0.0),
        ],
        linears,
        log_arg: [w.ln(), 0.0],
        prefactor,
        ..Default::default()
    }
}

struct SopPlan {
    form: SopForm,
    log_peak: f64,
}

fn lower_form_feasible(cfg: &SecrecyConfig, k: u32) -> bool {
    // ζ must fit in (-2K-2, -2K) ∩ (-(a+1), 0) with room to spare.
    let hi = -2.0 * k as f64 - POLE_MARGIN;
    let lo = (-2.0 * k as f64 - 2.0).max(-(cfg.main.a + 1.0)) + POLE_MARGIN;
    hi - lo > 2.0 * POLE_MARGIN
}

fn plan_log_peak(cfg: &SecrecyConfig, form: SopForm) -> Result<f64, MellinError> {
    match form {
        SopForm::Upper => {
            let j = auto_placement(&sop_double_kernel(cfg, None), POLE_MARGIN)?;
            Ok(j.log_peak.max(0.0))
        }
        SopForm::Lower { residues } => {
            let mut peak = auto_placement(&sop_double_kernel(cfg, Some(residues)), POLE_MARGIN)?.log_peak;
            for k in 0..=residues {
                peak = peak.max(auto_placement(&sop_residue_kernel(cfg, k), POLE_MARGIN)?.log_peak);
            }
            Ok(peak)
        }
    }
}

/// SOP from the contour-integral representation.
///
/// Several algebraically equivalent forms are available: the upper form
/// works best when the SOP is close to one, lower forms with more residue
/// terms work best deep in the tail. The form whose largest piece is
/// smallest (least cancellation) is chosen automatically.
pub fn sop_exact(cfg: &SecrecyConfig) -> Result<SopExact, SecrecyError> {
    cfg.validate()?;
    if cfg.rt_bar() == 0.0 {
        // At zero rate only the first residue term survives.
        let s0 = eval_kernel_1d(&sop_residue_kernel(cfg, 0), &contour())?;
        return finish_sop(s0.value, s0.error, SopForm::Lower { residues: 0 });
    }
    let mut best: Option<SopPlan> = None;
    let mut candidates = vec![SopForm::Upper];
    let mut k = 0;
    while lower_form_feasible(cfg, k) {
        candidates.push(SopForm::Lower { residues: k });
        k += 1;
    }
    for form in candidates {
        let Ok(log_peak) = plan_log_peak(cfg, form) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| log_peak < b.log_peak) {
            best = Some(SopPlan { form, log_peak });
        }
    }
    let plan = best.ok_or_else(|| {
        MellinError::ContourInfeasible("no representation of the SOP admits a contour".into())
    })?;
    sop_with_form(cfg, plan.form)
}

/// SOP from a specific contour representation.
pub fn sop_with_form(cfg: &SecrecyConfig, form: SopForm) -> Result<SopExact, SecrecyError> {
    cfg.validate()?;
    let cs = contour();
    match form {
        SopForm::Upper => {
            let j = eval_kernel_2d(&sop_double_kernel(cfg, None), &cs, &cs)?;
            finish_sop(1.0 + j.value, j.error, form)
        }
        SopForm::Lower { residues } => {
            let (mut value, mut error) = (0.0, 0.0);
            for k in 0..=residues {
                let s = eval_kernel_1d(&sop_residue_kernel(cfg, k), &cs)?;
                value += s.value;
                error += s.error;
            }
            // The double integral is a correction to the residue sum, so it
            // only needs accuracy relative to that sum.
            let cj = cs.with_abs_tol(SOP_REL_TOL * value.abs());
            let j = eval_kernel_2d(&sop_double_kernel(cfg, Some(residues)), &cj, &cj)?;
            finish_sop(value + j.value, error + j.error, form)
        }
    }
}

fn finish_sop(value: f64, error: f64, form: SopForm) -> Result<SopExact, SecrecyError> {
    let tolerance = (10.0 * error).max(1e-12);
    if value < -tolerance || value > 1.0 + tolerance || !value.is_finite() {
        return Err(SecrecyError::OutOfRange {
            quantity: "SOP",
            value,
            tolerance,
        });
    }
    Ok(SopExact {
        value: value.clamp(0.0, 1.0),
        error,
        form,
    })
}

/// The upper-form double integral as a bivariate Fox H table, and the
/// factor `E/Γ(a+1)` such that `SOP = 1 + factor · H`.
///
/// `1/(-ζ)` is written as `Γ(-ζ)/Γ(1-ζ)`, which forces `0 < Re ζ < 1`.
pub fn sop_bivariate_spec(cfg: &SecrecyConfig) -> Result<(BivariateFoxHSpec, f64), SecrecyError> {
    cfg.validate()?;
    if cfg.rt_bar() == 0.0 {
        return Err(SecrecyError::Config("the double-integral form needs a positive rate".into()));
    }
    let k = sop_double_kernel(cfg, None);
    let spec = BivariateFoxHSpec {
        joint: vec![
            JointGammaFactor {
                offset: -1.0,
                scale_s: 1.0,
                scale_z: 0.5,
                numerator: true,
                crossed: 0,
            },
        ],
        group_s: GammaFactorGroup {
            upper: vec![GammaFactor::new(1.0, -1.0), GammaFactor::new(cfg.eve.a - 1.0, 2.0)],
            lower: vec![],
        },
        group_z: GammaFactorGroup {
            upper: vec![
                GammaFactor::new(cfg.main.a + 1.0, 1.0),
                GammaFactor {
                    offset: 0.0,
                    scale: -1.0,
                    crossed: 1,
                },
            ],
            lower: vec![GammaFactor::new(0.0, 0.5), GammaFactor::new(1.0, -1.0)],
        },
        x: (-k.log_arg[0]).exp(),
        y: (-k.log_arg[1]).exp(),
    };
    Ok((spec, k.prefactor))
}

/// Breakdown `ASC = I1 + I2 - I3`, all in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscBreakdown {
    pub total: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub error: f64,
}

/// ASC by three adaptive quadratures:
/// `I1 = E_B[log2(1+γ_B) F_E(γ_B)]`, `I2 = E_E[log2(1+γ_E) F_B(γ_E)]`,
/// `I3 = E_E[log2(1+γ_E)]`.
pub fn asc_quadrature(cfg: &SecrecyConfig) -> Result<AscBreakdown, SecrecyError> {
    cfg.validate()?;
    let cross = |own: &GammaSumApprox, other: &GammaSumApprox| {
        let c = own.snr_scale();
        let ratio = own.b * own.avg_snr.sqrt() / (other.b * other.avg_snr.sqrt());
        integrate_log_positive(
            |u| {
                ln_log2_1p(c * u * u)
                    + ln_regularized_lower_gamma(other.a + 1.0, ratio * u).unwrap_or(f64::NAN)
                    + ln_gamma_pdf(u, own.a)
            },
            QUAD_REL_TOL,
        )
    };
    let i1 = cross(&cfg.main, &cfg.eve)?;
    let i2 = cross(&cfg.eve, &cfg.main)?;
    let ce = cfg.eve.snr_scale();
    let i3 = integrate_log_positive(|u| ln_log2_1p(ce * u * u) + ln_gamma_pdf(u, cfg.eve.a), QUAD_REL_TOL)?;
    Ok(AscBreakdown {
        total: i1.value + i2.value - i3.value,
        i1: i1.value,
        i2: i2.value,
        i3: i3.value,
        error: i1.error + i2.error + i3.error,
    })
}

fn h_const(cfg: &SecrecyConfig) -> f64 {
    (-ln_gamma(cfg.main.a + 1.0) - ln_gamma(cfg.eve.a + 1.0)).exp() / LN_2
}

/// `I1` as a double integral over `(s, ζ)`:
/// `H (b²γ̄_B)^s X1^ζ Γ(1-s)Γ(s)²/Γ(1+s) · Γ(a'+1-ζ)Γ(ζ)/Γ(1+ζ) · Γ(1+a+2s+ζ)`
/// with `X1 = b√γ̄_B / (b'√γ̄_E)`. `I2` is the same with the receivers
/// exchanged.
fn asc_cross_kernel(cfg: &SecrecyConfig) -> MellinKernel {
    let (a, ae) = (cfg.main.a, cfg.eve.a);
    let x1 = (cfg.main.snr_scale() / cfg.eve.snr_scale()).sqrt();
    MellinKernel {
        gammas: vec![
            GammaTerm::num(1.0, -1.0, 0.0),
            GammaTerm::num(0.0, 1.0, 0.0),
            GammaTerm::num(0.0, 1.0, 0.0),
            GammaTerm::den(1.0, 1.0, 0.0),
            GammaTerm::num(ae + 1.0, 0.0, -1.0),
            GammaTerm::num(0.0, 0.0, 1.0),
            GammaTerm::den(1.0, 0.0, 1.0),
            GammaTerm::num(1.0 + a, 2.0, 1.0),
        ],
        log_arg: [cfg.main.snr_scale().ln(), x1.ln()],
        prefactor: h_const(cfg),
        ..Default::default()
    }
}

/// `I3 = E_E[log2(1+γ_E)]` as the Meijer G function
/// `O · G^{1,4}_{4,2}(4 b'²γ̄_E | 1, 1, (1-a')/2, -a'/2 ; 1, 0)` with
/// `O = 2^{a'} / (√π Γ(a'+1) ln 2)`.
pub fn asc_i3_spec(cfg: &SecrecyConfig) -> (MeijerGSpec, f64) {
    let ae = cfg.eve.a;
    let spec = MeijerGSpec {
        m: 1,
        n: 4,
        upper: vec![1.0, 1.0, 0.5 * (1.0 - ae), -0.5 * ae],
        lower: vec![1.0, 0.0],
        argument: 4.0 * cfg.eve.snr_scale(),
    };
    let factor = (ae * LN_2 - 0.5 * PI.ln() - ln_gamma(ae + 1.0)).exp() / LN_2;
    (spec, factor)
}

fn i3_exact(cfg: &SecrecyConfig) -> Result<MbEstimate, SecrecyError> {
    let (spec, factor) = asc_i3_spec(cfg);
    let k = crate::mellin::FoxHSpec::from(&spec).kernel()?;
    Ok(eval_kernel_1d(&k, &contour())?.scaled(factor))
}

/// ASC from the contour-integral representation.
pub fn asc_exact(cfg: &SecrecyConfig) -> Result<AscBreakdown, SecrecyError> {
    cfg.validate()?;
    let cs = contour();
    let i1 = eval_kernel_2d(&asc_cross_kernel(cfg), &cs, &cs)?;
    let i2 = eval_kernel_2d(&asc_cross_kernel(&cfg.swapped()), &cs, &cs)?;
    let i3 = i3_exact(cfg)?;
    let total = i1.value + i2.value - i3.value;
    let error = i1.error + i2.error + i3.error;
    let tolerance = (10.0 * error).max(1e-12);
    if total < -tolerance || !total.is_finite() {
        return Err(SecrecyError::OutOfRange {
            quantity: "ASC",
            value: total,
            tolerance,
        });
    }
    Ok(AscBreakdown {
        total: total.max(0.0),
        i1: i1.value,
        i2: i2.value,
        i3: i3.value,
        error,
    })
}

/// Leading high-SNR SOP including the rate offset:
/// `E[(R_t γ_E + R̄_t)^p] / (Γ(a+2) (b²γ̄_B)^p)` with `p = (a+1)/2`.
pub fn sop_asymptotic(cfg: &SecrecyConfig) -> Result<f64, SecrecyError> {
    cfg.validate()?;
    let a = cfg.main.a;
    let p = 0.5 * (a + 1.0);
    let moment = rate_offset_moment(cfg, p)?;
    Ok(moment * (-ln_gamma(a + 2.0) - p * cfg.main.snr_scale().ln()).exp())
}

/// `E[U^t]` for `U = R_t γ_E / R̄_t`, as a log.
fn ln_eve_moment(ae: f64, ln_scale: f64, t: f64) -> f64 {
    t * ln_scale + ln_gamma(ae + 1.0 + 2.0 * t) - ln_gamma(ae + 1.0)
}

/// `E[(R_t γ_E + R̄_t)^p]` through the binomial residue series plus a
/// Mellin–Barnes remainder.
fn rate_offset_moment(cfg: &SecrecyConfig, p: f64) -> Result<f64, SecrecyError> {
    let (rt, rt_bar) = (cfg.rt(), cfg.rt_bar());
    let ae = cfg.eve.a;
    let ce = cfg.eve.snr_scale();
    if rt_bar == 0.0 {
        return Ok(ln_eve_moment(ae, (rt * ce).ln(), p).exp());
    }
    let ln_u = (rt * ce / rt_bar).ln();
    let kmax = p.floor() as u32;
    let mut series = 0.0;
    for k in 0..=kmax {
        let kf = k as f64;
        let ln_binom = ln_gamma(p + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(p - kf + 1.0);
        series += (ln_binom + ln_eve_moment(ae, ln_u, p - kf)).exp();
    }
    let integer_power = (p - p.round()).abs() < 1e-12;
    let remainder = if integer_power {
        0.0
    } else {
        let lg = log_gamma_complex(num_complex::Complex64::new(-p, 0.0))?;
        let sign = lg.im.cos().signum();
        let kernel = MellinKernel {
            gammas: vec![
                GammaTerm::num(0.0, -1.0, 0.0),
                GammaTerm::num(-p, 1.0, 0.0).crossing(kmax + 1),
                GammaTerm::num(ae + 1.0, 2.0, 0.0),
            ],
            log_arg: [ln_u, 0.0],
            prefactor: sign * (-lg.re - ln_gamma(ae + 1.0)).exp(),
            ..Default::default()
        };
        eval_kernel_1d(&kernel, &contour())?.value
    };
    Ok(rt_bar.powf(p) * (series + remainder))
}

/// The rate-offset-free limit of [`sop_asymptotic`]:
/// `Γ(a+a'+2) / (Γ(a'+1) Γ(a+2)) · (b'² R_t γ̄_E / (b² γ̄_B))^{(a+1)/2}`.
pub fn sop_asymptotic_leading(cfg: &SecrecyConfig) -> f64 {
    let (a, ae) = (cfg.main.a, cfg.eve.a);
    let p = 0.5 * (a + 1.0);
    let ratio = cfg.eve.snr_scale() * cfg.rt() / cfg.main.snr_scale();
    (ln_gamma(a + ae + 2.0) - ln_gamma(ae + 1.0) - ln_gamma(a + 2.0) + p * ratio.ln()).exp()
}

/// Terms of the high-SNR ASC expansion, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscAsymptotic {
    pub total: f64,
    /// Contribution of the moving pole; decays like `γ̄_B^{-(a+1)/2}`.
    pub t1: f64,
    /// Logarithmic growth, proportional to `ln(b² γ̄_B)`.
    pub t2_log: f64,
    /// Digamma-weighted constant of the double pole.
    pub t2_digamma: f64,
    /// Leading eavesdropper correction; decays like `γ̄_B^{-(a+1)/2}`.
    pub t3: f64,
    pub i3: f64,
}

fn asc_zeta_base(cfg: &SecrecyConfig) -> Vec<GammaTerm> {
    vec![
        GammaTerm::num(cfg.eve.a + 1.0, -1.0, 0.0),
        GammaTerm::num(0.0, 1.0, 0.0),
        GammaTerm::den(1.0, 1.0, 0.0),
    ]
}

/// High-SNR ASC: residues of `I1` at the double pole `s = 0` and at the
/// moving pole `s = -(1+a+ζ)/2`, the leading residue of `I2` at
/// `ζ = a + 1`, minus `I3`.
pub fn asc_asymptotic(cfg: &SecrecyConfig) -> Result<AscAsymptotic, SecrecyError> {
    cfg.validate()?;
    let (a, ae) = (cfg.main.a, cfg.eve.a);
    let h = h_const(cfg);
    let xb = cfg.main.snr_scale();
    let xe = cfg.eve.snr_scale();
    let ln_x1 = 0.5 * (xb / xe).ln();
    let cs = contour();

    // Double pole at s = 0.
    let mut gammas = asc_zeta_base(cfg);
    gammas.push(GammaTerm::num(1.0 + a, 1.0, 0.0));
    let base = MellinKernel {
        gammas,
        log_arg: [ln_x1, 0.0],
        prefactor: h,
        ..Default::default()
    };
    let t2_log = xb.ln() * eval_kernel_1d(&base, &cs)?.value;
    let weighted = MellinKernel {
        weight: Some(DigammaWeight {
            constant: 0.0,
            terms: vec![(2.0, GammaTerm::num(1.0 + a, 1.0, 0.0))],
        }),
        ..base
    };
    let t2_digamma = eval_kernel_1d(&weighted, &cs)?.value;

    // Moving pole: Γ(1-s₀) Γ(s₀)/s₀ with s₀ = -(1+a+ζ)/2, on a strip of ζ
    // between 0 and the first pole of Γ(s₀) to its right.
    let half = 0.5 * (1.0 + a);
    let mut crossed = half.ceil();
    if crossed == half || 2.0 * crossed - 1.0 - a < 0.1 {
        crossed += 1.0;
    }
    let mut gammas = asc_zeta_base(cfg);
    gammas.push(GammaTerm::num(0.5 * (3.0 + a), 0.5, 0.0));
    gammas.push(GammaTerm::num(-half, -0.5, 0.0).crossing(crossed as u32));
    let moving = MellinKernel {
        gammas,
        linears: vec![LinearTerm {
            c: -half,
            a: -0.5,
            b: 0.0,
            power: -1,
            left_of_pole: true,
        }],
        log_arg: [-0.5 * xe.ln(), 0.0],
        prefactor: 0.5 * h * (-half * xb.ln()).exp(),
        ..Default::default()
    };
    let t1 = eval_kernel_1d(&moving, &cs)?.value;

    // Leading residue of I2 at ζ = a + 1.
    let t3_kernel = MellinKernel {
        gammas: vec![
            GammaTerm::num(1.0, -1.0, 0.0),
            GammaTerm::num(0.0, 1.0, 0.0),
            GammaTerm::num(0.0, 1.0, 0.0),
            GammaTerm::den(1.0, 1.0, 0.0),
            GammaTerm::num(2.0 + a + ae, 2.0, 0.0),
        ],
        log_arg: [xe.ln(), 0.0],
        prefactor: h * (-(a + 1.0) * ln_x1).exp() / (a + 1.0),
        ..Default::default()
    };
    let t3 = eval_kernel_1d(&t3_kernel, &cs)?.value;
    let i3 = i3_exact(cfg)?.value;
    Ok(AscAsymptotic {
        total: t1 + t2_log + t2_digamma + t3 - i3,
        t1,
        t2_log,
        t2_digamma,
        t3,
        i3,
    })
}

fn check_agreement(
    quantity: &'static str,
    closed: Evaluated,
    oracle: Evaluated,
    rel_tol: f64,
) -> Result<(), SecrecyError> {
    let diff = (closed.value - oracle.value).abs();
    let allowed = (rel_tol * oracle.value.abs()).max(closed.error + oracle.error);
    if diff > allowed || !diff.is_finite() {
        return Err(SecrecyError::OracleMismatch {
            quantity,
            closed: closed.value,
            oracle: oracle.value,
            deviation: diff / oracle.value.abs(),
            allowed: allowed / oracle.value.abs(),
        });
    }
    Ok(())
}

/// [`sop_exact`] cross-checked against [`sop_quadrature`]; disagreement
/// beyond `rel_tol` (or the combined error estimates, if larger) is an
/// error.
pub fn sop_verified(cfg: &SecrecyConfig, rel_tol: f64) -> Result<(SopExact, Evaluated), SecrecyError> {
    let exact = sop_exact(cfg)?;
    let quad = sop_quadrature(cfg)?;
    check_agreement(
        "SOP",
        Evaluated {
            value: exact.value,
            error: exact.error,
        },
        quad,
        rel_tol,
    )?;
    Ok((exact, quad))
}

/// [`asc_exact`] cross-checked against [`asc_quadrature`].
pub fn asc_verified(
    cfg: &SecrecyConfig,
    rel_tol: f64,
) -> Result<(AscBreakdown, AscBreakdown), SecrecyError> {
    let exact = asc_exact(cfg)?;
    let quad = asc_quadrature(cfg)?;
    check_agreement(
        "ASC",
        Evaluated {
            value: exact.total,
            error: exact.error,
        },
        Evaluated {
            value: quad.total,
            error: quad.error,
        },
        rel_tol,
    )?;
    Ok((exact, quad))
}
