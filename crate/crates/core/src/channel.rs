//! Fisher-Snedecor F fading, cascaded-link moments and the Gamma law that
//! approximates the end-to-end SNR.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::mellin::{ln_beta, ln_gamma, ln_regularized_lower_gamma, regularized_lower_gamma};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid fading parameters on {link} link: {reason}")]
    InvalidParams { link: String, reason: String },
    #[error("invalid link budget: {0}")]
    InvalidBudget(String),
    #[error("number of reflecting elements must be at least 1")]
    NoElements,
    #[error("invalid Gamma approximation: {0}")]
    InvalidApprox(String),
}

/// Composite fading of one hop: power `Y = (Ω (m_s - 1) / m) · G1 / G2`
/// with `G1 ~ Gamma(m, 1)` and `G2 ~ Gamma(m_s, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherFParams {
    /// Multipath severity.
    pub m: f64,
    /// Shadowing severity; must exceed 1 for the mean power to exist.
    pub m_s: f64,
    /// Mean power.
    pub omega: f64,
}

impl FisherFParams {
    pub fn new(m: f64, m_s: f64, omega: f64) -> Result<Self, ChannelError> {
        let p = Self { m, m_s, omega };
        p.validate("this")?;
        Ok(p)
    }

    pub fn validate(&self, link: &str) -> Result<(), ChannelError> {
        let fail = |reason: String| {
            Err(ChannelError::InvalidParams {
                link: link.to_string(),
                reason,
            })
        };
        if !(self.m > 0.0) || !self.m.is_finite() {
            return fail(format!("m must be positive, got {}", self.m));
        }
        if !(self.m_s > 1.0) || !self.m_s.is_finite() {
            return fail(format!("m_s must exceed 1, got {}", self.m_s));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return fail(format!("omega must be positive, got {}", self.omega));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.omega * (self.m_s - 1.0) / self.m
    }

    /// `E[Y^k]` for `-m < k < m_s`.
    pub fn power_moment(&self, k: f64) -> f64 {
        debug_assert!(k > -self.m && k < self.m_s);
        (k * self.scale().ln() + ln_beta(self.m + k, self.m_s - k) - ln_beta(self.m, self.m_s)).exp()
    }
}

/// Sampler for the F-distributed power of one hop.
#[derive(Debug, Clone, Copy)]
pub struct FPowerSampler {
    numerator: Gamma<f64>,
    denominator: Gamma<f64>,
    scale: f64,
}

impl FPowerSampler {
    pub fn new(params: &FisherFParams) -> Result<Self, ChannelError> {
        params.validate("sampled")?;
        let bad = |e: rand_distr::GammaError| ChannelError::InvalidParams {
            link: "sampled".into(),
            reason: e.to_string(),
        };
        Ok(Self {
            numerator: Gamma::new(params.m, 1.0).map_err(bad)?,
            denominator: Gamma::new(params.m_s, 1.0).map_err(bad)?,
            scale: params.scale(),
        })
    }

    pub fn power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g1 = self.numerator.sample(rng);
        let g2 = self.denominator.sample(rng);
        self.scale * g1 / g2
    }

    pub fn amplitude<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.power(rng).sqrt()
    }
}

/// One draw of the F-distributed power. Builds a sampler per call; hot loops
/// should hold an [`FPowerSampler`] instead.
pub fn sample_f_power<R: Rng + ?Sized>(params: &FisherFParams, rng: &mut R) -> Result<f64, ChannelError> {
    Ok(FPowerSampler::new(params)?.power(rng))
}

/// Transmit power, noise and geometry of one receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub power_dbm: f64,
    pub noise_dbm: f64,
    /// Transmitter to surface.
    pub dist_ar_m: f64,
    /// Surface to receiver.
    pub dist_rx_m: f64,
    pub alpha: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Average SNR `P / (σ² d_AR^α d_Rx^α)` in linear units.
pub fn avg_snr(budget: &LinkBudget) -> Result<f64, ChannelError> {
    let b = budget;
    if !(b.dist_ar_m > 0.0 && b.dist_rx_m > 0.0) {
        return Err(ChannelError::InvalidBudget(format!(
            "distances must be positive, got {} and {}",
            b.dist_ar_m, b.dist_rx_m
        )));
    }
    if !(b.alpha >= 0.0) || !b.alpha.is_finite() {
        return Err(ChannelError::InvalidBudget(format!(
            "path-loss exponent must be nonnegative, got {}",
            b.alpha
        )));
    }
    let snr = dbm_to_watts(b.power_dbm) / dbm_to_watts(b.noise_dbm)
        / (b.dist_ar_m * b.dist_rx_m).powf(b.alpha);
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(ChannelError::InvalidBudget(format!("average SNR {snr} is not usable")));
    }
    Ok(snr)
}

/// Beta-function constants of the two-hop amplitude product `g·h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductMomentSet {
    /// `B(m1+1, m_s1-1) B(m2+1, m_s2-1)`
    pub a: f64,
    /// `B(m1+1/2, m_s1-1/2) B(m2+1/2, m_s2-1/2)`
    pub b: f64,
    /// `B(m1, m_s1) B(m2, m_s2)`
    pub c: f64,
    /// `sqrt((m_s1-1)(m_s2-1) Ω1 Ω2 / (m1 m2))`
    pub d: f64,
    ln_a: f64,
    ln_b: f64,
    ln_c: f64,
}

impl ProductMomentSet {
    pub fn new(link1: &FisherFParams, link2: &FisherFParams) -> Result<Self, ChannelError> {
        link1.validate("first")?;
        link2.validate("second")?;
        let (p, q) = (link1, link2);
        let ln_a = ln_beta(p.m + 1.0, p.m_s - 1.0) + ln_beta(q.m + 1.0, q.m_s - 1.0);
        let ln_b = ln_beta(p.m + 0.5, p.m_s - 0.5) + ln_beta(q.m + 0.5, q.m_s - 0.5);
        let ln_c = ln_beta(p.m, p.m_s) + ln_beta(q.m, q.m_s);
        let d = (p.scale() * q.scale()).sqrt();
        Ok(Self {
            a: ln_a.exp(),
            b: ln_b.exp(),
            c: ln_c.exp(),
            d,
            ln_a,
            ln_b,
            ln_c,
        })
    }

    /// `B² / (A C)`, below 1 by Lyapunov's inequality.
    pub fn ratio(&self) -> f64 {
        (2.0 * self.ln_b - self.ln_a - self.ln_c).exp()
    }

    /// `1 - B²/(AC)`, computed without cancellation.
    fn one_minus_ratio(&self) -> f64 {
        -(2.0 * self.ln_b - self.ln_a - self.ln_c).exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductMoments {
    /// `E[g h]`
    pub mean: f64,
    /// `Var[g h]`
    pub variance: f64,
    pub moments: ProductMomentSet,
}

/// Mean and variance of the amplitude product of two independent F hops.
pub fn product_moments(link1: &FisherFParams, link2: &FisherFParams) -> Result<ProductMoments, ChannelError> {
    let mo = ProductMomentSet::new(link1, link2)?;
    let mean = (mo.ln_b - mo.ln_c).exp() * mo.d;
    let second = (mo.ln_a - mo.ln_c).exp() * mo.d * mo.d;
    let variance = second * mo.one_minus_ratio();
    Ok(ProductMoments {
        mean,
        variance,
        moments: mo,
    })
}

/// Shape offset `a` (the Gamma shape is `a + 1`) and scale `b` of the law
/// fitted to the sum of `N` amplitude products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaShape {
    pub a: f64,
    pub b: f64,
}

impl GammaShape {
    pub fn at_snr(self, avg_snr: f64) -> GammaSumApprox {
        GammaSumApprox {
            a: self.a,
            b: self.b,
            avg_snr,
        }
    }
}

/// Gamma law of the amplitude sum together with the average SNR it scales.
/// The instantaneous SNR is `avg_snr · (b U)²` with `U ~ Gamma(a + 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSumApprox {
    pub a: f64,
    pub b: f64,
    pub avg_snr: f64,
}

impl GammaSumApprox {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.a > -1.0) || !(self.b > 0.0) || !(self.avg_snr > 0.0) {
            return Err(ChannelError::InvalidApprox(format!(
                "need a > -1, b > 0, avg_snr > 0; got a={}, b={}, avg_snr={}",
                self.a, self.b, self.avg_snr
            )));
        }
        if !self.a.is_finite() || !self.b.is_finite() || !self.avg_snr.is_finite() {
            return Err(ChannelError::InvalidApprox("non-finite parameter".into()));
        }
        Ok(())
    }

    /// `b² γ̄`, the scale of the SNR in units of `U²`.
    pub fn snr_scale(&self) -> f64 {
        self.b * self.b * self.avg_snr
    }
}

/// Closed-form fit `a = ((N+1)B² - AC)/(AC - B²)`, `b = D (AC - B²)/(B C)`.
pub fn moment_match(n: u32, link1: &FisherFParams, link2: &FisherFParams) -> Result<GammaShape, ChannelError> {
    if n == 0 {
        return Err(ChannelError::NoElements);
    }
    let mo = ProductMomentSet::new(link1, link2)?;
    let r = mo.ratio();
    let one_minus = mo.one_minus_ratio();
    let a = ((n as f64 + 1.0) * r - 1.0) / one_minus;
    let b = mo.d * (mo.ln_a - mo.ln_b).exp() * one_minus;
    Ok(GammaShape { a, b })
}

/// The same fit through the mean and variance of one product:
/// `a = N E²/Var - 1`, `b = Var/E`.
pub fn moment_match_via_moments(
    n: u32,
    link1: &FisherFParams,
    link2: &FisherFParams,
) -> Result<GammaShape, ChannelError> {
    if n == 0 {
        return Err(ChannelError::NoElements);
    }
    let pm = product_moments(link1, link2)?;
    Ok(GammaShape {
        a: n as f64 * pm.mean * pm.mean / pm.variance - 1.0,
        b: pm.variance / pm.mean,
    })
}

fn ln_pdf(gamma: f64, ap: &GammaSumApprox) -> f64 {
    let (a, b, g) = (ap.a, ap.b, ap.avg_snr);
    0.5 * (a - 1.0) * gamma.ln()
        - std::f64::consts::LN_2
        - 0.5 * (a + 1.0) * g.ln()
        - (a + 1.0) * b.ln()
        - ln_gamma(a + 1.0)
        - gamma.sqrt() / (b * g.sqrt())
}

/// Density of the end-to-end SNR.
pub fn snr_pdf(gamma: f64, approx: &GammaSumApprox) -> f64 {
    if gamma < 0.0 {
        return 0.0;
    }
    if gamma == 0.0 {
        let a = approx.a;
        return match a.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Equal) => {
                1.0 / (2.0 * approx.avg_snr * approx.b * approx.b)
            }
            _ => f64::INFINITY,
        };
    }
    ln_pdf(gamma, approx).exp()
}

fn cdf_argument(gamma: f64, ap: &GammaSumApprox) -> f64 {
    gamma.sqrt() / (ap.b * ap.avg_snr.sqrt())
}

/// Distribution function of the end-to-end SNR.
pub fn snr_cdf(gamma: f64, approx: &GammaSumApprox) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    regularized_lower_gamma(approx.a + 1.0, cdf_argument(gamma, approx))
        .expect("shape a + 1 is positive for a validated approximation")
}

/// `ln F(γ)`, accurate where `F` underflows.
pub fn snr_ln_cdf(gamma: f64, approx: &GammaSumApprox) -> f64 {
    if gamma <= 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_regularized_lower_gamma(approx.a + 1.0, cdf_argument(gamma, approx))
        .expect("shape a + 1 is positive for a validated approximation")
}
