//! Scenario files and the resolved run manifest.
//!
//! A config file is TOML with one flat section per concern. Every key is
//! optional and falls back to the defaults below, which describe the
//! reference deployment: 30 dBm transmit power, -40 dBm noise at Bob and
//! -20 dBm at Eve, all hops 10 m, path-loss exponent 3, six elements and
//! `(m_s, m, Ω) = (3, 2, 1)` on every hop.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use risf_core::channel::{FisherFParams, LinkBudget};
use risf_core::mc_sim::{EveMode, GMode, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Sop,
    Asc,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Sop => "sop",
            Metric::Asc => "asc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Quadrature,
    Asymptotic,
    Mc,
    All,
}

impl Mode {
    pub const CONCRETE: [Mode; 4] = [Mode::Exact, Mode::Quadrature, Mode::Asymptotic, Mode::Mc];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Quadrature => "quadrature",
            Mode::Asymptotic => "asymptotic",
            Mode::Mc => "mc",
            Mode::All => "all",
        }
    }
}

/// Expands `all` and removes duplicates while keeping the first-seen order.
pub fn expand_modes(modes: &[Mode]) -> Vec<Mode> {
    let mut out = Vec::new();
    for &m in modes {
        let items: &[Mode] = if m == Mode::All { &Mode::CONCRETE } else { std::slice::from_ref(&m) };
        for &x in items {
            if !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

/// Parameter varied along the sweep axis or across series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Bob's average SNR in dB.
    GammaB,
    /// Eve's average SNR in dB.
    GammaE,
    /// Number of reflecting elements.
    N,
    /// Multipath parameter of every hop.
    M,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::GammaB => "gamma-b",
            Axis::GammaE => "gamma-e",
            Axis::N => "n",
            Axis::M => "m",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EveModeArg {
    Coherent,
    RandomPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GModeArg {
    Independent,
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_elements: u32,
    /// Target secrecy rate in nats.
    pub rate_nats: f64,
    pub power_dbm: f64,
    pub dist_ar_m: f64,
    pub alpha: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            n_elements: 6,
            rate_nats: 1.0,
            power_dbm: 30.0,
            dist_ar_m: 10.0,
            alpha: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub m: f64,
    pub m_s: f64,
    pub omega: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            m: 2.0,
            m_s: 3.0,
            omega: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSection {
    /// Missing means the receiver's reference value, -40 dBm for Bob and
    /// -20 dBm for Eve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_dbm: Option<f64>,
    /// Surface to receiver.
    #[serde(default = "default_distance")]
    pub dist_m: f64,
    /// Overrides the link budget when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_snr_db: Option<f64>,
}

fn default_distance() -> f64 {
    10.0
}

impl ReceiverSection {
    fn with_noise(noise_dbm: f64) -> Self {
        Self {
            noise_dbm: Some(noise_dbm),
            dist_m: default_distance(),
            avg_snr_db: None,
        }
    }
}

const BOB_NOISE_DBM: f64 = -40.0;
const EVE_NOISE_DBM: f64 = -20.0;

fn default_bob() -> ReceiverSection {
    ReceiverSection::with_noise(BOB_NOISE_DBM)
}

fn default_eve() -> ReceiverSection {
    ReceiverSection::with_noise(EVE_NOISE_DBM)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub trials: u64,
    pub seed: u64,
    pub eve_mode: EveModeArg,
    pub g_mode: GModeArg,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 1,
            eve_mode: EveModeArg::Coherent,
            g_mode: GModeArg::Independent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSection {
    pub parameter: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub metric: Metric,
    pub modes: Vec<Mode>,
    pub axis: Axis,
    pub from_db: f64,
    pub to_db: f64,
    pub step_db: f64,
    pub series: Option<SeriesSection>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            metric: Metric::Sop,
            modes: vec![Mode::Exact, Mode::Quadrature],
            axis: Axis::GammaB,
            from_db: -10.0,
            to_db: 40.0,
            step_db: 5.0,
            series: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Receiver {
    Bob,
    Eve,
}

/// Grid of instantaneous SNR values for `dist`, in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistSection {
    pub receiver: Receiver,
    pub from_db: f64,
    pub to_db: f64,
    pub step_db: f64,
    /// Confidence of the DKW band.
    pub confidence: f64,
}

impl Default for DistSection {
    fn default() -> Self {
        Self {
            receiver: Receiver::Bob,
            from_db: -20.0,
            to_db: 35.0,
            step_db: 0.05,
            confidence: 0.99,
        }
    }
}

/// Pass/fail thresholds used by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    /// Contour value against quadrature, relative.
    pub sop_rel: f64,
    pub asc_rel: f64,
    /// Monte-Carlo slack in standard errors.
    pub mc_sigmas: f64,
    /// Extra Monte-Carlo slack for the Gamma approximation: absolute for
    /// the SOP, relative for the ASC.
    pub sop_mc_budget: f64,
    pub asc_mc_budget: f64,
    /// Allowed relative deviation of the high-SNR expressions.
    pub sop_asymptotic: f64,
    pub asc_asymptotic: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self {
            sop_rel: 1e-6,
            asc_rel: 1e-5,
            mc_sigmas: 3.0,
            sop_mc_budget: 0.01,
            asc_mc_budget: 0.02,
            sop_asymptotic: 0.05,
            asc_asymptotic: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Manifest {
    pub scenario: ScenarioSection,
    pub link_ar: LinkSection,
    pub link_rb: LinkSection,
    pub link_re: LinkSection,
    #[serde(default = "default_bob")]
    pub bob: ReceiverSection,
    #[serde(default = "default_eve")]
    pub eve: ReceiverSection,
    pub mc: McSection,
    pub sweep: SweepSection,
    pub dist: DistSection,
    pub tolerance: ToleranceSection,
}

impl Default for Manifest {
    fn default() -> Self {
        Self {
            scenario: ScenarioSection::default(),
            link_ar: LinkSection::default(),
            link_rb: LinkSection::default(),
            link_re: LinkSection::default(),
            bob: default_bob(),
            eve: default_eve(),
            mc: McSection::default(),
            sweep: SweepSection::default(),
            dist: DistSection::default(),
            tolerance: ToleranceSection::default(),
        }
    }
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m: Self = toml::from_str(text)?;
        m.bob.noise_dbm.get_or_insert(BOB_NOISE_DBM);
        m.eve.noise_dbm.get_or_insert(EVE_NOISE_DBM);
        Ok(m)
    }

    /// The manifest as TOML, for echoing into output headers.
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Points of the sweep axis, `from_db` to `to_db` inclusive.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let s = &self.sweep;
        inclusive_grid(s.from_db, s.to_db, s.step_db)
    }

    /// SNR grid of `dist`, in dB.
    pub fn dist_grid(&self) -> Result<Vec<f64>> {
        let d = &self.dist;
        inclusive_grid(d.from_db, d.to_db, d.step_db)
    }

    /// Scenario at the base point, before any axis or series value.
    pub fn scenario(&self) -> Result<Scenario> {
        let link = |l: &LinkSection, name: &str| -> Result<FisherFParams> {
            let p = FisherFParams {
                m: l.m,
                m_s: l.m_s,
                omega: l.omega,
            };
            p.validate(name)?;
            Ok(p)
        };
        let budget = |r: &ReceiverSection, fallback: f64| LinkBudget {
            power_dbm: self.scenario.power_dbm,
            noise_dbm: r.noise_dbm.unwrap_or(fallback),
            dist_ar_m: self.scenario.dist_ar_m,
            dist_rx_m: r.dist_m,
            alpha: self.scenario.alpha,
        };
        let mut sc = Scenario {
            n_elements: self.scenario.n_elements,
            params_ar: link(&self.link_ar, "transmitter-surface")?,
            params_rb: link(&self.link_rb, "surface-Bob")?,
            params_re: link(&self.link_re, "surface-Eve")?,
            budget_b: budget(&self.bob, BOB_NOISE_DBM),
            budget_e: budget(&self.eve, EVE_NOISE_DBM),
            rate_nats: self.scenario.rate_nats,
            trials: self.mc.trials,
            seed: self.mc.seed,
            eve_mode: match self.mc.eve_mode {
                EveModeArg::Coherent => EveMode::Coherent,
                EveModeArg::RandomPhase => EveMode::RandomPhase,
            },
            g_mode: match self.mc.g_mode {
                GModeArg::Independent => GMode::Independent,
                GModeArg::Shared => GMode::Shared,
            },
        };
        if let Some(db) = self.bob.avg_snr_db {
            sc.set_avg_snr_b_db(db)?;
        }
        if let Some(db) = self.eve.avg_snr_db {
            sc.set_avg_snr_e_db(db)?;
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn inclusive_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() {
        bail!("grid step must be positive and the bounds finite");
    }
    if to < from {
        bail!("grid is empty: upper bound {to} is below lower bound {from}");
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        bail!("grid has {count} points");
    }
    Ok((0..count).map(|i| from + i as f64 * step).collect())
}

/// Applies one axis or series value to a scenario.
pub fn apply(sc: &mut Scenario, axis: Axis, value: f64) -> Result<()> {
    match axis {
        Axis::GammaB => sc.set_avg_snr_b_db(value)?,
        Axis::GammaE => sc.set_avg_snr_e_db(value)?,
        Axis::N => {
            if !(value >= 1.0) || value.fract() != 0.0 || value > u32::MAX as f64 {
                bail!("number of elements must be a positive integer, got {value}");
            }
            sc.n_elements = value as u32;
        }
        Axis::M => {
            for p in [&mut sc.params_ar, &mut sc.params_rb, &mut sc.params_re] {
                p.m = value;
            }
        }
    }
    sc.validate()?;
    Ok(())
}
