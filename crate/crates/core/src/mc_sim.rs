//! Monte-Carlo simulation of the physical two-hop model.
//!
//! Every trial draws fresh per-element amplitudes and forms the coherent
//! sums at both receivers. Trial `i` uses its own ChaCha stream keyed by
//! `(seed, i)`, so results are bit-identical however the trials are spread
//! over threads.

use std::f64::consts::{LN_2, PI};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    avg_snr, linear_to_db, moment_match, ChannelError, FPowerSampler, FisherFParams, LinkBudget,
};
use crate::secrecy::{secrecy_capacity, SecrecyConfig, SecrecyError};

#[derive(Debug, Error)]
pub enum McError {
    #[error("empty sample set")]
    Empty,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Secrecy(#[from] SecrecyError),
    #[error("failed to write samples: {0}")]
    Csv(#[from] csv::Error),
}

/// How the eavesdropper's element contributions combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EveMode {
    /// Phases happen to align at Eve as well, `γ_E = γ̄_E (Σ g k)²`.
    #[default]
    Coherent,
    /// Each element contributes with an independent uniform phase.
    RandomPhase,
}

/// Whether Eve sees the same transmitter-to-surface gains as Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GMode {
    /// Fresh `g_n` for Eve, so `γ_B` and `γ_E` are independent. This is the
    /// assumption behind the analytic results.
    #[default]
    Independent,
    /// Eve reuses Bob's `g_n`, as in the physical geometry.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub n_elements: u32,
    /// Transmitter to surface.
    pub params_ar: FisherFParams,
    /// Surface to Bob.
    pub params_rb: FisherFParams,
    /// Surface to Eve.
    pub params_re: FisherFParams,
    pub budget_b: LinkBudget,
    pub budget_e: LinkBudget,
    pub rate_nats: f64,
    pub trials: u64,
    pub seed: u64,
    pub eve_mode: EveMode,
    pub g_mode: GMode,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), McError> {
        if self.n_elements == 0 {
            return Err(ChannelError::NoElements.into());
        }
        if self.trials == 0 {
            return Err(McError::InvalidScenario("at least one trial is needed".into()));
        }
        if !(self.rate_nats >= 0.0) || !self.rate_nats.is_finite() {
            return Err(McError::InvalidScenario(format!(
                "rate must be finite and nonnegative, got {}",
                self.rate_nats
            )));
        }
        self.params_ar.validate("transmitter-surface")?;
        self.params_rb.validate("surface-Bob")?;
        self.params_re.validate("surface-Eve")?;
        avg_snr(&self.budget_b)?;
        avg_snr(&self.budget_e)?;
        Ok(())
    }

    pub fn avg_snr_b(&self) -> Result<f64, McError> {
        Ok(avg_snr(&self.budget_b)?)
    }

    pub fn avg_snr_e(&self) -> Result<f64, McError> {
        Ok(avg_snr(&self.budget_e)?)
    }

    /// Moves Bob's noise floor so that his average SNR becomes `db`.
    pub fn set_avg_snr_b_db(&mut self, db: f64) -> Result<(), McError> {
        self.budget_b.noise_dbm += linear_to_db(self.avg_snr_b()?) - db;
        Ok(())
    }

    /// Moves Eve's noise floor so that her average SNR becomes `db`.
    pub fn set_avg_snr_e_db(&mut self, db: f64) -> Result<(), McError> {
        self.budget_e.noise_dbm += linear_to_db(self.avg_snr_e()?) - db;
        Ok(())
    }

    /// The Gamma-approximated model of this scenario, for the analytic
    /// evaluators.
    pub fn secrecy_config(&self) -> Result<SecrecyConfig, McError> {
        self.validate()?;
        let main = moment_match(self.n_elements, &self.params_ar, &self.params_rb)?;
        let eve = moment_match(self.n_elements, &self.params_ar, &self.params_re)?;
        Ok(SecrecyConfig::new(
            self.rate_nats,
            main.at_snr(self.avg_snr_b()?),
            eve.at_snr(self.avg_snr_e()?),
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub gamma_b: f64,
    pub gamma_e: f64,
}

impl Sample {
    pub fn secrecy_capacity(&self) -> f64 {
        secrecy_capacity(self.gamma_b, self.gamma_e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub samples: Vec<Sample>,
    pub avg_snr_b: f64,
    pub avg_snr_e: f64,
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

struct Samplers {
    ar: FPowerSampler,
    rb: FPowerSampler,
    re: FPowerSampler,
}

/// Bob's amplitudes are drawn before Eve's, so switching Eve's model leaves
/// Bob's channel untouched for a given seed.
fn draw<R: Rng>(sc: &Scenario, s: &Samplers, gb: f64, ge: f64, g: &mut Vec<f64>, rng: &mut R) -> Sample {
    g.clear();
    let mut sum_b = 0.0;
    for _ in 0..sc.n_elements {
        let gn = s.ar.amplitude(rng);
        sum_b += gn * s.rb.amplitude(rng);
        g.push(gn);
    }
    let (mut re_e, mut im_e) = (0.0, 0.0);
    for &gn in g.iter() {
        let g_e = match sc.g_mode {
            GMode::Independent => s.ar.amplitude(rng),
            GMode::Shared => gn,
        };
        let term = g_e * s.re.amplitude(rng);
        match sc.eve_mode {
            EveMode::Coherent => re_e += term,
            EveMode::RandomPhase => {
                let (sin, cos) = rng.random_range(0.0..2.0 * PI).sin_cos();
                re_e += term * cos;
                im_e += term * sin;
            }
        }
    }
    Sample {
        gamma_b: gb * sum_b * sum_b,
        gamma_e: ge * (re_e * re_e + im_e * im_e),
    }
}

pub fn simulate(scenario: &Scenario) -> Result<Simulation, McError> {
    scenario.validate()?;
    let samplers = Samplers {
        ar: FPowerSampler::new(&scenario.params_ar)?,
        rb: FPowerSampler::new(&scenario.params_rb)?,
        re: FPowerSampler::new(&scenario.params_re)?,
    };
    let (gb, ge) = (scenario.avg_snr_b()?, scenario.avg_snr_e()?);
    let samples = (0..scenario.trials)
        .into_par_iter()
        .map_init(Vec::new, |g, i| {
            draw(scenario, &samplers, gb, ge, g, &mut trial_rng(scenario.seed, i))
        })
        .collect();
    Ok(Simulation {
        samples,
        avg_snr_b: gb,
        avg_snr_e: ge,
    })
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Sum in a fixed pairwise order, so rounding does not depend on how the
/// caller produced the slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

fn mean_and_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if xs.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    Estimate {
        estimate: mean,
        stderr: (var / n).sqrt(),
    }
}

/// Fraction of trials in outage, `C_s ≤ R_s`, with the binomial standard
/// error.
pub fn empirical_sop(samples: &[Sample], rate_nats: f64) -> Result<Estimate, McError> {
    if samples.is_empty() {
        return Err(McError::Empty);
    }
    let hits = samples
        .iter()
        .filter(|s| s.secrecy_capacity() <= rate_nats)
        .count();
    let n = samples.len() as f64;
    let p = hits as f64 / n;
    Ok(Estimate {
        estimate: p,
        stderr: (p * (1.0 - p) / n).sqrt(),
    })
}

/// Mean secrecy capacity in bits.
pub fn empirical_asc(samples: &[Sample]) -> Result<Estimate, McError> {
    if samples.is_empty() {
        return Err(McError::Empty);
    }
    let bits: Vec<f64> = samples.iter().map(|s| s.secrecy_capacity() / LN_2).collect();
    Ok(mean_and_stderr(&bits))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub x: f64,
    pub cdf: f64,
    /// Dvoretzky–Kiefer–Wolfowitz band at the requested confidence.
    pub lower: f64,
    pub upper: f64,
}

/// Half-width of the DKW band for `n` samples at confidence `1 - alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Empirical CDF of `values` at each grid point, with a DKW band of
/// confidence `confidence` (e.g. 0.99).
pub fn empirical_cdf(values: &[f64], grid: &[f64], confidence: f64) -> Result<Vec<CdfPoint>, McError> {
    if values.is_empty() {
        return Err(McError::Empty);
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(McError::InvalidScenario(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let eps = dkw_epsilon(n, 1.0 - confidence);
    Ok(grid
        .iter()
        .map(|&x| {
            let cdf = sorted.partition_point(|&v| v <= x) as f64 / n as f64;
            CdfPoint {
                x,
                cdf,
                lower: (cdf - eps).max(0.0),
                upper: (cdf + eps).min(1.0),
            }
        })
        .collect())
}

/// Kolmogorov–Smirnov distance `sup |F_n - F|` between the empirical CDF of
/// `values` and a continuous `cdf`, taken over all jump points.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64 + Sync) -> Result<f64, McError> {
    if values.is_empty() {
        return Err(McError::Empty);
    }
    let mut sorted = values.to_vec();
    sorted.par_sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .reduce(|| 0.0, f64::max))
}

/// Writes samples with columns `trial, gamma_b, gamma_e, c_s_nats`.
pub fn write_samples_csv<W: Write>(samples: &[Sample], writer: W) -> Result<(), McError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trial", "gamma_b", "gamma_e", "c_s_nats"])?;
    for (i, s) in samples.iter().enumerate() {
        w.write_record([
            i.to_string(),
            format!("{:e}", s.gamma_b),
            format!("{:e}", s.gamma_e),
            format!("{:e}", s.secrecy_capacity()),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::product_moments;

    fn reference_scenario(trials: u64) -> Scenario {
        let link = FisherFParams::new(2.0, 3.0, 1.0).unwrap();
        let budget = |noise_dbm| LinkBudget {
            power_dbm: 30.0,
            noise_dbm,
            dist_ar_m: 10.0,
            dist_rx_m: 10.0,
            alpha: 3.0,
        };
        Scenario {
            n_elements: 6,
            params_ar: link,
            params_rb: link,
            params_re: link,
            budget_b: budget(-40.0),
            budget_e: budget(-20.0),
            rate_nats: 1.0,
            trials,
            seed: 7,
            eve_mode: EveMode::Coherent,
            g_mode: GMode::Independent,
        }
    }

    #[test]
    fn default_budgets_give_ten_and_minus_ten_db() {
        let sc = reference_scenario(1);
        assert!((linear_to_db(sc.avg_snr_b().unwrap()) - 10.0).abs() < 1e-12);
        assert!((linear_to_db(sc.avg_snr_e().unwrap()) + 10.0).abs() < 1e-12);
    }

    #[test]
    fn snr_setters_hit_target() {
        let mut sc = reference_scenario(1);
        sc.set_avg_snr_b_db(27.5).unwrap();
        sc.set_avg_snr_e_db(-3.0).unwrap();
        assert!((linear_to_db(sc.avg_snr_b().unwrap()) - 27.5).abs() < 1e-10);
        assert!((linear_to_db(sc.avg_snr_e().unwrap()) + 3.0).abs() < 1e-10);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let sc = reference_scenario(2000);
        assert_eq!(simulate(&sc).unwrap(), simulate(&sc).unwrap());
        let mut other = sc;
        other.seed = 8;
        assert_ne!(simulate(&sc).unwrap().samples, simulate(&other).unwrap().samples);
    }

    #[test]
    fn partition_invariance() {
        // Trial i depends only on (seed, i), so a prefix run reproduces the
        // head of a longer run exactly.
        let long = simulate(&reference_scenario(500)).unwrap();
        let short = simulate(&reference_scenario(200)).unwrap();
        assert_eq!(&long.samples[..200], &short.samples[..]);
    }

    #[test]
    fn single_element_without_fading_concentrates() {
        let mut sc = reference_scenario(200);
        sc.n_elements = 1;
        let stiff = FisherFParams::new(1e7, 1e7, 1.0).unwrap();
        sc.params_ar = stiff;
        sc.params_rb = stiff;
        let gb = sc.avg_snr_b().unwrap();
        for s in simulate(&sc).unwrap().samples {
            assert!((s.gamma_b / gb - 1.0).abs() < 0.01, "{}", s.gamma_b / gb);
        }
    }

    #[test]
    fn amplitude_sum_mean_matches_product_moments() {
        let sc = reference_scenario(100_000);
        let sim = simulate(&sc).unwrap();
        let w: Vec<f64> = sim.samples.iter().map(|s| (s.gamma_b / sim.avg_snr_b).sqrt()).collect();
        let est = mean_and_stderr(&w);
        let want = 6.0 * product_moments(&sc.params_ar, &sc.params_rb).unwrap().mean;
        assert!((est.estimate - want).abs() < 3.0 * est.stderr, "{} vs {want}", est.estimate);
    }

    #[test]
    fn equal_snrs_are_always_in_outage() {
        let samples = vec![
            Sample {
                gamma_b: 3.0,
                gamma_e: 3.0
            };
            10
        ];
        assert_eq!(empirical_sop(&samples, 0.1).unwrap().estimate, 1.0);
    }

    #[test]
    fn symmetric_zero_rate_sop_is_half() {
        let mut sc = reference_scenario(40_000);
        sc.budget_e = sc.budget_b;
        sc.rate_nats = 0.0;
        let sop = empirical_sop(&simulate(&sc).unwrap().samples, 0.0).unwrap();
        assert!((sop.estimate - 0.5).abs() < 3.0 * sop.stderr, "{sop:?}");
    }

    #[test]
    fn asc_without_eve_is_mean_log_rate() {
        let samples: Vec<Sample> = [0.5, 2.0, 9.0]
            .iter()
            .map(|&g| Sample {
                gamma_b: g,
                gamma_e: 0.0,
            })
            .collect();
        let want = ((1.5f64).log2() + 3f64.log2() + 10f64.log2()) / 3.0;
        assert!((empirical_asc(&samples).unwrap().estimate - want).abs() < 1e-15);
    }

    #[test]
    fn empty_sets_are_rejected() {
        assert!(matches!(empirical_sop(&[], 1.0), Err(McError::Empty)));
        assert!(matches!(empirical_asc(&[]), Err(McError::Empty)));
        assert!(matches!(empirical_cdf(&[], &[1.0], 0.99), Err(McError::Empty)));
    }

    #[test]
    fn cdf_limits_and_band() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let t = empirical_cdf(&v, &[0.5, 2.0, 10.0], 0.99).unwrap();
        assert_eq!(t[0].cdf, 0.0);
        assert_eq!(t[1].cdf, 0.5);
        assert_eq!(t[2].cdf, 1.0);
        assert!(t[1].lower < 0.5 && t[1].upper > 0.5);
        assert!((dkw_epsilon(4, 0.01) - (200f64.ln() / 8.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn random_phase_is_weaker_than_coherent() {
        let mut sc = reference_scenario(20_000);
        let coherent = simulate(&sc).unwrap();
        sc.eve_mode = EveMode::RandomPhase;
        let random = simulate(&sc).unwrap();
        let mean_e = |s: &Simulation| s.samples.iter().map(|x| x.gamma_e).sum::<f64>();
        assert!(mean_e(&random) < 0.5 * mean_e(&coherent));
        for (a, b) in coherent.samples.iter().zip(&random.samples) {
            assert_eq!(a.gamma_b, b.gamma_b);
        }
    }

    #[test]
    fn shared_g_correlates_receivers() {
        let mut sc = reference_scenario(20_000);
        sc.budget_e = sc.budget_b;
        let independent = simulate(&sc).unwrap();
        sc.g_mode = GMode::Shared;
        let sim = simulate(&sc).unwrap();
        for (a, b) in independent.samples.iter().zip(&sim.samples) {
            assert_eq!(a.gamma_b, b.gamma_b);
        }
        let n = sim.samples.len() as f64;
        let (mb, me) = sim
            .samples
            .iter()
            .fold((0.0, 0.0), |a, s| (a.0 + s.gamma_b / n, a.1 + s.gamma_e / n));
        let cov = sim
            .samples
            .iter()
            .map(|s| (s.gamma_b - mb) * (s.gamma_e - me))
            .sum::<f64>()
            / n;
        assert!(cov > 0.0);
    }

    #[test]
    fn ks_distance_small_for_matching_law() {
        let sc = reference_scenario(50_000);
        let sim = simulate(&sc).unwrap();
        let cfg = sc.secrecy_config().unwrap();
        let gb: Vec<f64> = sim.samples.iter().map(|s| s.gamma_b).collect();
        let d = ks_distance(&gb, |x| crate::channel::snr_cdf(x, &cfg.main)).unwrap();
        assert!(d < 0.03, "{d}");
    }

    #[test]
    fn csv_export_round_trips() {
        let sim = simulate(&reference_scenario(5)).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&sim.samples, &mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rd.headers().unwrap(), vec!["trial", "gamma_b", "gamma_e", "c_s_nats"]);
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 5);
        let gb: f64 = rows[2][1].parse().unwrap();
        assert_eq!(gb, sim.samples[2].gamma_b);
    }
}
