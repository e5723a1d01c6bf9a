//! One metric, one evaluation method, one scenario.

use anyhow::{bail, Result};

use risf_core::mc_sim::{empirical_asc, empirical_sop, simulate, Scenario};
use risf_core::secrecy::{
    asc_asymptotic, asc_exact, asc_quadrature, sop_asymptotic, sop_exact, sop_quadrature,
};

use crate::config::{Metric, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub value: f64,
    /// Numerical error estimate, or the standard error for Monte-Carlo.
    pub error: f64,
}

pub fn evaluate(metric: Metric, mode: Mode, sc: &Scenario) -> Result<Outcome> {
    if mode == Mode::Mc {
        let samples = simulate(sc)?.samples;
        let est = match metric {
            Metric::Sop => empirical_sop(&samples, sc.rate_nats)?,
            Metric::Asc => empirical_asc(&samples)?,
        };
        return Ok(Outcome {
            value: est.estimate,
            error: est.stderr,
        });
    }
    let cfg = sc.secrecy_config()?;
    let (value, error) = match (metric, mode) {
        (Metric::Sop, Mode::Exact) => {
            let r = sop_exact(&cfg)?;
            (r.value, r.error)
        }
        (Metric::Sop, Mode::Quadrature) => {
            let r = sop_quadrature(&cfg)?;
            (r.value, r.error)
        }
        (Metric::Sop, Mode::Asymptotic) => (sop_asymptotic(&cfg)?, f64::NAN),
        (Metric::Asc, Mode::Exact) => {
            let r = asc_exact(&cfg)?;
            (r.total, r.error)
        }
        (Metric::Asc, Mode::Quadrature) => {
            let r = asc_quadrature(&cfg)?;
            (r.total, r.error)
        }
        (Metric::Asc, Mode::Asymptotic) => (asc_asymptotic(&cfg)?.total, f64::NAN),
        (_, Mode::Mc | Mode::All) => bail!("mode `{}` cannot be evaluated directly", mode.name()),
    };
    Ok(Outcome { value, error })
}
