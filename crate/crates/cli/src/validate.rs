//! Three-way check of the contour evaluators against quadrature and
//! Monte-Carlo simulation, plus the high-SNR expressions where they apply.

use std::io::Write;

use anyhow::Result;
use rayon::prelude::*;

use risf_core::mc_sim::Scenario;

use crate::config::{apply, Axis, Manifest, Metric, Mode};
use crate::eval::{evaluate, Outcome};
use crate::output::{num, write_header};

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub label: &'static str,
    pub metric: Metric,
    pub n: u32,
    pub m: f64,
    pub gamma_b_db: f64,
    pub gamma_e_db: f64,
    /// Also compare the high-SNR expression against the contour value.
    pub asymptotic: bool,
}

const fn point(
    label: &'static str,
    metric: Metric,
    n: u32,
    m: f64,
    gamma_b_db: f64,
    gamma_e_db: f64,
    asymptotic: bool,
) -> Point {
    Point {
        label,
        metric,
        n,
        m,
        gamma_b_db,
        gamma_e_db,
        asymptotic,
    }
}

/// Twelve points covering the SOP against N and m, the ASC against N and
/// against Eve's SNR, and one high-SNR point per metric.
pub fn default_suite() -> Vec<Point> {
    use Metric::{Asc, Sop};
    vec![
        point("sop-n6-low", Sop, 6, 2.0, -10.0, -10.0, false),
        point("sop-n6-mid", Sop, 6, 2.0, 0.0, -10.0, false),
        point("sop-n6-high", Sop, 6, 2.0, 10.0, -10.0, false),
        point("sop-n2", Sop, 2, 2.0, 5.0, -10.0, false),
        point("sop-n4", Sop, 4, 2.0, 0.0, -10.0, false),
        point("sop-m1", Sop, 6, 1.0, 5.0, -10.0, false),
        point("sop-m4", Sop, 6, 4.0, 0.0, -10.0, false),
        point("sop-asymptotic", Sop, 6, 2.0, 70.0, -10.0, true),
        point("asc-n6", Asc, 6, 2.0, 0.0, -10.0, false),
        point("asc-n2", Asc, 2, 2.0, 10.0, -10.0, false),
        point("asc-eve-stronger", Asc, 6, 2.0, 5.0, 10.0, false),
        point("asc-asymptotic", Asc, 6, 2.0, 40.0, -10.0, true),
    ]
}

pub const COLUMNS: [&str; 20] = [
    "point",
    "label",
    "metric",
    "n",
    "m",
    "gamma_b_dB",
    "gamma_e_dB",
    "exact",
    "exact_error",
    "quadrature",
    "closed_rel_dev",
    "closed_tol",
    "mc",
    "mc_stderr",
    "mc_abs_dev",
    "mc_allowed",
    "asymptotic",
    "asymptotic_rel_dev",
    "pass",
    "note",
];

#[derive(Debug, Clone, Default)]
pub struct PointReport {
    pub exact: Option<Outcome>,
    pub quadrature: Option<Outcome>,
    pub mc: Option<Outcome>,
    pub asymptotic: Option<f64>,
    pub closed_rel_dev: Option<f64>,
    pub closed_tol: f64,
    pub mc_abs_dev: Option<f64>,
    pub mc_allowed: Option<f64>,
    pub asymptotic_rel_dev: Option<f64>,
    pub pass: bool,
    pub notes: Vec<String>,
}

fn scenario_for(base: &Scenario, p: &Point, index: usize) -> Result<Scenario> {
    let mut sc = *base;
    apply(&mut sc, Axis::N, p.n as f64)?;
    apply(&mut sc, Axis::M, p.m)?;
    apply(&mut sc, Axis::GammaB, p.gamma_b_db)?;
    apply(&mut sc, Axis::GammaE, p.gamma_e_db)?;
    // Each point gets its own stream family.
    sc.seed = base.seed.wrapping_add(index as u64);
    Ok(sc)
}

/// Passes are strict inequalities, so a zero tolerance fails every check.
fn check_point(manifest: &Manifest, base: &Scenario, p: &Point, index: usize) -> PointReport {
    let tol = &manifest.tolerance;
    let mut r = PointReport {
        closed_tol: match p.metric {
            Metric::Sop => tol.sop_rel,
            Metric::Asc => tol.asc_rel,
        },
        ..Default::default()
    };
    let sc = match scenario_for(base, p, index) {
        Ok(sc) => sc,
        Err(e) => {
            r.notes.push(format!("scenario: {e:#}"));
            return r;
        }
    };
    let mut run = |mode: Mode| match evaluate(p.metric, mode, &sc) {
        Ok(o) => Some(o),
        Err(e) => {
            r.notes.push(format!("{}: {e:#}", mode.name()));
            None
        }
    };
    r.exact = run(Mode::Exact);
    r.quadrature = run(Mode::Quadrature);
    r.mc = run(Mode::Mc);
    if p.asymptotic {
        r.asymptotic = run(Mode::Asymptotic).map(|o| o.value);
    }

    let mut pass = true;
    match (r.exact, r.quadrature) {
        (Some(e), Some(q)) => {
            let dev = (e.value - q.value).abs() / q.value.abs();
            r.closed_rel_dev = Some(dev);
            pass &= dev < r.closed_tol;
        }
        _ => pass = false,
    }
    match (r.exact, r.mc) {
        (Some(e), Some(mc)) => {
            let budget = match p.metric {
                Metric::Sop => tol.sop_mc_budget,
                Metric::Asc => tol.asc_mc_budget * e.value.abs(),
            };
            let allowed = tol.mc_sigmas * mc.error + budget;
            let dev = (e.value - mc.value).abs();
            r.mc_abs_dev = Some(dev);
            r.mc_allowed = Some(allowed);
            pass &= dev <= allowed;
        }
        _ => pass = false,
    }
    if p.asymptotic {
        match (r.exact, r.asymptotic) {
            (Some(e), Some(a)) => {
                let dev = (a / e.value - 1.0).abs();
                r.asymptotic_rel_dev = Some(dev);
                pass &= dev
                    < match p.metric {
                        Metric::Sop => tol.sop_asymptotic,
                        Metric::Asc => tol.asc_asymptotic,
                    };
            }
            _ => pass = false,
        }
    }
    r.pass = pass;
    r
}

pub struct ValidateSummary {
    pub points: usize,
    pub failed: usize,
    pub table: String,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

/// Runs the suite and writes the CSV report. Timing is left out so that
/// repeated runs produce identical files.
pub fn run(manifest: &Manifest, suite: &[Point], out: &mut dyn Write) -> Result<ValidateSummary> {
    let base = manifest.scenario()?;
    let reports: Vec<PointReport> = suite
        .par_iter()
        .enumerate()
        .map(|(i, p)| check_point(manifest, &base, p, i))
        .collect();

    write_header(out, "validate", manifest)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for (i, (p, r)) in suite.iter().zip(&reports).enumerate() {
        w.write_record([
            (i + 1).to_string(),
            p.label.into(),
            p.metric.name().into(),
            p.n.to_string(),
            p.m.to_string(),
            p.gamma_b_db.to_string(),
            p.gamma_e_db.to_string(),
            opt(r.exact.map(|o| o.value)),
            opt(r.exact.map(|o| o.error)),
            opt(r.quadrature.map(|o| o.value)),
            opt(r.closed_rel_dev),
            num(r.closed_tol),
            opt(r.mc.map(|o| o.value)),
            opt(r.mc.map(|o| o.error)),
            opt(r.mc_abs_dev),
            opt(r.mc_allowed),
            opt(r.asymptotic),
            opt(r.asymptotic_rel_dev),
            if r.pass { "pass" } else { "fail" }.into(),
            r.notes.join("; "),
        ])?;
    }
    w.flush()?;

    let mut table = format!(
        "{:>3} {:<17} {:>6} {:>6} {:>14} {:>10} {:>14} {:>10} {:>9}  {}\n",
        "#", "point", "γB dB", "γE dB", "exact", "vs quad", "mc", "±", "asym dev", "result"
    );
    for (i, (p, r)) in suite.iter().zip(&reports).enumerate() {
        let f = |x: Option<f64>, prec: usize| x.map_or("-".to_string(), |v| format!("{v:.prec$e}"));
        table.push_str(&format!(
            "{:>3} {:<17} {:>6} {:>6} {:>14} {:>10} {:>14} {:>10} {:>9}  {}\n",
            i + 1,
            p.label,
            p.gamma_b_db,
            p.gamma_e_db,
            f(r.exact.map(|o| o.value), 6),
            f(r.closed_rel_dev, 1),
            f(r.mc.map(|o| o.value), 6),
            f(r.mc.map(|o| o.error), 1),
            f(r.asymptotic_rel_dev, 1),
            if r.pass { "pass" } else { "FAIL" },
        ));
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    table.push_str(&format!("{} of {} points passed\n", suite.len() - failed, suite.len()));
    Ok(ValidateSummary {
        points: suite.len(),
        failed,
        table,
    })
}
