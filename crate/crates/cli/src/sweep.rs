use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Result};
use rayon::prelude::*;

use crate::config::{apply, expand_modes, Manifest, Mode};
use crate::eval::evaluate;
use crate::output::{num, write_header};

pub const COLUMNS: [&str; 8] = [
    "sweep_value_dB",
    "metric",
    "mode",
    "value",
    "error_estimate",
    "wall_time_ms",
    "series",
    "note",
];

struct Task {
    series: Option<f64>,
    x: f64,
    mode: Mode,
}

pub struct SweepSummary {
    pub rows: usize,
    pub failures: usize,
}

/// Evaluates every `(series, grid point, mode)` combination and writes one
/// row each, in that nesting order. Rows that fail carry the reason in
/// `note` and an empty `value`.
pub fn run(manifest: &Manifest, out: &mut dyn Write) -> Result<SweepSummary> {
    let modes = expand_modes(&manifest.sweep.modes);
    if modes.is_empty() {
        bail!("no evaluation modes requested");
    }
    let grid = manifest.grid()?;
    let base = manifest.scenario()?;
    let series: Vec<Option<f64>> = match &manifest.sweep.series {
        Some(s) if s.values.is_empty() => bail!("series `{}` has no values", s.parameter.name()),
        Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    let mut tasks = Vec::with_capacity(series.len() * grid.len() * modes.len());
    for &sv in &series {
        for &x in &grid {
            for &mode in &modes {
                tasks.push(Task { series: sv, x, mode });
            }
        }
    }

    let metric = manifest.sweep.metric;
    let axis = manifest.sweep.axis;
    let series_axis = manifest.sweep.series.as_ref().map(|s| s.parameter);
    let rows: Vec<[String; 8]> = tasks
        .par_iter()
        .map(|t| {
            let start = Instant::now();
            let result = (|| {
                let mut sc = base;
                if let (Some(p), Some(v)) = (series_axis, t.series) {
                    apply(&mut sc, p, v)?;
                }
                apply(&mut sc, axis, t.x)?;
                evaluate(metric, t.mode, &sc)
            })();
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let label = match (series_axis, t.series) {
                (Some(p), Some(v)) => format!("{}={v}", p.name()),
                _ => String::new(),
            };
            let (value, error, note) = match result {
                Ok(o) => (num(o.value), num(o.error), String::new()),
                Err(e) => (String::new(), String::new(), format!("{e:#}")),
            };
            [
                format!("{}", t.x),
                metric.name().into(),
                t.mode.name().into(),
                value,
                error,
                format!("{ms:.1}"),
                label,
                note,
            ]
        })
        .collect();

    write_header(out, "sweep", manifest)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    let mut failures = 0;
    for r in &rows {
        if r[3].is_empty() {
            failures += 1;
        }
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(SweepSummary {
        rows: rows.len(),
        failures,
    })
}
