//! Analytic density and distribution of one receiver's SNR next to the
//! simulated empirical distribution.

use std::io::Write;

use anyhow::Result;

use risf_core::channel::{db_to_linear, snr_cdf, snr_pdf};
use risf_core::mc_sim::{empirical_cdf, simulate};

use crate::config::{Manifest, Receiver};
use crate::output::{num, write_header};

pub const COLUMNS: [&str; 7] = [
    "gamma_dB",
    "gamma",
    "pdf",
    "cdf",
    "empirical_cdf",
    "dkw_lower",
    "dkw_upper",
];

pub struct DistSummary {
    pub rows: usize,
    /// Grid points where the analytic CDF leaves the DKW band.
    pub outside_band: usize,
}

pub fn run(manifest: &Manifest, out: &mut dyn Write) -> Result<DistSummary> {
    let grid_db = manifest.dist_grid()?;
    let sc = manifest.scenario()?;
    let cfg = sc.secrecy_config()?;
    let approx = match manifest.dist.receiver {
        Receiver::Bob => cfg.main,
        Receiver::Eve => cfg.eve,
    };
    let sim = simulate(&sc)?;
    let values: Vec<f64> = sim
        .samples
        .iter()
        .map(|s| match manifest.dist.receiver {
            Receiver::Bob => s.gamma_b,
            Receiver::Eve => s.gamma_e,
        })
        .collect();
    let grid: Vec<f64> = grid_db.iter().map(|&d| db_to_linear(d)).collect();
    let table = empirical_cdf(&values, &grid, manifest.dist.confidence)?;

    write_header(out, "dist", manifest)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    let mut outside_band = 0;
    for (db, row) in grid_db.iter().zip(&table) {
        let cdf = snr_cdf(row.x, &approx);
        if cdf < row.lower || cdf > row.upper {
            outside_band += 1;
        }
        w.write_record([
            format!("{db:.4}"),
            num(row.x),
            num(snr_pdf(row.x, &approx)),
            num(cdf),
            num(row.cdf),
            num(row.lower),
            num(row.upper),
        ])?;
    }
    w.flush()?;
    Ok(DistSummary {
        rows: table.len(),
        outside_band,
    })
}
