//! CSV sinks with a commented manifest header.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use crate::config::Manifest;

/// Opens `path`, or stdout when it is `None`.
pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the `#` header: tool, command and the resolved manifest, which
/// holds everything needed to repeat the run, seed included.
pub fn write_header(w: &mut dyn Write, command: &str, manifest: &Manifest) -> Result<()> {
    writeln!(w, "# risf {} {command}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# seed = {}", manifest.mc.seed)?;
    for line in manifest.to_toml()?.lines() {
        if line.is_empty() {
            writeln!(w, "#")?;
        } else {
            writeln!(w, "# {line}")?;
        }
    }
    Ok(())
}

/// Fixed-width formatting so that identical values print identically.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.12e}")
    }
}

/// Writes a matplotlib script that plots `value` against the sweep axis,
/// one line per `(series, mode)` pair, from the CSV at `csv_path`.
pub fn write_plot_script(path: &Path, csv_path: &Path, log_y: bool) -> Result<()> {
    let script = format!(
        r##"import sys
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv({csv:?}, comment="#")
df = df[df["value"].notna()]
fig, ax = plt.subplots()
for (series, mode), g in df.groupby([df["series"].fillna(""), "mode"], sort=False):
    style = "o" if mode == "mc" else "-"
    label = f"{{series}} {{mode}}".strip()
    ax.plot(g["sweep_value_dB"], g["value"], style, label=label)
ax.set_xlabel("sweep value (dB)")
ax.set_ylabel(df["metric"].iloc[0].upper())
{yscale}ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else {png:?}, bbox_inches="tight")
"##,
        csv = csv_path.display().to_string(),
        png = csv_path.with_extension("png").display().to_string(),
        yscale = if log_y { "ax.set_yscale(\"log\")\n" } else { "" },
    );
    std::fs::write(path, script).with_context(|| format!("cannot write {}", path.display()))
}
