//! CSV time series: one comment line with the config hash and filter state,
//! one header line, then rows with 17 significant digits.

use super::config::{ScenarioConfig, CONFIG_VERSION};
use crate::error::Result;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

pub const COLUMNS: [&str; 32] = [
    "t",
    "kinetic",
    "magnetic_plus",
    "magnetic_vacuum",
    "surface",
    "energy_total",
    "input_power",
    "budget_residual",
    "e_residual",
    "rt_min",
    "upsilon",
    "wall_gap",
    "chart_margin",
    "syrovatskij_margin",
    "div_v",
    "div_h",
    "h_normal",
    "projection_v",
    "projection_h",
    "v_normal_mean",
    "flux_defect",
    "cfl",
    "e_bar_alpha",
    "e_l0",
    "e_l1",
    "script_e1",
    "script_e2",
    "script_e3",
    "gamma_highk",
    "kappa_first_order",
    "kappa_second_order",
    "ds_transport",
];

/// One row, in [`COLUMNS`] order. Columns that were not computed hold NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesRow(pub [f64; COLUMNS.len()]);

impl TimeSeriesRow {
    pub fn empty(t: f64) -> Self {
        let mut r = [f64::NAN; COLUMNS.len()];
        r[0] = t;
        TimeSeriesRow(r)
    }

    pub fn set(&mut self, name: &str, x: f64) {
        let i = COLUMNS.iter().position(|c| *c == name).expect("known column");
        self.0[i] = x;
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[COLUMNS.iter().position(|c| *c == name).expect("known column")]
    }

    pub fn to_csv(&self) -> String {
        self.0.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",")
    }
}

pub fn header_lines(cfg: &ScenarioConfig) -> String {
    format!(
        "# {CONFIG_VERSION}; config_sha256={}; filter={}; dealias={}; preset={}\n{}\n",
        cfg.hash(),
        cfg.filter_label(),
        if cfg.time.dealias { "on" } else { "off" },
        cfg.preset.as_deref().unwrap_or("none"),
        COLUMNS.join(",")
    )
}

/// Row-at-a-time writer; flushes every row so a halted run leaves a
/// complete file.
pub struct SeriesWriter {
    out: BufWriter<File>,
}

impl SeriesWriter {
    pub fn create(path: &Path, cfg: &ScenarioConfig) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(header_lines(cfg).as_bytes())?;
        Ok(SeriesWriter { out })
    }

    /// Continue an existing file, or start one when absent.
    pub fn append(path: &Path, cfg: &ScenarioConfig) -> Result<Self> {
        if !path.exists() {
            return Self::create(path, cfg);
        }
        Ok(SeriesWriter { out: BufWriter::new(OpenOptions::new().append(true).open(path)?) })
    }

    pub fn push(&mut self, row: &TimeSeriesRow) -> Result<()> {
        writeln!(self.out, "{}", row.to_csv())?;
        self.out.flush()?;
        Ok(())
    }
}

/// Write a complete series.
pub fn write_series(rows: &[TimeSeriesRow], path: &Path, cfg: &ScenarioConfig) -> Result<()> {
    let mut w = SeriesWriter::create(path, cfg)?;
    rows.iter().try_for_each(|r| w.push(r))
}

/// Parse the data rows of a series file.
pub fn read_series(path: &Path) -> Result<Vec<TimeSeriesRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines().skip(2) {
        let mut r = [f64::NAN; COLUMNS.len()];
        for (i, f) in line.split(',').enumerate().take(COLUMNS.len()) {
            r[i] = f.parse().map_err(|_| crate::error::PilError::ParseError(format!("bad number `{f}` in series")))?;
        }
        rows.push(TimeSeriesRow(r));
    }
    Ok(rows)
}
