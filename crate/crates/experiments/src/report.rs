//! JSON envelopes and CSV writers shared by every command.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::{BUILD_ID, SCHEMA_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<R> {
    pub schema_version: u32,
    pub command: String,
    pub build_id: String,
    pub config_hash: String,
    pub grid: Value,
    pub pass: bool,
    pub result: R,
}

impl<R: Serialize> Envelope<R> {
    pub fn new(command: &str, config: &ExperimentConfig, pass: bool, result: R) -> Self {
        let grid = json!({
            "d": config.d,
            "n_modes": config.n_modes,
            "m0": config.m0(),
        });
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            build_id: BUILD_ID.to_string(),
            config_hash: config.hash(),
            grid,
            pass,
            result,
        }
    }

    pub fn with_grid(mut self, grid: Value) -> Self {
        self.grid = grid;
        self
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Pretty JSON with a trailing LF.
    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut f = fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(path)
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes rows under `header` with LF line endings.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Slope and RMS residual of the least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Some((slope, intercept, (rss / n as f64).sqrt()))
}
