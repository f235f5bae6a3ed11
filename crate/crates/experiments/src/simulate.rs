//! Trajectories in any of the three representations with conservation and
//! norm diagnostics.

use std::path::PathBuf;

use kirchhoff_core::kirchhoff::{hamiltonian, momentum_j};
use kirchhoff_core::normal_form::{energy_derivative, x_plus};
use kirchhoff_core::{
    integrate, ComposeOptions, ExitReason, FieldPair, InverseMethod, KirchhoffField, Monitors, Syst6DicField,
    TrajectoryRecord, XPlusField, XPlusMethod,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Representation};
use crate::error::Result;
use crate::report::{fmt_f64, write_csv};
use crate::setup::{config_grid, initial_w, physical, physical_norm, state_from_w, w_of};

/// Largest spread of the physical norm growth across Sobolev indices.
pub const S_SPREAD_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct NormSummary {
    pub s: f64,
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    /// `max_t ‖·‖ / ‖·‖(0)`.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub representation: Representation,
    pub t_end: f64,
    pub final_time: f64,
    pub exit: String,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub samples: usize,
    pub hamiltonian_initial: f64,
    /// `max_t |H(t) − H(0)| / |H(0)|`.
    pub hamiltonian_drift: f64,
    /// `max_{t,j,a} |M_j(t) − M_j(0)|` over every mode and axis.
    pub momentum_drift: f64,
    /// Norms of `w` in the normal-form coordinates.
    pub w_norms: Vec<NormSummary>,
    /// `‖u‖_{s+½} + ‖∂_t u‖_{s−½}`.
    pub physical_norms: Vec<NormSummary>,
    /// `(max − min) / min` of the physical `max_ratio` over `s`.
    pub s_spread: f64,
    pub s_independent: bool,
    pub max_symmetry_defect: f64,
    pub csv: Option<PathBuf>,
}

/// Sampled diagnostics of one run, one row per sample time.
pub struct Diagnostics {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn integrator_config(config: &ExperimentConfig) -> kirchhoff_core::IntegratorConfig {
    let mut c = config.integrator.to_core();
    c.keep_states = true;
    c
}

/// Integrates `state0` with the field of `rep`.
pub fn run_field(
    rep: Representation,
    state0: &FieldPair<f64>,
    cfg: &kirchhoff_core::IntegratorConfig,
) -> Result<TrajectoryRecord<f64>> {
    let monitors = Monitors::new();
    Ok(match rep {
        Representation::Original => integrate(&KirchhoffField, state0, cfg, &monitors)?,
        Representation::Syst6dic => integrate(&Syst6DicField, state0, cfg, &monitors)?,
        Representation::Xplus => {
            let m0 = state0.grid().m0();
            let ball = Monitors::new().ball(m0, 0.9 * kirchhoff_core::normal_form::X_PLUS_RADIUS);
            integrate(&XPlusField::default(), state0, cfg, &ball)?
        }
    })
}

/// Evaluates every channel on the stored states, in parallel.
pub fn diagnostics(
    rep: Representation,
    record: &TrajectoryRecord<f64>,
    s_values: &[f64],
    opts: &ComposeOptions,
) -> Diagnostics {
    let grid = record.final_state.grid().clone();
    let modes: Vec<Vec<i64>> = grid.modes().map(|m| m.to_vec()).collect();
    let mut header = vec!["t".to_string(), "hamiltonian".to_string()];
    for m in &modes {
        let tag: Vec<String> = m.iter().map(|x| x.to_string()).collect();
        for a in 0..grid.dim() {
            header.push(format!("M_{}_ax{a}", tag.join("_")));
        }
    }
    for s in s_values {
        header.push(format!("norm_s{s}"));
    }
    for s in s_values {
        header.push(format!("phys_s{s}"));
    }
    for s in s_values {
        header.push(format!("ed_s{s}"));
    }
    header.push("script_p".into());
    let wide = ComposeOptions { delta0: f64::INFINITY, ..*opts };
    let rows = record
        .times
        .par_iter()
        .zip(record.states.par_iter())
        .map(|(t, state)| {
            let mut row = vec![*t];
            let nan_row = |row: &mut Vec<f64>, n: usize| row.extend(std::iter::repeat_n(f64::NAN, n));
            let phys = physical(rep, state, &wide);
            match &phys {
                Ok(p) => {
                    row.push(hamiltonian(p));
                    for m in &modes {
                        row.extend(momentum_j(p, m).expect("grid mode"));
                    }
                }
                Err(_) => nan_row(&mut row, 1 + modes.len() * grid.dim()),
            }
            let w = w_of(rep, state, &wide).ok();
            for s in s_values {
                row.push(w.as_ref().map_or(f64::NAN, |w| w.first.sobolev_norm(*s).unwrap_or(f64::NAN)));
            }
            for s in s_values {
                row.push(phys.as_ref().map_or(f64::NAN, |p| physical_norm(p, *s)));
            }
            let xp = w.as_ref().and_then(|w| x_plus(w, XPlusMethod::Structured, InverseMethod::Neumann).ok());
            match (&w, &xp) {
                (Some(w), Some(xp)) => {
                    for s in s_values {
                        row.push(energy_derivative(w, &xp.total, *s).unwrap_or(f64::NAN));
                    }
                    row.push(xp.script_p);
                }
                _ => nan_row(&mut row, s_values.len() + 1),
            }
            row
        })
        .collect();
    Diagnostics { header, rows }
}

fn column(d: &Diagnostics, name: &str) -> Vec<f64> {
    let c = d.header.iter().position(|h| h == name).expect("known column");
    d.rows.iter().map(|r| r[c]).collect()
}

fn norm_summary(s: f64, series: &[f64]) -> NormSummary {
    let initial = series.first().copied().unwrap_or(f64::NAN);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    NormSummary { s, initial, min, max, max_ratio: max / initial }
}

/// Relative spread `(max − min) / min`.
pub fn spread(values: &[f64]) -> f64 {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (max - min) / min
}

pub fn summarize(
    rep: Representation,
    t_end: f64,
    record: &TrajectoryRecord<f64>,
    diag: &Diagnostics,
    s_values: &[f64],
) -> SimulateSummary {
    let h = column(diag, "hamiltonian");
    let h0 = h[0];
    let hamiltonian_drift = h.iter().map(|x| (x - h0).abs()).fold(0.0, f64::max) / h0.abs().max(f64::MIN_POSITIVE);
    let mut momentum_drift: f64 = 0.0;
    for (c, name) in diag.header.iter().enumerate() {
        if name.starts_with("M_") {
            let m0 = diag.rows[0][c];
            for r in &diag.rows {
                momentum_drift = momentum_drift.max((r[c] - m0).abs());
            }
        }
    }
    let w_norms: Vec<NormSummary> =
        s_values.iter().map(|s| norm_summary(*s, &column(diag, &format!("norm_s{s}")))).collect();
    let physical_norms: Vec<NormSummary> =
        s_values.iter().map(|s| norm_summary(*s, &column(diag, &format!("phys_s{s}")))).collect();
    let ratios: Vec<f64> = physical_norms.iter().map(|n| n.max_ratio).collect();
    let s_spread = if ratios.is_empty() { 0.0 } else { spread(&ratios) };
    SimulateSummary {
        representation: rep,
        t_end,
        final_time: record.final_time,
        exit: record.exit.label().to_string(),
        accepted_steps: record.accepted_steps,
        rejected_steps: record.rejected_steps,
        samples: record.times.len(),
        hamiltonian_initial: h0,
        hamiltonian_drift,
        momentum_drift,
        w_norms,
        physical_norms,
        s_spread,
        s_independent: s_spread <= S_SPREAD_TOLERANCE,
        max_symmetry_defect: record.max_defect_after_projection,
        csv: None,
    }
}

/// Runs the configured simulation; writes `trajectory.csv` unless `t_end = 0`.
pub fn run(config: &ExperimentConfig) -> Result<SimulateSummary> {
    let grid = config_grid(config)?;
    let rep = config.simulate.representation;
    let opts = ComposeOptions { delta0: f64::INFINITY, ..ComposeOptions::default() };
    let w0 = initial_w(config, &grid)?;
    let state0 = state_from_w(rep, &w0, &opts)?;
    let cfg = integrator_config(config);
    let record = run_field(rep, &state0, &cfg)?;
    if matches!(record.exit, ExitReason::Blowup { .. } | ExitReason::StepUnderflow { .. }) {
        record.check()?;
    }
    let s_values = config.s_values();
    let diag = diagnostics(rep, &record, &s_values, &opts);
    let mut summary = summarize(rep, cfg.t_end, &record, &diag, &s_values);
    if cfg.t_end > 0.0 {
        let path = config.out.join("trajectory.csv");
        let rows: Vec<Vec<String>> = diag.rows.iter().map(|r| r.iter().map(|x| fmt_f64(*x)).collect()).collect();
        write_csv(&path, &diag.header, &rows)?;
        summary.csv = Some(path);
    }
    Ok(summary)
}

impl SimulateSummary {
    pub fn pass(&self) -> bool {
        self.exit == ExitReason::Completed.label() && self.s_independent
    }
}
