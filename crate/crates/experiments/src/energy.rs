//! Growth of Sobolev norms along `X⁺`: the derivative of `‖w‖_{m₀}²` is of
//! degree six, and `∂_t‖w‖_s²` is controlled by `‖w‖₁²‖w‖_{m₀}²‖w‖_s²`.

use kirchhoff_core::normal_form::{energy_derivative, x_plus};
use kirchhoff_core::{integrate, InverseMethod, Monitors, XPlusField, XPlusMethod};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::linear_fit;
use crate::setup::{config_grid, random_w};

#[derive(Debug, Clone, Serialize)]
pub struct EnergyRow {
    pub eps: f64,
    pub samples: usize,
    pub exit: String,
    /// `max_t |∂_t‖w‖_{m₀}²|`.
    pub max_derivative: f64,
    /// `max_t |∂_t‖w‖_{m₀}²| / ‖w‖_{m₀}⁶`.
    pub c_star: f64,
    /// `max_t |∂_t‖w‖_s²| / (‖w‖₁²‖w‖_{m₀}²‖w‖_s²)` for each `s`.
    pub ratios: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
    pub c_star_mean: f64,
    /// `max |C_*/mean − 1|`.
    pub c_star_deviation: f64,
    pub stability: f64,
    /// Slope of `log max|∂_t‖w‖_{m₀}²|` against `log ε`.
    pub exponent: Option<f64>,
    pub exponent_residual: Option<f64>,
    pub ratios_bounded: bool,
    pub pass: bool,
}

fn row(config: &ExperimentConfig, eps: f64) -> Result<EnergyRow> {
    let grid = config_grid(config)?;
    let m0 = grid.m0();
    let e = &config.energy;
    let w0 = random_w(&grid, config.seed, eps)?;
    let mut cfg = config.integrator.to_core();
    cfg.t_end = e.t_end;
    cfg.sample_interval = Some(e.sample_interval);
    cfg.keep_states = true;
    let monitors = Monitors::new().ball(m0, 0.9 * kirchhoff_core::normal_form::X_PLUS_RADIUS);
    let pair0 = kirchhoff_core::FieldPair::conjugate_from(w0);
    let rec = integrate(&XPlusField::default(), &pair0, &cfg, &monitors)?;
    let s_values = config.s_values();
    let per_sample: Vec<Result<(f64, f64, Vec<f64>)>> = rec
        .states
        .par_iter()
        .map(|w| {
            let xp = x_plus(w, XPlusMethod::Structured, InverseMethod::Neumann)?.total;
            let n0 = w.first.sobolev_norm(m0)?;
            let n1 = w.first.sobolev_norm(1.0)?;
            let ed0 = energy_derivative(w, &xp, m0)?;
            let mut ratios = Vec::with_capacity(s_values.len());
            for &s in &s_values {
                let ns = w.first.sobolev_norm(s)?;
                ratios.push(energy_derivative(w, &xp, s)?.abs() / (n1 * n1 * n0 * n0 * ns * ns));
            }
            Ok((ed0.abs(), ed0.abs() / n0.powi(6), ratios))
        })
        .collect();
    let mut max_derivative: f64 = 0.0;
    let mut c_star: f64 = 0.0;
    let mut ratio_max = vec![0.0f64; s_values.len()];
    for r in per_sample {
        let (d, c, ratios) = r?;
        max_derivative = max_derivative.max(d);
        c_star = c_star.max(c);
        for (m, x) in ratio_max.iter_mut().zip(ratios) {
            *m = m.max(x);
        }
    }
    Ok(EnergyRow {
        eps,
        samples: rec.states.len(),
        exit: rec.exit.label().to_string(),
        max_derivative,
        c_star,
        ratios: s_values.into_iter().zip(ratio_max).collect(),
    })
}

pub fn run(config: &ExperimentConfig) -> Result<EnergyReport> {
    let e = &config.energy;
    let rows: Vec<EnergyRow> =
        e.eps_list.par_iter().map(|&eps| row(config, eps)).collect::<Result<Vec<_>>>()?;
    let n = rows.len() as f64;
    let c_star_mean = rows.iter().map(|r| r.c_star).sum::<f64>() / n;
    let c_star_deviation = rows.iter().map(|r| (r.c_star / c_star_mean - 1.0).abs()).fold(0.0, f64::max);
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_derivative.ln()).collect();
    let fit = linear_fit(&xs, &ys);
    let ratios_bounded = rows.iter().all(|r| r.ratios.iter().all(|(_, x)| x.is_finite()));
    let completed = rows.iter().all(|r| r.exit == "completed");
    let pass = !rows.is_empty() && completed && ratios_bounded && c_star_deviation <= e.stability;
    Ok(EnergyReport {
        rows,
        c_star_mean,
        c_star_deviation,
        stability: e.stability,
        exponent: fit.map(|f| f.0),
        exponent_residual: fit.map(|f| f.2),
        ratios_bounded,
        pass,
    })
}
