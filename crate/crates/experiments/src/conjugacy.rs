//! The original flow pulled back to normal-form coordinates against the flow
//! of `X⁺` started from the same `w₀`.

use kirchhoff_core::transforms::{full_compose, phi4_with};
use kirchhoff_core::{
    integrate, ComplexField, ComposeOptions, Direction, Error as CoreError, ExitReason, FieldPair, IntegratorConfig,
    KirchhoffField, Monitors, Syst6DicField, XPlusField,
};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{ExperimentError, Result};
use crate::setup::{compose_options, config_grid, initial_w};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A trajectory left the ball on which the transforms are used.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderLevel {
    pub rel_tol: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyReport {
    pub eps: f64,
    pub t_end: f64,
    pub samples: usize,
    /// `max_t ‖Φ⁻¹(u(t),v(t)) − w(t)‖_{m₀}` at the reference tolerance.
    pub defect: f64,
    /// Same comparison for the diagonalized system pulled back through the normal-form map.
    pub syst6dic_defect: f64,
    pub threshold: f64,
    pub ladder: Vec<LadderLevel>,
    pub monotone: bool,
    pub status: Status,
    pub note: Option<String>,
}

/// Defects at each sample time for one tolerance.
fn defect_at(
    w0: &ComplexField<f64>,
    cfg: &IntegratorConfig,
    opts: &ComposeOptions,
) -> Result<(f64, f64, usize)> {
    let m0 = w0.grid().m0();
    let wz = FieldPair::conjugate_from(w0.clone());
    let wide = ComposeOptions { delta0: f64::INFINITY, ..*opts };
    let uv0 = full_compose(Direction::Forward, &wz, &wide)?;
    let eta0 = phi4_with(Direction::Forward, &wz, &wide)?;
    let none = Monitors::new();
    let orig = integrate(&KirchhoffField, &uv0, cfg, &none)?;
    let diag = integrate(&Syst6DicField, &eta0, cfg, &none)?;
    let xp = integrate(&XPlusField::default(), &wz, cfg, &none)?;
    for r in [&orig.exit, &diag.exit, &xp.exit] {
        if *r != ExitReason::Completed {
            return Err(CoreError::Numerical(format!("integration ended early: {}", r.label())).into());
        }
    }
    let n = xp.states.len().min(orig.states.len()).min(diag.states.len());
    let mut d_orig: f64 = 0.0;
    let mut d_diag: f64 = 0.0;
    for k in 0..n {
        let target = &xp.states[k].first;
        let back = full_compose(Direction::Inverse, &orig.states[k], opts)?;
        d_orig = d_orig.max((&back.first - target).sobolev_norm(m0)?);
        let back6 = phi4_with(Direction::Inverse, &diag.states[k], opts)?;
        d_diag = d_diag.max((&back6.first - target).sobolev_norm(m0)?);
    }
    Ok((d_orig, d_diag, n))
}

fn core_config(config: &ExperimentConfig, rel_tol: f64) -> IntegratorConfig {
    let it = &config.integrator;
    let c = &config.conjugacy;
    let mut core = it.to_core();
    core.rel_tol = rel_tol;
    core.abs_tol = rel_tol * it.abs_tol / it.rel_tol;
    core.t_end = c.t_end;
    core.sample_interval = Some(c.sample_interval);
    core.keep_states = true;
    core
}

fn is_ball_exit(e: &ExperimentError) -> bool {
    matches!(e, ExperimentError::Numerical(CoreError::Domain(_) | CoreError::BallExit { .. }))
}

pub fn run(config: &ExperimentConfig) -> Result<ConjugacyReport> {
    let grid = config_grid(config)?;
    let w0 = initial_w(config, &grid)?;
    let c = &config.conjugacy;
    let opts = compose_options(config.delta0);
    let mut report = ConjugacyReport {
        eps: w0.sobolev_norm(grid.m0())?,
        t_end: c.t_end,
        samples: 0,
        defect: f64::NAN,
        syst6dic_defect: f64::NAN,
        threshold: c.threshold,
        ladder: Vec::new(),
        monotone: false,
        status: Status::Inconclusive,
        note: None,
    };
    match defect_at(&w0, &core_config(config, c.rel_tol), &opts) {
        Ok((d, d6, n)) => {
            report.defect = d;
            report.syst6dic_defect = d6;
            report.samples = n;
        }
        Err(e) if is_ball_exit(&e) => {
            report.note = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    }
    for level in 0..c.ladder_levels {
        let tol = c.ladder_rel_tol * 0.5f64.powi(level as i32);
        match defect_at(&w0, &core_config(config, tol), &opts) {
            Ok((d, _, _)) => report.ladder.push(LadderLevel { rel_tol: tol, defect: d }),
            Err(e) if is_ball_exit(&e) => {
                report.note = Some(e.to_string());
                return Ok(report);
            }
            Err(e) => return Err(e),
        }
    }
    report.monotone = report.ladder.windows(2).all(|w| w[1].defect < w[0].defect || w[1].defect == 0.0);
    report.status = if report.defect <= c.threshold && report.monotone { Status::Pass } else { Status::Fail };
    Ok(report)
}
