//! Lifespan sweep: for each `ε`, integrate `X⁺` up to `c1_op/ε⁴` and check that
//! `‖w(t)‖` stays within `growth·‖w(0)‖` in several Sobolev norms.

use std::path::PathBuf;
use std::time::Instant;

use kirchhoff_core::normal_form::{energy_derivative, x_plus, X_PLUS_RADIUS};
use kirchhoff_core::transforms::{full_compose, physical_size};
use kirchhoff_core::{
    integrate, Direction, ExitReason, FieldPair, InverseMethod, IntegratorConfig, Monitors,
    Scheme, XPlusField, XPlusMethod,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{fmt_f64, linear_fit, write_csv};
use crate::setup::{compose_options, config_grid, random_w};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub seed: u64,
    pub t_target: f64,
    /// `min(t_target, t_cap)`.
    pub t_run: f64,
    pub achieved_time: f64,
    /// `stable`, `stable_at_cap`, `ball_exit`, `blowup` or `step_underflow`.
    pub exit: String,
    /// `max_t ‖u‖_{m₀+½} + ‖∂_t u‖_{m₀−½}` over samples where the state is in the ball.
    pub max_physical: f64,
    pub physical_ratio: f64,
    /// `(s, max_t ‖w(t)‖_s / ‖w(0)‖_s)`.
    pub norm_ratios: Vec<(f64, f64)>,
    /// Per-`s` verdict of the growth bound.
    pub s_pass: Vec<bool>,
    /// `max_t |∂_t‖w‖_{m₀}²| / ‖w‖_{m₀}⁶`.
    pub c_star: f64,
    /// `max_t physical size / ‖w‖_{m₀}`.
    pub c0: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Slope of `log achieved_time` against `log ε`.
    pub exponent: Option<f64>,
    pub exponent_residual: Option<f64>,
    pub c_star: f64,
    pub c0: f64,
    /// `15 / (32 C_* C₀⁴)` with the measured constants.
    pub empirical_c1: f64,
    pub c1_op: f64,
    /// Pass/fail per row agrees across every monitored `s`.
    pub s_consistent: bool,
    pub pass: bool,
    pub csv: Option<PathBuf>,
}

pub const CSV_HEADER: [&str; 11] = [
    "eps",
    "seed",
    "t_target",
    "t_run",
    "achieved_time",
    "exit",
    "max_physical",
    "physical_ratio",
    "max_norm_ratio",
    "c_star",
    "pass",
];

/// Norms, physical size and `C_*` estimate of one sample.
type Observation = (Vec<f64>, Option<f64>, f64);

fn row(config: &ExperimentConfig, eps: f64, seed: u64, deadline: Option<Instant>) -> Result<SweepRow> {
    let sw = &config.sweep;
    let grid = config_grid(config)?;
    let m0 = grid.m0();
    let w0 = random_w(&grid, seed, eps)?;
    let pair0 = FieldPair::conjugate_from(w0);
    let t_target = sw.c1_op / eps.powi(4);
    let t_run = sw.t_cap.map_or(t_target, |c| c.min(t_target));
    let s_list: Vec<f64> = sw.s_offsets.iter().map(|o| m0 + o).collect();
    let initial: Vec<f64> = s_list.iter().map(|&s| pair0.norm(s)).collect();
    let radius = (sw.growth * pair0.norm(m0)).min(0.9 * X_PLUS_RADIUS);
    let monitors = Monitors::new().ball(m0, radius);
    let opts = compose_options(sw.delta0);

    let mut ratios = vec![1.0f64; s_list.len()];
    let mut max_physical: f64 = 0.0;
    let mut physical0 = f64::NAN;
    let mut c_star: f64 = 0.0;
    let mut c0: f64 = 0.0;
    let mut observe = |states: &[FieldPair<f64>]| -> Result<()> {
        let obs: Vec<Result<Observation>> = states
            .par_iter()
            .map(|w| {
                let norms: Vec<f64> = s_list.iter().map(|&s| w.norm(s)).collect();
                let phys = full_compose(Direction::Forward, w, &opts).ok().map(|uv| physical_size(&uv));
                let xp = x_plus(w, XPlusMethod::Structured, InverseMethod::Neumann)?.total;
                let c = energy_derivative(w, &xp, m0)?.abs() / w.norm(m0).powi(6);
                Ok((norms, phys, c))
            })
            .collect();
        for o in obs {
            let (norms, phys, c) = o?;
            for ((r, n), n0) in ratios.iter_mut().zip(&norms).zip(&initial) {
                *r = r.max(n / n0);
            }
            if let Some(p) = phys {
                if physical0.is_nan() {
                    physical0 = p;
                }
                max_physical = max_physical.max(p);
                c0 = c0.max(p / norms.first().copied().unwrap_or(f64::NAN));
            }
            if c.is_finite() {
                c_star = c_star.max(c);
            }
        }
        Ok(())
    };

    let mut state = pair0.clone();
    let mut t = 0.0;
    let mut exit = ExitReason::Completed;
    let mut first = true;
    let mut hit_wall = false;
    while t < t_run && exit == ExitReason::Completed {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            hit_wall = true;
            break;
        }
        let span = sw.chunk.min(t_run - t);
        let cfg = IntegratorConfig {
            scheme: Scheme::Rk45Adaptive,
            dt: config.integrator.dt,
            rel_tol: sw.rel_tol,
            abs_tol: sw.abs_tol,
            t_end: span,
            sample_interval: Some(sw.sample_interval),
            keep_states: true,
            ..IntegratorConfig::default()
        };
        let rec = integrate(&XPlusField::default(), &state, &cfg, &monitors)?;
        let skip = usize::from(!first);
        observe(&rec.states[skip.min(rec.states.len())..])?;
        first = false;
        exit = match rec.exit {
            ExitReason::BallExit { time, norm, radius } => ExitReason::BallExit { time: t + time, norm, radius },
            ExitReason::Blowup { time } => ExitReason::Blowup { time: t + time },
            ExitReason::StepUnderflow { time, min_dt } => ExitReason::StepUnderflow { time: t + time, min_dt },
            ExitReason::Completed => ExitReason::Completed,
        };
        t += rec.final_time;
        state = rec.final_state;
    }
    if first {
        observe(std::slice::from_ref(&pair0))?;
    }
    let label = match &exit {
        ExitReason::Completed if hit_wall || t_run < t_target => "stable_at_cap",
        ExitReason::Completed => "stable",
        other => other.label(),
    };
    let s_pass: Vec<bool> = ratios.iter().map(|r| *r <= sw.growth).collect();
    let pass = exit == ExitReason::Completed && s_pass.iter().all(|p| *p);
    Ok(SweepRow {
        eps,
        seed,
        t_target,
        t_run,
        achieved_time: t,
        exit: label.to_string(),
        max_physical,
        physical_ratio: max_physical / physical0,
        norm_ratios: s_list.into_iter().zip(ratios).collect(),
        s_pass,
        c_star,
        c0,
        pass,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<SweepResult> {
    let sw = &config.sweep;
    let mut tasks: Vec<(f64, u64)> = Vec::new();
    let mut eps_sorted = sw.eps_list.clone();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    for eps in eps_sorted {
        for k in 0..sw.seeds_per_eps {
            tasks.push((eps, config.seed.wrapping_add(k as u64)));
        }
    }
    let start = Instant::now();
    let deadline = sw.wall_cap_seconds.map(|s| start + std::time::Duration::from_secs_f64(s));
    let rows: Vec<SweepRow> =
        tasks.par_iter().map(|&(eps, seed)| row(config, eps, seed, deadline)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.achieved_time.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = linear_fit(&xs, &ys);
    let c_star = rows.iter().map(|r| r.c_star).fold(0.0, f64::max);
    let c0 = rows.iter().map(|r| r.c0).fold(0.0, f64::max);
    let s_consistent = rows.iter().all(|r| r.s_pass.iter().all(|p| *p == r.s_pass[0]));
    let pass = !rows.is_empty() && rows.iter().all(|r| r.pass);
    Ok(SweepResult {
        exponent: fit.map(|f| f.0),
        exponent_residual: fit.map(|f| f.2),
        c_star,
        c0,
        empirical_c1: 15.0 / (32.0 * c_star * c0.powi(4)),
        c1_op: sw.c1_op,
        s_consistent,
        pass,
        rows,
        csv: None,
    })
}

/// Writes `sweep.csv`, one line per row in the order of [`CSV_HEADER`].
pub fn write(result: &mut SweepResult, dir: &std::path::Path) -> Result<()> {
    let header: Vec<String> = CSV_HEADER.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| {
            let max_ratio = r.norm_ratios.iter().map(|x| x.1).fold(0.0, f64::max);
            vec![
                fmt_f64(r.eps),
                r.seed.to_string(),
                fmt_f64(r.t_target),
                fmt_f64(r.t_run),
                fmt_f64(r.achieved_time),
                r.exit.clone(),
                fmt_f64(r.max_physical),
                fmt_f64(r.physical_ratio),
                fmt_f64(max_ratio),
                fmt_f64(r.c_star),
                r.pass.to_string(),
            ]
        })
        .collect();
    let path = dir.join("sweep.csv");
    write_csv(&path, &header, &rows)?;
    result.csv = Some(path);
    Ok(())
}
