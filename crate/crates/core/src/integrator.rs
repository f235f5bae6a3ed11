//! Explicit Runge–Kutta integration with symmetry projection and sampled
//! monitor channels.

use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{FieldPair, PairSymmetry};
use crate::scalar::Scalar;
use crate::vector_field::VectorField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Rk4,
    /// Dormand–Prince 5(4) with PI step control.
    #[default]
    Rk45Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Fixed step for RK4, initial step for the adaptive scheme.
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    /// Accepted steps between samples when `sample_interval` is unset.
    pub monitor_stride: usize,
    /// Sample at exact multiples of this time instead of every `monitor_stride` steps.
    pub sample_interval: Option<f64>,
    pub min_dt: f64,
    pub max_dt: f64,
    pub keep_states: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk45Adaptive,
            dt: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            t_end: 1.0,
            monitor_stride: 1,
            sample_interval: None,
            min_dt: 1e-12,
            max_dt: f64::INFINITY,
            keep_states: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Parameter(msg.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be non-negative");
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.monitor_stride == 0 {
            return bad("monitor_stride must be at least 1");
        }
        if let Some(h) = self.sample_interval {
            if !(h > 0.0 && h.is_finite()) {
                return bad("sample_interval must be positive");
            }
        }
        if !(self.min_dt > 0.0 && self.max_dt >= self.min_dt) {
            return bad("need 0 < min_dt <= max_dt");
        }
        Ok(())
    }
}

/// A named scalar series evaluated at every sample.
pub struct Channel<'a, T> {
    pub name: String,
    eval: Box<dyn Fn(f64, &FieldPair<T>) -> f64 + 'a>,
}

impl<'a, T> Channel<'a, T> {
    pub fn new(name: impl Into<String>, eval: impl Fn(f64, &FieldPair<T>) -> f64 + 'a) -> Self {
        Self { name: name.into(), eval: Box::new(eval) }
    }
}

/// Stops the run once `‖first‖_s` exceeds `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMonitor {
    pub s: f64,
    pub radius: f64,
}

#[derive(Default)]
pub struct Monitors<'a, T> {
    pub channels: Vec<Channel<'a, T>>,
    pub ball: Option<BallMonitor>,
}

impl<'a, T> Monitors<'a, T> {
    pub fn new() -> Self {
        Self { channels: Vec::new(), ball: None }
    }

    pub fn channel(mut self, name: impl Into<String>, eval: impl Fn(f64, &FieldPair<T>) -> f64 + 'a) -> Self {
        self.channels.push(Channel::new(name, eval));
        self
    }

    pub fn ball(mut self, s: f64, radius: f64) -> Self {
        self.ball = Some(BallMonitor { s, radius });
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExitReason {
    Completed,
    BallExit { time: f64, norm: f64, radius: f64 },
    Blowup { time: f64 },
    StepUnderflow { time: f64, min_dt: f64 },
}

impl ExitReason {
    pub fn label(&self) -> &'static str {
        match self {
            ExitReason::Completed => "completed",
            ExitReason::BallExit { .. } => "ball_exit",
            ExitReason::Blowup { .. } => "blowup",
            ExitReason::StepUnderflow { .. } => "step_underflow",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord<T> {
    pub times: Vec<f64>,
    /// Empty unless `keep_states` is set.
    pub states: Vec<FieldPair<T>>,
    pub channel_names: Vec<String>,
    /// `channels[c][k]` is channel `c` at `times[k]`.
    pub channels: Vec<Vec<f64>>,
    pub final_state: FieldPair<T>,
    pub final_time: f64,
    pub exit: ExitReason,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    /// Largest symmetry defect seen right before projection.
    pub max_defect_before_projection: f64,
    /// Largest symmetry defect after projection.
    pub max_defect_after_projection: f64,
}

impl<T: Scalar> TrajectoryRecord<T> {
    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channel_names.iter().position(|n| n == name).map(|i| self.channels[i].as_slice())
    }

    /// Turns abnormal exits into their errors.
    pub fn check(&self) -> Result<()> {
        match self.exit {
            ExitReason::Completed => Ok(()),
            ExitReason::BallExit { time, norm, radius } => Err(Error::BallExit { time, norm, radius }),
            ExitReason::Blowup { time } => Err(Error::Blowup { time }),
            ExitReason::StepUnderflow { time, min_dt } => Err(Error::StepUnderflow { time, min_dt }),
        }
    }

    /// CSV with a `t` column and one column per channel, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.channel_names.iter().cloned());
        w.write_record(&header)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:.16e}")];
            row.extend(self.channels.iter().map(|c| format!("{:.16e}", c[k])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn combine<T: Scalar>(base: &FieldPair<T>, dt: T, terms: &[(f64, &FieldPair<T>)]) -> FieldPair<T> {
    let mut out = base.clone();
    for (c, k) in terms {
        if *c != 0.0 {
            out.axpy_real(dt * T::lit(*c), k);
        }
    }
    out
}

fn project<T: Scalar>(state: &mut FieldPair<T>, class: PairSymmetry) -> (f64, f64) {
    let before = state.symmetry_defect(class).as_f64();
    state.symmetrize(class);
    (before, state.symmetry_defect(class).as_f64())
}

fn blowup_check<T: Scalar>(state: &FieldPair<T>, time: f64) -> Result<()> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(Error::Blowup { time })
    }
}

/// One classical RK4 step followed by projection onto the field's symmetry class.
pub fn step<T: Scalar, F: VectorField<T>>(field: &F, state: &FieldPair<T>, dt: f64) -> Result<FieldPair<T>> {
    step_at(field, state, dt, 0.0).map(|(s, _)| s)
}

fn step_at<T: Scalar, F: VectorField<T>>(
    field: &F,
    state: &FieldPair<T>,
    dt: f64,
    time: f64,
) -> Result<(FieldPair<T>, (f64, f64))> {
    if !(dt > 0.0) {
        return Err(Error::Parameter("dt must be positive".into()));
    }
    let h = T::lit(dt);
    let k1 = field.eval(state)?;
    let k2 = field.eval(&combine(state, h, &[(0.5, &k1)]))?;
    let k3 = field.eval(&combine(state, h, &[(0.5, &k2)]))?;
    let k4 = field.eval(&combine(state, h, &[(1.0, &k3)]))?;
    let sixth = 1.0 / 6.0;
    let mut next = combine(state, h, &[(sixth, &k1), (2.0 * sixth, &k2), (2.0 * sixth, &k3), (sixth, &k4)]);
    blowup_check(&next, time + dt)?;
    let defects = project(&mut next, field.symmetry());
    Ok((next, defects))
}

// Dormand–Prince 5(4) tableau; the nodes are not needed for autonomous fields
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Attempt<T> {
    next: FieldPair<T>,
    k_last: FieldPair<T>,
    err: f64,
    defects: (f64, f64),
}

fn dp_attempt<T: Scalar, F: VectorField<T>>(
    field: &F,
    state: &FieldPair<T>,
    k1: &FieldPair<T>,
    dt: f64,
    time: f64,
    cfg: &IntegratorConfig,
) -> Result<Attempt<T>> {
    let h = T::lit(dt);
    let mut ks: Vec<FieldPair<T>> = vec![k1.clone()];
    for row in A.iter().take(6).skip(1) {
        let terms: Vec<(f64, &FieldPair<T>)> = row.iter().copied().zip(ks.iter()).collect();
        ks.push(field.eval(&combine(state, h, &terms))?);
    }
    let terms: Vec<(f64, &FieldPair<T>)> = A[6].iter().copied().zip(ks.iter()).collect();
    let mut next = combine(state, h, &terms);
    blowup_check(&next, time + dt)?;
    let defects = project(&mut next, field.symmetry());
    let k7 = field.eval(&next)?;
    ks.push(k7);

    let mut err = 0.0f64;
    let n = state.grid().len();
    let comps = |p: &FieldPair<T>, i: usize| if i < n { p.first.coeffs()[i] } else { p.second.coeffs()[i - n] };
    for i in 0..2 * n {
        let mut e = num_complex::Complex::new(T::zero(), T::zero());
        for (c, k) in E.iter().zip(&ks) {
            if *c != 0.0 {
                e = e + comps(k, i) * T::lit(*c);
            }
        }
        let e = (e * h).norm().as_f64();
        let scale = cfg.abs_tol + cfg.rel_tol * comps(state, i).norm().as_f64().max(comps(&next, i).norm().as_f64());
        err = err.max(e / scale);
    }
    if !err.is_finite() {
        return Err(Error::Blowup { time: time + dt });
    }
    let k_last = ks.pop().expect("seven stages");
    Ok(Attempt { next, k_last, err, defects })
}

struct Sampler<'m, 'a, T> {
    monitors: &'m Monitors<'a, T>,
    keep_states: bool,
    times: Vec<f64>,
    states: Vec<FieldPair<T>>,
    channels: Vec<Vec<f64>>,
}

impl<'m, 'a, T: Scalar> Sampler<'m, 'a, T> {
    fn record(&mut self, t: f64, state: &FieldPair<T>) {
        if self.times.last() == Some(&t) {
            return;
        }
        self.times.push(t);
        if self.keep_states {
            self.states.push(state.clone());
        }
        for (c, ch) in self.monitors.channels.iter().enumerate() {
            self.channels[c].push((ch.eval)(t, state));
        }
    }

    fn ball_exit(&self, t: f64, state: &FieldPair<T>) -> Option<ExitReason> {
        let b = self.monitors.ball?;
        let norm = state.first.norm(b.s).as_f64();
        (norm > b.radius).then_some(ExitReason::BallExit { time: t, norm, radius: b.radius })
    }
}

/// Integrates from `t = 0` to `config.t_end`, sampling channels along the way.
///
/// Ball exits, blowups and step underflows end the run early and are reported
/// in [`TrajectoryRecord::exit`]; [`TrajectoryRecord::check`] turns them into
/// errors. Errors raised by the field itself are returned directly.
pub fn integrate<T: Scalar, F: VectorField<T>>(
    field: &F,
    state0: &FieldPair<T>,
    config: &IntegratorConfig,
    monitors: &Monitors<'_, T>,
) -> Result<TrajectoryRecord<T>> {
    config.validate()?;
    let mut sampler = Sampler {
        monitors,
        keep_states: config.keep_states,
        times: Vec::new(),
        states: Vec::new(),
        channels: vec![Vec::new(); monitors.channels.len()],
    };
    let class = field.symmetry();
    let mut state = state0.clone();
    let mut t = 0.0f64;
    sampler.record(t, &state);

    let mut exit = sampler.ball_exit(t, &state).unwrap_or(ExitReason::Completed);
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    let mut max_before = 0.0f64;
    let mut max_after = state.symmetry_defect(class).as_f64();
    let t_end = config.t_end;
    let mut next_sample = config.sample_interval.map(|h| (1, h));
    let mut dt = config.dt.min(config.max_dt);
    let mut k1: Option<FieldPair<T>> = None;
    let mut err_prev = 1e-4f64;
    let tiny = 1e-14 * t_end.max(1.0);

    while exit == ExitReason::Completed && t < t_end - tiny {
        // land exactly on sample times and on t_end
        let mut target = t_end;
        if let Some((k, h)) = next_sample {
            target = target.min(k as f64 * h);
        }
        let clipped = dt >= target - t;
        let h = if clipped { target - t } else { dt };

        let outcome = match config.scheme {
            Scheme::Rk4 => step_at(field, &state, h, t).map(|(next, d)| Some((next, d, None))),
            Scheme::Rk45Adaptive => {
                let k = match k1.take() {
                    Some(k) => k,
                    None => field.eval(&state)?,
                };
                match dp_attempt(field, &state, &k, h, t, config) {
                    Ok(a) => {
                        if a.err <= 1.0 {
                            let fac = 0.9 * a.err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                            let proposal = (h * fac.clamp(0.2, 10.0)).min(config.max_dt);
                            if !clipped || proposal < dt {
                                dt = proposal;
                            }
                            err_prev = a.err.max(1e-4);
                            Ok(Some((a.next, a.defects, Some(a.k_last))))
                        } else {
                            let fac = (0.9 * a.err.powf(-1.0 / 5.0)).clamp(0.2, 1.0);
                            dt = h * fac;
                            k1 = Some(k);
                            Ok(None)
                        }
                    }
                    Err(e) => Err(e),
                }
            }
        };
        match outcome {
            Err(Error::Blowup { time }) => {
                exit = ExitReason::Blowup { time };
                break;
            }
            Err(e) => return Err(e),
            Ok(None) => {
                rejected += 1;
                if dt < config.min_dt {
                    exit = ExitReason::StepUnderflow { time: t, min_dt: config.min_dt };
                }
                continue;
            }
            Ok(Some((next, (before, after), k_last))) => {
                accepted += 1;
                max_before = max_before.max(before);
                max_after = max_after.max(after);
                state = next;
                k1 = k_last;
                t = if clipped { target } else { t + h };
                let mut due = config.sample_interval.is_none() && accepted.is_multiple_of(config.monitor_stride as u64);
                if let Some((k, hs)) = next_sample {
                    if clipped && target == k as f64 * hs {
                        due = true;
                        next_sample = Some((k + 1, hs));
                    }
                }
                if let Some(reason) = sampler.ball_exit(t, &state) {
                    exit = reason;
                    due = true;
                }
                if due {
                    sampler.record(t, &state);
                }
            }
        }
    }
    if exit == ExitReason::Completed || matches!(exit, ExitReason::StepUnderflow { .. }) {
        sampler.record(t, &state);
    }

    Ok(TrajectoryRecord {
        times: sampler.times,
        states: sampler.states,
        channel_names: monitors.channels.iter().map(|c| c.name.clone()).collect(),
        channels: sampler.channels,
        final_state: state,
        final_time: t,
        exit,
        accepted_steps: accepted,
        rejected_steps: rejected,
        max_defect_before_projection: max_before,
        max_defect_after_projection: max_after,
    })
}
