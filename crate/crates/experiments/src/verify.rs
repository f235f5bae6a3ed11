//! Property suites: exact identities, norm inequalities, round trips and the
//! agreement of the two evaluations of the normal-form field.

use std::collections::BTreeSet;
use std::sync::Arc;

use kirchhoff_core::kirchhoff::reversibility_defect;
use kirchhoff_core::normal_form::{
    anticommutator, decompose, energy_derivative, field_syst6dic, field_syst_uv, homological_residual, x3_plus,
    x_plus,
};
use kirchhoff_core::transforms::bilinear::{pair_from_vec, pair_to_vec};
use kirchhoff_core::transforms::{
    apply_bilinear, full_compose, kappa_apply, kappa_inverse_closed_form, p_functional, phi1, phi2, phi3, phi4,
    physical_size, BilinearKind, DenseMatrix, NormalFormOperator,
};
use kirchhoff_core::{
    ComplexField, ComposeOptions, Direction, FieldPair, InverseMethod, SpectralGrid, Symmetry, XPlusMethod,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::setup::{golden, grid};
use crate::tempting;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteResult {
    pub suite: String,
    pub grid: String,
    pub samples: usize,
    pub max_defect: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlResult {
    pub control: String,
    pub samples: usize,
    /// Largest diagonal share seen for the normalized map.
    pub normalized_max: f64,
    /// Smallest diagonal share seen for the alternative map.
    pub tempting_min: f64,
    pub threshold: f64,
    pub detected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
    pub controls: Vec<ControlResult>,
    pub failed: Vec<String>,
    pub pass: bool,
}

const S_IDENTITY: [f64; 2] = [1.0, 2.5];
const S_BOUNDS: [f64; 4] = [0.0, 1.0, 2.5, 4.0];
const KINDS: [BilinearKind; 2] = [BilinearKind::A12, BilinearKind::C12];

struct Ctx {
    grid: Arc<SpectralGrid>,
    label: String,
    base_seed: u64,
}

impl Ctx {
    fn seed(&self, k: usize, stream: u64) -> u64 {
        self.base_seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(stream.wrapping_mul(1_000_003))
            .wrapping_add(k as u64)
    }

    fn free(&self, k: usize, stream: u64, size: f64, s: f64) -> Result<ComplexField<f64>> {
        Ok(ComplexField::random(&self.grid, self.seed(k, stream), size, s, Symmetry::Free)?)
    }

    fn hermitian(&self, k: usize, stream: u64, size: f64, s: f64) -> Result<ComplexField<f64>> {
        Ok(ComplexField::random(&self.grid, self.seed(k, stream), size, s, Symmetry::Hermitian)?)
    }

    /// Smooth random field for even `k`, two or three isolated modes for odd `k`.
    fn mixed(&self, k: usize, stream: u64) -> Result<ComplexField<f64>> {
        let f = self.free(k, stream, 1.0, 1.0)?;
        if k.is_multiple_of(2) {
            return Ok(f);
        }
        let n = self.grid.len();
        let seed = self.seed(k, stream);
        let picks = 2 + (seed % 2) as usize;
        let mut out = ComplexField::zeros(&self.grid);
        for p in 0..picks {
            let i = (seed.wrapping_mul(2_654_435_761).wrapping_add(p as u64 * 40_503) % n as u64) as usize;
            out.coeffs_mut()[i] = f.coeffs()[(i + p) % n] + Complex64::new(0.1, 0.0);
        }
        Ok(out)
    }

    fn conj(&self, w: ComplexField<f64>, size: f64) -> Result<FieldPair<f64>> {
        let n = w.sobolev_norm(self.grid.m0())?;
        Ok(FieldPair::conjugate_from(w.scale_real(size / n)))
    }

    fn free_pair(&self, k: usize, stream: u64) -> Result<FieldPair<f64>> {
        Ok(FieldPair::new(self.free(k, stream, 1.0, 1.0)?, self.free(k, stream + 500, 1.0, 1.0)?)?)
    }
}

/// Runs `f` on every sample in parallel and keeps the largest defect.
fn suite(
    ctx: &Ctx,
    name: &str,
    bound: f64,
    samples: usize,
    f: impl Fn(usize) -> Result<f64> + Sync,
) -> Result<SuiteResult> {
    let values: Vec<Result<f64>> = (0..samples).into_par_iter().map(&f).collect();
    let mut max_defect: f64 = 0.0;
    for v in values {
        let v = v?;
        max_defect = if v.is_nan() { f64::NAN } else { max_defect.max(v) };
    }
    Ok(SuiteResult {
        suite: name.to_string(),
        grid: ctx.label.clone(),
        samples,
        max_defect,
        bound,
        pass: max_defect <= bound,
    })
}

fn identity_suites(ctx: &Ctx, n: usize, delta0: f64) -> Result<Vec<SuiteResult>> {
    let g = &ctx.grid;
    let mut out = Vec::new();
    out.push(suite(ctx, "bilinear_self_adjoint", 1e-12, n, |k| {
        let (u, v, y, h) = (ctx.free(k, 1, 1.0, 1.0)?, ctx.free(k, 2, 1.0, 1.0)?, ctx.free(k, 3, 1.0, 1.0)?, ctx.free(k, 4, 1.0, 1.0)?);
        let mut worst: f64 = 0.0;
        for kind in KINDS {
            let a = apply_bilinear(kind, &u, &v, &y)?.pairing(&h)?;
            let b = y.pairing(&apply_bilinear(kind, &u, &v, &h)?)?;
            worst = worst.max((a - b).norm());
        }
        Ok(worst)
    })?);
    out.push(suite(ctx, "bilinear_conjugation", 1e-12, n, |k| {
        let (u, v, y) = (ctx.free(k, 1, 1.0, 1.0)?, ctx.free(k, 2, 1.0, 1.0)?, ctx.free(k, 3, 1.0, 1.0)?);
        let mut worst: f64 = 0.0;
        for kind in KINDS {
            let a = apply_bilinear(kind, &u, &v, &y)?.conj_mirror();
            let b = apply_bilinear(kind, &u.conj_mirror(), &v.conj_mirror(), &y.conj_mirror())?;
            worst = worst.max((&a - &b).max_abs());
        }
        Ok(worst)
    })?);
    out.push(suite(ctx, "bilinear_lambda_commutation", 1e-12, n, |k| {
        let (u, v, y) = (ctx.free(k, 1, 1.0, 1.0)?, ctx.free(k, 2, 1.0, 1.0)?, ctx.free(k, 3, 1.0, S_IDENTITY[1])?);
        let mut worst: f64 = 0.0;
        for kind in KINDS {
            for s in S_IDENTITY {
                let a = apply_bilinear(kind, &u, &v, &y.lambda_power(s))?;
                let b = apply_bilinear(kind, &u, &v, &y)?.lambda_power(s);
                worst = worst.max((&a - &b).max_abs());
            }
        }
        Ok(worst)
    })?);
    out.push(suite(ctx, "m_blocks_self_adjoint_conjugation_commutation", 1e-12, n, |k| {
        let (w, z) = (ctx.free(k, 1, 0.4, g.m0())?, ctx.free(k, 2, 0.4, g.m0())?);
        let (y, h) = (ctx.free(k, 3, 1.0, S_IDENTITY[1])?, ctx.free(k, 4, 1.0, 1.0)?);
        let op = NormalFormOperator::new(&FieldPair::new(w.clone(), z.clone())?)?;
        let bar = NormalFormOperator::new(&FieldPair::new(w.conj_mirror(), z.conj_mirror())?)?;
        let swapped = NormalFormOperator::new(&FieldPair::new(z, w)?)?;
        let mut worst: f64 = 0.0;
        for (m, mbar) in [(0, 0), (1, 1)] {
            let apply = |o: &NormalFormOperator<f64>, which: i32, x: &ComplexField<f64>| {
                if which == 0 {
                    o.m12(x)
                } else {
                    o.m21(x)
                }
            };
            let sa = (apply(&op, m, &y).pairing(&h)? - y.pairing(&apply(&op, m, &h))?).norm();
            let cj = (&apply(&op, m, &y).conj_mirror() - &apply(&bar, mbar, &y.conj_mirror())).max_abs();
            let mut cm: f64 = 0.0;
            for s in S_IDENTITY {
                cm = cm.max((&apply(&op, m, &y.lambda_power(s)) - &apply(&op, m, &y).lambda_power(s)).max_abs());
            }
            worst = worst.max(sa).max(cj).max(cm);
        }
        worst = worst.max((&op.m12(&y) - &swapped.m21(&y)).max_abs());
        Ok(worst)
    })?);
    out.push(suite(ctx, "anticommutator", 1e-12, n, |k| {
        let pair = ctx.conj(ctx.free(k, 1, 1.0, 1.0)?, 0.45 * golden(k as u64))?;
        Ok(anticommutator(&pair, &ctx.free_pair(k, 2)?)?.max_abs())
    })?);
    out.push(suite(ctx, "homological_residual", 1e-12, n, |k| {
        let pair = ctx.conj(ctx.free(k, 1, 1.0, 1.0)?, 0.45 * golden(k as u64))?;
        Ok(homological_residual(&pair)?.max_abs())
    })?);
    out.push(suite(ctx, "resonant_cubic_energy_cancellation", 1e-12, n, |k| {
        let pair = ctx.conj(ctx.free(k, 1, 1.0, 1.0)?, 0.45 * golden(k as u64))?;
        let x3 = x3_plus(&pair)?;
        let mut worst: f64 = 0.0;
        for s in S_IDENTITY {
            worst = worst.max(energy_derivative(&pair, &x3, s)?.abs());
        }
        Ok(worst)
    })?);
    out.push(suite(ctx, "geometric_series_vs_dense_solve", 1e-10, n, |k| {
        let base = ctx.conj(ctx.free(k, 1, 1.0, 1.0)?, 0.5 * golden(k as u64))?;
        let rhs = ctx.free_pair(k, 2)?;
        let dim = 2 * g.len();
        let mut a = DenseMatrix::from_columns(dim, |col| {
            let mut e = vec![Complex64::new(0.0, 0.0); dim];
            e[col] = Complex64::new(1.0, 0.0);
            pair_to_vec(&kappa_apply(&base, &pair_from_vec(g, &e)).expect("same grid"))
        });
        a.add_identity();
        let dense = pair_from_vec(g, &a.solve(&pair_to_vec(&rhs))?);
        Ok((&dense - &kappa_inverse_closed_form(&base, &rhs)?).max_abs())
    })?);
    out.push(suite(ctx, "real_structure", 1e-14, n, |k| {
        let pair = ctx.conj(ctx.free(k, 1, 1.0, 1.0)?, 0.45 * golden(k as u64))?;
        let xp = x_plus(&pair, XPlusMethod::Structured, InverseMethod::Neumann)?.total;
        Ok(field_syst_uv(&pair)?
            .conjugate_defect()
            .max(field_syst6dic(&pair)?.conjugate_defect())
            .max(xp.conjugate_defect()))
    })?);
    out.push(suite(ctx, "decomposition_sum", 1e-13, n, |k| {
        let pair = ctx.conj(ctx.free(k, 1, 1.0, 1.0)?, 0.45 * golden(k as u64))?;
        let full = field_syst6dic(&pair)?;
        Ok((&decompose(&pair)?.sum() - &full).max_abs() / full.max_abs().max(1.0))
    })?);
    out.push(suite(ctx, "reversibility", 1e-14, n, |k| {
        let state = FieldPair::new(ctx.hermitian(k, 1, 1.0, 1.0)?, ctx.hermitian(k, 2, 1.0, 1.0)?)?;
        Ok(reversibility_defect(&state))
    })?);

    out.push(suite(ctx, "phi1_phi2_round_trip", 1e-15, n, |k| {
        let p = ctx.free_pair(k, 1)?;
        let mut worst: f64 = 0.0;
        for stage in [phi1::<f64>, phi2::<f64>] {
            worst = worst.max((&stage(Direction::Forward, &stage(Direction::Inverse, &p)) - &p).max_abs());
            worst = worst.max((&stage(Direction::Inverse, &stage(Direction::Forward, &p)) - &p).max_abs());
        }
        Ok(worst)
    })?);
    out.push(suite(ctx, "phi3_round_trip", 1e-12, n, |k| {
        let eta = FieldPair::conjugate_from(ctx.free(k, 1, golden(k as u64), 1.0)?);
        Ok((&phi3(Direction::Inverse, &phi3(Direction::Forward, &eta)?)? - &eta).max_abs())
    })?);
    out.push(suite(ctx, "phi4_round_trip", 1e-12, n, |k| {
        let w = ctx.conj(ctx.free(k, 1, 1.0, 1.0)?, 0.2 * golden(k as u64))?;
        Ok((&phi4(Direction::Inverse, &phi4(Direction::Forward, &w)?)? - &w).max_abs())
    })?);
    let opts = ComposeOptions { delta0, ..ComposeOptions::default() };
    out.push(suite(ctx, "full_round_trip", 1e-11, n, |k| {
        let m0 = g.m0();
        let raw = FieldPair::new(ctx.hermitian(k, 1, 1.0, m0 + 0.5)?, ctx.hermitian(k, 2, 1.0, m0 - 0.5)?)?;
        let state = raw.scale_real(delta0 * golden(k as u64) / physical_size(&raw));
        let w = full_compose(Direction::Inverse, &state, &opts)?;
        let back = full_compose(Direction::Forward, &w, &opts)?;
        let w2 = ctx.conj(ctx.free(k, 3, 1.0, 1.0)?, delta0 * golden(k as u64 + 7))?;
        let there = full_compose(Direction::Forward, &w2, &opts)?;
        let again = full_compose(Direction::Inverse, &there, &ComposeOptions { delta0: f64::INFINITY, ..opts })?;
        Ok((&back - &state).max_abs().max((&again - &w2).max_abs()))
    })?);
    Ok(out)
}

fn inequality_suites(ctx: &Ctx, n: usize) -> Result<Vec<SuiteResult>> {
    let m0 = ctx.grid.m0();
    let norm = |f: &ComplexField<f64>, s: f64| f.sobolev_norm(s).unwrap_or(f64::NAN);
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let mut out = Vec::new();
    out.push(suite(ctx, "a12_norm_bound", 3.0 / 8.0, n, |k| {
        let (u, v, h) = (ctx.mixed(k, 1)?, ctx.mixed(k, 2)?, ctx.mixed(k, 3)?);
        let out = apply_bilinear(BilinearKind::A12, &u, &v, &h)?;
        Ok(S_BOUNDS.iter().map(|&s| ratio(norm(&out, s), norm(&u, m0) * norm(&v, m0) * norm(&h, s))).fold(0.0, f64::max))
    })?);
    out.push(suite(ctx, "c12_norm_bound", 1.0 / 16.0, n, |k| {
        let (u, v, h) = (ctx.mixed(k, 1)?, ctx.mixed(k, 2)?, ctx.mixed(k, 3)?);
        let out = apply_bilinear(BilinearKind::C12, &u, &v, &h)?;
        Ok(S_BOUNDS.iter().map(|&s| ratio(norm(&out, s), norm(&u, 1.0) * norm(&v, 1.0) * norm(&h, s))).fold(0.0, f64::max))
    })?);
    out.push(suite(ctx, "m_norm_bound", 7.0 / 16.0, n, |k| {
        let base = ctx.conj(ctx.mixed(k, 1)?, 0.5 * golden(k as u64))?;
        let dir = FieldPair::conjugate_from(ctx.mixed(k, 2)?);
        let mx = NormalFormOperator::new(&base)?.apply_m(&dir)?;
        let w = base.norm(m0);
        Ok(S_BOUNDS.iter().map(|&s| ratio(mx.norm(s), w * w * dir.norm(s))).fold(0.0, f64::max))
    })?);
    out.push(suite(ctx, "k_norm_bound", 1.0, n, |k| {
        let base = ctx.conj(ctx.mixed(k, 1)?, 0.5 * golden(k as u64))?;
        let dir = FieldPair::conjugate_from(ctx.mixed(k, 2)?);
        let kx = NormalFormOperator::new(&base)?.apply_k(&dir)?;
        let w = base.norm(m0);
        Ok(S_BOUNDS
            .iter()
            .map(|&s| {
                let bound = 7.0 / 16.0 * w * w * dir.norm(s) + 7.0 / 8.0 * w * base.norm(s) * dir.norm(m0);
                ratio(kx.norm(s), bound)
            })
            .fold(0.0, f64::max))
    })?);
    out.push(suite(ctx, "cubic_norm_bound", 0.5, n, |k| {
        let pair = ctx.conj(ctx.mixed(k, 1)?, 0.5 * golden(k as u64))?;
        let b3 = decompose(&pair)?.b3;
        let w1 = pair.norm(1.0);
        Ok(S_BOUNDS.iter().map(|&s| ratio(b3.norm(s), w1 * w1 * pair.norm(s))).fold(0.0, f64::max))
    })?);
    out.push(suite(ctx, "resonant_cubic_norm_bound", 0.25, n, |k| {
        let pair = ctx.conj(ctx.mixed(k, 1)?, 0.5 * golden(k as u64))?;
        let x3 = x3_plus(&pair)?;
        let w1 = pair.norm(1.0);
        Ok(S_BOUNDS.iter().map(|&s| ratio(x3.norm(s), w1 * w1 * pair.norm(s))).fold(0.0, f64::max))
    })?);
    out.push(suite(ctx, "quintic_remainder_bound", 2.0, n, |k| {
        let pair = ctx.conj(ctx.mixed(k, 1)?, 0.5 * golden(k as u64))?;
        let parts = decompose(&pair)?;
        let p = p_functional(&pair.first, &pair.second)?;
        Ok(S_BOUNDS.iter().map(|&s| ratio(parts.r_ge5.norm(s), p * parts.b3.norm(s))).fold(0.0, f64::max))
    })?);
    out.push(suite(ctx, "normal_form_inverse_bound", 2.0, n, |k| {
        let eta = ctx.conj(ctx.mixed(k, 1)?, 0.25 * golden(k as u64).max(1e-3))?;
        let w = phi4(Direction::Inverse, &eta)?;
        Ok(std::iter::once(m0)
            .chain(S_BOUNDS)
            .map(|s| ratio(w.norm(s), eta.norm(s)))
            .fold(0.0, f64::max))
    })?);
    Ok(out)
}

/// `max 1/(||j|-|k|| |j|)` over all pairs of squared norms attained by
/// lattice points with `|j|, |k| ≤ radius`.
pub fn small_divisor(d: usize, radius: i64) -> SuiteResult {
    let mut norms = BTreeSet::new();
    let r2 = radius * radius;
    let mut j = vec![-radius; d];
    loop {
        let n2: i64 = j.iter().map(|x| x * x).sum();
        if n2 > 0 && n2 <= r2 {
            norms.insert(n2);
        }
        let mut axis = 0;
        while axis < d && j[axis] == radius {
            j[axis] = -radius;
            axis += 1;
        }
        if axis == d {
            break;
        }
        j[axis] += 1;
    }
    let norms: Vec<i64> = norms.into_iter().collect();
    let worst = norms
        .par_iter()
        .map(|&a| {
            let ja = (a as f64).sqrt();
            norms
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| {
                    let gap = ((a - b) as f64 / (ja + (b as f64).sqrt())).abs();
                    1.0 / (gap * ja)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    SuiteResult {
        suite: "small_divisor".into(),
        grid: format!("d={d},|j|<={radius}"),
        samples: norms.len() * norms.len().saturating_sub(1),
        max_defect: worst,
        bound: 3.0,
        pass: worst <= 3.0,
    }
}

fn xplus_suite(ctx: &Ctx, n: usize) -> Result<SuiteResult> {
    suite(ctx, "xplus_direct_vs_structured", 1e-10, n, |k| {
        let pair = ctx.conj(ctx.free(k, 1, 1.0, 1.0)?, 0.2 * golden(k as u64).max(1e-3))?;
        let a = x_plus(&pair, XPlusMethod::Direct, InverseMethod::Neumann)?.total;
        let b = x_plus(&pair, XPlusMethod::Structured, InverseMethod::Neumann)?.total;
        Ok((&a - &b).max_abs() / a.max_abs().max(f64::MIN_POSITIVE))
    })
}

fn tempting_control(ctx: &Ctx, n: usize) -> Result<ControlResult> {
    let probes: Vec<Result<tempting::DiagonalProbe>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let pair = ctx.conj(ctx.free(k, 9, 1.0, 1.0)?, 0.05 + 0.3 * golden(k as u64))?;
            tempting::probe(&pair)
        })
        .collect();
    let mut normalized_max: f64 = 0.0;
    let mut tempting_min = f64::INFINITY;
    for p in probes {
        let p = p?;
        normalized_max = normalized_max.max(p.normalized.diagonal_share);
        tempting_min = tempting_min.min(p.tempting.diagonal_share);
    }
    let threshold = 0.1;
    Ok(ControlResult {
        control: format!("order_zero_diagonal_term[{}]", ctx.label),
        samples: n,
        normalized_max,
        tempting_min,
        threshold,
        detected: normalized_max < 1e-6 && tempting_min > threshold,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<VerifyReport> {
    let v = &config.verify;
    let mut suites = Vec::new();
    let mut controls = Vec::new();
    for (gi, [d, n]) in v.grids.iter().enumerate() {
        let g = grid(*d as usize, *n, v.corrupt_a12_sign)?;
        let ctx = Ctx { label: format!("d={d},N={n}"), grid: g, base_seed: config.seed.wrapping_add(gi as u64 * 7919) };
        if v.samples > 0 {
            suites.extend(identity_suites(&ctx, v.samples, config.delta0)?);
            controls.push(tempting_control(&ctx, v.samples.min(20))?);
        }
        if v.inequality_samples > 0 {
            suites.extend(inequality_suites(&ctx, v.inequality_samples)?);
        }
        if v.xplus_samples > 0 {
            suites.push(xplus_suite(&ctx, v.xplus_samples)?);
        }
    }
    if v.small_divisor_radius > 0 {
        for d in [2, 3] {
            suites.push(small_divisor(d, v.small_divisor_radius));
        }
    }
    let mut failed: Vec<String> =
        suites.iter().filter(|s| !s.pass).map(|s| format!("{}[{}]", s.suite, s.grid)).collect();
    failed.extend(controls.iter().filter(|c| !c.detected).map(|c| c.control.clone()));
    let pass = failed.is_empty();
    Ok(VerifyReport { suites, controls, failed, pass })
}
