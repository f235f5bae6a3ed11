//! Grids, initial data and conversions between representations.

use std::sync::Arc;

use kirchhoff_core::transforms::{full_compose, phi1, phi2, phi3, phi34, phi4_with};
use kirchhoff_core::{ComplexField, ComposeOptions, Direction, FieldPair, SpectralGrid, Symmetry};

use crate::config::{ExperimentConfig, Representation};
use crate::error::{ExperimentError, Result};

pub fn grid(d: usize, n: i64, corrupt_a12: bool) -> Result<Arc<SpectralGrid>> {
    let g = if corrupt_a12 { SpectralGrid::with_corrupted_a12(d, n) } else { SpectralGrid::new(d, n) };
    g.map(Arc::new).map_err(|e| ExperimentError::config("grid", e.to_string()))
}

pub fn config_grid(config: &ExperimentConfig) -> Result<Arc<SpectralGrid>> {
    grid(config.d, config.n_modes, false)
}

/// Point `k` of the golden-ratio sequence in `[0, 1)`.
pub fn golden(k: u64) -> f64 {
    const PHI: f64 = 0.618_033_988_749_894_8;
    (0.5 + k as f64 * PHI).fract()
}

/// Random `w` with `‖w‖_{m₀} = size` and no symmetry constraint.
pub fn random_w(grid: &Arc<SpectralGrid>, seed: u64, size: f64) -> Result<ComplexField<f64>> {
    Ok(ComplexField::random(grid, seed, size, grid.m0(), Symmetry::Free)?)
}

/// The initial `w₀` of a run: read from file if configured, else random of size `eps`.
pub fn initial_w(config: &ExperimentConfig, grid: &Arc<SpectralGrid>) -> Result<ComplexField<f64>> {
    match &config.simulate.initial {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ExperimentError::config("simulate.initial", format!("{}: {e}", path.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            ComplexField::from_json(&value, Some(grid))
                .map_err(|e| ExperimentError::config("simulate.initial", e.to_string()))
        }
        None => random_w(grid, config.seed, config.eps),
    }
}

pub fn compose_options(delta0: f64) -> ComposeOptions {
    ComposeOptions { delta0, ..ComposeOptions::default() }
}

/// State of `rep` that corresponds to `(w, w̄)`.
pub fn state_from_w(rep: Representation, w: &ComplexField<f64>, opts: &ComposeOptions) -> Result<FieldPair<f64>> {
    let pair = FieldPair::conjugate_from(w.clone());
    Ok(match rep {
        Representation::Xplus => pair,
        Representation::Syst6dic => phi4_with(Direction::Forward, &pair, opts)?,
        Representation::Original => full_compose(Direction::Forward, &pair, opts)?,
    })
}

/// Physical `(u, v)` of a state of `rep`.
pub fn physical(rep: Representation, state: &FieldPair<f64>, opts: &ComposeOptions) -> Result<FieldPair<f64>> {
    Ok(match rep {
        Representation::Original => state.clone(),
        Representation::Syst6dic => {
            phi1(Direction::Forward, &phi2(Direction::Forward, &phi3(Direction::Forward, state)?))
        }
        Representation::Xplus => full_compose(Direction::Forward, state, &ComposeOptions { delta0: f64::INFINITY, ..*opts })?,
    })
}

/// `(w, w̄)` of a state of `rep`.
pub fn w_of(rep: Representation, state: &FieldPair<f64>, opts: &ComposeOptions) -> Result<FieldPair<f64>> {
    Ok(match rep {
        Representation::Xplus => state.clone(),
        Representation::Syst6dic => phi4_with(Direction::Inverse, state, opts)?,
        Representation::Original => full_compose(Direction::Inverse, state, opts)?,
    })
}

/// `(f, g)` in the complex coordinates, from `(w, w̄)`.
pub fn complex_from_w(pair: &FieldPair<f64>, opts: &ComposeOptions) -> Result<FieldPair<f64>> {
    Ok(phi34(Direction::Forward, pair, opts)?)
}

/// `‖u‖_{s+½} + ‖v‖_{s-½}`.
pub fn physical_norm(state: &FieldPair<f64>, s: f64) -> f64 {
    let a = state.first.sobolev_norm(s + 0.5).unwrap_or(f64::NAN);
    let b = state.second.sobolev_norm((s - 0.5).max(0.0)).unwrap_or(f64::NAN);
    a + b
}
