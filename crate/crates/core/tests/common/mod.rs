#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use kirchhoff_core::{ComplexField, FieldPair, SpectralGrid, Symmetry};
use kirchhoff_oracles::SparseField;
use num_complex::Complex64;

pub fn grid(d: usize, n: i64) -> Arc<SpectralGrid> {
    Arc::new(SpectralGrid::new(d, n).unwrap())
}

pub fn free(g: &Arc<SpectralGrid>, seed: u64, size: f64, s: f64) -> ComplexField<f64> {
    ComplexField::random(g, seed, size, s, Symmetry::Free).unwrap()
}

pub fn hermitian(g: &Arc<SpectralGrid>, seed: u64, size: f64, s: f64) -> ComplexField<f64> {
    ComplexField::random(g, seed, size, s, Symmetry::Hermitian).unwrap()
}

/// `(w, w̄)` with `‖w‖_{m₀} = size`.
pub fn conj_pair(g: &Arc<SpectralGrid>, seed: u64, size: f64) -> FieldPair<f64> {
    FieldPair::conjugate_from(free(g, seed, size, g.m0()))
}

pub fn free_pair(g: &Arc<SpectralGrid>, seed: u64, size: f64) -> FieldPair<f64> {
    FieldPair::new(free(g, seed, size, 1.0), free(g, seed ^ 0x5151, size, 1.0)).unwrap()
}

pub fn to_sparse(f: &ComplexField<f64>) -> SparseField {
    let g = f.grid();
    (0..g.len()).map(|i| (g.mode(i).to_vec(), f.coeffs()[i])).collect::<HashMap<_, _>>()
}

pub fn max_diff_sparse(f: &ComplexField<f64>, s: &SparseField) -> f64 {
    let g = f.grid();
    (0..g.len())
        .map(|i| (f.coeffs()[i] - s.get(g.mode(i)).copied().unwrap_or(Complex64::new(0.0, 0.0))).norm())
        .fold(0.0, f64::max)
}

pub fn rel(a: f64, b: f64) -> f64 {
    a / b.max(f64::MIN_POSITIVE)
}
