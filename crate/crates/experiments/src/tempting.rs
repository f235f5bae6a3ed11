//! Negative control for the diagonalizing change of variables.
//!
//! The map `(η,ψ) ↦ (1+ρ)⁻¹ [[1,ρ],[ρ,1]] (η,ψ)` with `ρ = ρ(Q(η,ψ))` keeps `Q`
//! unchanged but, unlike the normalized map used by the workbench, leaves a
//! diagonal term of order zero with a real coefficient in the transformed
//! system. Both fields are obtained here by numerically pulling the
//! complex-coordinate system back through the map, then the part left after
//! removing the order-one diagonal term is fitted as `a·η + b·ψ`.

use kirchhoff_core::normal_form::field_syst_uv;
use kirchhoff_core::transforms::{p_functional, phi3, q_functional, rho};
use kirchhoff_core::{Direction, FieldPair};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;

/// `(η,ψ) ↦ (f,g)` for the alternative normalization.
pub fn tempting_forward(pair: &FieldPair<f64>) -> Result<FieldPair<f64>> {
    let r = rho(q_functional(&pair.first, &pair.second)?)?;
    let k = 1.0 / (1.0 + r);
    let mut f = pair.first.scale_real(k);
    f.axpy_real(r * k, &pair.second);
    let mut g = pair.second.scale_real(k);
    g.axpy_real(r * k, &pair.first);
    Ok(FieldPair::new(f, g)?)
}

/// Inverse of [`tempting_forward`]; `f + g = η + ψ`, so `ρ` is read off `(f,g)`.
pub fn tempting_inverse(pair: &FieldPair<f64>) -> Result<FieldPair<f64>> {
    let r = rho(q_functional(&pair.first, &pair.second)?)?;
    let k = 1.0 / (1.0 - r);
    let mut eta = pair.first.scale_real(k);
    eta.axpy_real(-r * k, &pair.second);
    let mut psi = pair.second.scale_real(k);
    psi.axpy_real(-r * k, &pair.first);
    Ok(FieldPair::new(eta, psi)?)
}

/// `(DT)⁻¹ X(T(x))` for `X` the complex-coordinate system, by differentiating
/// `t ↦ T⁻¹(T(x) + tX)` with Richardson-extrapolated central differences.
pub fn pull_back(
    forward: impl Fn(&FieldPair<f64>) -> Result<FieldPair<f64>>,
    inverse: impl Fn(&FieldPair<f64>) -> Result<FieldPair<f64>>,
    x: &FieldPair<f64>,
) -> Result<FieldPair<f64>> {
    let y = forward(x)?;
    let v = field_syst_uv(&y)?;
    let vmax = v.max_abs();
    if vmax == 0.0 {
        return Ok(FieldPair::zeros(x.grid()));
    }
    let h = 1e-3 * y.max_abs() / vmax;
    let central = |h: f64| -> Result<FieldPair<f64>> {
        let mut plus = y.clone();
        plus.axpy_real(h, &v);
        let mut minus = y.clone();
        minus.axpy_real(-h, &v);
        Ok((&inverse(&plus)? - &inverse(&minus)?).scale_real(0.5 / h))
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((&fine.scale_real(4.0) - &coarse).scale_real(1.0 / 3.0))
}

fn hdot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Least-squares `r ≈ a·η + b·ψ`; returns `(a, b, relative residual)`.
fn fit_span(r: &[Complex64], eta: &[Complex64], psi: &[Complex64]) -> (Complex64, Complex64, f64) {
    let (g11, g12, g22) = (hdot(eta, eta), hdot(eta, psi), hdot(psi, psi));
    let (r1, r2) = (hdot(eta, r), hdot(psi, r));
    let det = g11 * g22 - g12 * g12.conj();
    let a = (g22 * r1 - g12 * r2) / det;
    let b = (g11 * r2 - g12.conj() * r1) / det;
    let res: f64 = r.iter().zip(eta.iter().zip(psi)).map(|(x, (e, p))| (x - a * e - b * p).norm_sqr()).sum();
    let rn: f64 = r.iter().map(|x| x.norm_sqr()).sum();
    (a, b, (res / rn.max(f64::MIN_POSITIVE)).sqrt())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpanFit {
    /// Coefficient of `η`: the diagonal term of order zero.
    pub diagonal: [f64; 2],
    /// Coefficient of `ψ`: the bounded off-diagonal term.
    pub off_diagonal: [f64; 2],
    /// `|a| / (|a| + |b|)`.
    pub diagonal_share: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagonalProbe {
    pub normalized: SpanFit,
    pub tempting: SpanFit,
    /// Distance between the numerical pull-back through the normalized map
    /// and the closed-form diagonalized field, relative to the field size.
    pub pull_back_check: f64,
}

fn span_fit(pair: &FieldPair<f64>, field: &FieldPair<f64>, speed: f64) -> SpanFit {
    let d1 = pair.first.lambda().scale(Complex64::new(0.0, -speed));
    let r = &field.first - &d1;
    let (a, b, residual) = fit_span(r.coeffs(), pair.first.coeffs(), pair.second.coeffs());
    SpanFit {
        diagonal: [a.re, a.im],
        off_diagonal: [b.re, b.im],
        diagonal_share: a.norm() / (a.norm() + b.norm()).max(f64::MIN_POSITIVE),
        residual,
    }
}

/// Pulls the complex-coordinate system back through both maps at `pair`.
pub fn probe(pair: &FieldPair<f64>) -> Result<DiagonalProbe> {
    let normalized_field = pull_back(|x| Ok(phi3(Direction::Forward, x)?), |x| Ok(phi3(Direction::Inverse, x)?), pair)?;
    let closed = kirchhoff_core::normal_form::field_syst6dic(pair)?;
    let pull_back_check = (&normalized_field - &closed).max_abs() / closed.max_abs().max(f64::MIN_POSITIVE);
    let p = p_functional(&pair.first, &pair.second)?;
    let normalized = span_fit(pair, &normalized_field, (1.0 + 2.0 * p).sqrt());
    let tempting_field = pull_back(tempting_forward, tempting_inverse, pair)?;
    let q = q_functional(&pair.first, &pair.second)?;
    let tempting = span_fit(pair, &tempting_field, (1.0 + 2.0 * q).sqrt());
    Ok(DiagonalProbe { normalized, tempting, pull_back_check })
}
