//! The four changes of variables and their composition.
//!
//! Each `phiN(Direction::Forward, ·)` maps the new variables to the old ones,
//! so the chain reads `(w,z) → (η,ψ) → (f,g) → (q,p) → (u,v)` forward.

use num_complex::Complex;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{ComplexField, FieldPair, PairSymmetry};
use crate::scalar::Scalar;
use crate::transforms::bilinear::NormalFormOperator;
use crate::transforms::scalar_maps::{clamp_q, p_from_q, q_functional, rho};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Tunables of the composed transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposeOptions {
    /// Operational radius of the balls on which the composition is used.
    pub delta0: f64,
    /// Step size, in the `m₀` norm, at which the fixed-point inverse of the
    /// normal-form map stops.
    pub phi4_tol: f64,
    pub phi4_max_iter: usize,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        Self { delta0: 0.1, phi4_tol: 1e-13, phi4_max_iter: 200 }
    }
}

/// Radius of the ball on which the normal-form map is inverted.
pub const PHI4_INVERSE_RADIUS: f64 = 0.25;

/// `(q,p) ↦ (Λ^{-½}q, Λ^{½}p)`.
pub fn phi1<T: Scalar>(dir: Direction, pair: &FieldPair<T>) -> FieldPair<T> {
    let sign = match dir {
        Direction::Forward => 1.0,
        Direction::Inverse => -1.0,
    };
    FieldPair { first: pair.first.lambda_power(-0.5 * sign), second: pair.second.lambda_power(0.5 * sign) }
}

/// `(f,g) ↦ ((f+g)/√2, (f−g)/(i√2))`, inverse `(q,p) ↦ ((q+ip)/√2, (q−ip)/√2)`.
pub fn phi2<T: Scalar>(dir: Direction, pair: &FieldPair<T>) -> FieldPair<T> {
    let r = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let (a, b) = (&pair.first, &pair.second);
    match dir {
        Direction::Forward => {
            let q = (a + b).scale_real(r);
            let p = (a - b).scale(Complex::new(T::zero(), -r));
            FieldPair { first: q, second: p }
        }
        Direction::Inverse => {
            let ip = b.scale(Complex::new(T::zero(), r));
            let q = a.scale_real(r);
            FieldPair { first: &q + &ip, second: &q - &ip }
        }
    }
}

fn mix<T: Scalar>(pair: &FieldPair<T>, c: T, off: T) -> FieldPair<T> {
    let (x, y) = (&pair.first, &pair.second);
    let mut first = x.scale_real(c);
    first.axpy_real(c * off, y);
    let mut second = y.scale_real(c);
    second.axpy_real(c * off, x);
    FieldPair { first, second }
}

/// Order-one diagonalization `(η,ψ) ↦ (f,g)`.
///
/// Forward: `ρ = ρ(P(η,ψ))`, `(f,g) = (1−ρ²)^{-½}(η+ρψ, ρη+ψ)`.
/// Inverse: `ρ = ρ(Q(f,g))`, `(η,ψ) = (1−ρ²)^{-½}(f−ρg, −ρf+g)`.
pub fn phi3<T: Scalar>(dir: Direction, pair: &FieldPair<T>) -> Result<FieldPair<T>> {
    pair.first.check_same_grid(&pair.second)?;
    let q = q_functional(&pair.first, &pair.second)?;
    let scale = pair.first.norm_sq(0.5) + pair.second.norm_sq(0.5);
    let x = match dir {
        Direction::Forward => p_from_q(q, scale)?,
        Direction::Inverse => clamp_q(q, scale)?,
    };
    let r = rho(x)?;
    let c = T::one() / (T::one() - r * r).sqrt();
    Ok(match dir {
        Direction::Forward => mix(pair, c, r),
        Direction::Inverse => mix(pair, c, -r),
    })
}

/// `F(η,ψ) = −1/(4(1+3P)√(1+2P))`.
pub fn kappa_factor<T: Scalar>(pair: &FieldPair<T>) -> Result<T> {
    let q = q_functional(&pair.first, &pair.second)?;
    let p = p_from_q(q, pair.first.norm_sq(0.5) + pair.second.norm_sq(0.5))?;
    let two = T::lit(2.0);
    Ok(-T::one() / (T::lit(4.0) * (T::one() + T::lit(3.0) * p) * (T::one() + two * p).sqrt()))
}

/// The rank-one operator `𝓚(η,ψ)(α,β) = (ψ,η)·F·⟨Λ(η+ψ), α+β⟩` arising when
/// the time derivative is pulled through the diagonalization.
pub fn kappa_apply<T: Scalar>(pair: &FieldPair<T>, x: &FieldPair<T>) -> Result<FieldPair<T>> {
    pair.check_same_grid(x)?;
    let f = kappa_factor(pair)?;
    let s = (&pair.first + &pair.second).lambda();
    let scalar = s.pairing_unchecked(&(&x.first + &x.second)) * f;
    Ok(pair.swap().scale(scalar))
}

/// Closed form of `(I + 𝓚)⁻¹(α,β) = (α,β) + (ψ,η)⟨Λ(η+ψ), α+β⟩ / (4(1+2P)^{3/2})`.
pub fn kappa_inverse_closed_form<T: Scalar>(pair: &FieldPair<T>, x: &FieldPair<T>) -> Result<FieldPair<T>> {
    pair.check_same_grid(x)?;
    let q = q_functional(&pair.first, &pair.second)?;
    let p = p_from_q(q, pair.first.norm_sq(0.5) + pair.second.norm_sq(0.5))?;
    let denom = T::lit(4.0) * (T::one() + T::lit(2.0) * p).powf(T::lit(1.5));
    let s = (&pair.first + &pair.second).lambda();
    let scalar = s.pairing_unchecked(&(&x.first + &x.second)) / denom;
    let mut out = x.clone();
    out.axpy(scalar, &pair.swap());
    Ok(out)
}

/// Normal-form step `(w,z) ↦ (I + M(w,z))(w,z)`.
pub fn phi4<T: Scalar>(dir: Direction, pair: &FieldPair<T>) -> Result<FieldPair<T>> {
    phi4_with(dir, pair, &ComposeOptions::default())
}

pub fn phi4_with<T: Scalar>(dir: Direction, pair: &FieldPair<T>, opts: &ComposeOptions) -> Result<FieldPair<T>> {
    match dir {
        Direction::Forward => {
            let op = NormalFormOperator::new(pair)?;
            Ok(pair + &op.apply_m(pair)?)
        }
        Direction::Inverse => phi4_inverse(pair, opts),
    }
}

fn phi4_inverse<T: Scalar>(target: &FieldPair<T>, opts: &ComposeOptions) -> Result<FieldPair<T>> {
    let grid = target.grid().clone();
    let m0 = grid.m0();
    let size = target.norm(m0);
    if !(size.as_f64() <= PHI4_INVERSE_RADIUS) {
        return Err(Error::Domain(format!(
            "normal-form inverse needs ‖η‖_m0 <= {PHI4_INVERSE_RADIUS}, got {size:e}"
        )));
    }
    let tol = T::lit(opts.phi4_tol).max(T::epsilon() * T::lit(16.0) * size);
    let mut x = FieldPair::zeros(&grid);
    let mut last_step = T::infinity();
    let mut growth = 0;
    for it in 1..=opts.phi4_max_iter {
        let op = NormalFormOperator::new(&x)?;
        let next = target - &op.apply_m(&x)?;
        let step = (&next - &x).norm(m0);
        x = next;
        if !step.is_finite() {
            return Err(Error::Numerical("normal-form inverse produced non-finite iterate".into()));
        }
        if step <= tol {
            return Ok(x);
        }
        if step > last_step {
            growth += 1;
            if growth >= 3 {
                return Err(Error::Convergence {
                    iterations: it,
                    reason: "normal-form inverse is not contracting".into(),
                });
            }
        } else {
            growth = 0;
        }
        last_step = step;
    }
    Err(Error::Convergence {
        iterations: opts.phi4_max_iter,
        reason: "normal-form inverse hit the iteration cap".into(),
    })
}

/// Intermediate pairs of one pass through the chain.
#[derive(Debug, Clone)]
pub struct TransformChainState<T> {
    pub direction: Direction,
    /// Stages in traversal order, labelled by variable names.
    pub stages: Vec<(&'static str, FieldPair<T>)>,
}

impl<T: Scalar> TransformChainState<T> {
    /// Symmetry class each stage is expected to carry on the real subspace.
    pub fn expected_symmetry(label: &str) -> PairSymmetry {
        match label {
            "(u,v)" | "(q,p)" => PairSymmetry::Hermitian,
            _ => PairSymmetry::Conjugate,
        }
    }

    /// Largest structural-symmetry defect over all stages.
    pub fn max_symmetry_defect(&self) -> T {
        self.stages
            .iter()
            .map(|(l, p)| p.symmetry_defect(Self::expected_symmetry(l)))
            .fold(T::zero(), T::max)
    }

    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|(label, p)| json!({ "stage": label, "first": p.first.to_json(), "second": p.second.to_json() }))
            .collect();
        let dir = match self.direction {
            Direction::Forward => "fwd",
            Direction::Inverse => "inv",
        };
        json!({ "direction": dir, "stages": stages })
    }
}

/// `‖u‖_{m₀+½} + ‖v‖_{m₀−½}`, the size of a physical state.
pub fn physical_size<T: Scalar>(state: &FieldPair<T>) -> T {
    let m0 = state.grid().m0();
    state.first.norm(m0 + 0.5) + state.second.norm(m0 - 0.5)
}

/// `Φ = Φ⁽¹⁾∘Φ⁽²⁾∘Φ⁽³⁾∘Φ⁽⁴⁾` or its inverse, with the trace of every stage.
pub fn full_compose_traced<T: Scalar>(
    dir: Direction,
    state: &FieldPair<T>,
    opts: &ComposeOptions,
) -> Result<TransformChainState<T>> {
    state.first.check_same_grid(&state.second)?;
    let m0 = state.grid().m0();
    let mut stages = Vec::with_capacity(5);
    match dir {
        Direction::Forward => {
            let size = state.norm(m0);
            if !(size.as_f64() <= opts.delta0) {
                return Err(Error::Domain(format!("‖w‖_m0 = {size:e} exceeds δ₀ = {}", opts.delta0)));
            }
            stages.push(("(w,z)", state.clone()));
            let eta = phi4_with(Direction::Forward, state, opts)?;
            let fg = phi3(Direction::Forward, &eta)?;
            let qp = phi2(Direction::Forward, &fg);
            let uv = phi1(Direction::Forward, &qp);
            stages.extend([("(η,ψ)", eta), ("(f,g)", fg), ("(q,p)", qp), ("(u,v)", uv)]);
        }
        Direction::Inverse => {
            let size = physical_size(state);
            if !(size.as_f64() <= opts.delta0) {
                return Err(Error::Domain(format!(
                    "‖u‖_(m0+1/2) + ‖v‖_(m0-1/2) = {size:e} exceeds δ₀ = {}",
                    opts.delta0
                )));
            }
            stages.push(("(u,v)", state.clone()));
            let qp = phi1(Direction::Inverse, state);
            let fg = phi2(Direction::Inverse, &qp);
            let eta = phi3(Direction::Inverse, &fg)?;
            let wz = phi4_with(Direction::Inverse, &eta, opts)?;
            stages.extend([("(q,p)", qp), ("(f,g)", fg), ("(η,ψ)", eta), ("(w,z)", wz)]);
        }
    }
    Ok(TransformChainState { direction: dir, stages })
}

pub fn full_compose<T: Scalar>(dir: Direction, state: &FieldPair<T>, opts: &ComposeOptions) -> Result<FieldPair<T>> {
    let mut trace = full_compose_traced(dir, state, opts)?;
    Ok(trace.stages.pop().expect("chain has stages").1)
}

/// `(w,z) ↦ (f,g)`, the two complex-coordinate stages only.
pub fn phi34<T: Scalar>(dir: Direction, pair: &FieldPair<T>, opts: &ComposeOptions) -> Result<FieldPair<T>> {
    match dir {
        Direction::Forward => phi3(Direction::Forward, &phi4_with(Direction::Forward, pair, opts)?),
        Direction::Inverse => phi4_with(Direction::Inverse, &phi3(Direction::Inverse, pair)?, opts),
    }
}

/// Physical state `(u,v)` built from a single complex field `w` by the
/// forward chain applied to `(w, w̄)`.
pub fn physical_from_w<T: Scalar>(w: &ComplexField<T>, opts: &ComposeOptions) -> Result<FieldPair<T>> {
    full_compose(Direction::Forward, &FieldPair::conjugate_from(w.clone()), opts)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::Symmetry;
    use crate::grid::SpectralGrid;
    use crate::transforms::linalg::DenseMatrix;
    use crate::transforms::bilinear::{pair_from_vec, pair_to_vec};
    use crate::transforms::scalar_maps::q_functional_complex;

    fn grid(d: usize, n: i64) -> Arc<SpectralGrid> {
        Arc::new(SpectralGrid::new(d, n).unwrap())
    }

    fn conj_pair(g: &Arc<SpectralGrid>, seed: u64, size: f64, s: f64) -> FieldPair<f64> {
        FieldPair::conjugate_from(ComplexField::random(g, seed, size, s, Symmetry::Free).unwrap())
    }

    #[test]
    fn phi1_examples() {
        let g = grid(1, 5);
        let q = ComplexField::delta(&g, &[4], Complex::new(1.0, 0.0)).unwrap();
        let pair = FieldPair::new(q, ComplexField::zeros(&g)).unwrap();
        let uv = phi1(Direction::Forward, &pair);
        assert_eq!(uv.first.get(&[4]).unwrap(), Complex::new(0.5, 0.0));
        let p = conj_pair(&g, 1, 1.0, 1.0);
        let back = phi1(Direction::Forward, &phi1(Direction::Inverse, &p));
        assert!((&back - &p).max_abs() <= 1e-15);
    }

    #[test]
    fn phi2_maps_real_pairs_to_conjugate_pairs() {
        let g = grid(2, 4);
        let q = ComplexField::random(&g, 2, 1.0, 1.0, Symmetry::Hermitian).unwrap();
        let p = ComplexField::random(&g, 3, 1.0, 1.0, Symmetry::Hermitian).unwrap();
        let qp = FieldPair::new(q.clone(), p).unwrap();
        let fg = phi2(Direction::Inverse, &qp);
        assert!(fg.conjugate_defect() <= 1e-15);
        assert!((&phi2(Direction::Forward, &fg) - &qp).max_abs() <= 1e-15);

        let only_q = FieldPair::new(q.clone(), ComplexField::zeros(&g)).unwrap();
        let fg = phi2(Direction::Inverse, &only_q);
        assert_eq!(fg.first, fg.second);
        assert!((&fg.first - &q.scale_real(std::f64::consts::FRAC_1_SQRT_2)).max_abs() == 0.0);
    }

    #[test]
    fn phi3_round_trip_and_q_identity() {
        let g = grid(2, 4);
        for seed in 0..50 {
            let p = conj_pair(&g, seed, 0.05 + 0.02 * seed as f64, 1.0);
            let fg = phi3(Direction::Forward, &p).unwrap();
            assert!(fg.conjugate_defect() <= 1e-15);
            let back = phi3(Direction::Inverse, &fg).unwrap();
            assert!((&back - &p).max_abs() <= 1e-12);
            let qf = q_functional(&fg.first, &fg.second).unwrap();
            let qe = q_functional(&p.first, &p.second).unwrap();
            assert!((qf * (1.0 + 2.0 * qf).sqrt() - qe).abs() <= 1e-12);
        }
        let zero = FieldPair::<f64>::zeros(&g);
        assert_eq!(phi3(Direction::Forward, &zero).unwrap(), zero);
    }

    #[test]
    fn kappa_closed_form_matches_dense_solve() {
        let g = grid(1, 4);
        let base = conj_pair(&g, 5, 0.8, 1.0);
        let rhs = FieldPair::new(
            ComplexField::random(&g, 6, 1.0, 0.0, Symmetry::Free).unwrap(),
            ComplexField::random(&g, 7, 1.0, 0.0, Symmetry::Free).unwrap(),
        )
        .unwrap();
        let n2 = 2 * g.len();
        let mut m = DenseMatrix::from_columns(n2, |col| {
            let mut e = vec![Complex::new(0.0, 0.0); n2];
            e[col] = Complex::new(1.0, 0.0);
            pair_to_vec(&kappa_apply(&base, &pair_from_vec(&g, &e)).unwrap())
        });
        m.add_identity();
        let dense = pair_from_vec(&g, &m.solve(&pair_to_vec(&rhs)).unwrap());
        let closed = kappa_inverse_closed_form(&base, &rhs).unwrap();
        assert!((&dense - &closed).max_abs() <= 1e-11);
    }

    #[test]
    fn phi4_round_trip_and_inverse_bounds() {
        let g = grid(1, 8);
        for seed in 0..40 {
            let p = conj_pair(&g, seed, 0.2, 1.0);
            let eta = phi4(Direction::Forward, &p).unwrap();
            assert!(eta.conjugate_defect() <= 1e-15);
            let back = phi4(Direction::Inverse, &eta).unwrap();
            assert!((&back - &p).max_abs() <= 1e-12);
        }
        let target = conj_pair(&g, 99, 0.25, 1.0);
        let w = phi4(Direction::Inverse, &target).unwrap();
        assert!(w.first.norm(1.0) <= 2.0 * target.first.norm(1.0));
        assert!(w.first.norm(3.0) <= 2.0 * target.first.norm(3.0));
        let far = conj_pair(&g, 100, 0.3, 1.0);
        assert!(matches!(phi4(Direction::Inverse, &far), Err(Error::Domain(_))));
    }

    #[test]
    fn full_chain_round_trip_keeps_structure() {
        let g = grid(2, 4);
        let opts = ComposeOptions::default();
        let w = conj_pair(&g, 8, 0.05, 1.5);
        let fwd = full_compose_traced(Direction::Forward, &w, &opts).unwrap();
        assert!(fwd.max_symmetry_defect() <= 1e-15);
        let uv = fwd.stages.last().unwrap().1.clone();
        let inv = full_compose_traced(Direction::Inverse, &uv, &opts).unwrap();
        assert!(inv.max_symmetry_defect() <= 1e-15);
        let back = &inv.stages.last().unwrap().1;
        assert!((back - &w).max_abs() <= 1e-11);
        let dump = inv.to_json();
        assert_eq!(dump["stages"].as_array().unwrap().len(), 5);

        let zero = FieldPair::<f64>::zeros(&g);
        assert_eq!(full_compose(Direction::Inverse, &zero, &opts).unwrap(), zero);
        let big = conj_pair(&g, 9, 0.5, 1.5);
        assert!(matches!(full_compose(Direction::Forward, &big, &opts), Err(Error::Domain(_))));
    }

    #[test]
    fn q_is_real_on_stage_outputs() {
        let g = grid(1, 6);
        let w = conj_pair(&g, 10, 0.1, 1.0);
        let fg = phi34(Direction::Forward, &w, &ComposeOptions::default()).unwrap();
        assert!(q_functional_complex(&fg.first, &fg.second).unwrap().im.abs() <= 1e-16);
    }
}
