//! The Kirchhoff system `∂_t u = v`, `∂_t v = -(1 + ⟨Λu, Λu⟩) Λ² u` and its
//! conserved quantities.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{ComplexField, FieldPair, PairSymmetry};
use crate::scalar::Scalar;
use crate::vector_field::VectorField;

#[derive(Debug, Clone)]
pub struct KirchhoffRhsOutput<T> {
    pub du: ComplexField<T>,
    pub dv: ComplexField<T>,
    /// `a(t) = 1 + Σ |k|² |u_k|²`, the squared wave speed.
    pub a_coeff: T,
}

/// Right-hand side on the state `(u, v)`. Every mode obeys
/// `u_j'' + |j|² a(t) u_j = 0`, so the map is diagonal once `a` is known.
pub fn kirchhoff_rhs<T: Scalar>(state: &FieldPair<T>) -> KirchhoffRhsOutput<T> {
    let u = &state.first;
    let a_coeff = T::one() + u.norm_sq(1.0);
    let grid = u.grid().clone();
    let dv = u.map_modes(|i, c| c * (-a_coeff * T::from_int(grid.norm2(i))));
    KirchhoffRhsOutput { du: state.second.clone(), dv, a_coeff }
}

/// `H` in spectral form, before discarding the imaginary residue.
pub fn hamiltonian_complex<T: Scalar>(state: &FieldPair<T>) -> Complex<T> {
    let (u, v) = (&state.first, &state.second);
    let lu = u.lambda();
    let grad2 = lu.pairing_unchecked(&lu);
    let half = T::lit(0.5);
    v.pairing_unchecked(v) * half + grad2 * half + grad2 * grad2 * T::lit(0.25)
}

/// `H(u,v) = ½⟨v,v⟩ + ½⟨Λu,Λu⟩ + ¼⟨Λu,Λu⟩²`.
pub fn hamiltonian<T: Scalar>(state: &FieldPair<T>) -> T {
    hamiltonian_complex(state).re
}

fn mode_index<T: Scalar>(state: &FieldPair<T>, j: &[i64]) -> Result<usize> {
    let g = state.grid();
    if j.len() != g.dim() {
        return Err(Error::Parameter(format!("mode {j:?} has wrong dimension")));
    }
    if j.iter().all(|x| *x == 0) {
        return Err(Error::Parameter("momentum of the zero mode is undefined".into()));
    }
    g.index_of(j).ok_or_else(|| Error::Parameter(format!("mode {j:?} not in grid")))
}

/// Prime integral `M_j = -j · Im(u_j conj(v_j))` (real form).
pub fn momentum_j<T: Scalar>(state: &FieldPair<T>, j: &[i64]) -> Result<Vec<T>> {
    let i = mode_index(state, j)?;
    let im = (state.first.coeffs()[i] * state.second.coeffs()[i].conj()).im;
    Ok(j.iter().map(|&x| -T::from_int(x) * im).collect())
}

/// `M_j = ½ i j (u_j v_{-j} - u_{-j} v_j)` evaluated literally.
pub fn momentum_j_complex<T: Scalar>(state: &FieldPair<T>, j: &[i64]) -> Result<Vec<Complex<T>>> {
    let i = mode_index(state, j)?;
    let n = state.grid().neg(i);
    let (u, v) = (state.first.coeffs(), state.second.coeffs());
    let bracket = u[i] * v[n] - u[n] * v[i];
    let half_i = Complex::new(T::zero(), T::lit(0.5));
    Ok(j.iter().map(|&x| half_i * T::from_int(x) * bracket).collect())
}

/// Total momentum `∫ (∂_t u) ∇u dx = ⟨v, ∇u⟩`, computed from the gradient field.
pub fn total_momentum<T: Scalar>(state: &FieldPair<T>) -> Vec<T> {
    let (u, v) = (&state.first, &state.second);
    let g = u.grid().clone();
    (0..g.dim())
        .map(|axis| {
            let du = u.map_modes(|i, c| c * Complex::new(T::zero(), T::from_int(g.mode(i)[axis])));
            v.pairing_unchecked(&du).re
        })
        .collect()
}

/// `S(u, v) = (u, -v)`.
pub fn reversal<T: Scalar>(state: &FieldPair<T>) -> FieldPair<T> {
    FieldPair { first: state.first.clone(), second: -&state.second }
}

/// Size of `X∘S + S∘X` at `state`, component-wise max of L² norms.
pub fn reversibility_defect<T: Scalar>(state: &FieldPair<T>) -> T {
    let xs = KirchhoffField.eval_pair(&reversal(state));
    let sx = reversal(&KirchhoffField.eval_pair(state));
    (&xs + &sx).norm(0.0)
}

/// The Kirchhoff vector field on `(u, v)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct KirchhoffField;

impl KirchhoffField {
    fn eval_pair<T: Scalar>(&self, state: &FieldPair<T>) -> FieldPair<T> {
        let out = kirchhoff_rhs(state);
        FieldPair { first: out.du, second: out.dv }
    }
}

impl<T: Scalar> VectorField<T> for KirchhoffField {
    fn eval(&self, state: &FieldPair<T>) -> Result<FieldPair<T>> {
        Ok(self.eval_pair(state))
    }

    fn symmetry(&self) -> PairSymmetry {
        PairSymmetry::Hermitian
    }

    fn name(&self) -> &'static str {
        "original"
    }
}
