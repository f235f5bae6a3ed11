//! Bilinear Fourier multipliers and the operators `M`, `K` built from them.
//!
//! Each operator `A[u, v]` acts on `h` as a diagonal multiplier whose value on
//! mode `k` depends only on `|k|²`, so everything is evaluated per resonance
//! class: first the class sums `Σ_{j∈c} u_j v_{-j}`, then a small
//! class-by-class contraction with the coefficient table.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{ComplexField, FieldPair};
use crate::grid::{CoefficientKind, SpectralGrid};
use crate::scalar::Scalar;
use crate::transforms::linalg::DenseMatrix;

/// The four bilinear operators. `A21` shares the `c₁₂` table and `C21` the
/// `a₁₂` table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearKind {
    A12,
    C12,
    A21,
    C21,
}

impl BilinearKind {
    fn table(self) -> CoefficientKind {
        match self {
            BilinearKind::A12 | BilinearKind::C21 => CoefficientKind::A12,
            BilinearKind::C12 | BilinearKind::A21 => CoefficientKind::C12,
        }
    }
}

/// How `(I + K)⁻¹` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InverseMethod {
    /// Truncated series `Σ (-K)ⁿ`.
    #[default]
    Neumann,
    /// LU on the assembled `2n × 2n` matrix.
    Dense,
}

const NEUMANN_MAX_TERMS: usize = 1000;
const NEUMANN_STALL_LIMIT: usize = 5;

fn class_sums<T: Scalar>(u: &ComplexField<T>, v: &ComplexField<T>) -> Vec<Complex<T>> {
    let grid = u.grid();
    let (uc, vc) = (u.coeffs(), v.coeffs());
    grid.classes()
        .iter()
        .map(|c| c.range.clone().fold(Complex::zero(), |acc, i| acc + uc[i] * vc[grid.neg(i)]))
        .collect()
}

fn contract<T: Scalar>(grid: &SpectralGrid, table: CoefficientKind, sums: &[Complex<T>]) -> Vec<Complex<T>> {
    let nc = grid.classes().len();
    (0..nc)
        .map(|ck| {
            sums.iter().enumerate().fold(Complex::zero(), |acc, (cj, s)| {
                let a = grid.class_coefficient(table, cj, ck);
                if a == 0.0 {
                    acc
                } else {
                    acc + s * T::lit(a)
                }
            })
        })
        .collect()
}

/// Per-class values of the multiplier `A[u, v]`, indexed by the class of `k`.
pub fn bilinear_multiplier<T: Scalar>(
    kind: BilinearKind,
    u: &ComplexField<T>,
    v: &ComplexField<T>,
) -> Result<Vec<Complex<T>>> {
    u.check_same_grid(v)?;
    Ok(contract(u.grid(), kind.table(), &class_sums(u, v)))
}

fn apply_multiplier<T: Scalar>(mult: &[Complex<T>], h: &ComplexField<T>) -> ComplexField<T> {
    let grid = h.grid().clone();
    h.map_modes(|i, c| c * mult[grid.class_of(i)])
}

/// `A[u, v] h` with `(A[u,v] h)_k = (Σ_j u_j v_{-j} a(j,k)) h_k`.
pub fn apply_bilinear<T: Scalar>(
    kind: BilinearKind,
    u: &ComplexField<T>,
    v: &ComplexField<T>,
    h: &ComplexField<T>,
) -> Result<ComplexField<T>> {
    u.check_same_grid(h)?;
    Ok(apply_multiplier(&bilinear_multiplier(kind, u, v)?, h))
}

/// Flattens a pair into `[first..., second...]`.
pub fn pair_to_vec<T: Scalar>(p: &FieldPair<T>) -> Vec<Complex<T>> {
    p.first.coeffs().iter().chain(p.second.coeffs()).copied().collect()
}

pub fn pair_from_vec<T: Scalar>(grid: &std::sync::Arc<SpectralGrid>, v: &[Complex<T>]) -> FieldPair<T> {
    let n = grid.len();
    FieldPair {
        first: ComplexField::from_coeffs(grid, v[..n].to_vec()).expect("length checked"),
        second: ComplexField::from_coeffs(grid, v[n..].to_vec()).expect("length checked"),
    }
}

/// `M(w, z)` and its derivative companion `K(w, z)` at a fixed base point.
///
/// `M(w,z)(α,β) = (M₁₂β, M₂₁α)` with `M₁₂ = A₁₂[w,w] + C₁₂[z,z]` and
/// `M₂₁ = C₁₂[w,w] + A₁₂[z,z]`. `K = M + E`, where `E` collects the terms in
/// which the direction enters the multiplier, so that `K(α,β)` is the
/// derivative of `(w,z) ↦ M(w,z)(w,z)` in the direction `(α,β)`.
#[derive(Debug, Clone)]
pub struct NormalFormOperator<T> {
    base: FieldPair<T>,
    m12: Vec<Complex<T>>,
    m21: Vec<Complex<T>>,
}

impl<T: Scalar> NormalFormOperator<T> {
    pub fn new(base: &FieldPair<T>) -> Result<Self> {
        let (w, z) = (&base.first, &base.second);
        w.check_same_grid(z)?;
        let grid = w.grid();
        let ww = class_sums(w, w);
        let zz = class_sums(z, z);
        let add = |a: Vec<Complex<T>>, b: Vec<Complex<T>>| a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let m12 = add(contract(grid, CoefficientKind::A12, &ww), contract(grid, CoefficientKind::C12, &zz));
        let m21 = add(contract(grid, CoefficientKind::C12, &ww), contract(grid, CoefficientKind::A12, &zz));
        Ok(Self { base: base.clone(), m12, m21 })
    }

    pub fn base(&self) -> &FieldPair<T> {
        &self.base
    }

    pub fn m12(&self, h: &ComplexField<T>) -> ComplexField<T> {
        apply_multiplier(&self.m12, h)
    }

    pub fn m21(&self, h: &ComplexField<T>) -> ComplexField<T> {
        apply_multiplier(&self.m21, h)
    }

    pub fn apply_m(&self, x: &FieldPair<T>) -> Result<FieldPair<T>> {
        self.base.check_same_grid(x)?;
        Ok(FieldPair { first: self.m12(&x.second), second: self.m21(&x.first) })
    }

    /// The part of `K` where the direction sits inside the multiplier.
    pub fn apply_e(&self, x: &FieldPair<T>) -> Result<FieldPair<T>> {
        self.base.check_same_grid(x)?;
        let (w, z) = (&self.base.first, &self.base.second);
        let grid = w.grid();
        let wa = class_sums(w, &x.first);
        let zb = class_sums(z, &x.second);
        let two = T::lit(2.0);
        let first_mult: Vec<Complex<T>> = contract(grid, CoefficientKind::A12, &wa)
            .iter()
            .zip(contract(grid, CoefficientKind::C12, &zb))
            .map(|(a, b)| (a + b) * two)
            .collect();
        let second_mult: Vec<Complex<T>> = contract(grid, CoefficientKind::C12, &wa)
            .iter()
            .zip(contract(grid, CoefficientKind::A12, &zb))
            .map(|(a, b)| (a + b) * two)
            .collect();
        Ok(FieldPair { first: apply_multiplier(&first_mult, z), second: apply_multiplier(&second_mult, w) })
    }

    pub fn apply_k(&self, x: &FieldPair<T>) -> Result<FieldPair<T>> {
        let m = self.apply_m(x)?;
        let e = self.apply_e(x)?;
        Ok(&m + &e)
    }

    /// `K` as a dense `2n × 2n` matrix in the flattened basis.
    pub fn k_matrix(&self) -> DenseMatrix<T> {
        let grid = self.base.grid().clone();
        let n2 = 2 * grid.len();
        let one = Complex::new(T::one(), T::zero());
        DenseMatrix::from_columns(n2, |col| {
            let mut e = vec![Complex::zero(); n2];
            e[col] = one;
            pair_to_vec(&self.apply_k(&pair_from_vec(&grid, &e)).expect("same grid"))
        })
    }

    /// `(I + K)⁻¹ rhs`.
    ///
    /// The Neumann path stops once a term drops below `1e-15` relative to the
    /// right-hand side, and reports divergence if the term norms fail to
    /// decrease for five consecutive terms.
    pub fn solve_i_plus_k(&self, rhs: &FieldPair<T>, method: InverseMethod) -> Result<FieldPair<T>> {
        self.base.check_same_grid(rhs)?;
        match method {
            InverseMethod::Neumann => self.solve_neumann(rhs),
            InverseMethod::Dense => {
                let mut a = self.k_matrix();
                a.add_identity();
                let x = a.solve(&pair_to_vec(rhs))?;
                Ok(pair_from_vec(self.base.grid(), &x))
            }
        }
    }

    fn solve_neumann(&self, rhs: &FieldPair<T>) -> Result<FieldPair<T>> {
        let rhs_norm = rhs.max_abs();
        if rhs_norm.is_zero() {
            return Ok(rhs.clone());
        }
        let tol = T::lit(1e-15).max(T::epsilon() * T::lit(4.0)) * rhs_norm;
        let mut sum = rhs.clone();
        let mut term = rhs.clone();
        let mut last = rhs_norm;
        let mut stalled = 0;
        for n in 1..=NEUMANN_MAX_TERMS {
            term = -&self.apply_k(&term)?;
            let size = term.max_abs();
            if !size.is_finite() {
                return Err(Error::Numerical("Neumann series produced a non-finite term".into()));
            }
            sum = &sum + &term;
            if size <= tol {
                return Ok(sum);
            }
            if size >= last {
                stalled += 1;
                if stalled >= NEUMANN_STALL_LIMIT {
                    return Err(Error::Convergence {
                        iterations: n,
                        reason: "Neumann series for (I+K)^-1 is not contracting".into(),
                    });
                }
            } else {
                stalled = 0;
            }
            last = size;
        }
        Err(Error::Convergence { iterations: NEUMANN_MAX_TERMS, reason: "Neumann series too slow".into() })
    }
}

/// `M(w,z)(α,β)`.
pub fn apply_m<T: Scalar>(base: &FieldPair<T>, x: &FieldPair<T>) -> Result<FieldPair<T>> {
    NormalFormOperator::new(base)?.apply_m(x)
}

/// `K(w,z)(α,β)`.
pub fn apply_k<T: Scalar>(base: &FieldPair<T>, x: &FieldPair<T>) -> Result<FieldPair<T>> {
    NormalFormOperator::new(base)?.apply_k(x)
}

/// `(I + K(w,z))⁻¹ rhs`.
pub fn solve_i_plus_k<T: Scalar>(
    base: &FieldPair<T>,
    rhs: &FieldPair<T>,
    method: InverseMethod,
) -> Result<FieldPair<T>> {
    NormalFormOperator::new(base)?.solve_i_plus_k(rhs, method)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::Symmetry;

    fn grid(d: usize, n: i64) -> Arc<SpectralGrid> {
        Arc::new(SpectralGrid::new(d, n).unwrap())
    }

    fn conj_pair(g: &Arc<SpectralGrid>, seed: u64, size: f64) -> FieldPair<f64> {
        FieldPair::conjugate_from(ComplexField::random(g, seed, size, g.m0(), Symmetry::Free).unwrap())
    }

    fn free_pair(g: &Arc<SpectralGrid>, seed: u64, size: f64) -> FieldPair<f64> {
        FieldPair::new(
            ComplexField::random(g, seed, size, 1.0, Symmetry::Free).unwrap(),
            ComplexField::random(g, seed + 77, size, 1.0, Symmetry::Free).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_inputs_give_zero() {
        let g = grid(2, 3);
        let zero = ComplexField::<f64>::zeros(&g);
        let h = ComplexField::random(&g, 1, 1.0, 1.0, Symmetry::Free).unwrap();
        for kind in [BilinearKind::A12, BilinearKind::C12, BilinearKind::A21, BilinearKind::C21] {
            assert!(apply_bilinear(kind, &zero, &h, &h).unwrap().is_zero());
        }
        let base = FieldPair::zeros(&g);
        let x = free_pair(&g, 2, 1.0);
        assert!(apply_m(&base, &x).unwrap().max_abs() == 0.0);
        assert_eq!(solve_i_plus_k(&base, &x, InverseMethod::Neumann).unwrap(), x);
    }

    #[test]
    fn single_mode_example() {
        // u = v = δ_{±1}; Σ_j u_j v_{-j} over |j|=1 is 2, times a₁₂(1,2) = -1/8
        let g = grid(1, 2);
        let mut u = ComplexField::<f64>::zeros(&g);
        u.set(&[1], Complex::new(1.0, 0.0), true).unwrap();
        let h = ComplexField::delta(&g, &[2], Complex::new(1.0, 0.0)).unwrap();
        let out = apply_bilinear(BilinearKind::A12, &u, &u, &h).unwrap();
        assert!((out.get(&[2]).unwrap() - Complex::new(-0.25, 0.0)).norm() < 1e-16);
        let h1 = ComplexField::delta(&g, &[1], Complex::new(1.0, 0.0)).unwrap();
        assert!(apply_bilinear(BilinearKind::A12, &u, &u, &h1).unwrap().is_zero());
    }

    #[test]
    fn class_sums_match_pointwise_double_loop() {
        let g = grid(2, 3);
        let u = ComplexField::random(&g, 4, 1.0, 1.0, Symmetry::Free).unwrap();
        let v = ComplexField::random(&g, 5, 1.0, 1.0, Symmetry::Free).unwrap();
        let h = ComplexField::random(&g, 6, 1.0, 1.0, Symmetry::Free).unwrap();
        for kind in [BilinearKind::A12, BilinearKind::C12] {
            let fast = apply_bilinear(kind, &u, &v, &h).unwrap();
            for k in 0..g.len() {
                let mut acc = Complex::<f64>::zero();
                for j in 0..g.len() {
                    let a = crate::grid::coefficient(kind.table(), g.mode(j), g.mode(k)).unwrap();
                    acc += u.coeffs()[j] * v.coeffs()[g.neg(j)] * a;
                }
                assert!((fast.coeffs()[k] - acc * h.coeffs()[k]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn k_is_complex_linear() {
        let g = grid(1, 6);
        let base = conj_pair(&g, 9, 0.2);
        let op = NormalFormOperator::new(&base).unwrap();
        let x = free_pair(&g, 10, 1.0);
        let y = free_pair(&g, 11, 1.0);
        let a = Complex::new(0.3, -1.2);
        let mut comb = x.clone();
        comb.axpy(a, &y);
        let lhs = op.apply_k(&comb).unwrap();
        let mut rhs = op.apply_k(&x).unwrap();
        rhs.axpy(a, &op.apply_k(&y).unwrap());
        assert!((&lhs - &rhs).max_abs() < 1e-14);
    }

    #[test]
    fn k_is_derivative_of_quadratic_map() {
        let g = grid(2, 3);
        let base = conj_pair(&g, 12, 0.3);
        let dir = free_pair(&g, 13, 0.3);
        let cubic = |t: f64| {
            let mut p = base.clone();
            p.axpy_real(t, &dir);
            apply_m(&p, &p).unwrap()
        };
        // cubic polynomial in t: Richardson on central differences is exact
        let central = |h: f64| (&cubic(h) - &cubic(-h)).scale_real(0.5 / h);
        let (h1, h2) = (1e-2, 5e-3);
        let rich = (&central(h2).scale_real(4.0) - &central(h1)).scale_real(1.0 / 3.0);
        let k = apply_k(&base, &dir).unwrap();
        assert!((&rich - &k).max_abs() < 1e-12, "{}", (&rich - &k).max_abs());
    }

    #[test]
    fn neumann_and_dense_agree() {
        let g = grid(2, 3);
        let base = conj_pair(&g, 14, 0.2);
        let rhs = free_pair(&g, 15, 1.0);
        let a = solve_i_plus_k(&base, &rhs, InverseMethod::Neumann).unwrap();
        let b = solve_i_plus_k(&base, &rhs, InverseMethod::Dense).unwrap();
        assert!((&a - &b).max_abs() < 1e-13);
        let back = &a + &apply_k(&base, &a).unwrap();
        assert!((&back - &rhs).max_abs() < 1e-13);
    }

    #[test]
    fn neumann_reports_divergence() {
        let g = grid(1, 6);
        let base = conj_pair(&g, 16, 40.0);
        let rhs = free_pair(&g, 17, 1.0);
        let err = solve_i_plus_k(&base, &rhs, InverseMethod::Neumann).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }), "{err}");
    }
}
