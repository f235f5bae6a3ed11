//! Scalar functions behind the order-one diagonalization.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::scalar::Scalar;

const PHI_MAX_ITER: usize = 100;

/// `ρ(x) = -x / (1 + x + √(1+2x))`, mapping `[0, ∞)` into `(-1, 0]`.
pub fn rho<T: Scalar>(x: T) -> Result<T> {
    if !(x >= T::zero()) {
        return Err(Error::Domain(format!("rho needs x >= 0, got {x}")));
    }
    Ok(-x / (T::one() + x + (T::one() + x + x).sqrt()))
}

/// Inverse of `x ↦ x√(1+2x)` on `[0, ∞)`.
///
/// Newton iteration on `r(x) = 2x³ + x² - y²` from `x₀ = y`. The residual is
/// convex and increasing on `x ≥ 0` and `r(y) = 2y³ ≥ 0`, so the iterates
/// decrease monotonically onto the root.
pub fn phi_inverse_fn<T: Scalar>(y: T) -> Result<T> {
    if !(y >= T::zero()) {
        return Err(Error::Domain(format!("phi needs y >= 0, got {y}")));
    }
    if y.is_zero() {
        return Ok(T::zero());
    }
    let two = T::lit(2.0);
    let tol = T::lit(1e-15).max(T::epsilon() * T::lit(4.0));
    let y2 = y * y;
    let mut x = y;
    for _ in 0..PHI_MAX_ITER {
        let r = x * x * (two * x + T::one()) - y2;
        let dr = x * (T::lit(6.0) * x + two);
        if dr.is_zero() {
            break;
        }
        let dx = r / dr;
        let next = x - dx;
        if !(next > T::zero()) {
            // overshoot below zero cannot happen from the right of the root; guard anyway
            x = x * T::lit(0.5);
            continue;
        }
        let stalled = next >= x;
        x = next;
        if dx.abs() <= tol * x || stalled {
            return Ok(x);
        }
    }
    Err(Error::Convergence { iterations: PHI_MAX_ITER, reason: format!("phi({y}) did not settle") })
}

/// `Q(f, g) = ¼⟨Λ(f+g), f+g⟩` for arbitrary complex pairs.
pub fn q_functional_complex<T: Scalar>(f: &ComplexField<T>, g: &ComplexField<T>) -> Result<Complex<T>> {
    f.check_same_grid(g)?;
    let s = f + g;
    let grid = s.grid();
    let mut acc = Complex::zero();
    for (i, c) in s.coeffs().iter().enumerate() {
        acc = acc + c * s.coeffs()[grid.neg(i)] * T::from_int(grid.norm2(i)).sqrt();
    }
    Ok(acc * T::lit(0.25))
}

/// `Q(f, g)` on conjugate pairs, where it is real and non-negative.
pub fn q_functional<T: Scalar>(f: &ComplexField<T>, g: &ComplexField<T>) -> Result<T> {
    Ok(q_functional_complex(f, g)?.re)
}

/// `P(η, ψ) = φ(Q(η, ψ))`.
///
/// Rounding can leave `Q` a hair below zero on exactly-zero data; such values
/// are clamped, larger negative values are a domain error.
pub fn p_functional<T: Scalar>(eta: &ComplexField<T>, psi: &ComplexField<T>) -> Result<T> {
    let q = q_functional(eta, psi)?;
    p_from_q(q, eta.norm_sq(0.5) + psi.norm_sq(0.5))
}

pub(crate) fn clamp_q<T: Scalar>(q: T, scale: T) -> Result<T> {
    if q >= T::zero() {
        Ok(q)
    } else if q >= -T::lit(64.0) * T::epsilon() * (scale + T::epsilon()) {
        Ok(T::zero())
    } else {
        Err(Error::Domain(format!("Q = {q:e} is negative; not a conjugate pair")))
    }
}

pub(crate) fn p_from_q<T: Scalar>(q: T, scale: T) -> Result<T> {
    phi_inverse_fn(clamp_q(q, scale)?)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::{FieldPair, Symmetry};
    use crate::grid::SpectralGrid;

    #[test]
    fn rho_examples() {
        assert_eq!(rho(0.0).unwrap(), 0.0);
        assert!((rho(4.0f64).unwrap() + 0.5).abs() < 1e-16);
        for x in [0.1f64, 1.0, 10.0] {
            let r = rho(x).unwrap();
            assert!(((1.0 - r) / (1.0 + r) - (1.0 + 2.0 * x).sqrt()).abs() <= 1e-14);
            assert!(r > -1.0 && r <= 0.0);
        }
        assert!(rho(-1e-3).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_inverse_fn(0.0).unwrap(), 0.0);
        assert!((phi_inverse_fn(3f64.sqrt()).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi_inverse_fn(12.0f64).unwrap() - 4.0).abs() < 1e-14);
        assert!(phi_inverse_fn(-1.0).is_err());
    }

    #[test]
    fn phi_inverts_over_many_scales() {
        for k in -30..=30 {
            let y = 10f64.powf(k as f64 * 0.25);
            let x = phi_inverse_fn(y).unwrap();
            assert!(x >= 0.0);
            assert!((x * (1.0 + 2.0 * x).sqrt() - y).abs() <= 1e-14 * y.max(1.0), "y = {y}");
        }
        let x = phi_inverse_fn(2.0f32).unwrap();
        assert!((x * (1.0 + 2.0 * x).sqrt() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn q_examples() {
        let g = Arc::new(SpectralGrid::new(1, 3).unwrap());
        let zero = ComplexField::<f64>::zeros(&g);
        assert_eq!(q_functional(&zero, &zero).unwrap(), 0.0);
        let mut f = ComplexField::<f64>::zeros(&g);
        f.set(&[1], Complex::new(0.5, 0.0), true).unwrap();
        assert!((q_functional(&f, &f).unwrap() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn q_nonnegative_and_p_below_q_on_conjugate_pairs() {
        let g = Arc::new(SpectralGrid::new(2, 4).unwrap());
        for seed in 0..1000u64 {
            let w = ComplexField::<f64>::random(&g, seed, 0.05 + (seed % 17) as f64 * 0.3, 0.5, Symmetry::Free)
                .unwrap();
            let p = FieldPair::conjugate_from(w);
            let q = q_functional_complex(&p.first, &p.second).unwrap();
            assert!(q.re >= 0.0);
            assert!(q.im.abs() <= 1e-14 * (1.0 + q.re));
            let pv = p_functional(&p.first, &p.second).unwrap();
            assert!(pv <= q.re + 1e-15);
            assert!((pv * (1.0 + 2.0 * pv).sqrt() - q.re).abs() <= 1e-13 * q.re.max(1.0));
        }
    }

    #[test]
    fn p_of_pair_with_q_sqrt3_is_one() {
        let g = Arc::new(SpectralGrid::new(1, 2).unwrap());
        // Q = ¼·Σ|j|·|2a|² over ±1 = 2a²  ⇒  a = (√3/2)^{1/2}
        let a = (3f64.sqrt() / 2.0).sqrt();
        let mut f = ComplexField::<f64>::zeros(&g);
        f.set(&[1], Complex::new(a, 0.0), true).unwrap();
        assert!((q_functional(&f, &f).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((p_functional(&f, &f).unwrap() - 1.0).abs() < 1e-14);
    }
}
