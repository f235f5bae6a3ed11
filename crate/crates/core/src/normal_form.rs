//! Vector fields in complex coordinates: the system for `(f,g)`, the
//! diagonalized system for `(η,ψ)` with its splitting by homogeneity, and the
//! normal-form field `X⁺` for `(w,z)`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{ComplexField, FieldPair, PairSymmetry};
use crate::scalar::Scalar;
use crate::transforms::bilinear::{InverseMethod, NormalFormOperator};
use crate::transforms::scalar_maps::{p_functional, q_functional_complex};
use crate::vector_field::VectorField;

fn i_unit<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `𝓓₁(η,ψ) = (−iΛη, iΛψ)`.
pub fn d1<T: Scalar>(pair: &FieldPair<T>) -> FieldPair<T> {
    FieldPair { first: pair.first.lambda().scale(-i_unit::<T>()), second: pair.second.lambda().scale(i_unit()) }
}

/// `⟨Λψ,Λψ⟩ − ⟨Λη,Λη⟩`, purely imaginary on conjugate pairs.
pub fn off_diagonal_scalar<T: Scalar>(pair: &FieldPair<T>) -> Complex<T> {
    let le = pair.first.lambda();
    let lp = pair.second.lambda();
    lp.pairing_unchecked(&lp) - le.pairing_unchecked(&le)
}

/// Right-hand side of the complex-coordinate system for `(f,g)`:
/// `∂f = −iΛf − (i/4)⟨Λ(f+g), f+g⟩Λ(f+g)`, `∂g = iΛg + (i/4)⟨Λ(f+g), f+g⟩Λ(f+g)`.
pub fn field_syst_uv<T: Scalar>(pair: &FieldPair<T>) -> Result<FieldPair<T>> {
    pair.first.check_same_grid(&pair.second)?;
    let ls = (&pair.first + &pair.second).lambda();
    let q = q_functional_complex(&pair.first, &pair.second)?;
    let coupling = ls.scale(i_unit::<T>() * q);
    let lin = d1(pair);
    Ok(FieldPair { first: &lin.first - &coupling, second: &lin.second + &coupling })
}

/// The diagonalized system
/// `∂η = −i√(1+2P)Λη + i/(4(1+2P))·(⟨Λψ,Λψ⟩ − ⟨Λη,Λη⟩)ψ` and its mirror for `ψ`.
pub fn field_syst6dic<T: Scalar>(pair: &FieldPair<T>) -> Result<FieldPair<T>> {
    pair.first.check_same_grid(&pair.second)?;
    let p = p_functional(&pair.first, &pair.second)?;
    let one_2p = T::one() + T::lit(2.0) * p;
    let speed = one_2p.sqrt();
    let coupling = i_unit::<T>() * off_diagonal_scalar(pair) / (T::lit(4.0) * one_2p);
    let mut first = pair.first.lambda().scale(Complex::new(T::zero(), -speed));
    first.axpy(coupling, &pair.second);
    let mut second = pair.second.lambda().scale(Complex::new(T::zero(), speed));
    second.axpy(coupling, &pair.first);
    Ok(FieldPair { first, second })
}

/// The diagonalized field split into `𝓓₁ + 𝓓≥₃ + 𝓑₃ + 𝓡≥₅`.
#[derive(Debug, Clone)]
pub struct FieldDecomposition<T> {
    pub d1: FieldPair<T>,
    pub d_ge3: FieldPair<T>,
    pub b3: FieldPair<T>,
    pub r_ge5: FieldPair<T>,
}

impl<T: Scalar> FieldDecomposition<T> {
    pub fn sum(&self) -> FieldPair<T> {
        &(&self.d1 + &self.d_ge3) + &(&self.b3 + &self.r_ge5)
    }
}

/// `𝓑₃(η,ψ) = (i/4)(⟨Λψ,Λψ⟩ − ⟨Λη,Λη⟩)(ψ,η)`.
pub fn b3<T: Scalar>(pair: &FieldPair<T>) -> FieldPair<T> {
    let c = i_unit::<T>() * off_diagonal_scalar(pair) * T::lit(0.25);
    pair.swap().scale(c)
}

fn r_ge5_with<T: Scalar>(pair: &FieldPair<T>, p: T, scalar: Complex<T>) -> FieldPair<T> {
    let c = Complex::new(T::zero(), -p / (T::lit(2.0) * (T::one() + T::lit(2.0) * p))) * scalar;
    pair.swap().scale(c)
}

/// `𝓡≥₅(η,ψ) = −iP/(2(1+2P))·(⟨Λψ,Λψ⟩ − ⟨Λη,Λη⟩)(ψ,η)`.
pub fn r_ge5<T: Scalar>(pair: &FieldPair<T>) -> Result<FieldPair<T>> {
    let p = p_functional(&pair.first, &pair.second)?;
    Ok(r_ge5_with(pair, p, off_diagonal_scalar(pair)))
}

pub fn decompose<T: Scalar>(pair: &FieldPair<T>) -> Result<FieldDecomposition<T>> {
    pair.first.check_same_grid(&pair.second)?;
    let p = p_functional(&pair.first, &pair.second)?;
    let scalar = off_diagonal_scalar(pair);
    let lin = d1(pair);
    let d_ge3 = lin.scale_real((T::one() + T::lit(2.0) * p).sqrt() - T::one());
    let b3 = pair.swap().scale(i_unit::<T>() * scalar * T::lit(0.25));
    let r_ge5 = r_ge5_with(pair, p, scalar);
    Ok(FieldDecomposition { d1: lin, d_ge3, b3, r_ge5 })
}

/// Resonant cubic field left by the normal form:
/// first component `−(i/4)(Σ_{|j|=|k|} w_j w_{−j}|j|²) z_k`,
/// second component `+(i/4)(Σ_{|j|=|k|} z_j z_{−j}|j|²) w_k`.
pub fn x3_plus<T: Scalar>(pair: &FieldPair<T>) -> Result<FieldPair<T>> {
    pair.first.check_same_grid(&pair.second)?;
    let grid = pair.grid().clone();
    let class_sum = |f: &ComplexField<T>| -> Vec<Complex<T>> {
        grid.classes()
            .iter()
            .map(|c| {
                let s = c.range.clone().fold(Complex::zero(), |acc, i| acc + f.coeffs()[i] * f.coeffs()[grid.neg(i)]);
                s * T::from_int(c.norm2)
            })
            .collect()
    };
    let ww = class_sum(&pair.first);
    let zz = class_sum(&pair.second);
    let q = Complex::new(T::zero(), T::lit(0.25));
    let first = pair.second.map_modes(|i, c| -q * ww[grid.class_of(i)] * c);
    let second = pair.first.map_modes(|i, c| q * zz[grid.class_of(i)] * c);
    Ok(FieldPair { first, second })
}

/// How `X⁺` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XPlusMethod {
    /// `(I + K)⁻¹ X(Φ⁽⁴⁾(w,z))`.
    Direct,
    /// `(1+𝓟)𝓓₁ + X₃⁺ + X⁺≥₅` with the quintic part in its bounded form.
    #[default]
    Structured,
}

#[derive(Debug, Clone)]
pub struct XPlusOutput<T> {
    pub total: FieldPair<T>,
    /// `(1+𝓟)𝓓₁(w,z)`.
    pub linear_part: FieldPair<T>,
    /// `X₃⁺(w,z)`.
    pub cubic_part: FieldPair<T>,
    /// `X⁺≥₅(w,z)`; for the direct method it is the remainder
    /// `total − linear_part − cubic_part`.
    pub quintic_part: FieldPair<T>,
    /// `𝓟(w,z) = √(1+2P(Φ⁽⁴⁾(w,z))) − 1`.
    pub script_p: T,
}

/// Radius in `‖w‖_{m₀}` below which `X⁺` is evaluated.
pub const X_PLUS_RADIUS: f64 = 0.5;

/// The normal-form vector field at `(w,z)`.
pub fn x_plus<T: Scalar>(pair: &FieldPair<T>, method: XPlusMethod, inverse: InverseMethod) -> Result<XPlusOutput<T>> {
    pair.first.check_same_grid(&pair.second)?;
    let size = pair.norm(pair.grid().m0());
    if !(size.as_f64() < X_PLUS_RADIUS) {
        return Err(Error::Domain(format!("X+ needs ‖w‖_m0 < {X_PLUS_RADIUS}, got {size:e}")));
    }
    let op = NormalFormOperator::new(pair)?;
    let eta = pair + &op.apply_m(pair)?;
    let p_eta = p_functional(&eta.first, &eta.second)?;
    let script_p = (T::one() + T::lit(2.0) * p_eta).sqrt() - T::one();
    let linear_part = d1(pair).scale_real(T::one() + script_p);
    let cubic_part = x3_plus(pair)?;
    match method {
        XPlusMethod::Direct => {
            let total = op.solve_i_plus_k(&field_syst6dic(&eta)?, inverse)?;
            let quintic_part = &(&total - &linear_part) - &cubic_part;
            Ok(XPlusOutput { total, linear_part, cubic_part, quintic_part, script_p })
        }
        XPlusMethod::Structured => {
            let b3_wz = b3(pair);
            let y = op.solve_i_plus_k(&(&b3_wz - &cubic_part), inverse)?;
            // 𝓑₃ and 𝓡≥₅ at Φ⁽⁴⁾(w,z) are both multiples of (ψ,η), so one solve serves both
            let scalar = off_diagonal_scalar(&eta);
            let b3_coef = i_unit::<T>() * scalar * T::lit(0.25);
            let r5_coef = Complex::new(T::zero(), -p_eta / (T::lit(2.0) * (T::one() + T::lit(2.0) * p_eta))) * scalar;
            let swapped = eta.swap();
            let s = op.solve_i_plus_k(&swapped, inverse)?;
            let mut r5_plus = s.scale(r5_coef);
            r5_plus.axpy(b3_coef, &swapped);
            r5_plus = &r5_plus - &b3_wz;
            r5_plus.axpy(-b3_coef, &op.apply_k(&s)?);
            let mut quintic_part = &op.apply_k(&y)? + &r5_plus;
            quintic_part.axpy_real(-script_p, &y);
            let total = &(&linear_part + &cubic_part) + &quintic_part;
            Ok(XPlusOutput { total, linear_part, cubic_part, quintic_part, script_p })
        }
    }
}

/// Residual of the homological identity `(M + K)𝓓₁(w,z) − (𝓑₃ − X₃⁺)(w,z)`.
pub fn homological_residual<T: Scalar>(pair: &FieldPair<T>) -> Result<FieldPair<T>> {
    let op = NormalFormOperator::new(pair)?;
    let dw = d1(pair);
    let lhs = &op.apply_m(&dw)? + &op.apply_k(&dw)?;
    Ok(&lhs - &(&b3(pair) - &x3_plus(pair)?))
}

/// `M(w,z)𝓓₁x + 𝓓₁M(w,z)x`.
pub fn anticommutator<T: Scalar>(pair: &FieldPair<T>, x: &FieldPair<T>) -> Result<FieldPair<T>> {
    let op = NormalFormOperator::new(pair)?;
    Ok(&op.apply_m(&d1(x))? + &d1(&op.apply_m(x)?))
}

/// `⟨Λˢ𝓕₁, Λˢz⟩ + ⟨Λˢw, Λˢ𝓕₂⟩`, the derivative of `⟨Λˢw, Λˢz⟩` along `𝓕`.
pub fn energy_form<T: Scalar>(pair: &FieldPair<T>, field: &FieldPair<T>, s: f64) -> Result<Complex<T>> {
    pair.check_same_grid(field)?;
    let z = pair.second.lambda_power(s);
    let w = pair.first.lambda_power(s);
    Ok(field.first.lambda_power(s).pairing_unchecked(&z) + w.pairing_unchecked(&field.second.lambda_power(s)))
}

/// `∂_t ‖w‖_s² = 2 Re⟨Λˢ𝓕₁, Λˢw̄⟩` for a field evaluated at `(w, w̄)`.
pub fn energy_derivative<T: Scalar>(pair: &FieldPair<T>, field: &FieldPair<T>, s: f64) -> Result<T> {
    pair.check_same_grid(field)?;
    let grid = pair.grid();
    let two = T::lit(2.0);
    Ok((0..grid.len())
        .map(|i| {
            let weight = T::from_int(grid.norm2(i)).powf(T::lit(s));
            (field.first.coeffs()[i] * pair.first.coeffs()[i].conj()).re * weight
        })
        .sum::<T>()
        * two)
}

/// The complex-coordinate system for `(f,g)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SystUvField;

impl<T: Scalar> VectorField<T> for SystUvField {
    fn eval(&self, state: &FieldPair<T>) -> Result<FieldPair<T>> {
        field_syst_uv(state)
    }
    fn symmetry(&self) -> PairSymmetry {
        PairSymmetry::Conjugate
    }
    fn name(&self) -> &'static str {
        "syst_uv"
    }
}

/// The diagonalized system for `(η,ψ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Syst6DicField;

impl<T: Scalar> VectorField<T> for Syst6DicField {
    fn eval(&self, state: &FieldPair<T>) -> Result<FieldPair<T>> {
        field_syst6dic(state)
    }
    fn symmetry(&self) -> PairSymmetry {
        PairSymmetry::Conjugate
    }
    fn name(&self) -> &'static str {
        "syst6dic"
    }
}

/// `X⁺` for `(w,z)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct XPlusField {
    pub method: XPlusMethod,
    pub inverse: InverseMethod,
}

impl<T: Scalar> VectorField<T> for XPlusField {
    fn eval(&self, state: &FieldPair<T>) -> Result<FieldPair<T>> {
        Ok(x_plus(state, self.method, self.inverse)?.total)
    }
    fn symmetry(&self) -> PairSymmetry {
        PairSymmetry::Conjugate
    }
    fn name(&self) -> &'static str {
        "xplus"
    }
}

/// The linear field `𝓓₁`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearField;

impl<T: Scalar> VectorField<T> for LinearField {
    fn eval(&self, state: &FieldPair<T>) -> Result<FieldPair<T>> {
        Ok(d1(state))
    }
    fn symmetry(&self) -> PairSymmetry {
        PairSymmetry::Conjugate
    }
    fn name(&self) -> &'static str {
        "linear"
    }
}
