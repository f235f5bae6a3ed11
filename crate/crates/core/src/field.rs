//! Complex Fourier fields on a [`SpectralGrid`] and the pair types built on them.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::scalar::Scalar;

/// Symmetry requested from [`ComplexField::random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// `f_{-j} = conj(f_j)`: the field is real-valued in physical space.
    Hermitian,
    Free,
}

/// Structural symmetry class of a two-component state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSymmetry {
    /// Both components real-valued, as `(u, v)`, `(q, p)`.
    Hermitian,
    /// Second component is the complex conjugate function of the first, as `(w, w̄)`.
    Conjugate,
    None,
}

/// Fourier coefficients indexed by the modes of a grid.
#[derive(Debug, Clone)]
pub struct ComplexField<T> {
    grid: Arc<SpectralGrid>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> PartialEq for ComplexField<T> {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.coeffs == other.coeffs
    }
}

fn same_grid(a: &Arc<SpectralGrid>, b: &Arc<SpectralGrid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl<T: Scalar> ComplexField<T> {
    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex::zero(); grid.len()] }
    }

    pub fn from_coeffs(grid: &Arc<SpectralGrid>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid: grid.clone(), coeffs })
    }

    pub fn from_fn(grid: &Arc<SpectralGrid>, mut f: impl FnMut(usize, &[i64]) -> Complex<T>) -> Self {
        let coeffs = grid.modes().enumerate().map(|(i, j)| f(i, j)).collect();
        Self { grid: grid.clone(), coeffs }
    }

    /// Field with a single non-zero coefficient at `j`.
    pub fn delta(grid: &Arc<SpectralGrid>, j: &[i64], value: Complex<T>) -> Result<Self> {
        let idx = grid
            .index_of(j)
            .ok_or_else(|| Error::Parameter(format!("mode {j:?} not in grid")))?;
        let mut f = Self::zeros(grid);
        f.coeffs[idx] = value;
        Ok(f)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn get(&self, j: &[i64]) -> Option<Complex<T>> {
        self.grid.index_of(j).map(|i| self.coeffs[i])
    }

    /// Sets `f_j` and, if `hermitian`, `f_{-j} = conj(f_j)` as well.
    pub fn set(&mut self, j: &[i64], value: Complex<T>, hermitian: bool) -> Result<()> {
        let i = self
            .grid
            .index_of(j)
            .ok_or_else(|| Error::Parameter(format!("mode {j:?} not in grid")))?;
        self.coeffs[i] = value;
        if hermitian {
            let n = self.grid.neg(i);
            self.coeffs[n] = value.conj();
        }
        Ok(())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `‖f‖_s = (Σ |f_j|² |j|^{2s})^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> Result<T> {
        if !(s >= 0.0) {
            return Err(Error::Parameter(format!("Sobolev index must be >= 0, got {s}")));
        }
        Ok(self.norm(s))
    }

    /// Unchecked Sobolev norm; callers guarantee `s >= 0`.
    pub(crate) fn norm(&self, s: f64) -> T {
        self.norm_sq(s).sqrt()
    }

    pub(crate) fn norm_sq(&self, s: f64) -> T {
        let half = T::lit(s);
        self.coeffs
            .iter()
            .zip(self.grid.norms2())
            .map(|(c, &n2)| c.norm_sqr() * weight(n2, half))
            .sum()
    }

    /// Fourier multiplier `Λ^σ`: `f_j ↦ |j|^σ f_j`.
    pub fn lambda_power(&self, sigma: f64) -> Self {
        let half = T::lit(sigma * 0.5);
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.norms2())
            .map(|(c, &n2)| c * weight(n2, half))
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// `Λ = |D_x|`.
    pub fn lambda(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.norms2())
            .map(|(c, &n2)| c * T::from_int(n2).sqrt())
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// Bilinear pairing `⟨f, g⟩ = Σ_j f_j g_{-j}` (integral of the product).
    pub fn pairing(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_grid(other)?;
        Ok(self.pairing_unchecked(other))
    }

    pub(crate) fn pairing_unchecked(&self, other: &Self) -> Complex<T> {
        let mut acc = Complex::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc = acc + c * other.coeffs[self.grid.neg(i)];
        }
        acc
    }

    /// Coefficients of the pointwise complex conjugate: `j ↦ conj(f_{-j})`.
    pub fn conj_mirror(&self) -> Self {
        let coeffs = (0..self.coeffs.len())
            .map(|i| self.coeffs[self.grid.neg(i)].conj())
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// `f_j ↦ f_{-j}`, the coefficients of `x ↦ f(-x)`.
    pub fn reflect(&self) -> Self {
        let coeffs = (0..self.coeffs.len()).map(|i| self.coeffs[self.grid.neg(i)]).collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// `max_j |f_{-j} - conj(f_j)|`.
    pub fn hermitian_defect(&self) -> T {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.neg(i)] - self.coeffs[i].conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// Projects onto real-valued fields: `f_j ← (f_j + conj(f_{-j}))/2`.
    pub fn symmetrize_hermitian(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.coeffs.len() {
            let n = self.grid.neg(i);
            if n < i {
                continue;
            }
            let avg = (self.coeffs[i] + self.coeffs[n].conj()) * half;
            self.coeffs[i] = avg;
            self.coeffs[n] = avg.conj();
        }
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        Self { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn scale_real(&self, a: T) -> Self {
        Self { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    /// `self += a · x`.
    pub fn axpy(&mut self, a: Complex<T>, x: &Self) {
        for (y, xv) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y = *y + xv * a;
        }
    }

    pub fn axpy_real(&mut self, a: T, x: &Self) {
        for (y, xv) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y = *y + xv * a;
        }
    }

    /// Entrywise product with a per-mode real multiplier.
    pub fn map_modes(&self, mut f: impl FnMut(usize, Complex<T>) -> Complex<T>) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| f(i, *c)).collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    pub fn conj_coeffs(&self) -> Self {
        self.map_modes(|_, c| c.conj())
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Deterministic pseudo-random field rescaled to `‖f‖_s = target_norm`.
    ///
    /// Raw amplitudes decay like `|j|^{-(s+1)}` so that the norm is spread over
    /// the spectrum instead of concentrating at the cutoff.
    pub fn random(
        grid: &Arc<SpectralGrid>,
        seed: u64,
        target_norm: f64,
        s: f64,
        symmetry: Symmetry,
    ) -> Result<Self> {
        if !(target_norm >= 0.0) {
            return Err(Error::Parameter(format!("target norm must be >= 0, got {target_norm}")));
        }
        if !(s >= 0.0) {
            return Err(Error::Parameter(format!("Sobolev index must be >= 0, got {s}")));
        }
        let mut f = Self::zeros(grid);
        if target_norm == 0.0 {
            return Ok(f);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..grid.len() {
            let n = grid.neg(i);
            if symmetry == Symmetry::Hermitian && n < i {
                continue;
            }
            let decay = (grid.norm2(i) as f64).powf(-0.5 * (s + 1.0));
            let re = rng.gen_range(-1.0..1.0) * decay;
            let im = rng.gen_range(-1.0..1.0) * decay;
            let c = Complex::new(T::lit(re), T::lit(im));
            f.coeffs[i] = c;
            if symmetry == Symmetry::Hermitian {
                f.coeffs[n] = c.conj();
            }
        }
        let norm = f.norm(s);
        if norm.is_zero() {
            return Err(Error::Numerical("random draw produced the zero field".into()));
        }
        Ok(f.scale_real(T::lit(target_norm) / norm))
    }

    /// `{"d":…, "N":…, "coeffs":[[j₁,…,j_d, re, im], …]}` in grid order.
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .grid
            .modes()
            .zip(&self.coeffs)
            .map(|(j, c)| {
                let mut row: Vec<Value> = j.iter().map(|x| json!(x)).collect();
                row.push(json!(c.re.as_f64()));
                row.push(json!(c.im.as_f64()));
                Value::Array(row)
            })
            .collect();
        json!({ "d": self.grid.dim(), "N": self.grid.cutoff(), "coeffs": coeffs })
    }

    /// Parses the format written by [`to_json`](Self::to_json). When `grid` is
    /// given, the document must describe the same lattice.
    pub fn from_json(value: &Value, grid: Option<&Arc<SpectralGrid>>) -> Result<Self> {
        let d = value["d"]
            .as_u64()
            .ok_or_else(|| Error::Format("missing integer field \"d\"".into()))? as usize;
        let cutoff = value["N"]
            .as_i64()
            .ok_or_else(|| Error::Format("missing integer field \"N\"".into()))?;
        let grid = match grid {
            Some(g) if g.dim() == d && g.cutoff() == cutoff => g.clone(),
            Some(_) => return Err(Error::GridMismatch),
            None => Arc::new(SpectralGrid::new(d, cutoff)?),
        };
        let rows = value["coeffs"]
            .as_array()
            .ok_or_else(|| Error::Format("missing array field \"coeffs\"".into()))?;
        let mut f = Self::zeros(&grid);
        let mut filled = vec![false; grid.len()];
        for row in rows {
            let row = row
                .as_array()
                .filter(|r| r.len() == d + 2)
                .ok_or_else(|| Error::Format(format!("coefficient rows need {} entries", d + 2)))?;
            let j: Vec<i64> = row[..d]
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::Format("mode entries must be integers".into())))
                .collect::<Result<_>>()?;
            let re = row[d].as_f64().ok_or_else(|| Error::Format("non-numeric real part".into()))?;
            let im = row[d + 1].as_f64().ok_or_else(|| Error::Format("non-numeric imaginary part".into()))?;
            let i = grid
                .index_of(&j)
                .ok_or_else(|| Error::Format(format!("mode {j:?} outside the grid")))?;
            if filled[i] {
                return Err(Error::Format(format!("mode {j:?} listed twice")));
            }
            filled[i] = true;
            f.coeffs[i] = Complex::new(T::lit(re), T::lit(im));
        }
        if filled.iter().any(|x| !x) {
            return Err(Error::Format("coefficients must cover every grid mode".into()));
        }
        Ok(f)
    }
}

/// `(n2)^{half}` = `|j|^{2·half}`, with the common exponents special-cased.
fn weight<T: Scalar>(n2: i64, half: T) -> T {
    let n = T::from_int(n2);
    if half.is_zero() {
        T::one()
    } else if half == T::one() {
        n
    } else if half == T::lit(0.5) {
        n.sqrt()
    } else {
        n.powf(half)
    }
}

impl<T: Scalar> Add for &ComplexField<T> {
    type Output = ComplexField<T>;
    fn add(self, rhs: Self) -> ComplexField<T> {
        debug_assert!(same_grid(&self.grid, &rhs.grid));
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        ComplexField { grid: self.grid.clone(), coeffs }
    }
}

impl<T: Scalar> Sub for &ComplexField<T> {
    type Output = ComplexField<T>;
    fn sub(self, rhs: Self) -> ComplexField<T> {
        debug_assert!(same_grid(&self.grid, &rhs.grid));
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        ComplexField { grid: self.grid.clone(), coeffs }
    }
}

impl<T: Scalar> Neg for &ComplexField<T> {
    type Output = ComplexField<T>;
    fn neg(self) -> ComplexField<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Scalar> Mul<Complex<T>> for &ComplexField<T> {
    type Output = ComplexField<T>;
    fn mul(self, rhs: Complex<T>) -> ComplexField<T> {
        self.scale(rhs)
    }
}

/// Two fields carried together: `(u, v)`, `(f, g)`, `(w, z)` or a vector field value.
#[derive(Debug, Clone)]
pub struct FieldPair<T> {
    pub first: ComplexField<T>,
    pub second: ComplexField<T>,
}

impl<T: Scalar> PartialEq for FieldPair<T> {
    fn eq(&self, other: &Self) -> bool {
        self.first == other.first && self.second == other.second
    }
}

impl<T: Scalar> FieldPair<T> {
    pub fn new(first: ComplexField<T>, second: ComplexField<T>) -> Result<Self> {
        first.check_same_grid(&second)?;
        Ok(Self { first, second })
    }

    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        Self { first: ComplexField::zeros(grid), second: ComplexField::zeros(grid) }
    }

    /// `(w, w̄)`.
    pub fn conjugate_from(w: ComplexField<T>) -> Self {
        let z = w.conj_mirror();
        Self { first: w, second: z }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.first.grid()
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        self.first.check_same_grid(&other.first)
    }

    pub fn swap(&self) -> Self {
        Self { first: self.second.clone(), second: self.first.clone() }
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        Self { first: self.first.scale(a), second: self.second.scale(a) }
    }

    pub fn scale_real(&self, a: T) -> Self {
        Self { first: self.first.scale_real(a), second: self.second.scale_real(a) }
    }

    pub fn axpy(&mut self, a: Complex<T>, x: &Self) {
        self.first.axpy(a, &x.first);
        self.second.axpy(a, &x.second);
    }

    pub fn axpy_real(&mut self, a: T, x: &Self) {
        self.first.axpy_real(a, &x.first);
        self.second.axpy_real(a, &x.second);
    }

    /// `max(‖first‖_s, ‖second‖_s)`; equals `‖w‖_s` on conjugate pairs.
    pub fn norm(&self, s: f64) -> T {
        self.first.norm(s).max(self.second.norm(s))
    }

    pub fn max_abs(&self) -> T {
        self.first.max_abs().max(self.second.max_abs())
    }

    /// `max_j |z_j - conj(w_{-j})|`.
    pub fn conjugate_defect(&self) -> T {
        let g = self.first.grid();
        (0..g.len())
            .map(|i| (self.second.coeffs()[i] - self.first.coeffs()[g.neg(i)].conj()).norm())
            .fold(T::zero(), T::max)
    }

    pub fn hermitian_defect(&self) -> T {
        self.first.hermitian_defect().max(self.second.hermitian_defect())
    }

    pub fn symmetry_defect(&self, class: PairSymmetry) -> T {
        match class {
            PairSymmetry::Hermitian => self.hermitian_defect(),
            PairSymmetry::Conjugate => self.conjugate_defect(),
            PairSymmetry::None => T::zero(),
        }
    }

    /// Projects onto the symmetry class by averaging with the mirrored conjugate.
    pub fn symmetrize(&mut self, class: PairSymmetry) {
        match class {
            PairSymmetry::Hermitian => {
                self.first.symmetrize_hermitian();
                self.second.symmetrize_hermitian();
            }
            PairSymmetry::Conjugate => {
                let half = T::lit(0.5);
                let w = &(&self.first + &self.second.conj_mirror()) * Complex::new(half, T::zero());
                self.second = w.conj_mirror();
                self.first = w;
            }
            PairSymmetry::None => {}
        }
    }

    pub fn is_finite(&self) -> bool {
        self.first.is_finite() && self.second.is_finite()
    }
}

impl<T: Scalar> Add for &FieldPair<T> {
    type Output = FieldPair<T>;
    fn add(self, rhs: Self) -> FieldPair<T> {
        FieldPair { first: &self.first + &rhs.first, second: &self.second + &rhs.second }
    }
}

impl<T: Scalar> Sub for &FieldPair<T> {
    type Output = FieldPair<T>;
    fn sub(self, rhs: Self) -> FieldPair<T> {
        FieldPair { first: &self.first - &rhs.first, second: &self.second - &rhs.second }
    }
}

impl<T: Scalar> Neg for &FieldPair<T> {
    type Output = FieldPair<T>;
    fn neg(self) -> FieldPair<T> {
        FieldPair { first: -&self.first, second: -&self.second }
    }
}

/// A pair `(w, z)` on the real subspace `z = w̄`; only `w` is stored.
#[derive(Debug, Clone)]
pub struct ConjugatePair<T> {
    pub w: ComplexField<T>,
}

impl<T: Scalar> PartialEq for ConjugatePair<T> {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w
    }
}

impl<T: Scalar> ConjugatePair<T> {
    pub fn new(w: ComplexField<T>) -> Self {
        Self { w }
    }

    /// `z_j = conj(w_{-j})`.
    pub fn z(&self) -> ComplexField<T> {
        self.w.conj_mirror()
    }

    pub fn to_pair(&self) -> FieldPair<T> {
        FieldPair::conjugate_from(self.w.clone())
    }

    /// Accepts `pair` if its second component is the conjugate of the first within `tol`.
    pub fn from_pair(pair: &FieldPair<T>, tol: T) -> Result<Self> {
        let defect = pair.conjugate_defect();
        if defect > tol {
            return Err(Error::Domain(format!("pair is not conjugate (defect {defect:e})")));
        }
        Ok(Self { w: pair.first.clone() })
    }
}
