//! Zero-mean Fourier lattice truncated to a ball, with its resonance classes.

use std::collections::HashMap;
use std::ops::Range;

use crate::error::{Error, Result};

/// Modes sharing one integer squared norm `|j|²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonanceClass {
    pub norm2: i64,
    /// Contiguous slice of the grid's mode list.
    pub range: Range<usize>,
}

/// Which coefficient family of the normal-form bilinear operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientKind {
    A12,
    C12,
}

/// The truncated index set `{ j ∈ ℤ^d : 1 ≤ |j|² ≤ N² }`.
///
/// Modes are ordered by `(|j|², j₁, …, j_d)`, so every resonance class is a
/// contiguous range. The grid also owns the static coefficient tables of the
/// bilinear operators `A₁₂`, `C₁₂`, indexed by pairs of classes.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    d: usize,
    cutoff: i64,
    coords: Vec<i64>,
    norm2: Vec<i64>,
    neg: Vec<usize>,
    class_of: Vec<usize>,
    classes: Vec<ResonanceClass>,
    lookup: HashMap<Vec<i64>, usize>,
    a12: Vec<f64>,
    c12: Vec<f64>,
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.cutoff == other.cutoff && self.a12 == other.a12
    }
}

impl SpectralGrid {
    pub fn new(d: usize, cutoff: i64) -> Result<Self> {
        Self::build(d, cutoff, 1.0)
    }

    /// Grid whose `a₁₂` table has the wrong sign. Only used as a negative
    /// control for the identity suites.
    #[doc(hidden)]
    pub fn with_corrupted_a12(d: usize, cutoff: i64) -> Result<Self> {
        Self::build(d, cutoff, -1.0)
    }

    fn build(d: usize, cutoff: i64, a12_sign: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Parameter(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if cutoff < 1 {
            return Err(Error::Parameter(format!("cutoff must be >= 1, got {cutoff}")));
        }
        let max2 = cutoff * cutoff;
        let mut modes: Vec<(i64, Vec<i64>)> = Vec::new();
        let mut j = vec![-cutoff; d];
        loop {
            let n2: i64 = j.iter().map(|x| x * x).sum();
            if (1..=max2).contains(&n2) {
                modes.push((n2, j.clone()));
            }
            // odometer increment over [-N, N]^d
            let mut axis = 0;
            loop {
                if axis == d {
                    break;
                }
                j[axis] += 1;
                if j[axis] <= cutoff {
                    break;
                }
                j[axis] = -cutoff;
                axis += 1;
            }
            if axis == d {
                break;
            }
        }
        modes.sort();

        let count = modes.len();
        let mut coords = Vec::with_capacity(count * d);
        let mut norm2 = Vec::with_capacity(count);
        let mut lookup = HashMap::with_capacity(count);
        for (i, (n2, j)) in modes.iter().enumerate() {
            coords.extend_from_slice(j);
            norm2.push(*n2);
            lookup.insert(j.clone(), i);
        }
        let neg = modes
            .iter()
            .map(|(_, j)| {
                let mj: Vec<i64> = j.iter().map(|x| -x).collect();
                lookup[&mj]
            })
            .collect();

        let mut classes: Vec<ResonanceClass> = Vec::new();
        let mut class_of = Vec::with_capacity(count);
        for (i, &n2) in norm2.iter().enumerate() {
            match classes.last_mut() {
                Some(c) if c.norm2 == n2 => c.range.end = i + 1,
                _ => classes.push(ResonanceClass { norm2: n2, range: i..i + 1 }),
            }
            class_of.push(classes.len() - 1);
        }

        let nc = classes.len();
        let mut a12 = vec![0.0; nc * nc];
        let mut c12 = vec![0.0; nc * nc];
        for (cj, j) in classes.iter().enumerate() {
            for (ck, k) in classes.iter().enumerate() {
                a12[cj * nc + ck] = a12_sign * coefficient_from_norms(CoefficientKind::A12, j.norm2, k.norm2);
                c12[cj * nc + ck] = coefficient_from_norms(CoefficientKind::C12, j.norm2, k.norm2);
            }
        }

        Ok(Self { d, cutoff, coords, norm2, neg, class_of, classes, lookup, a12, c12 })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.norm2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norm2.is_empty()
    }

    /// Regularity threshold: 1 in dimension one, 3/2 otherwise.
    pub fn m0(&self) -> f64 {
        if self.d == 1 {
            1.0
        } else {
            1.5
        }
    }

    pub fn mode(&self, i: usize) -> &[i64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn modes(&self) -> impl Iterator<Item = &[i64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn norm2(&self, i: usize) -> i64 {
        self.norm2[i]
    }

    pub fn norms2(&self) -> &[i64] {
        &self.norm2
    }

    /// Index of `-j` for the mode at index `i`.
    pub fn neg(&self, i: usize) -> usize {
        self.neg[i]
    }

    pub fn index_of(&self, j: &[i64]) -> Option<usize> {
        self.lookup.get(j).copied()
    }

    pub fn classes(&self) -> &[ResonanceClass] {
        &self.classes
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    /// Coefficient table entry for classes `(class_j, class_k)`.
    pub fn class_coefficient(&self, kind: CoefficientKind, class_j: usize, class_k: usize) -> f64 {
        let nc = self.classes.len();
        match kind {
            CoefficientKind::A12 => self.a12[class_j * nc + class_k],
            CoefficientKind::C12 => self.c12[class_j * nc + class_k],
        }
    }

    /// Checks zero-mean, negation closure and the class partition.
    pub fn validate(&self) -> Result<()> {
        for (i, j) in self.modes().enumerate() {
            let n2: i64 = j.iter().map(|x| x * x).sum();
            if n2 == 0 {
                return Err(Error::Numerical("zero mode in index set".into()));
            }
            if n2 != self.norm2[i] || n2 > self.cutoff * self.cutoff {
                return Err(Error::Numerical(format!("bad squared norm at mode {i}")));
            }
            let neg = self.mode(self.neg[i]);
            if neg.iter().zip(j).any(|(a, b)| *a != -*b) {
                return Err(Error::Numerical(format!("negation table wrong at mode {i}")));
            }
        }
        let mut seen = vec![false; self.len()];
        for c in &self.classes {
            for i in c.range.clone() {
                if seen[i] || self.norm2[i] != c.norm2 {
                    return Err(Error::Numerical(format!("class partition broken at mode {i}")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Numerical("mode missing from resonance classes".into()));
        }
        Ok(())
    }
}

/// `a₁₂(j,k)` / `c₁₂(j,k)` from integer squared norms.
///
/// The divisor `|j| − |k|` is evaluated as `(|j|² − |k|²)/(|j| + |k|)`, which keeps
/// the exact integer difference in the numerator. Resonance (`|j| = |k|`) is
/// decided on the integers.
pub fn coefficient_from_norms(kind: CoefficientKind, j2: i64, k2: i64) -> f64 {
    let nj = (j2 as f64).sqrt();
    let nk = (k2 as f64).sqrt();
    match kind {
        CoefficientKind::A12 => {
            if j2 == k2 {
                0.0
            } else {
                j2 as f64 * (nj + nk) / (8.0 * (j2 - k2) as f64)
            }
        }
        CoefficientKind::C12 => j2 as f64 / (8.0 * (nj + nk)),
    }
}

/// Validated coefficient lookup on lattice points.
pub fn coefficient(kind: CoefficientKind, j: &[i64], k: &[i64]) -> Result<f64> {
    let j2: i64 = j.iter().map(|x| x * x).sum();
    let k2: i64 = k.iter().map(|x| x * x).sum();
    if j2 == 0 || k2 == 0 {
        return Err(Error::Parameter("coefficients are undefined at the zero mode".into()));
    }
    Ok(coefficient_from_norms(kind, j2, k2))
}
