use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::MAX_GLOBAL_DIM;

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    /// Wraps the entries, rejecting NaN or infinite components.
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Computational basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.entries.iter()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                context: "inner product",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(inner_slices(&self.entries, &other.entries))
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`; the left factor is the slow index.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        tensor_vec_with_limit(self, other, MAX_GLOBAL_DIM)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Index of the first component whose modulus attains the maximum
    /// (ties broken towards the lower index, with a relative slack of 1e-9).
    pub fn leading_index(&self) -> Option<usize> {
        leading_index(&self.entries)
    }

    /// Multiplies by a unit phase so that the leading component is real positive.
    pub fn fix_phase(&mut self) -> Complex64 {
        fix_phase(&mut self.entries)
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

pub(crate) fn inner_slices(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter()
        .zip(v)
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

pub(crate) fn leading_index(entries: &[Complex64]) -> Option<usize> {
    let max = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    entries.iter().position(|z| z.norm() >= max * (1.0 - 1e-9))
}

/// Rotates `entries` by a unit phase making the leading component real
/// positive. Returns the phase that was applied.
pub(crate) fn fix_phase(entries: &mut [Complex64]) -> Complex64 {
    let Some(k) = leading_index(entries) else {
        return Complex64::new(1.0, 0.0);
    };
    let lead = entries[k];
    let phase = lead.conj() / lead.norm();
    for z in entries.iter_mut() {
        *z *= phase;
    }
    // exact zero imaginary part on the pivot keeps the convention bit-stable
    entries[k] = Complex64::new(entries[k].re, 0.0);
    phase
}

/// `u ⊗ v` with an explicit bound on the resulting dimension.
pub fn tensor_vec_with_limit(
    u: &ComplexVector,
    v: &ComplexVector,
    max_dim: usize,
) -> Result<ComplexVector> {
    if u.dim() == 0 || v.dim() == 0 {
        return Err(Error::Shape(
            "tensor factors must have dimension >= 1".into(),
        ));
    }
    let dim = u
        .dim()
        .checked_mul(v.dim())
        .filter(|&d| d <= max_dim)
        .ok_or(Error::Sizing {
            requested: u.dim().saturating_mul(v.dim()),
            max: max_dim,
        })?;
    let mut out = Vec::with_capacity(dim);
    for a in u.iter() {
        for b in v.iter() {
            out.push(a * b);
        }
    }
    Ok(ComplexVector::from_vec_unchecked(out))
}

/// `u ⊗ v` bounded by [`MAX_GLOBAL_DIM`].
pub fn tensor_vec(u: &ComplexVector, v: &ComplexVector) -> Result<ComplexVector> {
    tensor_vec_with_limit(u, v, MAX_GLOBAL_DIM)
}
