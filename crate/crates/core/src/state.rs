use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, HERMITIAN_TOL};

/// Tolerance on `|‖ψ‖ - 1|` for a state vector.
pub const NORM_TOL: f64 = 1e-10;

/// A unit-norm vector in the global Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(ComplexVector);

impl StateVector {
    /// Accepts `v` if its norm is within [`NORM_TOL`] of one.
    pub fn new(v: ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm,
                tol: NORM_TOL,
            });
        }
        Ok(Self(v))
    }

    pub fn normalized(v: ComplexVector) -> Result<Self> {
        Ok(Self(v.normalize()?))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self(ComplexVector::basis(dim, index))
    }

    pub fn product(left: &StateVector, right: &StateVector) -> Result<Self> {
        Ok(Self(left.0.tensor(&right.0)?))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.0
    }

    pub fn into_vector(self) -> ComplexVector {
        self.0
    }
}

/// A Hermitian operator on some Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    /// Accepts `m` if `max |M - M†| ≤ 1e-9`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "observable must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let deviation = m.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        Ok(Self { matrix: m })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::from_diagonal(values),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Observable) -> Observable {
        Observable {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Real linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Observable, b: f64) -> Result<Observable> {
        let m = self
            .matrix
            .scale(a.into())
            .add(&other.matrix.scale(b.into()))?;
        Ok(Observable { matrix: m })
    }

    /// `A ⊗ I` on a space whose right factor has dimension `right_dim`.
    pub fn on_left(&self, right_dim: usize) -> Observable {
        self.tensor(&Observable::identity(right_dim))
    }

    /// `I ⊗ B` on a space whose left factor has dimension `left_dim`.
    pub fn on_right(&self, left_dim: usize) -> Observable {
        Observable::identity(left_dim).tensor(self)
    }
}
