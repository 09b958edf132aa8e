//! Dense complex linear algebra.

mod decomp;
mod matrix;
mod vector;

pub use decomp::{eigh, eigh_with_tol, svd, Eigh, SvdResult, HERMITIAN_TOL, MAX_ITERATIONS};
pub use matrix::{tensor_op, ComplexMatrix};
pub use vector::{tensor_vec, tensor_vec_with_limit, ComplexVector};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{Observable, StateVector};

/// Largest global Hilbert-space dimension accepted by default.
pub const MAX_GLOBAL_DIM: usize = 1 << 20;

/// Bound on the discarded imaginary part of an expectation value.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

pub fn inner(u: &ComplexVector, v: &ComplexVector) -> Result<Complex64> {
    u.inner(v)
}

pub fn norm(v: &ComplexVector) -> f64 {
    v.norm()
}

pub fn normalize(v: &ComplexVector) -> Result<ComplexVector> {
    v.normalize()
}

/// `⟨ψ, Aψ⟩` as a real number.
pub fn expectation(a: &Observable, psi: &StateVector) -> Result<f64> {
    let value = a.matrix().sandwich(psi.vector(), psi.vector())?;
    real_part_checked(value, "expectation value")
}

pub(crate) fn real_part_checked(value: Complex64, what: &str) -> Result<f64> {
    if value.im.abs() > EXPECTATION_IMAG_TOL {
        return Err(Error::Contract(format!(
            "{what} has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Candidates whose
/// residual norm falls below `drop_tol` are skipped; at most `limit` vectors
/// are returned.
pub fn orthonormalize(
    candidates: impl IntoIterator<Item = ComplexVector>,
    drop_tol: f64,
    limit: usize,
) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = Vec::new();
    for mut v in candidates {
        if basis.len() == limit {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.inner(&v).expect("equal dimensions");
                for (x, y) in v.as_mut_slice().iter_mut().zip(b.iter()) {
                    *x -= overlap * y;
                }
            }
        }
        let n = v.norm();
        if n > drop_tol {
            basis.push(v.scale(Complex64::new(1.0 / n, 0.0)));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormalize_completes_a_basis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let first = ComplexVector::from_real(&[s, 0.0, s]).unwrap();
        let candidates = std::iter::once(first).chain((0..3).map(|i| ComplexVector::basis(3, i)));
        let basis = orthonormalize(candidates, 1e-8, 3);
        assert_eq!(basis.len(), 3);
        let m = ComplexMatrix::from_columns(&basis).unwrap();
        assert!(m.unitarity_deviation() < 1e-14);
    }

    #[test]
    fn expectation_of_identity_is_one() {
        let psi = StateVector::normalized(
            ComplexVector::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.9)]).unwrap(),
        )
        .unwrap();
        let id = Observable::new(ComplexMatrix::identity(2)).unwrap();
        assert!((expectation(&id, &psi).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_sigma_z_on_plus_is_zero() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(ComplexVector::from_real(&[s, s]).unwrap()).unwrap();
        let z = Observable::new(ComplexMatrix::from_diagonal(&[1.0, -1.0])).unwrap();
        assert!(expectation(&z, &plus).unwrap().abs() < 1e-16);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let psi = StateVector::new(ComplexVector::basis(3, 0)).unwrap();
        let z = Observable::new(ComplexMatrix::identity(2)).unwrap();
        assert!(matches!(
            expectation(&z, &psi),
            Err(Error::Dimension { .. })
        ));
    }
}
