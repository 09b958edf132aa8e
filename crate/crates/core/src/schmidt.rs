//! Schmidt decomposition of bipartite pure states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{svd, ComplexVector};
use crate::state::StateVector;
use crate::tps::{coefficient_matrix, TensorProductStructure};

/// Default relative cutoff `α_k > tol·α_1` for the numerical Schmidt rank.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

/// `ψ = Σ_k α_k φ̃_k ⊗ ϕ̃_k` in the product coordinates of a structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    /// All `min(d1, d2)` coefficients, descending.
    pub coefficients: Vec<f64>,
    /// Orthonormal vectors of the first factor, one per coefficient.
    pub left_basis: Vec<ComplexVector>,
    /// Orthonormal vectors of the second factor, one per coefficient.
    pub right_basis: Vec<ComplexVector>,
    pub rank: usize,
    pub truncation_tol: f64,
}

impl SchmidtDecomposition {
    /// `Σ_{k < rank} α_k φ̃_k ⊗ ϕ̃_k` in product coordinates.
    pub fn reconstruct(&self) -> ComplexVector {
        let d1 = self.left_basis.first().map_or(0, ComplexVector::dim);
        let d2 = self.right_basis.first().map_or(0, ComplexVector::dim);
        let mut out = ComplexVector::zeros(d1 * d2);
        for k in 0..self.rank {
            let term = self.left_basis[k]
                .tensor(&self.right_basis[k])
                .expect("factor dimensions already validated");
            for (o, t) in out.as_mut_slice().iter_mut().zip(term.iter()) {
                *o += t * self.coefficients[k];
            }
        }
        out
    }

    pub fn is_factorizable(&self) -> bool {
        self.rank == 1
    }

    /// `α_2 / α_1`, or zero when there is a single coefficient.
    pub fn second_ratio(&self) -> f64 {
        match self.coefficients.as_slice() {
            [a, b, ..] if *a > 0.0 => b / a,
            _ => 0.0,
        }
    }
}

pub fn schmidt(
    psi: &StateVector,
    tps: &TensorProductStructure,
    truncation_tol: f64,
) -> Result<SchmidtDecomposition> {
    let c = coefficient_matrix(psi, tps)?;
    let decomposed = svd(&c)?;
    let coefficients = decomposed.singular_values;
    let leading = coefficients.first().copied().unwrap_or(0.0);
    let rank = coefficients
        .iter()
        .filter(|&&a| a > truncation_tol * leading)
        .count();
    // C = Σ σ u v†, so ψ = Σ σ u ⊗ conj(v)
    let left_basis = decomposed.left_vectors.columns();
    let right_basis = decomposed
        .right_vectors
        .columns()
        .into_iter()
        .map(|v| v.conj())
        .collect();
    Ok(SchmidtDecomposition {
        coefficients,
        left_basis,
        right_basis,
        rank,
        truncation_tol,
    })
}

/// Factorizability verdict together with the Schmidt rank it rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factorizability {
    pub factorizable: bool,
    pub rank: usize,
}

pub fn is_factorizable(
    psi: &StateVector,
    tps: &TensorProductStructure,
    tol: f64,
) -> Result<Factorizability> {
    let sd = schmidt(psi, tps, tol)?;
    Ok(Factorizability {
        factorizable: sd.is_factorizable(),
        rank: sd.rank,
    })
}

/// Splits a rank-one decomposition into `(Ψ1, Ψ2)` with `Ψ1 ⊗ Ψ2 = ψ`.
/// The leading component of `Ψ1` is made real positive and the compensating
/// phase is carried by `Ψ2`.
pub fn factors(sd: &SchmidtDecomposition) -> Result<(ComplexVector, ComplexVector)> {
    if sd.rank != 1 {
        return Err(Error::NotFactorizable { rank: sd.rank });
    }
    let mut left = sd.left_basis[0].clone();
    let phase = left.fix_phase();
    let right = sd.right_basis[0].scale(phase.conj() * Complex64::new(sd.coefficients[0], 0.0));
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tensor_vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn trivial() -> TensorProductStructure {
        TensorProductStructure::trivial(2, 2).unwrap()
    }

    #[test]
    fn product_state_has_rank_one() {
        let u = ComplexVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let v = ComplexVector::new(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let psi = StateVector::new(tensor_vec(&u, &v).unwrap()).unwrap();
        let sd = schmidt(&psi, &trivial(), DEFAULT_TRUNCATION_TOL).unwrap();
        assert_eq!(sd.rank, 1);
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-14);
        assert!(
            is_factorizable(&psi, &trivial(), 1e-10)
                .unwrap()
                .factorizable
        );
    }

    #[test]
    fn bell_state_has_equal_coefficients() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(ComplexVector::from_real(&[s, 0.0, 0.0, s]).unwrap()).unwrap();
        let sd = schmidt(&psi, &trivial(), DEFAULT_TRUNCATION_TOL).unwrap();
        assert_eq!(sd.rank, 2);
        for a in &sd.coefficients {
            assert!((a - s).abs() < 1e-14);
        }
        assert!(sd.reconstruct().max_abs_diff(psi.vector()) < 1e-14);
        let verdict = is_factorizable(&psi, &trivial(), 1e-10).unwrap();
        assert_eq!(
            verdict,
            Factorizability {
                factorizable: false,
                rank: 2
            }
        );
        assert_eq!(
            factors(&sd).unwrap_err(),
            Error::NotFactorizable { rank: 2 }
        );
    }

    #[test]
    fn factors_recover_product_up_to_phase() {
        let theta = 0.7f64;
        let u = ComplexVector::new(vec![c(0.0, 0.6), c(0.8, 0.0)]).unwrap();
        let u_phased = u.scale(c(theta.cos(), theta.sin()));
        let v = ComplexVector::new(vec![c(0.28, 0.0), c(0.0, 0.96)]).unwrap();
        let psi = StateVector::new(tensor_vec(&u_phased, &v).unwrap()).unwrap();
        let sd = schmidt(&psi, &TensorProductStructure::trivial(2, 2).unwrap(), 1e-10).unwrap();
        let (f1, f2) = factors(&sd).unwrap();
        assert!(tensor_vec(&f1, &f2).unwrap().max_abs_diff(psi.vector()) < 1e-12);
        let lead = f1.leading_index().unwrap();
        assert_eq!(f1[lead].im, 0.0);
        assert!(f1[lead].re > 0.0);
        // Ψ1 is u up to a phase
        let overlap = f1.inner(&u).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectangular_factor_dimensions() {
        let tps = TensorProductStructure::trivial(2, 3).unwrap();
        let psi = StateVector::basis(6, 4);
        let sd = schmidt(&psi, &tps, 1e-10).unwrap();
        assert_eq!(sd.coefficients.len(), 2);
        assert_eq!(sd.left_basis[0].dim(), 2);
        assert_eq!(sd.right_basis[0].dim(), 3);
        assert_eq!(sd.rank, 1);
    }
}
