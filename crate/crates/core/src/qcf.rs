//! Quantum covariance function `Q(A, B, ψ) = ⟨ψ, ABψ⟩ - ⟨ψ, Aψ⟩⟨ψ, Bψ⟩`.
//!
//! For observables acting on different factors of a structure, `Q` vanishes
//! on every product state; a nonzero value therefore witnesses entanglement
//! in that structure. The converse fails: `Q` can vanish on entangled states,
//! which is why a small value is reported as inconclusive.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expectation, real_part_checked, tensor_vec, ComplexMatrix, ComplexVector};
use crate::state::{Observable, StateVector};
use crate::tps::TensorProductStructure;

/// Per-dimension witness threshold; the default threshold is `D · 1e-12`.
pub const WITNESS_TOL_PER_DIM: f64 = 1e-12;

/// Lower bound below which a negative variance is treated as rounding.
pub const VARIANCE_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EntangledWitnessed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcfReport {
    pub value: Complex64,
    pub witness_threshold: f64,
    pub verdict: Verdict,
}

impl QcfReport {
    pub fn new(value: Complex64, witness_threshold: f64) -> Self {
        let verdict = if value.norm() > witness_threshold {
            Verdict::EntangledWitnessed
        } else {
            Verdict::Inconclusive
        };
        Self {
            value,
            witness_threshold,
            verdict,
        }
    }
}

pub fn default_witness_threshold(global_dim: usize) -> f64 {
    global_dim as f64 * WITNESS_TOL_PER_DIM
}

fn check_dims(a: &Observable, b: &Observable, psi: &StateVector) -> Result<()> {
    for op in [a, b] {
        if op.dim() != psi.dim() {
            return Err(Error::Dimension {
                context: "observable vs state",
                expected: psi.dim(),
                found: op.dim(),
            });
        }
    }
    Ok(())
}

pub fn qcf(a: &Observable, b: &Observable, psi: &StateVector) -> Result<Complex64> {
    check_dims(a, b, psi)?;
    let a_psi = a.matrix().matvec(psi.vector())?;
    let b_psi = b.matrix().matvec(psi.vector())?;
    // A is Hermitian, so ⟨ψ, ABψ⟩ = ⟨Aψ, Bψ⟩
    let ab = a_psi.inner(&b_psi)?;
    let ea = real_part_checked(psi.vector().inner(&a_psi)?, "⟨A⟩")?;
    let eb = real_part_checked(psi.vector().inner(&b_psi)?, "⟨B⟩")?;
    Ok(ab - ea * eb)
}

/// QCF of `U(A1 ⊗ I)U†` and `U(I ⊗ B2)U†`, evaluated in product coordinates.
pub fn qcf_local(
    a1: &Observable,
    b2: &Observable,
    psi: &StateVector,
    tps: &TensorProductStructure,
) -> Result<QcfReport> {
    qcf_local_with_threshold(
        a1,
        b2,
        psi,
        tps,
        default_witness_threshold(tps.global_dim()),
    )
}

pub fn qcf_local_with_threshold(
    a1: &Observable,
    b2: &Observable,
    psi: &StateVector,
    tps: &TensorProductStructure,
    witness_threshold: f64,
) -> Result<QcfReport> {
    let (d1, d2) = tps.dims();
    tps.check_factor(a1, d1, "left-factor observable")?;
    tps.check_factor(b2, d2, "right-factor observable")?;
    let coords = tps.to_product_coords(psi.vector())?;
    let c = ComplexMatrix::from_vec_unchecked(d1, d2, coords.into_vec());
    // (A1 ⊗ I)φ ↔ A1·C and (I ⊗ B2)φ ↔ C·B2ᵀ
    let a_c = a1.matrix().matmul(&c)?;
    let c_b = c.matmul(&b2.matrix().transpose())?;
    let ab = inner_matrices(&a_c, &c_b);
    let ea = real_part_checked(inner_matrices(&c, &a_c), "⟨A⟩")?;
    let eb = real_part_checked(inner_matrices(&c, &c_b), "⟨B⟩")?;
    Ok(QcfReport::new(ab - ea * eb, witness_threshold))
}

fn inner_matrices(x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    x.as_slice()
        .iter()
        .zip(y.as_slice())
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

/// QCF of two observables diagonal in the global basis, given by their
/// diagonals. Avoids materializing `D × D` matrices on large grids.
pub fn qcf_diagonal(a: &[f64], b: &[f64], psi: &ComplexVector) -> Result<f64> {
    for d in [a, b] {
        if d.len() != psi.dim() {
            return Err(Error::Dimension {
                context: "diagonal observable vs state",
                expected: psi.dim(),
                found: d.len(),
            });
        }
    }
    let (mut ab, mut ea, mut eb) = (0.0, 0.0, 0.0);
    for ((&x, &y), z) in a.iter().zip(b).zip(psi.iter()) {
        let p = z.norm_sqr();
        ab += p * x * y;
        ea += p * x;
        eb += p * y;
    }
    Ok(ab - ea * eb)
}

/// `⟨A²⟩ - ⟨A⟩²`, clamped at zero.
pub fn variance(a: &Observable, psi: &StateVector) -> Result<f64> {
    let mean = expectation(a, psi)?;
    let a_psi = a.matrix().matvec(psi.vector())?;
    let second = a_psi.norm().powi(2);
    let var = second - mean * mean;
    if var < VARIANCE_FLOOR * second.max(1.0) {
        return Err(Error::Contract(format!("negative variance {var:e}")));
    }
    Ok(var.max(0.0))
}

/// Both sides of `Q(F, G, Ψ1⊗Ψ2) = Δ²(A1, Ψ1) - Δ²(B2, Ψ2)` with
/// `F = A1⊗I + I⊗B2` and `G = A1⊗I - I⊗B2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

impl VarianceIdentity {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

pub fn sum_diff_qcf_identity(
    a1: &Observable,
    b2: &Observable,
    psi1: &StateVector,
    psi2: &StateVector,
) -> Result<VarianceIdentity> {
    let (d1, d2) = (psi1.dim(), psi2.dim());
    let a_left = a1.on_left(d2);
    let b_right = b2.on_right(d1);
    let f = a_left.combine(1.0, &b_right, 1.0)?;
    let g = a_left.combine(1.0, &b_right, -1.0)?;
    let psi = StateVector::new(tensor_vec(psi1.vector(), psi2.vector())?)?;
    let lhs = qcf(&f, &g, &psi)?.re;
    let rhs = variance(a1, psi1)? - variance(b2, psi2)?;
    Ok(VarianceIdentity { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexVector;

    fn pauli_x() -> Observable {
        Observable::new(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap())
            .unwrap()
    }

    fn pauli_z() -> Observable {
        Observable::diagonal(&[1.0, -1.0])
    }

    fn bell() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(ComplexVector::from_real(&[s, 0.0, 0.0, s]).unwrap()).unwrap()
    }

    fn trivial() -> TensorProductStructure {
        TensorProductStructure::trivial(2, 2).unwrap()
    }

    #[test]
    fn identity_pair_gives_zero() {
        let id = Observable::identity(4);
        assert!(qcf(&id, &id, &bell()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn bell_zz_and_zx() {
        let zz = qcf(&pauli_z().on_left(2), &pauli_z().on_right(2), &bell()).unwrap();
        assert!((zz - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let zx = qcf(&pauli_z().on_left(2), &pauli_x().on_right(2), &bell()).unwrap();
        assert!(zx.norm() < 1e-15);
    }

    #[test]
    fn local_report_verdicts() {
        let r = qcf_local(&pauli_z(), &pauli_z(), &bell(), &trivial()).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::EntangledWitnessed);
        assert_eq!(r.witness_threshold, 4e-12);
        let r = qcf_local(&pauli_z(), &pauli_x(), &bell(), &trivial()).unwrap();
        assert!(r.value.norm() < 1e-15);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn local_rejects_wrong_factor_dimension() {
        let tps = TensorProductStructure::trivial(2, 3).unwrap();
        let psi = StateVector::basis(6, 0);
        assert!(matches!(
            qcf_local(&pauli_z(), &pauli_z(), &psi, &tps),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn variance_hand_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(ComplexVector::from_real(&[s, s]).unwrap()).unwrap();
        assert!((variance(&pauli_z(), &plus).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            variance(&pauli_z(), &StateVector::basis(2, 1)).unwrap(),
            0.0
        );
        // (cos θ, sin θ): 1 - cos²2θ, at θ = π/8 equals 1/2
        let t = std::f64::consts::PI / 8.0;
        let psi = StateVector::new(ComplexVector::from_real(&[t.cos(), t.sin()]).unwrap()).unwrap();
        assert!((variance(&pauli_z(), &psi).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_on_eigenvectors_is_zero() {
        let id = sum_diff_qcf_identity(
            &pauli_z(),
            &pauli_z(),
            &StateVector::basis(2, 0),
            &StateVector::basis(2, 1),
        )
        .unwrap();
        assert_eq!(id.lhs, 0.0);
        assert_eq!(id.rhs, 0.0);
    }

    #[test]
    fn identity_plus_and_up() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(ComplexVector::from_real(&[s, s]).unwrap()).unwrap();
        let id = sum_diff_qcf_identity(&pauli_z(), &pauli_z(), &plus, &StateVector::basis(2, 0))
            .unwrap();
        assert!((id.lhs - 1.0).abs() < 1e-15);
        assert!((id.rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_route_matches_dense() {
        let psi = StateVector::normalized(
            ComplexVector::new(vec![
                Complex64::new(0.1, 0.2),
                Complex64::new(-0.4, 0.0),
                Complex64::new(0.3, 0.3),
                Complex64::new(0.0, -0.5),
            ])
            .unwrap(),
        )
        .unwrap();
        let a = [1.0, -2.0, 0.5, 3.0];
        let b = [0.0, 1.0, -1.0, 2.0];
        let dense = qcf(&Observable::diagonal(&a), &Observable::diagonal(&b), &psi).unwrap();
        let diag = qcf_diagonal(&a, &b, psi.vector()).unwrap();
        assert!((dense.re - diag).abs() < 1e-15);
        assert!(dense.im.abs() < 1e-15);
    }
}
