//! Singular value and Hermitian eigen decompositions.
//!
//! Both routines are backed by `nalgebra` and post-processed into a
//! deterministic form: values sorted, and every output vector rotated so
//! that its first component of largest modulus is real and positive.

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::vector::fix_phase;

/// Iteration cap handed to the underlying solvers.
pub const MAX_ITERATIONS: usize = 10_000;

/// Default Hermiticity tolerance on `max |H - H†|`.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Thin singular value decomposition `M = U diag(σ) V†`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// `m x k` matrix of left singular vectors, `k = min(m, n)`.
    pub left_vectors: ComplexMatrix,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// `n x k` matrix of right singular vectors (columns of `V`).
    pub right_vectors: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let m = self.left_vectors.rows();
        let n = self.right_vectors.rows();
        let k = self.singular_values.len();
        ComplexMatrix::from_fn(m, n, |r, c| {
            (0..k)
                .map(|i| {
                    self.left_vectors[(r, i)]
                        * self.singular_values[i]
                        * self.right_vectors[(c, i)].conj()
                })
                .sum()
        })
    }
}

/// Convergence thresholds tried in turn. nalgebra can stop early with a wrong
/// factorization of rank-deficient complex input at `ε`, so every attempt is
/// checked against the input before it is accepted.
const SVD_EPSILONS: [f64; 3] = [
    5.0 * f64::EPSILON,
    50.0 * f64::EPSILON,
    500.0 * f64::EPSILON,
];
const SVD_RESIDUAL_TOL: f64 = 1e-12;

type RawSvd = (DMatrix<Complex64>, DVector<f64>, DMatrix<Complex64>);

fn checked_svd(m: &ComplexMatrix) -> Result<RawSvd> {
    let a = m.to_nalgebra();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for eps in SVD_EPSILONS {
        let Some(d) = SVD::try_new(a.clone(), true, true, eps, MAX_ITERATIONS) else {
            continue;
        };
        let u = d.u.expect("left vectors requested");
        let v_t = d.v_t.expect("right vectors requested");
        let sigma = d.singular_values;
        let sigma_c = DMatrix::from_diagonal(&sigma.map(|x| Complex64::new(x, 0.0)));
        let residual = (&u * sigma_c * &v_t - &a).camax();
        if residual <= SVD_RESIDUAL_TOL * scale * a.nrows().max(a.ncols()) as f64 {
            return Ok((u, sigma, v_t));
        }
    }
    Err(Error::NumericalFailure {
        routine: "svd",
        max_iterations: MAX_ITERATIONS,
    })
}

pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    let (rows, cols) = (m.rows(), m.cols());
    let k = rows.min(cols);
    if k == 0 {
        return Ok(SvdResult {
            left_vectors: ComplexMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            right_vectors: ComplexMatrix::zeros(cols, 0),
        });
    }
    let (u, sigma, v_t) = checked_svd(m)?;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));

    let mut left = ComplexMatrix::zeros(rows, k);
    let mut right = ComplexMatrix::zeros(cols, k);
    let mut values = Vec::with_capacity(k);
    for (slot, &src) in order.iter().enumerate() {
        let mut u_col: Vec<Complex64> = (0..rows).map(|r| u[(r, src)]).collect();
        let mut v_col: Vec<Complex64> = (0..cols).map(|c| v_t[(src, c)].conj()).collect();
        let phase = fix_phase(&mut u_col);
        for z in &mut v_col {
            *z *= phase;
        }
        for (r, z) in u_col.into_iter().enumerate() {
            left[(r, slot)] = z;
        }
        for (c, z) in v_col.into_iter().enumerate() {
            right[(c, slot)] = z;
        }
        values.push(sigma[src].max(0.0));
    }
    Ok(SvdResult {
        left_vectors: left,
        singular_values: values,
        right_vectors: right,
    })
}

/// Eigen decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

pub fn eigh(h: &ComplexMatrix) -> Result<Eigh> {
    eigh_with_tol(h, HERMITIAN_TOL)
}

pub fn eigh_with_tol(h: &ComplexMatrix, tol: f64) -> Result<Eigh> {
    if !h.is_square() {
        return Err(Error::Shape(format!(
            "eigh needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let deviation = h.hermiticity_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation, tol });
    }
    let n = h.rows();
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let symmetric = h.add(&h.adjoint())?.scale(Complex64::new(0.5, 0.0));
    let decomposed = SymmetricEigen::try_new(symmetric.to_nalgebra(), f64::EPSILON, MAX_ITERATIONS)
        .ok_or(Error::NumericalFailure {
            routine: "eigh",
            max_iterations: MAX_ITERATIONS,
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomposed.eigenvalues[a]
            .total_cmp(&decomposed.eigenvalues[b])
            .then(a.cmp(&b))
    });

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (slot, &src) in order.iter().enumerate() {
        let mut col: Vec<Complex64> = (0..n).map(|r| decomposed.eigenvectors[(r, src)]).collect();
        fix_phase(&mut col);
        for (r, z) in col.into_iter().enumerate() {
            vectors[(r, slot)] = z;
        }
        values.push(decomposed.eigenvalues[src]);
    }
    Ok(Eigh { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_svd() {
        let m = ComplexMatrix::from_diagonal(&[2.0, 3.0]);
        let s = svd(&m).unwrap();
        assert_eq!(s.singular_values.len(), 2);
        assert!((s.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one_svd() {
        let u = ComplexVector::new(vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]).unwrap();
        let v = ComplexVector::new(vec![c(0.5, 0.5), c(3.0, 0.0)]).unwrap();
        let m = ComplexMatrix::outer(&u, &v);
        let s = svd(&m).unwrap();
        assert!((s.singular_values[0] - u.norm() * v.norm()).abs() < 1e-12);
        assert!(s.singular_values[1] < 1e-12);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn rectangular_shapes() {
        let m = ComplexMatrix::from_fn(2, 5, |r, c| Complex64::new((r + 2 * c) as f64, r as f64));
        let s = svd(&m).unwrap();
        assert_eq!(s.left_vectors.rows(), 2);
        assert_eq!(s.left_vectors.cols(), 2);
        assert_eq!(s.right_vectors.rows(), 5);
        assert_eq!(s.right_vectors.cols(), 2);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn eigh_diagonal() {
        let e = eigh(&ComplexMatrix::from_diagonal(&[1.0, 0.0])).unwrap();
        assert_eq!(e.values, vec![0.0, 1.0]);
        assert_eq!(e.vectors[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn eigh_pauli_x() {
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = eigh(&sx).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        // hand diagonalization: (1, -1)/√2 for -1 and (1, 1)/√2 for +1
        let minus = e.vectors.column(0);
        let plus = e.vectors.column(1);
        assert!(minus.max_abs_diff(&ComplexVector::from_real(&[s, -s]).unwrap()) < 1e-14);
        assert!(plus.max_abs_diff(&ComplexVector::from_real(&[s, s]).unwrap()) < 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_is_deterministic() {
        let h = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.3, -0.2), c(0.0, 1.0)],
            vec![c(0.3, 0.2), c(-2.0, 0.0), c(0.5, 0.0)],
            vec![c(0.0, -1.0), c(0.5, 0.0), c(0.25, 0.0)],
        ])
        .unwrap();
        assert_eq!(eigh(&h).unwrap(), eigh(&h).unwrap());
    }

    #[test]
    fn rank_one_complex_outer_products() {
        use crate::sampling::{complex_normal_vector, rng_for};
        for i in 0..500 {
            let mut rng = rng_for(77, i);
            let (m, n) = [(2, 2), (2, 3), (3, 3), (4, 3)][i as usize % 4];
            let u = complex_normal_vector(&mut rng, m);
            let v = complex_normal_vector(&mut rng, n);
            let a = ComplexMatrix::outer(&u, &v);
            let d = svd(&a).unwrap();
            let expected = u.norm() * v.norm();
            assert!(
                (d.singular_values[0] - expected).abs() < 1e-12 * expected.max(1.0),
                "case {i}"
            );
            assert!(d.singular_values[1..]
                .iter()
                .all(|&s| s < 1e-12 * expected.max(1.0)));
            assert!(d.reconstruct().max_abs_diff(&a) < 1e-12 * expected.max(1.0));
        }
    }
}
