//! Seeded random states, observables and unitaries.
//!
//! Every sample index gets its own ChaCha stream derived from `(seed, index)`,
//! so a sweep produces the same values however it is chunked across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{orthonormalize, ComplexMatrix, ComplexVector};
use crate::state::{Observable, StateVector};

/// Generator for sample `stream` of a run seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn complex_normal_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    ComplexVector::from_vec_unchecked((0..dim).map(|_| complex_normal(rng)).collect())
}

/// Haar-random pure state: normalized vector of complex normal deviates.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v = complex_normal_vector(rng, dim);
        if let Ok(s) = StateVector::normalized(v) {
            return s;
        }
    }
}

/// Random product state `u ⊗ v` with Haar-random factors.
pub fn product_state<R: Rng + ?Sized>(
    rng: &mut R,
    d1: usize,
    d2: usize,
) -> (StateVector, StateVector, StateVector) {
    let left = haar_state(rng, d1);
    let right = haar_state(rng, d2);
    let psi = StateVector::product(&left, &right).expect("dimensions are small");
    (left, right, psi)
}

/// Random Hermitian matrix `(G + G†)/2` with complex Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let h = g
        .add(&g.adjoint())
        .expect("square")
        .scale(Complex64::new(0.5, 0.0));
    Observable::new(h).expect("Hermitian by construction")
}

/// Haar-random unitary from Gram–Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    loop {
        let columns: Vec<ComplexVector> =
            (0..dim).map(|_| complex_normal_vector(rng, dim)).collect();
        let basis = orthonormalize(columns, 1e-8, dim);
        if basis.len() == dim {
            return ComplexMatrix::from_columns(&basis).expect("equal lengths");
        }
    }
}
