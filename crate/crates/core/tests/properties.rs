use num_complex::Complex64;
use proptest::prelude::*;

use tensorfact::io::StateFile;
use tensorfact::linalg::svd;
use tensorfact::qcf::{qcf, qcf_local};
use tensorfact::sampling::{complex_normal, haar_state, random_hermitian, random_unitary, rng_for};
use tensorfact::schmidt::schmidt;
use tensorfact::tps::local_unitary_tps;
use tensorfact::{
    ComplexMatrix, ComplexVector, IndexBijection, StateVector, TensorProductStructure,
};

fn random_matrix(seed: u64, rows: usize, cols: usize) -> ComplexMatrix {
    let mut rng = rng_for(seed, (rows * 64 + cols) as u64);
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), n1 in 1usize..=8, n2 in 1usize..=8, k in 1usize..=3) {
        let a = random_matrix(seed, n1, k);
        let c = random_matrix(seed ^ 1, k, n1);
        let b = random_matrix(seed ^ 2, n2, 2);
        let d = random_matrix(seed ^ 3, 2, n2);
        let lhs = a.kron(&b).matmul(&c.kron(&d)).unwrap();
        let rhs = a.matmul(&c).unwrap().kron(&b.matmul(&d).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn svd_reconstructs_with_orthonormal_factors(seed in any::<u64>(), rows in 1usize..=32, cols in 1usize..=32) {
        let m = random_matrix(seed, rows, cols);
        let d = svd(&m).unwrap();
        let scale = m.max_abs().max(1.0);
        prop_assert!(d.reconstruct().max_abs_diff(&m) <= 1e-10 * scale);
        prop_assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let k = rows.min(cols);
        for f in [&d.left_vectors, &d.right_vectors] {
            let gram = f.adjoint().matmul(f).unwrap();
            prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(k)) <= 1e-10);
        }
    }

    #[test]
    fn local_unitaries_keep_schmidt_coefficients(seed in any::<u64>(), d1 in 1usize..=5, d2 in 1usize..=5) {
        let mut rng = rng_for(seed, 0);
        let psi = haar_state(&mut rng, d1 * d2);
        let base = TensorProductStructure::trivial(d1, d2).unwrap();
        let ua = random_unitary(&mut rng, d1);
        let ub = random_unitary(&mut rng, d2);
        let rotated = local_unitary_tps(&base, &ua, &ub).unwrap();
        let a = schmidt(&psi, &base, 1e-10).unwrap();
        let b = schmidt(&psi, &rotated, 1e-10).unwrap();
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn local_qcf_agrees_with_lifted_operators(seed in any::<u64>(), d1 in 1usize..=4, d2 in 1usize..=4) {
        let mut rng = rng_for(seed, 1);
        let tps = TensorProductStructure::from_unitary(d1, d2, random_unitary(&mut rng, d1 * d2)).unwrap();
        let psi = haar_state(&mut rng, d1 * d2);
        let a = random_hermitian(&mut rng, d1);
        let b = random_hermitian(&mut rng, d2);
        let fast = qcf_local(&a, &b, &psi, &tps).unwrap().value;
        let dense = qcf(&tps.local_left(&a).unwrap(), &tps.local_right(&b).unwrap(), &psi).unwrap();
        prop_assert!((fast - dense).norm() <= 1e-10);
    }

    #[test]
    fn state_file_round_trip_is_bit_exact(
        raw in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..=24),
        d1 in 1usize..=4,
    ) {
        prop_assume!(raw.len() % d1 == 0);
        let d2 = raw.len() / d1;
        let v = ComplexVector::new(raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect()).unwrap();
        prop_assume!(v.norm() > 1e-6);
        let psi = StateVector::normalized(v).unwrap();
        let file = StateFile::new(TensorProductStructure::trivial(d1, d2).unwrap(), psi);
        let loaded = StateFile::parse(&file.to_json()).unwrap();
        prop_assert!(loaded.warnings.is_empty());
        let before = file.state.vector().as_slice();
        let after = loaded.value.state.vector().as_slice();
        for (x, y) in before.iter().zip(after) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}

#[test]
fn sum_diff_forward_inverse_is_identity() {
    for d in [3, 5, 7, 9] {
        let bij = IndexBijection::sum_diff(d).unwrap();
        for i in 0..d {
            for j in 0..d {
                let (a, b) = bij.apply(i, j);
                assert_eq!(bij.invert(a, b), (i, j));
            }
        }
    }
}
