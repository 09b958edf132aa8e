//! CHSH violation for two-qubit pure states.
//!
//! [`chsh_max`] maximizes the CHSH combination numerically by evaluating the
//! correlators directly. [`chsh_oracle`] is the closed form
//! `2√(t1² + t2²)` built from the two largest singular values of the
//! correlation matrix `T_ij = ⟨σ_i ⊗ σ_j⟩`; the two paths share nothing beyond
//! the state.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::sampling::{haar_state, rng_for};
use crate::state::{StateVector, NORM_TOL};

pub const SETTINGS_NORM_TOL: f64 = 1e-12;
/// Angular resolution of the coarse search, in degrees.
pub const GRID_STEP_DEGREES: f64 = 15.0;
/// Coordinate-descent sweeps allowed at each step size.
pub const SWEEPS_PER_STEP: usize = 50;
/// Refinement stops once the step falls below this (radians).
pub const MIN_STEP: f64 = 1e-6;

pub type Direction = [f64; 3];

/// Measurement directions `a, a′` for the first qubit and `b, b′` for the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSettings {
    pub a: Direction,
    pub a_prime: Direction,
    pub b: Direction,
    pub b_prime: Direction,
}

impl ChshSettings {
    pub fn new(a: Direction, a_prime: Direction, b: Direction, b_prime: Direction) -> Result<Self> {
        for (name, v) in [("a", a), ("a'", a_prime), ("b", b), ("b'", b_prime)] {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (n - 1.0).abs() > SETTINGS_NORM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "setting {name} has norm {n}, expected a unit vector"
                )));
            }
        }
        Ok(Self {
            a,
            a_prime,
            b,
            b_prime,
        })
    }

    fn from_angles(p: &[f64; 8]) -> Self {
        Self {
            a: direction(p[0], p[1]),
            a_prime: direction(p[2], p[3]),
            b: direction(p[4], p[5]),
            b_prime: direction(p[6], p[7]),
        }
    }
}

/// Unit vector with polar angle `theta` and azimuth `phi`.
pub fn direction(theta: f64, phi: f64) -> Direction {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

type Pauli = [[Complex64; 2]; 2];

fn pauli_entries(u: Direction) -> Pauli {
    let c = Complex64::new;
    [
        [c(u[2], 0.0), c(u[0], -u[1])],
        [c(u[0], u[1]), c(-u[2], 0.0)],
    ]
}

/// `u·σ` as a 2×2 matrix.
pub fn pauli_along(u: Direction) -> ComplexMatrix {
    let m = pauli_entries(u);
    ComplexMatrix::from_rows(&[m[0].to_vec(), m[1].to_vec()]).expect("2x2")
}

fn check_two_qubit(psi: &StateVector) -> Result<()> {
    if psi.dim() != 4 {
        return Err(Error::Dimension {
            context: "two-qubit state",
            expected: 4,
            found: psi.dim(),
        });
    }
    let norm = psi.vector().norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized {
            norm,
            tol: NORM_TOL,
        });
    }
    Ok(())
}

/// `(A ⊗ I)ψ` for a 2×2 `A`.
fn apply_left(m: &Pauli, psi: &[Complex64]) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for k in 0..2 {
        for r in 0..2 {
            out[k * 2 + r] = m[k][0] * psi[r] + m[k][1] * psi[2 + r];
        }
    }
    out
}

/// `(I ⊗ B)ψ` for a 2×2 `B`.
fn apply_right(m: &Pauli, psi: &[Complex64]) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for k in 0..2 {
        for r in 0..2 {
            out[k * 2 + r] = m[r][0] * psi[k * 2] + m[r][1] * psi[k * 2 + 1];
        }
    }
    out
}

fn dot(u: &[Complex64; 4], v: &[Complex64; 4]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a.conj() * b).re).sum()
}

/// `E(u, v) = ⟨ψ, (u·σ) ⊗ (v·σ) ψ⟩`.
fn correlator(psi: &[Complex64], u: Direction, v: Direction) -> f64 {
    dot(
        &apply_left(&pauli_entries(u), psi),
        &apply_right(&pauli_entries(v), psi),
    )
}

fn chsh_unchecked(psi: &[Complex64], s: &ChshSettings) -> f64 {
    correlator(psi, s.a, s.b) + correlator(psi, s.a, s.b_prime) + correlator(psi, s.a_prime, s.b)
        - correlator(psi, s.a_prime, s.b_prime)
}

/// `E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`.
pub fn chsh_value(psi: &StateVector, s: &ChshSettings) -> Result<f64> {
    check_two_qubit(psi)?;
    Ok(chsh_unchecked(psi.vector().as_slice(), s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshMax {
    pub value: f64,
    /// Best value on the coarse grid, before refinement.
    pub grid_value: f64,
    pub settings: ChshSettings,
}

/// `(θ, φ)` pairs on a 15° lattice; `hemisphere` keeps `θ ≤ 90°`.
fn angle_grid(hemisphere: bool) -> Vec<(f64, f64)> {
    let step = GRID_STEP_DEGREES.to_radians();
    let polar_steps = (180.0 / GRID_STEP_DEGREES).round() as usize;
    let azimuth_steps = (360.0 / GRID_STEP_DEGREES).round() as usize;
    let max_polar = if hemisphere {
        polar_steps / 2
    } else {
        polar_steps
    };
    let mut out = Vec::new();
    for t in 0..=max_polar {
        let theta = t as f64 * step;
        if t == 0 || t == polar_steps {
            out.push((theta, 0.0));
            continue;
        }
        for p in 0..azimuth_steps {
            out.push((theta, p as f64 * step));
        }
    }
    out
}

/// Coarse lattice search followed by coordinate descent with step halving.
pub fn chsh_max(psi: &StateVector) -> Result<ChshMax> {
    check_two_qubit(psi)?;
    let amps = psi.vector().as_slice();

    // (a, a′, b, b′) → (−a, −a′, −b, −b′) and (a, a′, b, b′) → (a, −a′, b′, b)
    // both leave the value unchanged and map the lattice onto itself, so `a`
    // and `a′` are restricted to the upper hemisphere.
    let half = angle_grid(true);
    let full = angle_grid(false);
    let left_images: Vec<[Complex64; 4]> = full
        .iter()
        .map(|&(t, p)| apply_left(&pauli_entries(direction(t, p)), amps))
        .collect();
    let right_images: Vec<[Complex64; 4]> = full
        .iter()
        .map(|&(t, p)| apply_right(&pauli_entries(direction(t, p)), amps))
        .collect();
    let table: Vec<Vec<f64>> = left_images
        .iter()
        .map(|l| right_images.iter().map(|r| dot(l, r)).collect())
        .collect();
    let half_index: Vec<usize> = half
        .iter()
        .map(|h| {
            full.iter()
                .position(|f| f == h)
                .expect("hemisphere is a subset")
        })
        .collect();

    let mut best = (f64::NEG_INFINITY, 0, 0);
    for &ia in &half_index {
        let row_a = &table[ia];
        for &ia2 in &half_index {
            let (sum_best, diff_best) = row_maxima(row_a, &table[ia2]);
            let total = sum_best + diff_best;
            if total > best.0 {
                best = (total, ia, ia2);
            }
        }
    }
    let (_, ia, ia2) = best;
    let argmax = |f: &dyn Fn(f64, f64) -> f64| {
        (0..full.len())
            .max_by(|&i, &j| {
                f(table[ia][i], table[ia2][i])
                    .total_cmp(&f(table[ia][j], table[ia2][j]))
                    .then(j.cmp(&i))
            })
            .expect("grid is non-empty")
    };
    let idx = [ia, ia2, argmax(&|x, y| x + y), argmax(&|x, y| x - y)];
    let mut params = [
        full[idx[0]].0,
        full[idx[0]].1,
        full[idx[1]].0,
        full[idx[1]].1,
        full[idx[2]].0,
        full[idx[2]].1,
        full[idx[3]].0,
        full[idx[3]].1,
    ];
    let grid_value = chsh_unchecked(amps, &ChshSettings::from_angles(&params));
    let value = refine(amps, &mut params, grid_value);
    Ok(ChshMax {
        value,
        grid_value,
        settings: ChshSettings::from_angles(&params),
    })
}

/// `(max_k a_k + b_k, max_k a_k − b_k)`.
fn row_maxima(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut sum = f64::NEG_INFINITY;
    let mut diff = f64::NEG_INFINITY;
    for (&x, &y) in a.iter().zip(b) {
        let s = x + y;
        let d = x - y;
        sum = if s > sum { s } else { sum };
        diff = if d > diff { d } else { diff };
    }
    (sum, diff)
}

fn refine(amps: &[Complex64], params: &mut [f64; 8], start: f64) -> f64 {
    let objective = |p: &[f64; 8]| chsh_unchecked(amps, &ChshSettings::from_angles(p));
    let mut current = start;
    let mut step = GRID_STEP_DEGREES.to_radians() / 2.0;
    while step >= MIN_STEP {
        for _ in 0..SWEEPS_PER_STEP {
            let mut improved = false;
            for coord in 0..8 {
                for delta in [step, -step] {
                    let mut trial = *params;
                    trial[coord] += delta;
                    let v = objective(&trial);
                    if v > current {
                        current = v;
                        *params = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step /= 2.0;
    }
    // keep angles in a canonical range for reporting
    for p in params.iter_mut() {
        *p = p.rem_euclid(2.0 * PI);
    }
    current
}

/// `T_ij = ⟨ψ, σ_i ⊗ σ_j ψ⟩`.
pub fn correlation_matrix(psi: &StateVector) -> Result<[[f64; 3]; 3]> {
    check_two_qubit(psi)?;
    let sigma = [
        pauli_along([1.0, 0.0, 0.0]),
        pauli_along([0.0, 1.0, 0.0]),
        pauli_along([0.0, 0.0, 1.0]),
    ];
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let op = sigma[i].kron(&sigma[j]);
            let v: &ComplexVector = psi.vector();
            t[i][j] = op.sandwich(v, v)?.re;
        }
    }
    Ok(t)
}

/// Largest CHSH value reachable on `ψ`: `2√(t1² + t2²)`.
pub fn chsh_oracle(psi: &StateVector) -> Result<f64> {
    let t = correlation_matrix(psi)?;
    let m = Matrix3::from_fn(|i, j| t[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(2.0 * (sv[0] * sv[0] + sv[1] * sv[1]).sqrt())
}

/// Haar-random two-qubit state whose smaller Schmidt coefficient is at least
/// `min_second`, drawn by rejection from stream `index` of `seed`.
pub fn random_entangled_state(seed: u64, index: u64, min_second: f64) -> Result<StateVector> {
    if !(0.0..FRAC_1_SQRT_2).contains(&min_second) {
        return Err(Error::InvalidParameter(format!(
            "minimum second coefficient {min_second} outside [0, 1/√2)"
        )));
    }
    let mut rng = rng_for(seed, index);
    loop {
        let psi = haar_state(&mut rng, 4);
        let a = psi.vector().as_slice();
        // for a 2x2 coefficient matrix α1·α2 = |det C| and α1² + α2² = 1
        let det = (a[0] * a[3] - a[1] * a[2]).norm();
        let alpha2 = ((1.0 - (1.0 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
        if alpha2 >= min_second {
            return Ok(psi);
        }
    }
}
