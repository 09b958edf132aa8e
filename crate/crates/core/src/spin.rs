//! Two spin-1/2 particles described either by `(S_1z, S_2z)` or by the
//! squares of two total-spin components, `S_z²` and `S_x²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expectation, ComplexMatrix};
use crate::par::{map_indexed, Execution};
use crate::qcf::qcf;
use crate::sampling::{haar_state, rng_for};
use crate::schmidt::{schmidt, DEFAULT_TRUNCATION_TOL};
use crate::state::{Observable, StateVector};
use crate::tps::{tps_from_joint_eigenbasis, TensorProductStructure};

/// Threshold on `|Q|` used when counting nonvanishing samples.
pub const NONZERO_QCF_TOL: f64 = 1e-8;

/// Global indices of `ψ_{++}, ψ_{--}, ψ_{+-}, ψ_{-+}`, the column order of the
/// change-of-basis matrix returned by [`chi_basis`].
pub const CHANGE_OF_BASIS_COLUMNS: [usize; 4] = [0, 3, 1, 2];

/// Labels `(s, t)` of `χ_{s,t}` in product-index order.
pub const CHI_LABELS: [(u8, u8); 4] = [(1, 1), (1, 0), (0, 1), (0, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinConfig {
    pub hbar: f64,
}

impl Default for SpinConfig {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}

impl SpinConfig {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Self { hbar })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub x: Observable,
    pub y: Observable,
    pub z: Observable,
}

/// `S_i = (ħ/2) σ_i`.
pub fn spin_operators(cfg: SpinConfig) -> SpinOperators {
    let h = cfg.hbar / 2.0;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let x = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(0.0, 0.0)]])
        .expect("2x2");
    let y =
        ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, -h)], vec![c(0.0, h), c(0.0, 0.0)]])
            .expect("2x2");
    SpinOperators {
        x: Observable::new(x).expect("Hermitian"),
        y: Observable::new(y).expect("Hermitian"),
        z: Observable::diagonal(&[h, -h]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalSpinSquares {
    pub sz2: Observable,
    pub sx2: Observable,
}

/// `S_a² = (S_a⊗I + I⊗S_a)² = (ħ²/2) I⊗I + 2 S_a⊗S_a` for `a = z, x`.
pub fn total_spin_squares(cfg: SpinConfig) -> TotalSpinSquares {
    let ops = spin_operators(cfg);
    let square = |s: &Observable| {
        let constant = Observable::identity(4);
        constant
            .combine(cfg.hbar * cfg.hbar / 2.0, &s.tensor(s), 2.0)
            .expect("4x4")
    };
    TotalSpinSquares {
        sz2: square(&ops.z),
        sx2: square(&ops.x),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiBasis {
    /// Structure whose product basis is `χ_{1,1}, χ_{1,0}, χ_{0,1}, χ_{0,0}`.
    pub tps: TensorProductStructure,
    /// Row `k` holds `χ_k` in the basis `ψ_{++}, ψ_{--}, ψ_{+-}, ψ_{-+}`.
    pub change_of_basis: ComplexMatrix,
}

pub fn chi_basis(cfg: SpinConfig) -> Result<ChiBasis> {
    let squares = total_spin_squares(cfg);
    let tps = tps_from_joint_eigenbasis(&squares.sz2, &squares.sx2, 2, 2)?.with_labels(
        Some(vec!["s=1".into(), "s=0".into()]),
        Some(vec!["t=1".into(), "t=0".into()]),
    )?;
    let u = tps.unitary();
    let change_of_basis =
        ComplexMatrix::from_fn(4, 4, |row, col| u[(CHANGE_OF_BASIS_COLUMNS[col], row)]);
    Ok(ChiBasis {
        tps,
        change_of_basis,
    })
}

fn check_unit(psi: &StateVector, name: &str) -> Result<()> {
    if psi.dim() != 2 {
        return Err(Error::Dimension {
            context: "single-spin state",
            expected: 2,
            found: psi.dim(),
        });
    }
    let norm = psi.vector().norm();
    if (norm - 1.0).abs() > crate::state::NORM_TOL {
        return Err(Error::Contract(format!("{name} has norm {norm}")));
    }
    Ok(())
}

/// `-ħ²⟨S_y⟩₁⟨S_y⟩₂ - 4⟨S_x⟩₁⟨S_x⟩₂⟨S_z⟩₁⟨S_z⟩₂`, the QCF of `S_z²` and
/// `S_x²` on the product state `Ψ1 ⊗ Ψ2`.
pub fn spin_qcf_closed_form(
    psi1: &StateVector,
    psi2: &StateVector,
    cfg: SpinConfig,
) -> Result<f64> {
    check_unit(psi1, "first spin state")?;
    check_unit(psi2, "second spin state")?;
    let ops = spin_operators(cfg);
    let e = |op: &Observable, psi: &StateVector| expectation(op, psi);
    let y = e(&ops.y, psi1)? * e(&ops.y, psi2)?;
    let x = e(&ops.x, psi1)? * e(&ops.x, psi2)?;
    let z = e(&ops.z, psi1)? * e(&ops.z, psi2)?;
    Ok(-cfg.hbar * cfg.hbar * y - 4.0 * x * z)
}

/// One random product pair: closed form vs direct evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinSample {
    pub sample: usize,
    pub residual: f64,
    pub qcf_value: f64,
}

pub fn spin_samples(
    cfg: SpinConfig,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SpinSample>> {
    let squares = total_spin_squares(cfg);
    map_indexed(samples, exec, |i| {
        let mut rng = rng_for(seed, i as u64);
        let psi1 = haar_state(&mut rng, 2);
        let psi2 = haar_state(&mut rng, 2);
        let product = StateVector::product(&psi1, &psi2)?;
        let direct = qcf(&squares.sz2, &squares.sx2, &product)?;
        let closed = spin_qcf_closed_form(&psi1, &psi2, cfg)?;
        Ok(SpinSample {
            sample: i,
            residual: (direct - Complex64::new(closed, 0.0)).norm(),
            qcf_value: direct.re,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiRankExample {
    pub state: String,
    pub rank: usize,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinReport {
    pub samples: usize,
    pub closed_form_residual_max: f64,
    pub fraction_nonzero: f64,
    pub chi_tps_rank_examples: Vec<ChiRankExample>,
}

/// Samples product states, compares the closed form with the direct QCF, and
/// reports the Schmidt ranks of the four `ψ_{k,r}` in the `χ` structure.
pub fn demo_spins(
    cfg: SpinConfig,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<SpinReport> {
    let rows = spin_samples(cfg, samples, seed, exec)?;
    let closed_form_residual_max = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let nonzero = rows
        .iter()
        .filter(|r| r.qcf_value.abs() > NONZERO_QCF_TOL)
        .count();
    let fraction_nonzero = if samples == 0 {
        0.0
    } else {
        nonzero as f64 / samples as f64
    };
    let chi = chi_basis(cfg)?;
    let names = ["psi++", "psi+-", "psi-+", "psi--"];
    let chi_tps_rank_examples = names
        .iter()
        .enumerate()
        .map(|(g, name)| {
            let sd = schmidt(&StateVector::basis(4, g), &chi.tps, DEFAULT_TRUNCATION_TOL)?;
            Ok(ChiRankExample {
                state: name.to_string(),
                rank: sd.rank,
                coefficients: sd.coefficients,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SpinReport {
        samples,
        closed_form_residual_max,
        fraction_nonzero,
        chi_tps_rank_examples,
    })
}
