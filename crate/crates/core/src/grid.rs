//! Two coordinates sampled on an odd, centered grid.
//!
//! Product wavefunctions `f(x1) g(x2)` are relabeled with the modular
//! sum/difference bijection and their Schmidt rank in the new labels is
//! compared with the QCF of `A = X⊗I + I⊗X` and `B = X⊗I - I⊗X`. The position
//! operator `X` is diagonal in the grid basis, so every operator here is kept
//! as its diagonal.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{tensor_vec, ComplexVector};
use crate::qcf::qcf_diagonal;
use crate::schmidt::{schmidt, DEFAULT_TRUNCATION_TOL};
use crate::state::StateVector;
use crate::tps::{relabel_tps, IndexBijection, TensorProductStructure};

/// Edge probability above which a profile is flagged as touching the boundary.
pub const BOUNDARY_MASS_TOL: f64 = 1e-12;

/// Allowed `|Q(A, B) - (Var_f - Var_g)|`.
pub const VARIANCE_IDENTITY_TOL: f64 = 1e-9;

/// `d` points per axis at `x_i = origin_offset + i·h`, centered on zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub d: usize,
    pub spacing: f64,
    pub origin_offset: f64,
}

impl Grid {
    pub fn new(d: usize, spacing: f64) -> Result<Self> {
        if d.is_multiple_of(2) {
            return Err(Error::EvenGrid { d });
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be finite and positive, got {spacing}"
            )));
        }
        Ok(Self {
            d,
            spacing,
            origin_offset: -((d - 1) as f64) / 2.0 * spacing,
        })
    }

    /// Grid of `d` points covering `[-half_width, half_width]`.
    pub fn spanning(d: usize, half_width: f64) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 points, got {d}"
            )));
        }
        Self::new(d, 2.0 * half_width / (d - 1) as f64)
    }

    pub fn position(&self, i: usize) -> f64 {
        // centered index keeps x_{(d-1)/2} exactly zero
        (i as f64 - (self.d - 1) as f64 / 2.0) * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.d).map(|i| self.position(i)).collect()
    }

    pub fn half_width(&self) -> f64 {
        self.position(self.d - 1)
    }
}

/// Normalized samples of a wavefunction on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    pub grid: Grid,
    pub samples: ComplexVector,
    /// Boundary-truncation notes; empty for well-contained profiles.
    pub warnings: Vec<String>,
}

impl SampledProfile {
    /// Normalizes `samples` and records a warning if the two edge points
    /// carry more than [`BOUNDARY_MASS_TOL`] of the probability.
    pub fn from_samples(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.d {
            return Err(Error::Dimension {
                context: "profile samples",
                expected: grid.d,
                found: samples.len(),
            });
        }
        let samples = ComplexVector::new(samples)?.normalize()?;
        let edge = samples[0].norm_sqr() + samples[grid.d - 1].norm_sqr();
        let mut warnings = Vec::new();
        if edge > BOUNDARY_MASS_TOL {
            warnings.push(format!(
                "edge probability {edge:e} exceeds {BOUNDARY_MASS_TOL:e}; results near the boundary are truncated"
            ));
        }
        Ok(Self {
            grid,
            samples,
            warnings,
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn mean_position(&self) -> f64 {
        self.probabilities()
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.grid.position(i))
            .sum()
    }

    /// `⟨X²⟩ - ⟨X⟩²` under `|samples|²`.
    pub fn position_variance(&self) -> f64 {
        let probs = self.probabilities();
        let mean = self.mean_position();
        let second: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.grid.position(i).powi(2))
            .sum();
        (second - mean * mean).max(0.0)
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and positive, got {sigma}"
        )));
    }
    Ok(())
}

fn gaussian_amplitude(x: f64, center: f64, sigma: f64) -> f64 {
    (-(x - center).powi(2) / (4.0 * sigma * sigma)).exp()
}

/// Amplitudes `∝ exp(-(x - c)²/4σ²)`, so the position density has variance σ².
pub fn gaussian_profile(grid: Grid, center: f64, sigma: f64) -> Result<SampledProfile> {
    check_sigma(sigma)?;
    let samples = grid
        .positions()
        .iter()
        .map(|&x| Complex64::new(gaussian_amplitude(x, center, sigma), 0.0))
        .collect();
    let mut profile = SampledProfile::from_samples(grid, samples)?;
    let edge = (grid.half_width() - center.abs()).max(0.0);
    let support = (-(edge * edge) / (2.0 * sigma * sigma)).exp();
    if support >= BOUNDARY_MASS_TOL && profile.warnings.is_empty() {
        profile.warnings.push(format!(
            "gaussian density at the grid edge is {support:e} of its peak; widen the grid"
        ));
    }
    Ok(profile)
}

/// Two gaussian lobes at `±separation`.
pub fn double_gaussian_profile(grid: Grid, separation: f64, sigma: f64) -> Result<SampledProfile> {
    check_sigma(sigma)?;
    let samples = grid
        .positions()
        .iter()
        .map(|&x| {
            Complex64::new(
                gaussian_amplitude(x, separation, sigma)
                    + gaussian_amplitude(x, -separation, sigma),
                0.0,
            )
        })
        .collect();
    SampledProfile::from_samples(grid, samples)
}

/// `x · exp(-x²/4σ²)`, which vanishes at the grid center.
pub fn odd_profile(grid: Grid, sigma: f64) -> Result<SampledProfile> {
    check_sigma(sigma)?;
    let samples = grid
        .positions()
        .iter()
        .map(|&x| Complex64::new(x * gaussian_amplitude(x, 0.0, sigma), 0.0))
        .collect();
    SampledProfile::from_samples(grid, samples)
}

/// Discrete Fourier mode `exp(2πi·m·i/d)/√d`.
pub fn fourier_profile(grid: Grid, mode: usize) -> Result<SampledProfile> {
    if mode >= grid.d {
        return Err(Error::InvalidParameter(format!(
            "mode {mode} out of range 0..{}",
            grid.d
        )));
    }
    let d = grid.d;
    let scale = 1.0 / (d as f64).sqrt();
    let samples: Vec<Complex64> = (0..d)
        .map(|i| {
            // reduce m·i mod d first so the phase argument stays exact
            let k = (mode * i) % d;
            Complex64::from_polar(scale, 2.0 * PI * k as f64 / d as f64)
        })
        .collect();
    Ok(SampledProfile {
        grid,
        samples: ComplexVector::new(samples)?,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumDiffReport {
    pub rank_xy: usize,
    pub rank_ab: usize,
    /// Leading Schmidt coefficients in the sum/difference labels.
    pub coefficients_ab: Vec<f64>,
    pub qcf_ab: f64,
    pub variance_diff: f64,
    pub identity_residual: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BijectionReport {
    pub rank_xy: usize,
    pub rank_ab: usize,
    pub coefficients_xy: Vec<f64>,
    pub coefficients_ab: Vec<f64>,
    pub warnings: Vec<String>,
}

/// How many leading coefficients a report keeps.
const REPORTED_COEFFICIENTS: usize = 4;

fn product_state(f: &SampledProfile, g: &SampledProfile) -> Result<StateVector> {
    if f.grid != g.grid {
        return Err(Error::InvalidParameter(
            "profiles live on different grids".into(),
        ));
    }
    StateVector::normalized(tensor_vec(&f.samples, &g.samples)?)
}

fn merged_warnings(f: &SampledProfile, g: &SampledProfile) -> Vec<String> {
    f.warnings
        .iter()
        .map(|w| format!("f: {w}"))
        .chain(g.warnings.iter().map(|w| format!("g: {w}")))
        .collect()
}

pub fn demo_sum_diff(f: &SampledProfile, g: &SampledProfile) -> Result<SumDiffReport> {
    demo_sum_diff_with_tol(f, g, DEFAULT_TRUNCATION_TOL)
}

pub fn demo_sum_diff_with_tol(
    f: &SampledProfile,
    g: &SampledProfile,
    truncation_tol: f64,
) -> Result<SumDiffReport> {
    let psi = product_state(f, g)?;
    let d = f.grid.d;
    let bij = IndexBijection::sum_diff(d)?;
    let base = schmidt(
        &psi,
        &TensorProductStructure::trivial(d, d)?,
        truncation_tol,
    )?;
    let relabeled = schmidt(&psi, &relabel_tps(&bij)?, truncation_tol)?;

    let x = f.grid.positions();
    let mut a = Vec::with_capacity(d * d);
    let mut b = Vec::with_capacity(d * d);
    for &x1 in &x {
        for &x2 in &x {
            a.push(x1 + x2);
            b.push(x1 - x2);
        }
    }
    let qcf_ab = qcf_diagonal(&a, &b, psi.vector())?;
    let variance_diff = f.position_variance() - g.position_variance();
    let identity_residual = (qcf_ab - variance_diff).abs();
    if identity_residual > VARIANCE_IDENTITY_TOL {
        return Err(Error::Contract(format!(
            "Q(A, B) = {qcf_ab} differs from Var_f - Var_g = {variance_diff} by {identity_residual:e}"
        )));
    }
    Ok(SumDiffReport {
        rank_xy: base.rank,
        rank_ab: relabeled.rank,
        coefficients_ab: relabeled
            .coefficients
            .iter()
            .take(REPORTED_COEFFICIENTS)
            .copied()
            .collect(),
        qcf_ab,
        variance_diff,
        identity_residual,
        warnings: merged_warnings(f, g),
    })
}

pub fn demo_general_bijection(
    f: &SampledProfile,
    g: &SampledProfile,
    bij: &IndexBijection,
    truncation_tol: f64,
) -> Result<BijectionReport> {
    let psi = product_state(f, g)?;
    let d = f.grid.d;
    let base = schmidt(
        &psi,
        &TensorProductStructure::trivial(d, d)?,
        truncation_tol,
    )?;
    let relabeled = schmidt(
        &psi,
        &TensorProductStructure::trivial(d, d)?.relabel(bij)?,
        truncation_tol,
    )?;
    let head = |c: &[f64]| c.iter().take(REPORTED_COEFFICIENTS).copied().collect();
    Ok(BijectionReport {
        rank_xy: base.rank,
        rank_ab: relabeled.rank,
        coefficients_xy: head(&base.coefficients),
        coefficients_ab: head(&relabeled.coefficients),
        warnings: merged_warnings(f, g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide_grid() -> Grid {
        Grid::spanning(129, 8.0).unwrap()
    }

    #[test]
    fn even_grid_rejected() {
        assert_eq!(Grid::new(8, 1.0).unwrap_err(), Error::EvenGrid { d: 8 });
    }

    #[test]
    fn gaussian_is_symmetric() {
        let p = gaussian_profile(wide_grid(), 0.0, 1.0).unwrap();
        assert!(p.mean_position().abs() < 1e-15);
        assert!(p.warnings.is_empty());
        for i in 0..64 {
            assert_eq!(p.samples[i], p.samples[128 - i]);
        }
    }

    #[test]
    fn gaussian_variance_by_direct_summation() {
        let sigma = 1.3;
        let grid = Grid::spanning(129, 8.0 * sigma).unwrap();
        let p = gaussian_profile(grid, 0.0, sigma).unwrap();
        // independent sum over exp(-x²/2σ²) weights
        let (mut z, mut m2) = (0.0, 0.0);
        for x in grid.positions() {
            let w = (-x * x / (2.0 * sigma * sigma)).exp();
            z += w;
            m2 += w * x * x;
        }
        assert!((m2 / z - sigma * sigma).abs() < 1e-6);
        assert!((p.position_variance() - sigma * sigma).abs() < 1e-6);
    }

    #[test]
    fn narrow_grid_warns() {
        let p = gaussian_profile(Grid::spanning(21, 2.0).unwrap(), 0.0, 1.0).unwrap();
        assert!(!p.warnings.is_empty());
    }

    #[test]
    fn bad_sigma_rejected() {
        assert!(gaussian_profile(wide_grid(), 0.0, 0.0).is_err());
        assert!(double_gaussian_profile(wide_grid(), 1.0, -1.0).is_err());
    }

    #[test]
    fn coincident_lobes_equal_single_gaussian() {
        let single = gaussian_profile(wide_grid(), 0.0, 0.7).unwrap();
        let double = double_gaussian_profile(wide_grid(), 0.0, 0.7).unwrap();
        assert!(single.samples.max_abs_diff(&double.samples) < 1e-15);
        let split = double_gaussian_profile(wide_grid(), 2.0, 0.5).unwrap();
        assert!(split.mean_position().abs() < 1e-15);
    }

    #[test]
    fn fourier_modes() {
        let grid = Grid::new(9, 1.0).unwrap();
        let m0 = fourier_profile(grid, 0).unwrap();
        for z in m0.samples.iter() {
            assert!((z - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        }
        let m2 = fourier_profile(grid, 2).unwrap();
        let m5 = fourier_profile(grid, 5).unwrap();
        assert!(m2.samples.inner(&m5.samples).unwrap().norm() < 1e-12);
        assert!(fourier_profile(grid, 9).is_err());
    }

    #[test]
    fn mismatched_grids_rejected() {
        let f = gaussian_profile(Grid::spanning(11, 8.0).unwrap(), 0.0, 1.0).unwrap();
        let g = gaussian_profile(Grid::spanning(13, 8.0).unwrap(), 0.0, 1.0).unwrap();
        assert!(demo_sum_diff(&f, &g).is_err());
    }

    #[test]
    fn identity_bijection_keeps_rank_one() {
        let grid = Grid::spanning(15, 6.0).unwrap();
        let f = gaussian_profile(grid, 0.3, 1.0).unwrap();
        let g = odd_profile(grid, 0.8).unwrap();
        let r = demo_general_bijection(&f, &g, &IndexBijection::identity(15, 15).unwrap(), 1e-10)
            .unwrap();
        assert_eq!((r.rank_xy, r.rank_ab), (1, 1));
    }
}
