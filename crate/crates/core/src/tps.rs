//! Tensor product structures over a global Hilbert space.
//!
//! A structure is a pair of factor dimensions `(d1, d2)` together with a
//! unitary `U` on the global space whose column `k·d2 + r` is the product
//! basis vector `φ_k ⊗ ϕ_r` of that structure written in the global
//! computational basis. The trivial structure is `U = I`. Coordinates of a
//! state in a structure are `U†ψ`; reshaping them row-major gives the
//! coefficient matrix `C[k][r]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigh, orthonormalize, ComplexMatrix, ComplexVector, MAX_GLOBAL_DIM};
use crate::state::{Observable, StateVector};

/// Tolerance on `max |U†U - I|` for a factorization unitary.
pub const UNITARITY_TOL: f64 = 1e-9;
/// Tolerance on `max |[F, G]|` when building a structure from observables.
pub const COMMUTATOR_TOL: f64 = 1e-9;
/// Eigenvalues closer than this (relative to `max(1, max|F|)`) are treated as equal.
pub const EIGENVALUE_CLUSTER_TOL: f64 = 1e-8;

/// How the factorization unitary is stored.
#[derive(Debug, Clone, PartialEq)]
pub enum Factorization {
    Identity,
    /// `columns[p]` is the global basis index that product index `p` maps to,
    /// i.e. `U e_p = e_{columns[p]}`.
    Permutation(Vec<usize>),
    Dense(ComplexMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorProductStructure {
    d1: usize,
    d2: usize,
    factorization: Factorization,
    label_left: Option<Vec<String>>,
    label_right: Option<Vec<String>>,
}

fn global_dim(d1: usize, d2: usize) -> Result<usize> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::Shape("factor dimensions must be >= 1".into()));
    }
    d1.checked_mul(d2)
        .filter(|&d| d <= MAX_GLOBAL_DIM)
        .ok_or(Error::Sizing {
            requested: d1.saturating_mul(d2),
            max: MAX_GLOBAL_DIM,
        })
}

fn is_identity_permutation(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i == x)
}

impl TensorProductStructure {
    pub fn trivial(d1: usize, d2: usize) -> Result<Self> {
        global_dim(d1, d2)?;
        Ok(Self {
            d1,
            d2,
            factorization: Factorization::Identity,
            label_left: None,
            label_right: None,
        })
    }

    /// Structure with an arbitrary factorization unitary.
    pub fn from_unitary(d1: usize, d2: usize, unitary: ComplexMatrix) -> Result<Self> {
        let dim = global_dim(d1, d2)?;
        if unitary.rows() != dim || unitary.cols() != dim {
            return Err(Error::Dimension {
                context: "factorization unitary",
                expected: dim,
                found: unitary.rows().max(unitary.cols()),
            });
        }
        unitary.ensure_unitary(UNITARITY_TOL)?;
        Ok(Self {
            d1,
            d2,
            factorization: Factorization::Dense(unitary),
            label_left: None,
            label_right: None,
        })
    }

    /// Structure whose product basis is a reordering of the global basis.
    pub fn from_permutation(d1: usize, d2: usize, columns: Vec<usize>) -> Result<Self> {
        let dim = global_dim(d1, d2)?;
        if columns.len() != dim {
            return Err(Error::Dimension {
                context: "permutation",
                expected: dim,
                found: columns.len(),
            });
        }
        let mut seen = vec![false; dim];
        for &c in &columns {
            if c >= dim || std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidBijection(format!(
                    "index {c} is out of range or repeated"
                )));
            }
        }
        let factorization = if is_identity_permutation(&columns) {
            Factorization::Identity
        } else {
            Factorization::Permutation(columns)
        };
        Ok(Self {
            d1,
            d2,
            factorization,
            label_left: None,
            label_right: None,
        })
    }

    pub fn with_labels(
        mut self,
        left: Option<Vec<String>>,
        right: Option<Vec<String>>,
    ) -> Result<Self> {
        for (labels, d) in [(&left, self.d1), (&right, self.d2)] {
            if let Some(l) = labels {
                if l.len() != d {
                    return Err(Error::Dimension {
                        context: "basis labels",
                        expected: d,
                        found: l.len(),
                    });
                }
            }
        }
        self.label_left = left;
        self.label_right = right;
        Ok(self)
    }

    /// Replaces an exact permutation (or identity) dense unitary by its
    /// compact form.
    pub fn canonicalize(self) -> Self {
        let Factorization::Dense(u) = &self.factorization else {
            return self;
        };
        let n = u.rows();
        let mut columns = Vec::with_capacity(n);
        for c in 0..n {
            let mut hit = None;
            for r in 0..n {
                let z = u[(r, c)];
                if z == Complex64::new(1.0, 0.0) && hit.is_none() {
                    hit = Some(r);
                } else if z != Complex64::new(0.0, 0.0) {
                    return self;
                }
            }
            match hit {
                Some(r) => columns.push(r),
                None => return self,
            }
        }
        let factorization = if is_identity_permutation(&columns) {
            Factorization::Identity
        } else {
            Factorization::Permutation(columns)
        };
        Self {
            factorization,
            ..self
        }
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn global_dim(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn label_left(&self) -> Option<&[String]> {
        self.label_left.as_deref()
    }

    pub fn label_right(&self) -> Option<&[String]> {
        self.label_right.as_deref()
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.factorization, Factorization::Identity)
    }

    /// The factorization unitary as a dense matrix.
    pub fn unitary(&self) -> ComplexMatrix {
        let n = self.global_dim();
        match &self.factorization {
            Factorization::Identity => ComplexMatrix::identity(n),
            Factorization::Permutation(cols) => {
                let mut u = ComplexMatrix::zeros(n, n);
                for (p, &g) in cols.iter().enumerate() {
                    u[(g, p)] = Complex64::new(1.0, 0.0);
                }
                u
            }
            Factorization::Dense(u) => u.clone(),
        }
    }

    fn check_global(&self, v: &ComplexVector) -> Result<()> {
        if v.dim() != self.global_dim() {
            return Err(Error::Dimension {
                context: "state vs tensor product structure",
                expected: self.global_dim(),
                found: v.dim(),
            });
        }
        Ok(())
    }

    /// `U†ψ`: the components of `ψ` along this structure's product basis.
    pub fn to_product_coords(&self, psi: &ComplexVector) -> Result<ComplexVector> {
        self.check_global(psi)?;
        Ok(match &self.factorization {
            Factorization::Identity => psi.clone(),
            Factorization::Permutation(cols) => {
                ComplexVector::from_vec_unchecked(cols.iter().map(|&g| psi[g]).collect())
            }
            Factorization::Dense(u) => {
                let n = u.rows();
                let out = (0..n)
                    .map(|p| (0..n).map(|g| u[(g, p)].conj() * psi[g]).sum())
                    .collect();
                ComplexVector::from_vec_unchecked(out)
            }
        })
    }

    /// `U c`: the global vector with product-basis components `c`.
    pub fn from_product_coords(&self, coords: &ComplexVector) -> Result<ComplexVector> {
        self.check_global(coords)?;
        Ok(match &self.factorization {
            Factorization::Identity => coords.clone(),
            Factorization::Permutation(cols) => {
                let mut out = ComplexVector::zeros(coords.dim());
                for (p, &g) in cols.iter().enumerate() {
                    out[g] = coords[p];
                }
                out
            }
            Factorization::Dense(u) => u.matvec(coords)?,
        })
    }

    /// `U M U†` for an operator `M` written in product coordinates.
    pub fn lift_operator(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.global_dim();
        if m.rows() != n || m.cols() != n {
            return Err(Error::Dimension {
                context: "operator vs tensor product structure",
                expected: n,
                found: m.rows(),
            });
        }
        match &self.factorization {
            Factorization::Identity => Ok(m.clone()),
            Factorization::Permutation(cols) => {
                let mut out = ComplexMatrix::zeros(n, n);
                for p in 0..n {
                    for q in 0..n {
                        out[(cols[p], cols[q])] = m[(p, q)];
                    }
                }
                Ok(out)
            }
            Factorization::Dense(u) => u.matmul(m)?.matmul(&u.adjoint()),
        }
    }

    /// `U (A ⊗ I) U†` as a global observable.
    pub fn local_left(&self, a: &Observable) -> Result<Observable> {
        self.check_factor(a, self.d1, "left-factor observable")?;
        Observable::new(self.lift_operator(a.on_left(self.d2).matrix())?)
    }

    /// `U (I ⊗ B) U†` as a global observable.
    pub fn local_right(&self, b: &Observable) -> Result<Observable> {
        self.check_factor(b, self.d2, "right-factor observable")?;
        Observable::new(self.lift_operator(b.on_right(self.d1).matrix())?)
    }

    pub(crate) fn check_factor(
        &self,
        op: &Observable,
        dim: usize,
        context: &'static str,
    ) -> Result<()> {
        if op.dim() != dim {
            return Err(Error::Dimension {
                context,
                expected: dim,
                found: op.dim(),
            });
        }
        Ok(())
    }

    /// New structure whose product index `t` is the old product index
    /// `bij⁻¹(t)`, i.e. old basis element `(i, j)` is relabeled `bij(i, j)`.
    pub fn relabel(&self, bij: &IndexBijection) -> Result<Self> {
        if bij.source_dims() != self.dims() {
            return Err(Error::Dimension {
                context: "bijection source vs tensor product structure",
                expected: self.global_dim(),
                found: bij.len(),
            });
        }
        let (e1, e2) = bij.target_dims();
        let factorization = match &self.factorization {
            Factorization::Identity => {
                if bij.is_identity() {
                    Factorization::Identity
                } else {
                    Factorization::Permutation(bij.inverse_table().to_vec())
                }
            }
            Factorization::Permutation(cols) => {
                let composed: Vec<usize> = bij.inverse_table().iter().map(|&p| cols[p]).collect();
                if is_identity_permutation(&composed) {
                    Factorization::Identity
                } else {
                    Factorization::Permutation(composed)
                }
            }
            Factorization::Dense(u) => {
                let inv = bij.inverse_table();
                Factorization::Dense(ComplexMatrix::from_fn(u.rows(), u.cols(), |r, t| {
                    u[(r, inv[t])]
                }))
            }
        };
        let (label_left, label_right) = if bij.is_identity() {
            (self.label_left.clone(), self.label_right.clone())
        } else {
            (None, None)
        };
        Ok(Self {
            d1: e1,
            d2: e2,
            factorization,
            label_left,
            label_right,
        })
    }
}

/// Bijection between the index grids `d1 × d2` and `e1 × e2` (`d1·d2 = e1·e2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexBijection {
    source: (usize, usize),
    target: (usize, usize),
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl IndexBijection {
    /// Builds the bijection from `f(i, j) = (a, b)`, checking bijectivity
    /// over the full grid.
    pub fn from_fn(
        source: (usize, usize),
        target: (usize, usize),
        mut f: impl FnMut(usize, usize) -> (usize, usize),
    ) -> Result<Self> {
        let mut pairs = Vec::with_capacity(source.0 * source.1);
        for i in 0..source.0 {
            for j in 0..source.1 {
                pairs.push(f(i, j));
            }
        }
        Self::from_table(source, target, &pairs)
    }

    /// `targets[i·d2 + j] = (a, b)`.
    pub fn from_table(
        source: (usize, usize),
        target: (usize, usize),
        targets: &[(usize, usize)],
    ) -> Result<Self> {
        let n = global_dim(source.0, source.1)?;
        if global_dim(target.0, target.1)? != n {
            return Err(Error::InvalidBijection(format!(
                "grids {}x{} and {}x{} have different sizes",
                source.0, source.1, target.0, target.1
            )));
        }
        if targets.len() != n {
            return Err(Error::InvalidBijection(format!(
                "expected {n} entries, found {}",
                targets.len()
            )));
        }
        let mut inverse = vec![usize::MAX; n];
        let mut forward = Vec::with_capacity(n);
        for (p, &(a, b)) in targets.iter().enumerate() {
            if a >= target.0 || b >= target.1 {
                return Err(Error::InvalidBijection(format!(
                    "({}, {}) maps outside the {}x{} grid",
                    p / source.1,
                    p % source.1,
                    target.0,
                    target.1
                )));
            }
            let t = a * target.1 + b;
            if inverse[t] != usize::MAX {
                let q = inverse[t];
                return Err(Error::InvalidBijection(format!(
                    "({}, {}) and ({}, {}) both map to ({a}, {b})",
                    q / source.1,
                    q % source.1,
                    p / source.1,
                    p % source.1
                )));
            }
            inverse[t] = p;
            forward.push(t);
        }
        Ok(Self {
            source,
            target,
            forward,
            inverse,
        })
    }

    pub fn identity(d1: usize, d2: usize) -> Result<Self> {
        Self::from_fn((d1, d2), (d1, d2), |i, j| (i, j))
    }

    /// `(i, j) → (j, i)`, mapping a `d1 × d2` grid onto `d2 × d1`.
    pub fn swap(d1: usize, d2: usize) -> Result<Self> {
        Self::from_fn((d1, d2), (d2, d1), |i, j| (j, i))
    }

    /// `(i, j) → (left[i], right[j])`; mixes nothing across factors.
    pub fn factor_local(left: &[usize], right: &[usize]) -> Result<Self> {
        let dims = (left.len(), right.len());
        Self::from_fn(dims, dims, |i, j| (left[i], right[j]))
    }

    /// Modular sum/difference labels on an odd `d × d` grid:
    /// `a = (i + j) mod d`, `b = (i - j) mod d`.
    pub fn sum_diff(d: usize) -> Result<Self> {
        if d.is_multiple_of(2) {
            return Err(Error::EvenGrid { d });
        }
        Self::from_fn((d, d), (d, d), |i, j| ((i + j) % d, (i + d - j) % d))
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source
    }

    pub fn target_dims(&self) -> (usize, usize) {
        self.target
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn apply(&self, i: usize, j: usize) -> (usize, usize) {
        let t = self.forward[i * self.source.1 + j];
        (t / self.target.1, t % self.target.1)
    }

    pub fn invert(&self, a: usize, b: usize) -> (usize, usize) {
        let p = self.inverse[a * self.target.1 + b];
        (p / self.source.1, p % self.source.1)
    }

    /// Flat forward table: `forward[i·d2 + j] = a·e2 + b`.
    pub fn forward_table(&self) -> &[usize] {
        &self.forward
    }

    /// Flat inverse table.
    pub fn inverse_table(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && is_identity_permutation(&self.forward)
    }
}

/// Modular inverse of two for odd `d`.
pub fn inverse_of_two(d: usize) -> usize {
    debug_assert!(d % 2 == 1);
    d.div_ceil(2)
}

/// Components of `ψ` in `tps`, reshaped into the `d1 × d2` matrix `C[k][r]`.
pub fn coefficient_matrix(
    psi: &StateVector,
    tps: &TensorProductStructure,
) -> Result<ComplexMatrix> {
    let coords = tps.to_product_coords(psi.vector())?;
    Ok(ComplexMatrix::from_vec_unchecked(
        tps.d1(),
        tps.d2(),
        coords.into_vec(),
    ))
}

/// Structure obtained from the trivial one by relabeling `(i, j) → bij(i, j)`.
pub fn relabel_tps(bij: &IndexBijection) -> Result<TensorProductStructure> {
    let (d1, d2) = bij.source_dims();
    TensorProductStructure::trivial(d1, d2)?.relabel(bij)
}

/// Structure whose product basis `χ_{s,t}` is the joint eigenbasis of two
/// commuting observables, `s` indexing the `d1` distinct eigenvalues of `f`
/// and `t` the `d2` distinct eigenvalues of `g`, both in descending order.
pub fn tps_from_joint_eigenbasis(
    f: &Observable,
    g: &Observable,
    d1: usize,
    d2: usize,
) -> Result<TensorProductStructure> {
    let dim = global_dim(d1, d2)?;
    for op in [f, g] {
        if op.dim() != dim {
            return Err(Error::Dimension {
                context: "joint eigenbasis observable",
                expected: dim,
                found: op.dim(),
            });
        }
    }
    let deviation = f.matrix().commutator(g.matrix())?.max_abs();
    if deviation > COMMUTATOR_TOL {
        return Err(Error::NotCommuting {
            deviation,
            tol: COMMUTATOR_TOL,
        });
    }

    let f_tol = EIGENVALUE_CLUSTER_TOL * f.matrix().max_abs().max(1.0);
    let g_tol = EIGENVALUE_CLUSTER_TOL * g.matrix().max_abs().max(1.0);

    let f_eig = eigh(f.matrix())?;
    let f_clusters = cluster(&f_eig.values, f_tol);
    let f_mult: Vec<usize> = f_clusters.iter().map(|c| c.len()).collect();
    if f_clusters.len() != d1 || f_mult.iter().any(|&m| m != d2) {
        return Err(Error::SpectrumStructure {
            d1,
            d2,
            detail: format!("first observable has eigenvalue multiplicities {f_mult:?}"),
        });
    }

    let mut columns = vec![ComplexVector::zeros(dim); dim];
    let mut reference_g: Option<Vec<f64>> = None;
    // descending F eigenvalue order
    for (s, cluster_idx) in f_clusters.iter().rev().enumerate() {
        let block = ComplexMatrix::from_fn(dim, cluster_idx.len(), |r, c| {
            f_eig.vectors[(r, cluster_idx[c])]
        });
        let restricted = block.adjoint().matmul(g.matrix())?.matmul(&block)?;
        let g_eig = eigh(&restricted)?;
        let g_clusters = cluster(&g_eig.values, g_tol);
        if g_clusters.len() != d2 {
            let g_mult: Vec<usize> = g_clusters.iter().map(|c| c.len()).collect();
            return Err(Error::SpectrumStructure {
                d1,
                d2,
                detail: format!(
                    "second observable has multiplicities {g_mult:?} inside eigenspace {s} of the first"
                ),
            });
        }
        let mut values = g_eig.values.clone();
        values.reverse();
        match &reference_g {
            None => reference_g = Some(values),
            Some(reference) => {
                if reference
                    .iter()
                    .zip(&values)
                    .any(|(a, b)| (a - b).abs() > g_tol)
                {
                    return Err(Error::SpectrumStructure {
                        d1,
                        d2,
                        detail: format!(
                            "second observable eigenvalues {values:?} in eigenspace {s} differ from {reference:?}"
                        ),
                    });
                }
            }
        }
        for t in 0..d2 {
            let w = g_eig.vectors.column(d2 - 1 - t);
            let mut chi = block.matvec(&w)?;
            chi.fix_phase();
            columns[s * d2 + t] = chi;
        }
    }
    let u = ComplexMatrix::from_columns(&columns)?;
    TensorProductStructure::from_unitary(d1, d2, u)
}

/// Groups ascending `values` into runs of near-equal entries.
fn cluster(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if (v - values[*last.last().unwrap()]).abs() <= tol => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Structure with factorization unitary `U · (U_A ⊗ U_B)`.
pub fn local_unitary_tps(
    tps: &TensorProductStructure,
    ua: &ComplexMatrix,
    ub: &ComplexMatrix,
) -> Result<TensorProductStructure> {
    for (m, d, context) in [
        (ua, tps.d1(), "left local unitary"),
        (ub, tps.d2(), "right local unitary"),
    ] {
        if m.rows() != d || m.cols() != d {
            return Err(Error::Dimension {
                context,
                expected: d,
                found: m.rows(),
            });
        }
        m.ensure_unitary(UNITARITY_TOL)?;
    }
    let local = ua.kron(ub);
    let u = match tps.factorization() {
        Factorization::Identity => local,
        _ => tps.unitary().matmul(&local)?,
    };
    let (label_left, label_right) = (tps.label_left.clone(), tps.label_right.clone());
    let mut out = TensorProductStructure::from_unitary(tps.d1(), tps.d2(), u)?;
    out.label_left = label_left;
    out.label_right = label_right;
    Ok(out)
}

/// A structure of the same shape in which `ψ` is the product basis state
/// `(0, 0)`: `ψ` is completed to an orthonormal basis by Gram–Schmidt over
/// the global computational basis.
pub fn disentangling_tps(
    psi: &StateVector,
    tps: &TensorProductStructure,
) -> Result<TensorProductStructure> {
    let dim = tps.global_dim();
    if psi.dim() != dim {
        return Err(Error::Dimension {
            context: "disentangling state",
            expected: dim,
            found: psi.dim(),
        });
    }
    let candidates =
        std::iter::once(psi.vector().clone()).chain((0..dim).map(|g| ComplexVector::basis(dim, g)));
    let basis = orthonormalize(candidates, 1e-6, dim);
    if basis.len() != dim {
        return Err(Error::Degenerate(format!(
            "basis completion produced {} of {dim} vectors",
            basis.len()
        )));
    }
    TensorProductStructure::from_unitary(tps.d1(), tps.d2(), ComplexMatrix::from_columns(&basis)?)
}
