use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Euclidean projection onto the hyperplane `{y : ⟨y, b⟩ = 1}`:
/// `(I − bbᵀ/bᵀb) s + b/bᵀb`.
pub fn project_hyperplane(s: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim("project_hyperplane", b.len(), s.len())?;
    let bb = b.norm_squared();
    if bb == 0.0 {
        return Err(Error::ZeroObservations);
    }
    let coef = (s.dot(b) - 1.0) / bb;
    Ok(s - b * coef)
}

#[derive(Debug, Clone, PartialEq)]
pub enum NullBasisKind {
    /// `m × (m−1)` orthonormal basis from a Householder reflection of `b`.
    DenseOrthonormal(DMatrix<f64>),
    /// Column `j` is `e_{row(j)} − (b_{row(j)}/b_p) e_p` with pivot `p = argmax b`;
    /// `ratios[i] = b_i / b_p`.
    SparseNearIdentity { pivot: usize, ratios: DVector<f64> },
}

/// A basis `B` of `null(bᵀ)` and an anchor `ȳ` with `⟨ȳ, b⟩ = 1`, so that
/// `y = Bz + ȳ` is dual feasible for every `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullBasis {
    kind: NullBasisKind,
    anchor: DVector<f64>,
}

impl NullBasis {
    /// Orthonormal basis from the full QR of `b` (a single Householder
    /// reflection); anchor `b / bᵀb`.
    pub fn dense(b: &DVector<f64>) -> Result<Self> {
        let m = b.len();
        let norm = b.norm();
        if norm == 0.0 {
            return Err(Error::ZeroObservations);
        }
        // H = I − 2vvᵀ/vᵀv maps b onto a multiple of e_0, so columns 1.. of H span null(bᵀ)
        let mut v = b.clone();
        v[0] += if b[0] >= 0.0 { norm } else { -norm };
        let vv = v.norm_squared();
        let basis = DMatrix::from_fn(m, m - 1, |i, j| {
            let delta = if i == j + 1 { 1.0 } else { 0.0 };
            delta - 2.0 * v[i] * v[j + 1] / vv
        });
        Ok(Self {
            kind: NullBasisKind::DenseOrthonormal(basis),
            anchor: b / b.norm_squared(),
        })
    }

    /// Sparse basis pivoting on the largest observation (ties to the smallest index).
    pub fn sparse(b: &DVector<f64>) -> Result<Self> {
        let mut pivot = 0;
        for i in 1..b.len() {
            if b[i] > b[pivot] {
                pivot = i;
            }
        }
        let top = b[pivot];
        if !(top > 0.0) {
            return Err(Error::NoPositiveObservation);
        }
        let mut anchor = DVector::zeros(b.len());
        anchor[pivot] = 1.0 / top;
        Ok(Self {
            kind: NullBasisKind::SparseNearIdentity {
                pivot,
                ratios: b / top,
            },
            anchor,
        })
    }

    pub fn kind(&self) -> &NullBasisKind {
        &self.kind
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    /// Length of `y`.
    pub fn m(&self) -> usize {
        self.anchor.len()
    }

    /// Length of `z`.
    pub fn dim(&self) -> usize {
        self.m() - 1
    }

    pub fn pivot(&self) -> Option<usize> {
        match &self.kind {
            NullBasisKind::SparseNearIdentity { pivot, .. } => Some(*pivot),
            NullBasisKind::DenseOrthonormal(_) => None,
        }
    }

    /// Row holding the `+1` of sparse column `j`.
    pub fn sparse_row(pivot: usize, j: usize) -> usize {
        if j < pivot {
            j
        } else {
            j + 1
        }
    }

    /// Nonzero `(row, value)` entries of column `j`.
    pub fn column_entries(&self, j: usize) -> Vec<(usize, f64)> {
        match &self.kind {
            NullBasisKind::SparseNearIdentity { pivot, ratios } => {
                let row = Self::sparse_row(*pivot, j);
                vec![(row, 1.0), (*pivot, -ratios[row])]
            }
            NullBasisKind::DenseOrthonormal(basis) => basis
                .column(j)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    /// `B z`.
    pub fn apply(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("NullBasis::apply", self.dim(), z.len())?;
        Ok(match &self.kind {
            NullBasisKind::DenseOrthonormal(basis) => basis * z,
            NullBasisKind::SparseNearIdentity { pivot, ratios } => {
                let mut y = DVector::zeros(self.m());
                let mut acc = 0.0;
                for (j, &zj) in z.iter().enumerate() {
                    let row = Self::sparse_row(*pivot, j);
                    y[row] = zj;
                    acc += ratios[row] * zj;
                }
                y[*pivot] = -acc;
                y
            }
        })
    }

    /// `Bᵀ g`.
    pub fn apply_transpose(&self, g: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("NullBasis::apply_transpose", self.m(), g.len())?;
        Ok(match &self.kind {
            NullBasisKind::DenseOrthonormal(basis) => basis.tr_mul(g),
            NullBasisKind::SparseNearIdentity { pivot, ratios } => {
                let gp = g[*pivot];
                DVector::from_fn(self.dim(), |j, _| {
                    let row = Self::sparse_row(*pivot, j);
                    g[row] - ratios[row] * gp
                })
            }
        })
    }

    /// `y = Bz + ȳ`.
    pub fn to_dual(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.apply(z)? + &self.anchor)
    }

    /// Explicit `m × (m−1)` matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.kind {
            NullBasisKind::DenseOrthonormal(basis) => basis.clone(),
            NullBasisKind::SparseNearIdentity { .. } => {
                let mut out = DMatrix::zeros(self.m(), self.dim());
                for j in 0..self.dim() {
                    for (i, v) in self.column_entries(j) {
                        out[(i, j)] = v;
                    }
                }
                out
            }
        }
    }
}
