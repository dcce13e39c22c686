use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operators::{relative_asymmetry, SYMMETRY_TOL};

/// Size guard for the dense reference decomposition.
pub const DENSE_EIG_MAX_N: usize = 2000;

/// Full symmetric spectrum with eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors, column `k` pairs with `values[k]`.
    pub vectors: DMatrix<f64>,
}

impl SymEig {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.vectors * DMatrix::from_diagonal(&self.values);
        scaled * self.vectors.transpose()
    }
}

/// Dense symmetric eigendecomposition, `W = V Λ Vᵀ`, values descending.
pub fn dense_eig_reference(w: &DMatrix<f64>) -> Result<SymEig> {
    if !w.is_square() {
        return Err(Error::DimensionMismatch {
            context: "dense_eig_reference",
            expected: w.nrows(),
            got: w.ncols(),
        });
    }
    if w.nrows() > DENSE_EIG_MAX_N {
        return Err(Error::TooLarge(w.nrows(), DENSE_EIG_MAX_N));
    }
    let asym = relative_asymmetry(w);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(sym_eig_unchecked(w))
}

pub(crate) fn sym_eig_unchecked(w: &DMatrix<f64>) -> SymEig {
    let n = w.nrows();
    if n == 0 {
        return SymEig {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(w.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = eig.eigenvectors.select_columns(order.iter());
    SymEig { values, vectors }
}

/// Economy QR, `M = QR` with `Q` of orthonormal columns.
///
/// For an `n × k` input, `Q` is `n × min(n, k)` and `R` is `min(n, k) × k`.
/// Rank-deficient input is fine; `R` then carries (near-)zero diagonal entries.
pub fn qr_thin(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, k) = m.shape();
    if n == 0 || k == 0 {
        return (DMatrix::zeros(n, 0), DMatrix::zeros(0, k));
    }
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}
