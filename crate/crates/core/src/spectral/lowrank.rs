use nalgebra::{DMatrix, DVector};

use super::dense::{qr_thin, sym_eig_unchecked};
use super::SymmetricOperator;
use crate::error::{check_dim, Error, Result};

/// Tolerance on `‖UᵀU − I‖_F` for a valid factor.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Which eigenpairs survive truncation to rank `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneRule {
    /// Keep the `r` largest algebraic eigenvalues (trace + PSD gauge).
    Algebraic,
    /// Keep the `r` largest in magnitude (nuclear gauge).
    Magnitude,
}

/// Symmetric rank-`r` factorization `U diag(D) Uᵀ`.
///
/// `U` has orthonormal columns and `D` is sorted in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor {
    u: DMatrix<f64>,
    d: DVector<f64>,
}

impl LowRankFactor {
    /// Rank-zero factor in dimension `n`.
    pub fn empty(n: usize) -> Self {
        Self {
            u: DMatrix::zeros(n, 0),
            d: DVector::zeros(0),
        }
    }

    /// Validates orthonormality and ordering.
    pub fn new(u: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        check_dim("LowRankFactor", u.ncols(), d.len())?;
        let r = d.len();
        let err = (u.transpose() * &u - DMatrix::identity(r, r)).norm();
        if err > ORTHONORMALITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "factor columns are not orthonormal (error {err:.3e})"
            )));
        }
        if d.as_slice().windows(2).any(|p| p[0] < p[1]) {
            return Err(Error::InvalidParameter(
                "factor values are not sorted".into(),
            ));
        }
        Ok(Self { u, d })
    }

    /// Top-`r` factor of a dense symmetric matrix under `rule`.
    pub fn from_dense(w: &DMatrix<f64>, r: usize, rule: PruneRule) -> Result<Self> {
        let eig = super::dense_eig_reference(w)?;
        let full = Self {
            u: eig.vectors,
            d: eig.values,
        };
        Ok(full.pruned(r, rule))
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.d
    }

    /// Index of the leading pair under `rule`: the first column for
    /// [`PruneRule::Algebraic`], the largest `|d|` (ties to the positive end)
    /// for [`PruneRule::Magnitude`].
    pub fn leading_index(&self, rule: PruneRule) -> Option<usize> {
        let r = self.rank();
        if r == 0 {
            return None;
        }
        Some(match rule {
            PruneRule::Algebraic => 0,
            PruneRule::Magnitude => {
                if self.d[r - 1].abs() > self.d[0].abs() {
                    r - 1
                } else {
                    0
                }
            }
        })
    }

    /// Leading `(value, unit vector)` under `rule`.
    pub fn leading(&self, rule: PruneRule) -> Option<(f64, DVector<f64>)> {
        self.leading_index(rule)
            .map(|k| (self.d[k], self.u.column(k).into_owned()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let scaled = &self.u * DMatrix::from_diagonal(&self.d);
        scaled * self.u.transpose()
    }

    pub fn orthonormality_error(&self) -> f64 {
        let r = self.rank();
        (self.u.transpose() * &self.u - DMatrix::identity(r, r)).norm()
    }

    fn pruned(self, r: usize, rule: PruneRule) -> Self {
        if r >= self.rank() {
            return self;
        }
        let mut keep: Vec<usize> = match rule {
            PruneRule::Algebraic => (0..r).collect(),
            PruneRule::Magnitude => {
                let mut idx: Vec<usize> = (0..self.rank()).collect();
                // stable: equal magnitudes keep the larger (earlier) value
                idx.sort_by(|&a, &b| self.d[b].abs().total_cmp(&self.d[a].abs()));
                idx.truncate(r);
                idx
            }
        };
        keep.sort_unstable();
        Self {
            u: self.u.select_columns(keep.iter()),
            d: DVector::from_iterator(keep.len(), keep.iter().map(|&k| self.d[k])),
        }
    }
}

impl SymmetricOperator for LowRankFactor {
    fn dim(&self) -> usize {
        self.u.nrows()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut c = self.u.tr_mul(v);
        c.component_mul_assign(&self.d);
        &self.u * c
    }
}

/// Truncates to `r` eigenpairs chosen by `rule`; identity when `r ≥ rank`.
pub fn prune_rank(factor: &LowRankFactor, r: usize, rule: PruneRule) -> Result<LowRankFactor> {
    if r < 1 {
        return Err(Error::InvalidParameter(
            "prune rank must be at least 1".into(),
        ));
    }
    Ok(factor.clone().pruned(r, rule))
}

/// Rank-`|I|` update `U D Uᵀ + A_I diag(Δy) A_Iᵀ`, pruned back to `r_out`.
///
/// `[U | A_I] = QR`, then the small matrix `R blockdiag(D, Δy) Rᵀ` is
/// diagonalized as `Ũ D' Ũᵀ` and the new basis is `QŨ`. Cost is
/// `O(n k² + k³)` with `k = r + |I|`; no `n × n` matrix is formed.
pub fn lowrank_update(
    factor: &LowRankFactor,
    a_cols: &DMatrix<f64>,
    delta: &DVector<f64>,
    r_out: usize,
    rule: PruneRule,
) -> Result<LowRankFactor> {
    if r_out < 1 {
        return Err(Error::InvalidParameter(
            "output rank must be at least 1".into(),
        ));
    }
    check_dim("lowrank_update columns", factor.dim(), a_cols.nrows())?;
    check_dim("lowrank_update weights", a_cols.ncols(), delta.len())?;
    let n = factor.dim();
    let r = factor.rank();
    let p = a_cols.ncols();
    if p == 0 {
        return prune_rank(factor, r_out, rule);
    }

    let mut stacked = DMatrix::zeros(n, r + p);
    stacked.columns_mut(0, r).copy_from(&factor.u);
    stacked.columns_mut(r, p).copy_from(a_cols);
    let (q, rr) = qr_thin(&stacked);

    // R D̃ Rᵀ with D̃ = blockdiag(D, Δy)
    let mut scaled = rr.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        let w = if j < r { factor.d[j] } else { delta[j - r] };
        col *= w;
    }
    let small = &scaled * rr.transpose();
    let small = (&small + small.transpose()) * 0.5;
    let eig = sym_eig_unchecked(&small);

    let updated = LowRankFactor {
        u: q * eig.vectors,
        d: eig.values,
    };
    Ok(updated.pruned(r_out, rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use crate::spectral::dense_eig_reference;
    use crate::spectral::test_util::random_symmetric;
    use rand_distr::{Distribution, StandardNormal};

    fn random_cols(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = stream_rng(seed, Stream::Test, 11);
        DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn rank_one_from_empty() {
        let a = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
        let f = lowrank_update(
            &LowRankFactor::empty(3),
            &a,
            &DVector::from_element(1, 0.5),
            4,
            PruneRule::Algebraic,
        )
        .unwrap();
        assert_eq!(f.rank(), 1);
        assert!((f.values()[0] - 4.5).abs() < 1e-14);
        let u = f.basis().column(0).into_owned();
        assert!((u.abs() - a.column(0) / 3.0).norm() < 1e-14);
    }

    #[test]
    fn rejects_zero_rank() {
        let f = LowRankFactor::empty(2);
        assert!(lowrank_update(
            &f,
            &DMatrix::zeros(2, 1),
            &DVector::zeros(1),
            0,
            PruneRule::Algebraic
        )
        .is_err());
        assert!(prune_rank(&f, 0, PruneRule::Algebraic).is_err());
    }

    #[test]
    fn exact_when_rank_is_not_limited() {
        let n = 12;
        let mut f = LowRankFactor::empty(n);
        let mut exact = DMatrix::zeros(n, n);
        for step in 0..6 {
            let a = random_cols(n, 3, step);
            let d = DVector::from_vec(vec![1.0, -0.5, 2.0 + step as f64]);
            exact += &a * DMatrix::from_diagonal(&d) * a.transpose();
            f = lowrank_update(&f, &a, &d, n, PruneRule::Algebraic).unwrap();
            assert!(f.orthonormality_error() <= ORTHONORMALITY_TOL);
            assert!(f.values().as_slice().windows(2).all(|p| p[0] >= p[1]));
        }
        assert!((f.to_dense() - &exact).norm() <= 1e-10 * exact.norm());
    }

    #[test]
    fn prune_matches_dense_truncation() {
        for seed in 0..10 {
            let w = random_symmetric(15, seed);
            let full = LowRankFactor::from_dense(&w, 15, PruneRule::Algebraic).unwrap();
            let eig = dense_eig_reference(&w).unwrap();

            let alg = prune_rank(&full, 4, PruneRule::Algebraic).unwrap();
            for k in 0..4 {
                assert!((alg.values()[k] - eig.values[k]).abs() < 1e-12);
            }

            let mag = prune_rank(&full, 4, PruneRule::Magnitude).unwrap();
            let mut by_mag: Vec<f64> = eig.values.iter().cloned().collect();
            by_mag.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
            let mut want: Vec<f64> = by_mag[..4].to_vec();
            want.sort_by(|a, b| b.total_cmp(a));
            for k in 0..4 {
                assert!((mag.values()[k] - want[k]).abs() < 1e-12);
            }
            // best rank-4 Frobenius error among truncations is the magnitude rule
            let err_mag = (mag.to_dense() - &w).norm();
            let err_alg = (alg.to_dense() - &w).norm();
            assert!(err_mag <= err_alg + 1e-12);
        }
    }

    #[test]
    fn prune_small_cases() {
        let f = LowRankFactor::new(
            DMatrix::identity(4, 3),
            DVector::from_vec(vec![5.0, 3.0, 1.0]),
        )
        .unwrap();
        let p = prune_rank(&f, 2, PruneRule::Algebraic).unwrap();
        assert_eq!(p.values().as_slice(), &[5.0, 3.0]);
        assert_eq!(prune_rank(&f, 3, PruneRule::Algebraic).unwrap(), f);
        assert_eq!(prune_rank(&f, 10, PruneRule::Magnitude).unwrap(), f);

        let g = LowRankFactor::new(
            DMatrix::identity(3, 3),
            DVector::from_vec(vec![2.0, 1.0, -7.0]),
        )
        .unwrap();
        let p = prune_rank(&g, 2, PruneRule::Magnitude).unwrap();
        assert_eq!(p.values().as_slice(), &[2.0, -7.0]);
        assert_eq!(g.leading(PruneRule::Magnitude).unwrap().0, -7.0);
        assert_eq!(g.leading(PruneRule::Algebraic).unwrap().0, 2.0);
    }

    #[test]
    fn new_validates() {
        assert!(LowRankFactor::new(DMatrix::identity(3, 2) * 2.0, DVector::zeros(2)).is_err());
        assert!(
            LowRankFactor::new(DMatrix::identity(3, 2), DVector::from_vec(vec![1.0, 2.0])).is_err()
        );
    }

    #[test]
    fn pruned_update_matches_dense_best_truncation() {
        let n = 10;
        let base = random_symmetric(n, 3);
        let f = LowRankFactor::from_dense(&base, 3, PruneRule::Algebraic).unwrap();
        let a = random_cols(n, 2, 4);
        let d = DVector::from_vec(vec![0.7, 1.3]);
        let updated = lowrank_update(&f, &a, &d, 3, PruneRule::Algebraic).unwrap();
        // oracle: top-3 of the unpruned dense sum
        let dense = f.to_dense() + &a * DMatrix::from_diagonal(&d) * a.transpose();
        let eig = dense_eig_reference(&((&dense + dense.transpose()) * 0.5)).unwrap();
        for k in 0..3 {
            assert!((updated.values()[k] - eig.values[k]).abs() < 1e-10);
        }
        let truncated = LowRankFactor::from_dense(
            &((&dense + dense.transpose()) * 0.5),
            3,
            PruneRule::Algebraic,
        )
        .unwrap();
        assert!((updated.to_dense() - truncated.to_dense()).norm() < 1e-9);
    }
}
