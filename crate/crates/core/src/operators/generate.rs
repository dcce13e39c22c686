use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use super::{GroundTruth, Instance, InstanceMeta, MeasurementEnsemble};
use crate::error::{check_dim, Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::spectral::dense_eig_reference;

/// Gaussian instance: rows `a_i` and signal `x` i.i.d. standard normal, `b = (a_iᵀx)²`.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> Result<Instance> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "m and n must be positive (got {m}, {n})"
        )));
    }
    let mut rng = stream_rng(seed, Stream::Measurements, 0);
    let a = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    let mut rng = stream_rng(seed, Stream::Signal, 0);
    let x = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    Instance::from_signal(
        MeasurementEnsemble::new(a)?,
        GroundTruth::new(x)?,
        InstanceMeta {
            generator: "gaussian".into(),
            seed: Some(seed),
            image_dims: None,
        },
    )
}

/// Entry `(i, j)` of the Sylvester Hadamard matrix of any power-of-two order.
pub fn sylvester_hadamard_entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Order of the Sylvester matrix used for an `m × n` draw: `2^⌈log2 max(m, n)⌉`.
pub fn hadamard_order(m: usize, n: usize) -> usize {
    m.max(n).max(1).next_power_of_two()
}

/// Which `n` columns of the Sylvester matrix a Hadamard draw keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HadamardColumns {
    /// The first `n`. Rows then depend only on the low `⌈log2 n⌉` bits of
    /// their index, so at most `2^⌈log2 n⌉` of them are distinct.
    Leading,
    /// A seeded uniform subset, in ascending order.
    #[default]
    Random,
}

impl std::str::FromStr for HadamardColumns {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" => Ok(Self::Leading),
            "random" => Ok(Self::Random),
            other => Err(Error::Parse(format!(
                "unknown hadamard column rule '{other}'"
            ))),
        }
    }
}

/// Samples `m` distinct rows of the Sylvester Hadamard matrix of order
/// [`hadamard_order`], restricted to a seeded random subset of `n` columns.
pub fn gen_hadamard(m: usize, n: usize, seed: u64) -> Result<MeasurementEnsemble> {
    gen_hadamard_with(m, n, seed, HadamardColumns::Random)
}

/// [`gen_hadamard`] with an explicit column rule. Rows appear in ascending
/// order of their index in the full matrix.
pub fn gen_hadamard_with(
    m: usize,
    n: usize,
    seed: u64,
    columns: HadamardColumns,
) -> Result<MeasurementEnsemble> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "m and n must be positive (got {m}, {n})"
        )));
    }
    let order = hadamard_order(m, n);
    if m > order {
        return Err(Error::InvalidParameter(format!(
            "m = {m} exceeds Hadamard order {order}"
        )));
    }
    let mut rng = stream_rng(seed, Stream::Rows, 0);
    let mut rows = index::sample(&mut rng, order, m).into_vec();
    rows.sort_unstable();
    let cols: Vec<usize> = match columns {
        HadamardColumns::Leading => (0..n).collect(),
        HadamardColumns::Random => {
            let mut c = index::sample(&mut rng, order, n).into_vec();
            c.sort_unstable();
            c
        }
    };
    let a = DMatrix::from_fn(m, n, |r, c| sylvester_hadamard_entry(rows[r], cols[c]));
    MeasurementEnsemble::new(a)
}

/// Rewrites `min ⟨C, W⟩ s.t. diag(W) = b, W ⪰ 0` in measurement form.
///
/// `C` is symmetrized; when it is not positive definite it is shifted by
/// `(1 - λ_min)·I`, which leaves the problem unchanged since the diagonal of
/// `W` is fixed. The result is factored as `LLᵀ` and `a_i` is column `i` of
/// `L⁻¹`, so that `a_iᵀ (LᵀWL) a_i = W_ii` and `⟨C, W⟩ = tr(LᵀWL)`.
pub fn from_diag_sdp(c: &DMatrix<f64>, b: &DVector<f64>) -> Result<MeasurementEnsemble> {
    let n = c.nrows();
    check_dim("from_diag_sdp cost", n, c.ncols())?;
    check_dim("from_diag_sdp rhs", n, b.len())?;
    if b.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(
            "diagonal targets must be positive".into(),
        ));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::CholeskyFailed);
    }
    let sym = (c + c.transpose()) * 0.5;
    let lambda_min = dense_eig_reference(&sym)?.values[n - 1];
    let shift = if lambda_min > 0.0 {
        0.0
    } else {
        1.0 - lambda_min
    };
    let shifted = sym + DMatrix::identity(n, n) * shift;
    let chol = shifted.cholesky().ok_or(Error::CholeskyFailed)?;
    let l = chol.l();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::CholeskyFailed)?;
    MeasurementEnsemble::new(l_inv.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_deterministic() {
        let a = gen_gaussian(20, 5, 42).unwrap();
        let b = gen_gaussian(20, 5, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_gaussian(20, 5, 43).unwrap();
        assert_ne!(a.ensemble, c.ensemble);
    }

    #[test]
    fn gaussian_statistics_and_signs() {
        let (m, n) = (500, 40);
        let inst = gen_gaussian(m, n, 1).unwrap();
        let mean = inst.ensemble.matrix().mean();
        assert!(mean.abs() <= 4.0 / ((m * n) as f64).sqrt(), "mean {mean}");
        assert!(inst.b.values().iter().all(|&v| v >= 0.0));
        let x = inst.x.unwrap();
        let again = inst.ensemble.forward_rank1(x.values()).unwrap();
        assert_eq!(&again, inst.b.values());
    }

    #[test]
    fn hadamard_entries_and_orthogonality() {
        let e = gen_hadamard(40, 27, 3).unwrap();
        assert!(e.matrix().iter().all(|&v| v == 1.0 || v == -1.0));
        let order = hadamard_order(40, 27);
        assert_eq!(order, 64);
        // rows of the full order-64 matrix are mutually orthogonal
        for (i, k) in [(0usize, 5usize), (7, 63), (12, 33)] {
            let dot: f64 = (0..order)
                .map(|j| sylvester_hadamard_entry(i, j) * sylvester_hadamard_entry(k, j))
                .sum();
            assert_eq!(dot, 0.0);
        }
        assert_eq!(e, gen_hadamard(40, 27, 3).unwrap());
        assert_ne!(e, gen_hadamard(40, 27, 4).unwrap());
    }

    #[test]
    fn hadamard_leading_columns_collapse_rows() {
        let distinct = |e: &MeasurementEnsemble| {
            let mut rows: Vec<Vec<i8>> = e
                .matrix()
                .row_iter()
                .map(|r| r.iter().map(|&v| v as i8).collect())
                .collect();
            rows.sort();
            rows.dedup();
            rows.len()
        };
        let lead = gen_hadamard_with(1000, 121, 1, HadamardColumns::Leading).unwrap();
        assert!(lead.matrix().column(0).iter().all(|&v| v == 1.0));
        assert!(distinct(&lead) <= 128);
        assert_eq!(distinct(&gen_hadamard(1000, 121, 1).unwrap()), 1000);
    }

    #[test]
    fn hadamard_rejects_oversampling() {
        // order is driven by max(m, n), so m never exceeds it for valid shapes;
        // the full matrix can be drawn exactly once.
        let e = gen_hadamard(16, 16, 0).unwrap();
        let g = e.matrix().transpose() * e.matrix();
        assert!((g - DMatrix::identity(16, 16) * 16.0).norm() == 0.0);
        assert!(gen_hadamard(0, 4, 0).is_err());
    }

    #[test]
    fn diag_sdp_identity_cost() {
        let c = DMatrix::identity(4, 4);
        let e = from_diag_sdp(&c, &DVector::from_element(4, 1.0)).unwrap();
        assert_eq!(e.matrix(), &DMatrix::identity(4, 4));
        let w = DMatrix::from_fn(4, 4, |i, j| (i + j) as f64);
        let out = e.forward_full(&w).unwrap();
        for i in 0..4 {
            assert_eq!(out[i], w[(i, i)]);
        }
    }

    #[test]
    fn diag_sdp_indefinite_cost_is_shifted() {
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, -1.0]);
        let e = from_diag_sdp(&c, &DVector::from_element(2, 1.0)).unwrap();
        // Σ a_i a_iᵀ = (LᵀL)⁻¹ must be positive definite
        let gram = e.adjoint_dense(&DVector::from_element(2, 1.0)).unwrap();
        assert!(gram.cholesky().is_some());
    }

    #[test]
    fn diag_sdp_rejects_bad_input() {
        let c = DMatrix::identity(3, 3);
        assert!(from_diag_sdp(&c, &DVector::from_vec(vec![1.0, 0.0, 1.0])).is_err());
        let mut bad = c.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(matches!(
            from_diag_sdp(&bad, &DVector::from_element(3, 1.0)),
            Err(Error::CholeskyFailed)
        ));
    }
}
