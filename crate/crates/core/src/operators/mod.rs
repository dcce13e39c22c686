//! The measurement operator `A(X)_i = a_iᵀ X a_i`, its adjoint
//! `A*(y) = Σ y_i a_i a_iᵀ`, and problem generators.

mod generate;
pub mod io;

pub use generate::{
    from_diag_sdp, gen_gaussian, gen_hadamard, gen_hadamard_with, hadamard_order,
    sylvester_hadamard_entry, HadamardColumns,
};
pub use io::{read_instance, write_instance};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::spectral::SymmetricOperator;

/// Relative Frobenius asymmetry tolerated by [`MeasurementEnsemble::forward_full`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// The `m` measurement vectors `a_i ∈ ℝⁿ`, stored as the rows of an `m × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    vectors: DMatrix<f64>,
}

impl MeasurementEnsemble {
    /// Wraps an `m × n` matrix whose rows are the measurement vectors.
    ///
    /// Rejects empty shapes, non-finite entries and all-zero rows.
    pub fn new(vectors: DMatrix<f64>) -> Result<Self> {
        let (m, n) = vectors.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidEnsemble(format!("empty shape {m}x{n}")));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidEnsemble("non-finite entry".into()));
        }
        for (i, row) in vectors.row_iter().enumerate() {
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidEnsemble(format!(
                    "row {i} is identically zero"
                )));
            }
        }
        Ok(Self { vectors })
    }

    pub fn m(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn n(&self) -> usize {
        self.vectors.ncols()
    }

    /// The `m × n` matrix of stacked measurement vectors.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// `a_i` as a column vector.
    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.row(i).transpose()
    }

    /// `n × |I|` matrix whose columns are `a_i` for `i ∈ indices`.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n(), indices.len());
        for (c, &i) in indices.iter().enumerate() {
            out.set_column(c, &self.vectors.row(i).transpose());
        }
        out
    }

    /// Inner products `a_iᵀ u` for every measurement.
    pub fn inner_products(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("inner_products", self.n(), u.len())?;
        Ok(&self.vectors * u)
    }

    /// `(a_iᵀ u)²` for every measurement; the lift of `u uᵀ`.
    pub fn forward_rank1(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.inner_products(u)?.map(|v| v * v))
    }

    /// `A(X)_i = a_iᵀ X a_i` for a symmetric `X`.
    pub fn forward_full(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        check_dim("forward_full rows", self.n(), x.nrows())?;
        check_dim("forward_full cols", self.n(), x.ncols())?;
        let asym = relative_asymmetry(x);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let ax = &self.vectors * x;
        Ok(DVector::from_iterator(
            self.m(),
            ax.row_iter()
                .zip(self.vectors.row_iter())
                .map(|(p, a)| p.dot(&a)),
        ))
    }

    /// Dense `A*(y) = Σ y_i a_i a_iᵀ`. Costs `O(mn²)` time and `n²` memory.
    pub fn adjoint_dense(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim("adjoint_dense", self.m(), y.len())?;
        let mut scaled = self.vectors.clone();
        for (mut row, &w) in scaled.row_iter_mut().zip(y.iter()) {
            row *= w;
        }
        let mut w = self.vectors.tr_mul(&scaled);
        mirror_upper(&mut w);
        Ok(w)
    }

    /// `A*(y) v` without forming the matrix: `Σ y_i a_i (a_iᵀ v)`.
    pub fn adjoint_matvec(&self, y: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("adjoint_matvec weights", self.m(), y.len())?;
        check_dim("adjoint_matvec vector", self.n(), v.len())?;
        let mut t = &self.vectors * v;
        t.component_mul_assign(y);
        Ok(self.vectors.tr_mul(&t))
    }

    /// Matrix-free handle for the full adjoint `A*(y)`.
    pub fn adjoint<'a>(&'a self, y: &'a DVector<f64>) -> Result<AdjointOperator<'a>> {
        check_dim("adjoint", self.m(), y.len())?;
        Ok(AdjointOperator { ensemble: self, y })
    }

    /// Matrix-free handle for `Σ_{i∈S} y_i a_i a_iᵀ`.
    pub fn adjoint_subsampled(
        &self,
        y: &DVector<f64>,
        indices: &[usize],
    ) -> Result<SubsampledAdjoint> {
        check_dim("adjoint_subsampled", self.m(), y.len())?;
        if indices.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= self.m()) {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.m(),
            });
        }
        Ok(SubsampledAdjoint {
            rows: self.rows(indices),
            weights: DVector::from_iterator(indices.len(), indices.iter().map(|&i| y[i])),
        })
    }

    /// `|I| × n` matrix of the selected rows.
    pub fn rows(&self, indices: &[usize]) -> DMatrix<f64> {
        self.vectors.select_rows(indices.iter())
    }

    /// `‖a_i‖²` for every measurement.
    pub fn row_norms_sq(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.vectors.row_iter().map(|r| r.norm_squared()))
    }
}

/// `A*(y)` applied through the full ensemble.
#[derive(Debug, Clone, Copy)]
pub struct AdjointOperator<'a> {
    ensemble: &'a MeasurementEnsemble,
    y: &'a DVector<f64>,
}

impl SymmetricOperator for AdjointOperator<'_> {
    fn dim(&self) -> usize {
        self.ensemble.n()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut t = self.ensemble.matrix() * v;
        t.component_mul_assign(self.y);
        self.ensemble.matrix().tr_mul(&t)
    }
}

/// `Σ_{i∈S} y_i a_i a_iᵀ` for a fixed subset `S`; owns the gathered rows.
#[derive(Debug, Clone)]
pub struct SubsampledAdjoint {
    rows: DMatrix<f64>,
    weights: DVector<f64>,
}

impl SubsampledAdjoint {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl SymmetricOperator for SubsampledAdjoint {
    fn dim(&self) -> usize {
        self.rows.ncols()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut t = &self.rows * v;
        t.component_mul_assign(&self.weights);
        self.rows.tr_mul(&t)
    }
}

/// Squared-magnitude readings `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations(DVector<f64>);

impl Observations {
    pub fn new(b: DVector<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidParameter(
                "observation vector is empty".into(),
            ));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite observation".into()));
        }
        if b.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroObservations);
        }
        Ok(Self(b))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The signal `x` whose lift `xxᵀ` generated the observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth(DVector<f64>);

impl GroundTruth {
    pub fn new(x: DVector<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite signal entry".into()));
        }
        if x.norm() == 0.0 {
            return Err(Error::ZeroSignal);
        }
        Ok(Self(x))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Provenance recorded next to a serialized instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceMeta {
    pub generator: String,
    pub seed: Option<u64>,
    /// `(height, width)` when the signal is a row-major flattened image.
    pub image_dims: Option<(usize, usize)>,
}

/// A complete problem: measurements, observations and (optionally) the signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub ensemble: MeasurementEnsemble,
    pub b: Observations,
    pub x: Option<GroundTruth>,
    pub meta: InstanceMeta,
}

impl Instance {
    /// Builds the noise-free phase-retrieval instance `b = (a_iᵀ x)²`.
    pub fn from_signal(
        ensemble: MeasurementEnsemble,
        x: GroundTruth,
        meta: InstanceMeta,
    ) -> Result<Self> {
        let b = Observations::new(ensemble.forward_rank1(x.values())?)?;
        Ok(Self {
            ensemble,
            b,
            x: Some(x),
            meta,
        })
    }

    pub fn new(
        ensemble: MeasurementEnsemble,
        b: Observations,
        x: Option<GroundTruth>,
        meta: InstanceMeta,
    ) -> Result<Self> {
        check_dim("instance observations", ensemble.m(), b.len())?;
        if let Some(x) = &x {
            check_dim("instance signal", ensemble.n(), x.values().len())?;
        }
        Ok(Self {
            ensemble,
            b,
            x,
            meta,
        })
    }
}

pub(crate) fn relative_asymmetry(x: &DMatrix<f64>) -> f64 {
    if !x.is_square() {
        return f64::INFINITY;
    }
    let norm = x.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (x - x.transpose()).norm() / norm
}

pub(crate) fn mirror_upper(w: &mut DMatrix<f64>) {
    let n = w.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            w[(i, j)] = w[(j, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use rand_distr::{Distribution, StandardNormal};

    fn random_ensemble(m: usize, n: usize, seed: u64) -> MeasurementEnsemble {
        let mut rng = stream_rng(seed, Stream::Test, 0);
        MeasurementEnsemble::new(DMatrix::from_fn(m, n, |_, _| {
            StandardNormal.sample(&mut rng)
        }))
        .unwrap()
    }

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = stream_rng(seed, Stream::Test, 1);
        let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        (&g + g.transpose()) * 0.5
    }

    fn random_vector(n: usize, seed: u64, idx: u64) -> DVector<f64> {
        let mut rng = stream_rng(seed, Stream::Test, idx);
        DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn rejects_zero_row_and_empty() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            MeasurementEnsemble::new(m),
            Err(Error::InvalidEnsemble(_))
        ));
        assert!(MeasurementEnsemble::new(DMatrix::zeros(0, 3)).is_err());
        let nan = DMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(MeasurementEnsemble::new(nan).is_err());
    }

    #[test]
    fn forward_rank1_small() {
        let e = MeasurementEnsemble::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0])).unwrap();
        let out = e.forward_rank1(&DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(out[0], 9.0);
        let zero = e.forward_rank1(&DVector::zeros(2)).unwrap();
        assert_eq!(zero[0], 0.0);
        assert!(matches!(
            e.forward_rank1(&DVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn forward_full_identity_on_unit_vectors() {
        let e = MeasurementEnsemble::new(DMatrix::identity(4, 4)).unwrap();
        let out = e.forward_full(&DMatrix::identity(4, 4)).unwrap();
        assert!(out.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn forward_full_rejects_asymmetric() {
        let e = random_ensemble(5, 3, 1);
        let mut x = random_symmetric(3, 2);
        x[(0, 1)] += 1.0;
        assert!(matches!(e.forward_full(&x), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn forward_full_matches_triple_loop() {
        let e = random_ensemble(12, 5, 3);
        let x = random_symmetric(5, 4);
        let out = e.forward_full(&x).unwrap();
        for i in 0..12 {
            let mut acc = 0.0;
            for p in 0..5 {
                for q in 0..5 {
                    acc += e.matrix()[(i, p)] * x[(p, q)] * e.matrix()[(i, q)];
                }
            }
            assert!((out[i] - acc).abs() <= 1e-12 * acc.abs().max(1.0));
        }
    }

    #[test]
    fn lift_consistency() {
        let e = random_ensemble(12, 5, 5);
        let u = random_vector(5, 5, 9);
        let lifted = e.forward_full(&(&u * u.transpose())).unwrap();
        let direct = e.forward_rank1(&u).unwrap();
        for (a, b) in lifted.iter().zip(direct.iter()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn adjoint_dense_basic() {
        let e = random_ensemble(6, 4, 6);
        let mut y = DVector::zeros(6);
        y[0] = 1.0;
        let w = e.adjoint_dense(&y).unwrap();
        let a0 = e.vector(0);
        assert!((w - &a0 * a0.transpose()).norm() <= 1e-14);
        assert_eq!(e.adjoint_dense(&DVector::zeros(6)).unwrap().norm(), 0.0);
        let w = e.adjoint_dense(&random_vector(6, 6, 3)).unwrap();
        assert_eq!(w, w.transpose());
    }

    #[test]
    fn adjointness_identity() {
        for seed in 0..10 {
            let e = random_ensemble(15, 6, seed);
            let y = random_vector(15, seed, 20);
            let x = random_symmetric(6, seed + 100);
            let lhs = e.adjoint_dense(&y).unwrap().dot(&x);
            let rhs = y.dot(&e.forward_full(&x).unwrap());
            assert!((lhs - rhs).abs() <= 1e-10 * x.norm() * y.norm());
        }
    }

    #[test]
    fn adjoint_matvec_matches_dense() {
        let e = random_ensemble(300, 200, 8);
        let y = random_vector(300, 8, 30);
        let v = random_vector(200, 8, 31);
        let dense = e.adjoint_dense(&y).unwrap() * &v;
        let free = e.adjoint_matvec(&y, &v).unwrap();
        assert!((&dense - &free).norm() <= 1e-12 * dense.norm());

        let mut y1 = DVector::zeros(300);
        y1[0] = 1.0;
        let out = e.adjoint_matvec(&y1, &v).unwrap();
        let a0 = e.vector(0);
        assert!((out - &a0 * a0.dot(&v)).norm() <= 1e-12 * a0.norm_squared() * v.norm());
        assert_eq!(
            e.adjoint_matvec(&y, &DVector::zeros(200)).unwrap().norm(),
            0.0
        );
    }

    #[test]
    fn subsampled_adjoint_cases() {
        let e = random_ensemble(20, 5, 9);
        let y = random_vector(20, 9, 40);
        let v = random_vector(5, 9, 41);
        let all: Vec<usize> = (0..20).collect();
        let full = e.adjoint_subsampled(&y, &all).unwrap().apply(&v);
        assert!((full - e.adjoint_matvec(&y, &v).unwrap()).norm() <= 1e-12 * v.norm());

        let single = e.adjoint_subsampled(&y, &[3]).unwrap().apply(&v);
        let a3 = e.vector(3);
        assert!((single - &a3 * (y[3] * a3.dot(&v))).norm() <= 1e-12);

        assert!(matches!(
            e.adjoint_subsampled(&y, &[]),
            Err(Error::EmptyIndexSet)
        ));
        assert!(matches!(
            e.adjoint_subsampled(&y, &[20]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn nonnegative_support_is_psd() {
        let e = random_ensemble(40, 6, 10);
        let y = random_vector(40, 10, 50);
        let support: Vec<usize> = (0..40).filter(|&i| y[i] >= 0.0).collect();
        let op = e.adjoint_subsampled(&y, &support).unwrap();
        for k in 0..100 {
            let v = random_vector(6, 11, k);
            assert!(v.dot(&op.apply(&v)) >= -1e-12);
        }
    }
}
