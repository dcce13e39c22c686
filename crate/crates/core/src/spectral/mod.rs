//! Extreme eigenpairs of symmetric operators, dense reference
//! decompositions, and the rank-r factor update used by coordinate descent.

mod dense;
mod lanczos;
mod lowrank;
mod power;

pub use dense::{dense_eig_reference, qr_thin, SymEig, DENSE_EIG_MAX_N};
pub use lanczos::evec_max_lanczos;
pub use lowrank::{lowrank_update, prune_rank, LowRankFactor, PruneRule, ORTHONORMALITY_TOL};
pub use power::{evec_max_algebraic, evec_max_magnitude};

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{stream_rng, Stream};

/// A symmetric linear map applied one vector at a time.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;

    /// Materializes the operator column by column (`n` applications).
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        let mut e = DVector::zeros(n);
        for j in 0..n {
            e[j] = 1.0;
            out.set_column(j, &self.apply(&e));
            e[j] = 0.0;
        }
        (&out + out.transpose()) * 0.5
    }
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self * v
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        (**self).apply(v)
    }

    fn to_dense(&self) -> DMatrix<f64> {
        (**self).to_dense()
    }
}

/// Which extreme eigenvalue to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigTarget {
    /// Largest algebraic value (`eigs(W, 1, 'la')`).
    LargestAlgebraic,
    /// Largest magnitude, sign retained (`eigs(W, 1, 'lm')`); ties go to the positive one.
    LargestMagnitude,
}

impl EigTarget {
    pub fn prune_rule(self) -> PruneRule {
        match self {
            EigTarget::LargestAlgebraic => PruneRule::Algebraic,
            EigTarget::LargestMagnitude => PruneRule::Magnitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigMethod {
    /// Shifted power iteration.
    Power,
    /// Explicitly restarted Lanczos with full reorthogonalization.
    Lanczos,
    /// Materialize and run the dense reference decomposition (small `n` only).
    Dense,
}

impl std::str::FromStr for EigMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "power" => Ok(EigMethod::Power),
            "lanczos" => Ok(EigMethod::Lanczos),
            "dense" => Ok(EigMethod::Dense),
            other => Err(crate::Error::Parse(format!(
                "unknown eigensolver {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOpts {
    pub method: EigMethod,
    /// Residual target relative to `max(1, |λ|)`.
    pub tol: f64,
    /// Matrix-vector product budget; `None` means `10·n`.
    pub maxit: Option<usize>,
}

impl Default for SpectralOpts {
    fn default() -> Self {
        Self {
            method: EigMethod::Lanczos,
            tol: 1e-8,
            maxit: None,
        }
    }
}

impl SpectralOpts {
    pub fn with_method(method: EigMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn max_iterations(&self, n: usize) -> usize {
        self.maxit.unwrap_or(10 * n).max(1)
    }
}

/// An approximate eigenpair together with its honest residual.
#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    pub value: f64,
    /// Unit-norm eigenvector estimate.
    pub vector: DVector<f64>,
    /// `‖W u − λ u‖`, recomputed from the operator.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the two extreme eigenvalues have nearly equal magnitude and
    /// opposite sign, which stalls plain power iteration.
    pub near_tie: bool,
}

impl EigResult {
    pub(crate) fn from_pair<O: SymmetricOperator + ?Sized>(
        op: &O,
        value: f64,
        vector: DVector<f64>,
        iterations: usize,
        tol: f64,
    ) -> Self {
        let residual = (op.apply(&vector) - &vector * value).norm();
        Self {
            value,
            residual,
            converged: residual <= tol * value.abs().max(1.0),
            vector,
            iterations,
            near_tie: false,
        }
    }
}

/// Computes the requested extreme eigenpair with the method in `opts`.
pub fn extreme_eig<O: SymmetricOperator + ?Sized>(
    op: &O,
    target: EigTarget,
    opts: &SpectralOpts,
    seed: u64,
) -> EigResult {
    match (opts.method, target) {
        (EigMethod::Power, EigTarget::LargestAlgebraic) => evec_max_algebraic(op, opts, seed),
        (EigMethod::Power, EigTarget::LargestMagnitude) => evec_max_magnitude(op, opts, seed),
        (EigMethod::Lanczos, _) => evec_max_lanczos(op, target, opts, seed),
        (EigMethod::Dense, _) => dense_extreme(op, target, opts.tol),
    }
}

fn dense_extreme<O: SymmetricOperator + ?Sized>(op: &O, target: EigTarget, tol: f64) -> EigResult {
    let w = op.to_dense();
    let eig = dense::sym_eig_unchecked(&w);
    let n = eig.values.len();
    let idx = match target {
        EigTarget::LargestAlgebraic => 0,
        EigTarget::LargestMagnitude => {
            if eig.values[n - 1].abs() > eig.values[0].abs() {
                n - 1
            } else {
                0
            }
        }
    };
    let mut out = EigResult::from_pair(
        op,
        eig.values[idx],
        eig.vectors.column(idx).into_owned(),
        n,
        tol,
    );
    if target == EigTarget::LargestMagnitude && n > 1 {
        out.near_tie = is_near_tie(eig.values[0], eig.values[n - 1]);
    }
    out
}

pub(crate) fn is_near_tie(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale > 0.0 && a.signum() != b.signum() && (a.abs() - b.abs()).abs() < 1e-8 * scale
}

/// Seeded random unit vector.
pub(crate) fn random_unit(n: usize, seed: u64, index: u64) -> DVector<f64> {
    let mut rng = stream_rng(seed, Stream::Eigensolver, index);
    loop {
        let v: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}
