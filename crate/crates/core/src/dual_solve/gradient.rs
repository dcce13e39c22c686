use nalgebra::DVector;

use super::sampling::sample_without_replacement;
use super::Gauge;
use crate::error::{check_dim, Error, Result};
use crate::operators::MeasurementEnsemble;
use crate::rng::{stream_rng, Stream};
use crate::spectral::{extreme_eig, EigResult, SpectralOpts};

/// How the dual matrix `A*(y)` is estimated before the eigensolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingRegime {
    /// All `m` terms.
    Full,
    /// Terms with `y_i ≥ 0`, a positive semidefinite estimate.
    NonnegativeSupport,
    /// `size` terms drawn without replacement, probability proportional to
    /// the gauge weight of `y_i`.
    WeightedRandom { size: usize },
}

impl SamplingRegime {
    pub fn name(self) -> String {
        match self {
            SamplingRegime::Full => "full".into(),
            SamplingRegime::NonnegativeSupport => "nonneg".into(),
            SamplingRegime::WeightedRandom { size } => format!("weighted:{size}"),
        }
    }

    /// Parses `full`, `nonneg`, `weighted` (size `m/10`) or `weighted:S`.
    pub fn parse(s: &str, m: usize) -> Result<Self> {
        match s.split_once(':') {
            None if s == "full" => Ok(SamplingRegime::Full),
            None if s == "nonneg" => Ok(SamplingRegime::NonnegativeSupport),
            None if s == "weighted" => Ok(SamplingRegime::WeightedRandom {
                size: (m / 10).max(1),
            }),
            Some(("weighted", size)) => {
                let size: usize = size
                    .parse()
                    .map_err(|e| Error::Parse(format!("weighted sample size: {e}")))?;
                if size == 0 {
                    return Err(Error::InvalidParameter(
                        "weighted sample size must be ≥ 1".into(),
                    ));
                }
                Ok(SamplingRegime::WeightedRandom { size })
            }
            _ => Err(Error::Parse(format!("unknown sampling regime {s:?}"))),
        }
    }
}

/// `κ°(A*(y))` with the eigenpair that produced it.
pub fn dual_objective(
    ensemble: &MeasurementEnsemble,
    y: &DVector<f64>,
    gauge: Gauge,
    opts: &SpectralOpts,
    seed: u64,
) -> Result<(f64, EigResult)> {
    let op = ensemble.adjoint(y)?;
    let eig = extreme_eig(&op, gauge.eig_target(), opts, seed);
    if !eig.value.is_finite() {
        return Err(Error::NonFiniteObjective(0));
    }
    Ok((gauge.polar_from_eig(eig.value), eig))
}

/// Gradient `g_i = s·(a_iᵀu)²` of the dual objective over all `m` coordinates.
///
/// `u` is the extreme eigenvector of the regime's estimate of `A*(y)` and
/// `s = sign(λ)` for the nuclear gauge, `1` otherwise. The returned eigenpair
/// belongs to the estimate, not to `A*(y)` itself.
pub fn dual_gradient(
    ensemble: &MeasurementEnsemble,
    y: &DVector<f64>,
    gauge: Gauge,
    regime: SamplingRegime,
    opts: &SpectralOpts,
    seed: u64,
) -> Result<(DVector<f64>, EigResult)> {
    check_dim("dual_gradient", ensemble.m(), y.len())?;
    let target = gauge.eig_target();
    let eig = match regime {
        SamplingRegime::Full => extreme_eig(&ensemble.adjoint(y)?, target, opts, seed),
        SamplingRegime::NonnegativeSupport => {
            let support: Vec<usize> = (0..y.len()).filter(|&i| y[i] >= 0.0).collect();
            if support.is_empty() {
                return Err(Error::EmptySupport);
            }
            extreme_eig(
                &ensemble.adjoint_subsampled(y, &support)?,
                target,
                opts,
                seed,
            )
        }
        SamplingRegime::WeightedRandom { size } => {
            let weights = y.map(|v| gauge.weight(v));
            let mut rng = stream_rng(seed, Stream::Subsample, 0);
            let subset = sample_without_replacement(&weights, size, &mut rng)?;
            extreme_eig(
                &ensemble.adjoint_subsampled(y, &subset)?,
                target,
                opts,
                seed,
            )
        }
    };
    if !eig.value.is_finite() {
        return Err(Error::NonFiniteObjective(0));
    }
    let sign = gauge.gradient_sign(eig.value);
    let g = ensemble.forward_rank1(&eig.vector)? * sign;
    Ok((g, eig))
}
