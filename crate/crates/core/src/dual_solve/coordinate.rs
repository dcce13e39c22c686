use std::time::Instant;

use nalgebra::DVector;

use super::basis::{NullBasis, NullBasisKind};
use super::gradient::dual_objective;
use super::sampling::{sample_coordinates, CoordinateScheme};
use super::step::{backtrack, step_size, StepPolicy};
use super::trajectory::{DualState, Trajectory, TrajectoryRow};
use super::Gauge;
use crate::error::{check_dim, Error, Result};
use crate::operators::{MeasurementEnsemble, Observations};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::spectral::{lowrank_update, LowRankFactor, PruneRule, SpectralOpts, DENSE_EIG_MAX_N};

/// Units of the coordinate step policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepScale {
    /// Steps are used as given.
    Absolute,
    /// Steps are multiplied by `1 / (L · max_i ‖a_i‖⁴)`, which bounds the
    /// change a block can make to `A*(y)` relative to the data.
    #[default]
    Normalized,
}

impl std::str::FromStr for StepScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(Self::Absolute),
            "normalized" => Ok(Self::Normalized),
            other => Err(Error::Parse(format!("unknown step scale '{other}'"))),
        }
    }
}

/// Settings for block coordinate descent with a maintained rank-`r` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateOpts {
    pub gauge: Gauge,
    /// Rank `r` kept after every update.
    pub rank: usize,
    /// Block size `L`, clamped to `m − 1`.
    pub block: usize,
    pub step: StepPolicy,
    pub step_scale: StepScale,
    pub scheme: CoordinateScheme,
    /// Rebuild the factor from `A*(y)` every this many iterations (0: never).
    pub refresh_every: usize,
    /// Rebuild when the leading factor pair has relative residual above this
    /// against the true `A*(y)` (`None`: never check).
    pub residual_refresh: Option<f64>,
    pub iters: usize,
    pub spectral: SpectralOpts,
    /// Record the exact objective every this many iterations (0: never).
    pub exact_every: usize,
    pub record_iterates: bool,
}

impl Default for CoordinateOpts {
    fn default() -> Self {
        Self {
            gauge: Gauge::TracePsd,
            rank: 5,
            block: 100,
            step: StepPolicy::Fixed(10.0),
            step_scale: StepScale::Normalized,
            scheme: CoordinateScheme::Weighted,
            refresh_every: 50,
            residual_refresh: None,
            iters: 100,
            spectral: SpectralOpts::default(),
            exact_every: 0,
            record_iterates: false,
        }
    }
}

/// Top-`r` factor of `A*(y)` computed from scratch.
fn rebuild_factor(
    ensemble: &MeasurementEnsemble,
    y: &DVector<f64>,
    rank: usize,
    rule: PruneRule,
) -> Result<LowRankFactor> {
    if ensemble.n() <= DENSE_EIG_MAX_N {
        return LowRankFactor::from_dense(&ensemble.adjoint_dense(y)?, rank, rule);
    }
    // too large for a dense eig: stream the rows through pruned updates
    let mut factor = LowRankFactor::empty(ensemble.n());
    let support: Vec<usize> = (0..ensemble.m()).filter(|&i| y[i] != 0.0).collect();
    for chunk in support.chunks(rank.max(8)) {
        let weights = DVector::from_iterator(chunk.len(), chunk.iter().map(|&i| y[i]));
        factor = lowrank_update(&factor, &ensemble.columns(chunk), &weights, rank, rule)?;
    }
    Ok(factor)
}

/// Block coordinate descent on `z` with the sparse basis, keeping a rank-`r`
/// factor `U D Uᵀ ≈ A*(y)` current through rank-`|I|` updates.
///
/// Each iteration samples `L` reduced coordinates, evaluates the partial
/// gradient at the rows they touch using the factor's leading vector, steps
/// `z`, and folds the resulting `Δy` into the factor.
pub fn solve_coordinate_descent(
    ensemble: &MeasurementEnsemble,
    b: &Observations,
    opts: &CoordinateOpts,
    seed: u64,
) -> Result<(DualState, LowRankFactor, Trajectory)> {
    check_dim("solve_coordinate_descent", ensemble.m(), b.len())?;
    opts.step.validate()?;
    if opts.rank < 1 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    if ensemble.m() < 2 {
        return Err(Error::InvalidParameter(
            "coordinate descent needs m ≥ 2".into(),
        ));
    }
    let basis = NullBasis::sparse(b.values())?;
    let (pivot, ratios) = match basis.kind() {
        NullBasisKind::SparseNearIdentity { pivot, ratios } => (*pivot, ratios.clone()),
        NullBasisKind::DenseOrthonormal(_) => unreachable!("sparse constructor"),
    };
    let gauge = opts.gauge;
    let rule = gauge.prune_rule();
    let block = opts.block.clamp(1, basis.dim());
    let exact_at = |y: &DVector<f64>, k: usize| -> Result<f64> {
        Ok(dual_objective(
            ensemble,
            y,
            gauge,
            &opts.spectral,
            derive_seed(seed, Stream::Eigensolver, k as u64),
        )?
        .0)
    };
    let unit = match opts.step_scale {
        StepScale::Absolute => 1.0,
        StepScale::Normalized => {
            let max_sq = ensemble.row_norms_sq().max();
            1.0 / (block as f64 * max_sq * max_sq)
        }
    };
    let clock = Instant::now();

    let mut z = DVector::zeros(basis.dim());
    let mut y = basis.anchor().clone();
    let mut factor = lowrank_update(
        &LowRankFactor::empty(ensemble.n()),
        &ensemble.columns(&[pivot]),
        &DVector::from_element(1, y[pivot]),
        opts.rank,
        rule,
    )?;
    let mut exact = if opts.exact_every > 0 || opts.step.is_line_search() {
        Some(exact_at(&y, 0)?)
    } else {
        None
    };

    let mut traj = Trajectory::new(opts.record_iterates);
    let leading_polar = |f: &LowRankFactor| {
        f.leading(rule)
            .map_or(0.0, |(v, _)| gauge.polar_from_eig(v))
    };
    traj.push(
        TrajectoryRow {
            iteration: 0,
            approx_objective: leading_polar(&factor),
            exact_objective: exact,
            step: 0.0,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        },
        &y,
    );

    let mut rng = stream_rng(seed, Stream::Coordinates, 0);
    for k in 1..=opts.iters {
        let picked = sample_coordinates(&y, &basis, block, opts.scheme, gauge, &mut rng)?;
        let rows: Vec<usize> = picked
            .iter()
            .map(|&j| NullBasis::sparse_row(pivot, j))
            .collect();
        let (lead_value, u) = match factor.leading(rule) {
            Some(pair) => pair,
            None => {
                factor = rebuild_factor(ensemble, &y, opts.rank, rule)?;
                factor
                    .leading(rule)
                    .ok_or_else(|| Error::InvalidParameter("empty factor".into()))?
            }
        };
        let sign = gauge.gradient_sign(lead_value);
        let partial = |i: usize| {
            let p = ensemble.matrix().row(i).transpose().dot(&u);
            sign * p * p
        };
        let g_pivot = partial(pivot);
        // ĝ_j = Σ_i B_ij g_i over the two nonzeros of column j
        let ghat: Vec<f64> = rows
            .iter()
            .map(|&row| partial(row) - ratios[row] * g_pivot)
            .collect();
        let ghat_norm_sq: f64 = ghat.iter().map(|v| v * v).sum();

        // Δy = B·(−t ĝ), supported on the touched rows
        let delta_for = |t: f64| -> Vec<(usize, f64)> {
            let mut pivot_change = 0.0;
            let mut out: Vec<(usize, f64)> = rows
                .iter()
                .zip(&ghat)
                .map(|(&row, &gj)| {
                    pivot_change += ratios[row] * t * gj;
                    (row, -t * gj)
                })
                .collect();
            out.push((pivot, pivot_change));
            out
        };
        let apply_delta = |y: &DVector<f64>, delta: &[(usize, f64)]| {
            let mut next = y.clone();
            for &(i, d) in delta {
                next[i] += d;
            }
            next
        };

        let (t, searched) = match opts.step {
            StepPolicy::Backtracking { t0, beta, c } => {
                let f0 = match exact {
                    Some(f) => f,
                    None => exact_at(&y, k)?,
                };
                let ls = backtrack(f0, ghat_norm_sq, t0 * unit, beta, c, |t| {
                    exact_at(&apply_delta(&y, &delta_for(t)), k)
                })?;
                if ls.accepted || ls.value <= f0 {
                    (ls.step, Some(ls.value))
                } else {
                    (0.0, Some(f0))
                }
            }
            _ => (unit * step_size(&opts.step, k)?, None),
        };

        if t > 0.0 {
            for (&j, &gj) in picked.iter().zip(&ghat) {
                z[j] -= t * gj;
            }
            let delta = delta_for(t);
            y = apply_delta(&y, &delta);
            let idx: Vec<usize> = delta.iter().map(|&(i, _)| i).collect();
            let weights = DVector::from_iterator(delta.len(), delta.iter().map(|&(_, d)| d));
            factor = lowrank_update(&factor, &ensemble.columns(&idx), &weights, opts.rank, rule)?;
        }

        let scheduled = opts.refresh_every > 0 && k % opts.refresh_every == 0;
        let degenerate = factor.rank() == 0 || factor.values().iter().any(|v| !v.is_finite());
        let drifted = !scheduled
            && !degenerate
            && opts.residual_refresh.is_some_and(|limit| {
                let (value, u) = factor.leading(rule).expect("nonempty factor");
                let residual = (ensemble
                    .adjoint_matvec(&y, &u)
                    .unwrap_or_else(|_| u.clone())
                    - &u * value)
                    .norm();
                residual > limit * value.abs().max(1.0)
            });
        if scheduled || degenerate || drifted {
            factor = rebuild_factor(ensemble, &y, opts.rank, rule)?;
        }

        exact = if searched.is_some() {
            searched
        } else if opts.exact_every > 0 && k % opts.exact_every == 0 {
            Some(exact_at(&y, k)?)
        } else {
            None
        };
        let approx = leading_polar(&factor);
        if !approx.is_finite() || exact.is_some_and(|f| !f.is_finite()) {
            return Err(Error::NonFiniteObjective(k));
        }
        traj.push(
            TrajectoryRow {
                iteration: k,
                approx_objective: approx,
                exact_objective: exact,
                step: t,
                elapsed_seconds: clock.elapsed().as_secs_f64(),
            },
            &y,
        );
    }

    let (objective, eig) = dual_objective(
        ensemble,
        &y,
        gauge,
        &opts.spectral,
        derive_seed(seed, Stream::Eigensolver, opts.iters as u64 + 1),
    )?;
    Ok((
        DualState {
            y,
            z: Some(z),
            eig: Some(eig),
            objective,
            iteration: opts.iters,
        },
        factor,
        traj,
    ))
}
