use std::time::Instant;

use nalgebra::DVector;

use super::basis::{project_hyperplane, NullBasis};
use super::gradient::{dual_gradient, dual_objective, SamplingRegime};
use super::step::{backtrack, step_size, StepPolicy};
use super::trajectory::{DualState, Trajectory, TrajectoryRow};
use super::{Gauge, FEASIBILITY_TOL};
use crate::error::{check_dim, Error, Result};
use crate::operators::{MeasurementEnsemble, Observations};
use crate::rng::{derive_seed, Stream};
use crate::spectral::SpectralOpts;

/// Settings shared by projected and reduced gradient descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientOpts {
    pub gauge: Gauge,
    pub regime: SamplingRegime,
    pub step: StepPolicy,
    pub iters: usize,
    pub spectral: SpectralOpts,
    /// Record the exact objective every this many iterations (0: never).
    /// Ignored for the full regime, where the steering objective is exact.
    pub exact_every: usize,
    pub record_iterates: bool,
}

impl Default for GradientOpts {
    fn default() -> Self {
        Self {
            gauge: Gauge::TracePsd,
            regime: SamplingRegime::Full,
            step: StepPolicy::default(),
            iters: 100,
            spectral: SpectralOpts::default(),
            exact_every: 1,
            record_iterates: false,
        }
    }
}

/// How a first-order method parametrizes the feasible hyperplane.
trait Parametrization {
    /// Search direction in the method's own variable.
    fn direction(&self, g: &DVector<f64>) -> Result<DVector<f64>>;
    /// `(variable, y)` after a step of length `t` along `-direction`.
    fn advance(
        &self,
        var: &DVector<f64>,
        t: f64,
        dir: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)>;
}

struct Projected<'a> {
    b: &'a DVector<f64>,
}

impl Parametrization for Projected<'_> {
    fn direction(&self, g: &DVector<f64>) -> Result<DVector<f64>> {
        // (I − bbᵀ/bᵀb) g, the gradient component inside the hyperplane
        Ok(g - self.b * (g.dot(self.b) / self.b.norm_squared()))
    }

    fn advance(
        &self,
        y: &DVector<f64>,
        t: f64,
        dir: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let next = project_hyperplane(&(y - dir * t), self.b)?;
        Ok((next.clone(), next))
    }
}

struct Reduced<'a> {
    basis: &'a NullBasis,
}

impl Parametrization for Reduced<'_> {
    fn direction(&self, g: &DVector<f64>) -> Result<DVector<f64>> {
        self.basis.apply_transpose(g)
    }

    fn advance(
        &self,
        z: &DVector<f64>,
        t: f64,
        dir: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let next = z - dir * t;
        let y = self.basis.to_dual(&next)?;
        Ok((next, y))
    }
}

/// Projected gradient descent on `κ°(A*(y))` over `⟨y, b⟩ = 1`,
/// started from `y⁰ = b / bᵀb`.
pub fn solve_projected_gradient(
    ensemble: &MeasurementEnsemble,
    b: &Observations,
    opts: &GradientOpts,
    seed: u64,
) -> Result<(DualState, Trajectory)> {
    check_dim("solve_projected_gradient", ensemble.m(), b.len())?;
    let bv = b.values();
    let y0 = project_hyperplane(bv, bv)?;
    let (state, traj) = run(ensemble, &Projected { b: bv }, y0.clone(), y0, opts, seed)?;
    Ok((DualState { z: None, ..state }, traj))
}

/// Gradient descent on the reduced variable `z` with `y = Bz + ȳ`, from `z = 0`.
pub fn solve_reduced_gradient(
    ensemble: &MeasurementEnsemble,
    b: &Observations,
    basis: &NullBasis,
    opts: &GradientOpts,
    seed: u64,
) -> Result<(DualState, Trajectory)> {
    check_dim("solve_reduced_gradient", ensemble.m(), b.len())?;
    check_dim("solve_reduced_gradient basis", ensemble.m(), basis.m())?;
    if (basis.anchor().dot(b.values()) - 1.0).abs() > FEASIBILITY_TOL {
        return Err(Error::InvalidParameter(
            "null-space basis was built for different observations".into(),
        ));
    }
    let z0 = DVector::zeros(basis.dim());
    let y0 = basis.anchor().clone();
    run(ensemble, &Reduced { basis }, z0, y0, opts, seed)
}

fn run<P: Parametrization>(
    ensemble: &MeasurementEnsemble,
    param: &P,
    var0: DVector<f64>,
    y0: DVector<f64>,
    opts: &GradientOpts,
    seed: u64,
) -> Result<(DualState, Trajectory)> {
    opts.step.validate()?;
    let gauge = opts.gauge;
    let full = opts.regime == SamplingRegime::Full;
    let eig_seed = |k: usize| derive_seed(seed, Stream::Eigensolver, k as u64);
    let sample_seed = |k: usize| derive_seed(seed, Stream::Subsample, k as u64);
    let exact_at = |y: &DVector<f64>, k: usize| -> Result<f64> {
        Ok(dual_objective(ensemble, y, gauge, &opts.spectral, eig_seed(k))?.0)
    };
    let clock = Instant::now();

    let mut var = var0;
    let mut y = y0;
    let (mut g, mut eig) = dual_gradient(
        ensemble,
        &y,
        gauge,
        opts.regime,
        &opts.spectral,
        sample_seed(0),
    )?;
    let mut approx = gauge.polar_from_eig(eig.value);
    let mut exact = if full {
        Some(approx)
    } else if opts.exact_every > 0 || opts.step.is_line_search() {
        Some(exact_at(&y, 0)?)
    } else {
        None
    };

    let mut traj = Trajectory::new(opts.record_iterates);
    traj.push(
        TrajectoryRow {
            iteration: 0,
            approx_objective: approx,
            exact_objective: exact,
            step: 0.0,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        },
        &y,
    );

    for k in 1..=opts.iters {
        let dir = param.direction(&g)?;
        let (t, searched) = match opts.step {
            StepPolicy::Backtracking { t0, beta, c } => {
                let f0 = match exact {
                    Some(f) => f,
                    None => exact_at(&y, k)?,
                };
                let ls = backtrack(f0, dir.norm_squared(), t0, beta, c, |t| {
                    let (_, trial) = param.advance(&var, t, &dir)?;
                    exact_at(&trial, k)
                })?;
                if ls.accepted || ls.value <= f0 {
                    (ls.step, Some(ls.value))
                } else {
                    (0.0, Some(f0))
                }
            }
            _ => (step_size(&opts.step, k)?, None),
        };
        if t > 0.0 {
            let (v, ynew) = param.advance(&var, t, &dir)?;
            var = v;
            y = ynew;
        }

        let (gn, en) = dual_gradient(
            ensemble,
            &y,
            gauge,
            opts.regime,
            &opts.spectral,
            sample_seed(k),
        )?;
        g = gn;
        eig = en;
        approx = gauge.polar_from_eig(eig.value);
        exact = if full {
            Some(approx)
        } else if searched.is_some() {
            searched
        } else if opts.exact_every > 0 && k % opts.exact_every == 0 {
            Some(exact_at(&y, k)?)
        } else {
            None
        };
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

    let objective = match exact {
        Some(f) => f,
        None => exact_at(&y, opts.iters + 1)?,
    };
    Ok((
        DualState {
            y,
            z: Some(var),
            eig: Some(eig),
            objective,
            iteration: opts.iters,
        },
        traj,
    ))
}
