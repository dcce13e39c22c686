use std::path::{Path, PathBuf};
use std::time::Instant;

use gaugephase::dual_solve::{
    solve_coordinate_descent, solve_projected_gradient, solve_reduced_gradient, DualState,
    NullBasis, Trajectory,
};
use gaugephase::operators::io::write_vector_csv;
use gaugephase::operators::Instance;
use gaugephase::refine::{
    init_gauge_dual, init_wirtinger, recovery_error, refine_descent, scale_initialization,
    RefineResult,
};
use gaugephase::rng::{stream_rng, Stream};
use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{HarnessError, Result};
use crate::image::ImageGrid;
use crate::method::{BasisChoice, DualSolver, InitMethod, MethodSpec};
use crate::problem::ProblemSpec;
use crate::report::TrialReport;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for trajectories, the recovered signal and the report.
    pub out_dir: Option<PathBuf>,
    /// Also run the Wirtinger-flow baseline to fill `relative_objective`.
    pub compare_wf: bool,
    /// Write measured times; otherwise timing fields are NaN.
    pub timings: bool,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub report: TrialReport,
    pub u0: DVector<f64>,
    pub refined: RefineResult,
    pub dual: Option<(DualState, Trajectory)>,
}

/// Builds the seeded instance and runs [`run_instance`] on it.
pub fn run_single(
    problem: &ProblemSpec,
    method: &MethodSpec,
    seed: u64,
    opts: &RunOptions,
) -> Result<TrialOutcome> {
    let instance = problem.build(seed)?;
    run_instance(&instance, method, seed, opts)
}

fn solve_dual(
    instance: &Instance,
    solver: &DualSolver,
    seed: u64,
) -> gaugephase::Result<(DualState, Trajectory)> {
    let (ens, b) = (&instance.ensemble, &instance.b);
    match solver {
        DualSolver::Projected(o) => solve_projected_gradient(ens, b, o, seed),
        DualSolver::Reduced(o, choice) => {
            let basis = match choice {
                BasisChoice::Dense => NullBasis::dense(b.values())?,
                BasisChoice::Sparse => NullBasis::sparse(b.values())?,
            };
            solve_reduced_gradient(ens, b, &basis, o, seed)
        }
        DualSolver::Coordinate(o) => {
            solve_coordinate_descent(ens, b, o, seed).map(|(s, _, t)| (s, t))
        }
    }
}

/// Initialization followed by refinement on a given instance.
pub fn run_instance(
    instance: &Instance,
    method: &MethodSpec,
    seed: u64,
    opts: &RunOptions,
) -> Result<TrialOutcome> {
    let tag = method.tag();
    let (ens, b) = (&instance.ensemble, instance.b.values());
    let x = instance.x.as_ref().map(|g| g.values());

    let clock = Instant::now();
    let mut dual = None;
    let u0 = match &method.init {
        InitMethod::Wirtinger => init_wirtinger(ens, b, &method.spectral, seed),
        InitMethod::Oracle => match x {
            Some(x) => Ok(x.clone()),
            None => {
                return Err(HarnessError::Config(
                    "oracle initialization needs the true signal".into(),
                ))
            }
        },
        InitMethod::Random => {
            let mut rng = stream_rng(seed, Stream::Init, 0);
            let v = DVector::from_fn(ens.n(), |_, _| StandardNormal.sample(&mut rng));
            scale_initialization(ens, b, &v)
        }
        InitMethod::Dual(solver) => solve_dual(instance, solver, seed).and_then(|(state, traj)| {
            let u = init_gauge_dual(ens, b, &state.y, &method.spectral, seed);
            dual = Some((state, traj));
            u
        }),
    }
    .map_err(HarnessError::tagged(tag))?;
    let overhead_s = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let refined = refine_descent(ens, b, &u0, &method.refine).map_err(HarnessError::tagged(tag))?;
    let refine_s = clock.elapsed().as_secs_f64();

    let error_of = |u: &DVector<f64>| -> Result<f64> {
        Ok(match x {
            Some(x) => recovery_error(u, x)?,
            None => f64::NAN,
        })
    };
    let relative_objective = if opts.compare_wf {
        if matches!(method.init, InitMethod::Wirtinger) {
            Some(1.0)
        } else {
            let wf = init_wirtinger(ens, b, &method.spectral, seed)
                .map_err(HarnessError::tagged("wf"))?;
            let base =
                refine_descent(ens, b, &wf, &method.refine).map_err(HarnessError::tagged("wf"))?;
            Some(refined.objective / base.objective)
        }
    } else {
        None
    };

    let mut report = TrialReport {
        method: tag.to_string(),
        gauge: None,
        regime: None,
        rank: None,
        block: None,
        step: None,
        iters: None,
        seed,
        m: ens.m(),
        n: ens.n(),
        overhead_s,
        refine_s,
        dual_objective: dual.as_ref().map(|(s, _)| s.objective),
        init_error: error_of(&u0)?,
        recovery_error: error_of(&refined.u)?,
        objective: refined.objective,
        relative_objective,
        threshold: method.threshold,
    };
    if let InitMethod::Dual(solver) = &method.init {
        match solver {
            DualSolver::Projected(o) | DualSolver::Reduced(o, _) => {
                report.gauge = Some(o.gauge.name().into());
                report.regime = Some(o.regime.name());
                report.step = Some(o.step.describe());
                report.iters = Some(o.iters);
            }
            DualSolver::Coordinate(o) => {
                report.gauge = Some(o.gauge.name().into());
                report.regime = Some(format!("{:?}", o.scheme).to_lowercase());
                report.rank = Some(o.rank);
                report.block = Some(o.block.min(ens.m().saturating_sub(1)));
                report.step = Some(o.step.describe());
                report.iters = Some(o.iters);
            }
        }
    }

    let outcome = TrialOutcome {
        report,
        u0,
        refined,
        dual,
    };
    if let Some(dir) = &opts.out_dir {
        write_artifacts(dir, instance, &outcome, opts.timings)?;
    }
    Ok(outcome)
}

fn write_artifacts(
    dir: &Path,
    instance: &Instance,
    outcome: &TrialOutcome,
    timings: bool,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    if let Some((state, traj)) = &outcome.dual {
        std::fs::write(dir.join("trajectory.csv"), traj.to_csv(timings))?;
        write_vector_csv(&dir.join("y.csv"), &state.y)?;
    }
    std::fs::write(dir.join("refine.csv"), outcome.refined.to_csv())?;
    write_vector_csv(&dir.join("u.csv"), &outcome.refined.u)?;
    if let Some((h, w)) = instance.meta.image_dims {
        let x = instance.x.as_ref().map(|g| g.values());
        ImageGrid::from_recovered(h, w, &outcome.refined.u, x)?.save(&dir.join("recovered.pgm"))?;
    }
    std::fs::write(
        dir.join("report.txt"),
        outcome.report.to_key_values(timings),
    )?;
    Ok(())
}
