use gaugephase::dual_solve::{
    solve_coordinate_descent, solve_projected_gradient, solve_reduced_gradient, CoordinateOpts,
    CoordinateScheme, Gauge, GradientOpts, NullBasis, StepPolicy, StepScale,
};
use gaugephase::operators::gen_gaussian;
use gaugephase::refine::{init_gauge_dual, recovery_error, refine_descent, RefineConfig};
use gaugephase::spectral::{EigMethod, SpectralOpts};

fn dense() -> SpectralOpts {
    SpectralOpts::with_method(EigMethod::Dense)
}

#[test]
fn projected_and_dense_reduced_gradient_agree() {
    let inst = gen_gaussian(12, 3, 5).unwrap();
    for gauge in [Gauge::TracePsd, Gauge::Nuclear] {
        let opts = GradientOpts {
            gauge,
            step: StepPolicy::Fixed(0.05),
            iters: 20,
            spectral: dense(),
            record_iterates: true,
            ..GradientOpts::default()
        };
        let (_, pg) = solve_projected_gradient(&inst.ensemble, &inst.b, &opts, 1).unwrap();
        let basis = NullBasis::dense(inst.b.values()).unwrap();
        let (_, rg) = solve_reduced_gradient(&inst.ensemble, &inst.b, &basis, &opts, 1).unwrap();
        let (pg, rg) = (pg.iterates.unwrap(), rg.iterates.unwrap());
        assert_eq!(pg.len(), 21);
        for (a, b) in pg.iter().zip(&rg) {
            assert!((a - b).amax() <= 1e-8, "{gauge}: {:e}", (a - b).amax());
        }
    }
}

#[test]
fn full_coordinate_descent_matches_sparse_reduced_gradient() {
    let inst = gen_gaussian(12, 3, 6).unwrap();
    let m = 12;
    let step = StepPolicy::Fixed(0.02);
    let rg_opts = GradientOpts {
        step,
        iters: 5,
        spectral: dense(),
        record_iterates: true,
        ..GradientOpts::default()
    };
    let basis = NullBasis::sparse(inst.b.values()).unwrap();
    let (_, rg) = solve_reduced_gradient(&inst.ensemble, &inst.b, &basis, &rg_opts, 2).unwrap();
    let cd_opts = CoordinateOpts {
        rank: 3,
        block: m - 1,
        step,
        step_scale: StepScale::Absolute,
        scheme: CoordinateScheme::Uniform,
        refresh_every: 1,
        iters: 5,
        spectral: dense(),
        record_iterates: true,
        ..CoordinateOpts::default()
    };
    let (_, _, cd) = solve_coordinate_descent(&inst.ensemble, &inst.b, &cd_opts, 2).unwrap();
    for (a, b) in rg
        .iterates
        .unwrap()
        .iter()
        .zip(cd.iterates.as_ref().unwrap())
    {
        assert!((a - b).amax() <= 1e-6, "{:e}", (a - b).amax());
    }
}

#[test]
fn solvers_reach_the_primal_bound() {
    // strong duality: the optimal dual value is 1/‖x‖² when xxᵀ is the unique solution
    let inst = gen_gaussian(30, 4, 1).unwrap();
    let target = 1.0 / inst.x.as_ref().unwrap().values().norm_squared();
    let opts = GradientOpts {
        iters: 300,
        spectral: dense(),
        exact_every: 0,
        ..GradientOpts::default()
    };
    let (pg, _) = solve_projected_gradient(&inst.ensemble, &inst.b, &opts, 0).unwrap();
    assert!(
        (pg.objective - target).abs() <= 1e-6,
        "{} vs {target}",
        pg.objective
    );
    let basis = NullBasis::dense(inst.b.values()).unwrap();
    let (rg, _) = solve_reduced_gradient(&inst.ensemble, &inst.b, &basis, &opts, 0).unwrap();
    assert!((rg.objective - target).abs() <= 1e-6);
}

#[test]
fn coordinate_descent_then_refine_recovers_a_tiny_signal() {
    let inst = gen_gaussian(30, 4, 3).unwrap();
    let x = inst.x.as_ref().unwrap().values();
    let opts = CoordinateOpts {
        rank: 2,
        block: 10,
        iters: 200,
        ..CoordinateOpts::default()
    };
    let (state, _, _) = solve_coordinate_descent(&inst.ensemble, &inst.b, &opts, 3).unwrap();
    let u0 = init_gauge_dual(
        &inst.ensemble,
        inst.b.values(),
        &state.y,
        &SpectralOpts::default(),
        3,
    )
    .unwrap();
    let out = refine_descent(
        &inst.ensemble,
        inst.b.values(),
        &u0,
        &RefineConfig::default(),
    )
    .unwrap();
    let err = recovery_error(&out.u, x).unwrap();
    assert!(err <= 1e-6, "recovery error {err:e}");
}
