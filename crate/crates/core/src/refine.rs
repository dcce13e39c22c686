//! Nonconvex rank-1 refinement: minimize `Σ ((a_iᵀu)² − b_i)²` by gradient
//! descent from a spectral initialization.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::operators::io::format_f64;
use crate::operators::MeasurementEnsemble;
use crate::spectral::{extreme_eig, EigTarget, LowRankFactor, PruneRule, SpectralOpts};

/// Objective growth, relative to the start, treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// `Σ ((a_iᵀu)² − b_i)²`.
pub fn ncvx_objective(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64> {
    check_dim("ncvx_objective", ensemble.m(), b.len())?;
    let lifted = ensemble.forward_rank1(u)?;
    Ok(lifted
        .iter()
        .zip(b.iter())
        .map(|(p, bi)| (p - bi) * (p - bi))
        .sum())
}

/// True gradient `4 Σ ((a_iᵀu)² − b_i)(a_iᵀu) a_i` of [`ncvx_objective`].
pub fn ncvx_gradient(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim("ncvx_gradient", ensemble.m(), b.len())?;
    let p = ensemble.inner_products(u)?;
    let weights = DVector::from_fn(p.len(), |i, _| 4.0 * (p[i] * p[i] - b[i]) * p[i]);
    Ok(ensemble.matrix().tr_mul(&weights))
}

/// `Σ ((a_iᵀu)² − b_i) a_i`: the residual-weighted direction without the
/// `4 a_iᵀu` factor. It is not the gradient of [`ncvx_objective`].
pub fn ncvx_residual_direction(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim("ncvx_residual_direction", ensemble.m(), b.len())?;
    let lifted = ensemble.forward_rank1(u)?;
    Ok(ensemble.matrix().tr_mul(&(lifted - b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    TrueGradient,
    /// Steps along [`ncvx_residual_direction`].
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    /// Initial step; `None` picks `1 / (8 λ_max(Σ b_i a_i a_iᵀ))`.
    pub alpha0: Option<f64>,
    /// Decay constant in `α_k = α0 / (1 + k/τ)`.
    pub tau: f64,
    pub iters: usize,
    /// Stop once `‖∇‖ ≤ grad_tol · ‖∇(u0)‖`.
    pub grad_tol: f64,
    pub update: UpdateRule,
    /// Reject a step that raises the objective and halve the step scale.
    pub reject_increase: bool,
    pub spectral: SpectralOpts,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            alpha0: None,
            tau: 100.0,
            iters: 2000,
            grad_tol: 1e-10,
            update: UpdateRule::TrueGradient,
            reject_increase: true,
            spectral: SpectralOpts::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineRow {
    pub iteration: usize,
    pub objective: f64,
    pub step: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct RefineResult {
    /// Best iterate seen.
    pub u: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub alpha0: f64,
    pub trace: Vec<RefineRow>,
}

impl RefineResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective,step,grad_norm\n");
        for r in &self.trace {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.iteration,
                format_f64(r.objective),
                format_f64(r.step),
                format_f64(r.grad_norm)
            );
        }
        out
    }
}

/// Default initial step from the curvature at the solution: the Hessian
/// there is `8 Σ b_i a_i a_iᵀ`, so `1 / (8 λ_max)` stays below the stability limit.
pub fn default_alpha0(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    opts: &SpectralOpts,
) -> Result<f64> {
    let op = ensemble.adjoint(b)?;
    let eig = extreme_eig(&op, EigTarget::LargestAlgebraic, opts, 0);
    if !(eig.value > 0.0) {
        return Err(Error::DegenerateInit(
            "Σ b_i a_i a_iᵀ has no positive eigenvalue".into(),
        ));
    }
    Ok(1.0 / (8.0 * eig.value))
}

/// Gradient descent with decaying steps; returns the best iterate.
pub fn refine_descent(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    u0: &DVector<f64>,
    config: &RefineConfig,
) -> Result<RefineResult> {
    check_dim("refine_descent", ensemble.n(), u0.len())?;
    if u0.norm() == 0.0 {
        return Err(Error::DegenerateInit("u0 = 0 is a stationary point".into()));
    }
    let alpha0 = match config.alpha0 {
        Some(a) if a > 0.0 => a,
        Some(a) => {
            return Err(Error::InvalidParameter(format!(
                "alpha0 must be positive (got {a})"
            )))
        }
        None => default_alpha0(ensemble, b, &config.spectral)?,
    };
    if !(config.tau > 0.0) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let direction = |u: &DVector<f64>| match config.update {
        UpdateRule::TrueGradient => ncvx_gradient(ensemble, b, u),
        UpdateRule::Residual => ncvx_residual_direction(ensemble, b, u),
    };

    let mut u = u0.clone();
    let mut f = ncvx_objective(ensemble, b, &u)?;
    let f_start = f;
    let mut best = (u.clone(), f);
    let mut g = direction(&u)?;
    let g0 = g.norm();
    let mut scale = 1.0;
    let mut trace = vec![RefineRow {
        iteration: 0,
        objective: f,
        step: 0.0,
        grad_norm: g0,
    }];
    let mut iterations = 0;

    for k in 1..=config.iters {
        if g.norm() <= config.grad_tol * g0 || g0 == 0.0 {
            break;
        }
        iterations = k;
        let step = scale * alpha0 / (1.0 + k as f64 / config.tau);
        let candidate = &u - &g * step;
        let f_new = ncvx_objective(ensemble, b, &candidate)?;
        if !f_new.is_finite() || f_new > DIVERGENCE_FACTOR * f_start.max(f64::MIN_POSITIVE) {
            return Err(Error::Diverged {
                iteration: k,
                objective: f_new,
            });
        }
        if config.reject_increase && f_new > f {
            scale *= 0.5;
            trace.push(RefineRow {
                iteration: k,
                objective: f,
                step: 0.0,
                grad_norm: g.norm(),
            });
            continue;
        }
        u = candidate;
        f = f_new;
        g = direction(&u)?;
        if f < best.1 {
            best = (u.clone(), f);
        }
        trace.push(RefineRow {
            iteration: k,
            objective: f,
            step,
            grad_norm: g.norm(),
        });
    }

    Ok(RefineResult {
        u: best.0,
        objective: best.1,
        iterations,
        alpha0,
        trace,
    })
}

/// Rescales a unit direction `v` to `c·v` with the least-squares radial
/// scale `c² = Σ b_i g_i / Σ g_i²`, `g_i = (a_iᵀv)²`.
pub fn scale_initialization(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim("scale_initialization", ensemble.m(), b.len())?;
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateInit("zero direction".into()));
    }
    let v = v / norm;
    let g = ensemble.forward_rank1(&v)?;
    let gg = g.norm_squared();
    if gg == 0.0 {
        return Err(Error::DegenerateInit(
            "direction is orthogonal to every measurement".into(),
        ));
    }
    let bg = b.dot(&g);
    if !(bg > 0.0) {
        return Err(Error::DegenerateInit(
            "direction explains none of the observations".into(),
        ));
    }
    Ok(v * (bg / gg).sqrt())
}

/// Spectral initialization from `Σ b_i a_i a_iᵀ`.
pub fn init_wirtinger(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    opts: &SpectralOpts,
    seed: u64,
) -> Result<DVector<f64>> {
    if b.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroObservations);
    }
    init_gauge_dual(ensemble, b, b, opts, seed)
}

/// Initialization from the top algebraic eigenvector of `A*(y)` for a dual iterate `y`.
pub fn init_gauge_dual(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    y: &DVector<f64>,
    opts: &SpectralOpts,
    seed: u64,
) -> Result<DVector<f64>> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "dual iterate has non-finite entries".into(),
        ));
    }
    let eig = extreme_eig(
        &ensemble.adjoint(y)?,
        EigTarget::LargestAlgebraic,
        opts,
        seed,
    );
    scale_initialization(ensemble, b, &eig.vector)
}

/// Initialization from a maintained factor's leading column.
pub fn init_from_factor(
    ensemble: &MeasurementEnsemble,
    b: &DVector<f64>,
    factor: &LowRankFactor,
) -> Result<DVector<f64>> {
    let (_, v) = factor
        .leading(PruneRule::Algebraic)
        .ok_or_else(|| Error::DegenerateInit("empty factor".into()))?;
    scale_initialization(ensemble, b, &v)
}

/// `min_{s=±1} ‖s·u − x‖ / ‖x‖`.
pub fn recovery_error(u: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    check_dim("recovery_error", x.len(), u.len())?;
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let plus = (u - x).norm();
    let minus = (u + x).norm();
    Ok(plus.min(minus) / nx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::gen_gaussian;
    use crate::rng::{stream_rng, Stream};
    use crate::spectral::{dense_eig_reference, EigMethod};
    use nalgebra::DMatrix;
    use rand_distr::{Distribution, StandardNormal};

    fn random_vec(n: usize, seed: u64) -> DVector<f64> {
        let mut rng = stream_rng(seed, Stream::Test, 5);
        DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn objective_zero_at_truth_and_negation() {
        let inst = gen_gaussian(30, 5, 1).unwrap();
        let x = inst.x.as_ref().unwrap().values();
        let b = inst.b.values();
        assert!(ncvx_objective(&inst.ensemble, b, x).unwrap() <= 1e-20 * b.norm_squared());
        assert!(ncvx_objective(&inst.ensemble, b, &-x).unwrap() <= 1e-20 * b.norm_squared());
        assert!(ncvx_gradient(&inst.ensemble, b, x).unwrap().norm() <= 1e-10 * b.norm());
    }

    #[test]
    fn objective_matches_loop() {
        let inst = gen_gaussian(20, 4, 2).unwrap();
        let u = random_vec(4, 3);
        let a = inst.ensemble.matrix();
        let mut want = 0.0;
        for i in 0..20 {
            let mut p = 0.0;
            for j in 0..4 {
                p += a[(i, j)] * u[j];
            }
            let r = p * p - inst.b.values()[i];
            want += r * r;
        }
        let got = ncvx_objective(&inst.ensemble, inst.b.values(), &u).unwrap();
        assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn zero_is_a_stationary_point() {
        let inst = gen_gaussian(20, 4, 3).unwrap();
        let g = ncvx_gradient(&inst.ensemble, inst.b.values(), &DVector::zeros(4)).unwrap();
        assert_eq!(g.norm(), 0.0);
        assert!(refine_descent(
            &inst.ensemble,
            inst.b.values(),
            &DVector::zeros(4),
            &RefineConfig::default()
        )
        .is_err());
    }

    #[test]
    fn descent_from_truth_is_identity() {
        let inst = gen_gaussian(30, 4, 4).unwrap();
        let x = inst.x.as_ref().unwrap().values();
        let b = inst.ensemble.forward_rank1(x).unwrap();
        let r = refine_descent(&inst.ensemble, &b, x, &RefineConfig::default()).unwrap();
        assert_eq!(&r.u, x);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn recovery_error_cases() {
        let x = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(recovery_error(&x, &x).unwrap(), 0.0);
        assert_eq!(recovery_error(&-&x, &x).unwrap(), 0.0);
        let orth = DVector::from_vec(vec![-2.0, 1.0]);
        assert!((recovery_error(&orth, &x).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(recovery_error(&x, &DVector::zeros(2)).is_err());
        let u = DVector::from_vec(vec![0.3, -0.7]);
        assert_eq!(
            recovery_error(&u, &x).unwrap(),
            recovery_error(&-&u, &x).unwrap()
        );
    }

    #[test]
    fn wirtinger_on_unit_vectors() {
        let e = MeasurementEnsemble::new(DMatrix::identity(3, 3)).unwrap();
        let b = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let u = init_wirtinger(&e, &b, &SpectralOpts::default(), 0).unwrap();
        assert!((u[0].abs() - 1.0).abs() < 1e-10);
        assert!(u[1].abs() < 1e-8 && u[2].abs() < 1e-8);
    }

    #[test]
    fn wirtinger_matches_dense_and_scale_is_optimal() {
        let inst = gen_gaussian(200, 30, 6).unwrap();
        let b = inst.b.values();
        let opts = SpectralOpts {
            tol: 1e-12,
            maxit: Some(5000),
            ..SpectralOpts::default()
        };
        let u = init_wirtinger(&inst.ensemble, b, &opts, 1).unwrap();
        let eig = dense_eig_reference(&inst.ensemble.adjoint_dense(b).unwrap()).unwrap();
        assert!((u.normalize().dot(&eig.vectors.column(0))).abs() >= 1.0 - 1e-8);
        let g = inst.ensemble.forward_rank1(&u).unwrap();
        let stationarity: f64 = g.iter().zip(b.iter()).map(|(gi, bi)| (gi - bi) * gi).sum();
        assert!(
            stationarity.abs() <= 1e-8 * b.dot(&g),
            "{stationarity} {}",
            b.dot(&g)
        );
    }

    #[test]
    fn gauge_dual_init_equals_wirtinger_at_b_and_is_scale_invariant() {
        let inst = gen_gaussian(60, 8, 7).unwrap();
        let b = inst.b.values();
        let opts = SpectralOpts::with_method(EigMethod::Dense);
        let wf = init_wirtinger(&inst.ensemble, b, &opts, 0).unwrap();
        let gd = init_gauge_dual(&inst.ensemble, b, b, &opts, 0).unwrap();
        assert!((wf.normalize().dot(&gd.normalize())).abs() >= 1.0 - 1e-12);
        let y = b / b.norm_squared();
        let a = init_gauge_dual(&inst.ensemble, b, &y, &opts, 0).unwrap();
        let c = init_gauge_dual(&inst.ensemble, b, &(&y * 37.0), &opts, 0).unwrap();
        assert!(recovery_error(&a, &c).unwrap() <= 1e-10);
    }

    #[test]
    fn residual_direction_matches_loop_and_vanishes_at_truth() {
        let inst = gen_gaussian(20, 3, 9).unwrap();
        let (a, b) = (inst.ensemble.matrix(), inst.b.values());
        let u = random_vec(3, 9);
        let got = ncvx_residual_direction(&inst.ensemble, b, &u).unwrap();
        let mut want = DVector::zeros(3);
        for i in 0..20 {
            let p = a.row(i).transpose().dot(&u);
            want += a.row(i).transpose() * (p * p - b[i]);
        }
        assert!((&got - &want).norm() <= 1e-12 * want.norm());
        let x = inst.x.as_ref().unwrap().values();
        assert!(
            ncvx_residual_direction(&inst.ensemble, b, x)
                .unwrap()
                .norm()
                <= 1e-10 * b.norm()
        );
    }
}
