use nalgebra::{DMatrix, DVector};

use super::{
    dense::sym_eig_unchecked, is_near_tie, random_unit, EigResult, SpectralOpts, SymmetricOperator,
};

const PROBES: u64 = 10;

/// Outcome of a plain power iteration on `op + shift·I`.
struct PowerRun {
    value: f64,
    vector: DVector<f64>,
    iterations: usize,
    converged: bool,
}

fn power_iterate<O: SymmetricOperator + ?Sized>(
    op: &O,
    shift: f64,
    start: DVector<f64>,
    tol: f64,
    maxit: usize,
) -> PowerRun {
    let mut v = start;
    let mut value = 0.0;
    for it in 1..=maxit {
        let mut w = op.apply(&v);
        value = v.dot(&w);
        let residual = (&w - &v * value).norm();
        if residual <= tol * value.abs().max(1.0) {
            return PowerRun {
                value,
                vector: v,
                iterations: it,
                converged: true,
            };
        }
        if shift != 0.0 {
            w += &v * shift;
        }
        let norm = w.norm();
        if norm == 0.0 {
            // v lies in the null space of op + shift·I
            return PowerRun {
                value,
                vector: v,
                iterations: it,
                converged: false,
            };
        }
        v = w / norm;
    }
    PowerRun {
        value,
        vector: v,
        iterations: maxit,
        converged: false,
    }
}

/// Rayleigh-Ritz on `span{v, W v}`; returns the two Ritz pairs, values descending.
fn two_dim_ritz<O: SymmetricOperator + ?Sized>(
    op: &O,
    v: &DVector<f64>,
) -> Option<[(f64, DVector<f64>); 2]> {
    let w = op.apply(v);
    let mut q2 = &w - v * v.dot(&w);
    let norm = q2.norm();
    if norm <= 1e-14 * w.norm().max(f64::MIN_POSITIVE) {
        return None;
    }
    q2 /= norm;
    let basis = DMatrix::from_columns(&[v.clone(), q2]);
    let projected =
        basis.transpose() * DMatrix::from_columns(&[w, op.apply(&basis.column(1).into_owned())]);
    let projected = (&projected + projected.transpose()) * 0.5;
    let eig = sym_eig_unchecked(&projected);
    let pair = |k: usize| {
        let x = &basis * eig.vectors.column(k);
        let norm = x.norm();
        (eig.values[k], x / norm)
    };
    Some([pair(0), pair(1)])
}

/// Largest-magnitude eigenpair of a symmetric operator by plain power iteration.
///
/// The returned value keeps its sign. When the iteration stalls because the
/// two extreme eigenvalues have equal magnitude and opposite sign, a 2-D
/// Rayleigh-Ritz step separates them, the positive one is returned and
/// `near_tie` is set.
pub fn evec_max_magnitude<O: SymmetricOperator + ?Sized>(
    op: &O,
    opts: &SpectralOpts,
    seed: u64,
) -> EigResult {
    let n = op.dim();
    let maxit = opts.max_iterations(n);
    let run = power_iterate(op, 0.0, random_unit(n, seed, 0), opts.tol, maxit);
    let mut result = EigResult::from_pair(op, run.value, run.vector, run.iterations, opts.tol);
    if !run.converged {
        if let Some([hi, lo]) = two_dim_ritz(op, &result.vector) {
            if is_near_tie(hi.0, lo.0) {
                let mut tied = EigResult::from_pair(op, hi.0, hi.1, run.iterations + 2, opts.tol);
                tied.near_tie = true;
                return tied;
            }
        }
        log::debug!(
            "power iteration did not converge in {maxit} steps (residual {:.3e})",
            result.residual
        );
    }
    result.iterations = run.iterations;
    result
}

/// Largest-algebraic eigenpair by power iteration on `op + σI`.
///
/// `σ` starts from a Frobenius-norm estimate `√n·max‖W v_k‖` over ten seeded
/// unit probes, which exceeds `‖W‖₂` with high probability. If the shifted
/// iteration lands on a negative shifted eigenvalue (σ was too small), the
/// shift is enlarged and the iteration rerun.
pub fn evec_max_algebraic<O: SymmetricOperator + ?Sized>(
    op: &O,
    opts: &SpectralOpts,
    seed: u64,
) -> EigResult {
    let n = op.dim();
    let maxit = opts.max_iterations(n);
    let mut sigma = 0.0f64;
    let mut best_rayleigh = f64::NEG_INFINITY;
    for k in 0..PROBES {
        let v = random_unit(n, seed, 1 + k);
        let w = op.apply(&v);
        sigma = sigma.max((n as f64).sqrt() * w.norm());
        best_rayleigh = best_rayleigh.max(v.dot(&w));
    }

    let mut total = 0;
    let mut start = random_unit(n, seed, 0);
    for _ in 0..8 {
        let run = power_iterate(op, sigma, start.clone(), opts.tol, maxit);
        total += run.iterations;
        let shifted = run.value + sigma;
        let inconsistent =
            run.converged && run.value < best_rayleigh - opts.tol * best_rayleigh.abs().max(1.0);
        if shifted < 0.0 || inconsistent {
            // op + σI is not positive semidefinite; enlarge the shift past |λ_min|
            sigma = sigma.max(-run.value) * 2.0 + 1.0;
            start = random_unit(n, seed, 100 + total as u64);
            continue;
        }
        let mut out = EigResult::from_pair(op, run.value, run.vector, total, opts.tol);
        out.converged &= run.converged || out.residual <= opts.tol * out.value.abs().max(1.0);
        if !out.converged {
            log::debug!(
                "shifted power iteration did not converge in {maxit} steps (residual {:.3e})",
                out.residual
            );
        }
        return out;
    }
    let run = power_iterate(op, sigma, start, opts.tol, maxit);
    EigResult::from_pair(op, run.value, run.vector, total + run.iterations, opts.tol)
}
