//! Gauge-dual solvers: projected gradient, reduced gradient and block
//! coordinate descent with a maintained low-rank factor.

mod basis;
mod coordinate;
mod gradient;
mod methods;
mod sampling;
mod step;
mod trajectory;

pub use basis::{project_hyperplane, NullBasis, NullBasisKind};
pub use coordinate::{solve_coordinate_descent, CoordinateOpts, StepScale};
pub use gradient::{dual_gradient, dual_objective, SamplingRegime};
pub use methods::{solve_projected_gradient, solve_reduced_gradient, GradientOpts};
pub use sampling::{sample_coordinates, sample_without_replacement, CoordinateScheme};
pub use step::{backtrack, step_size, LineSearch, StepPolicy, MAX_HALVINGS};
pub use trajectory::{DualState, Trajectory, TrajectoryRow};

use crate::spectral::{EigTarget, PruneRule};

/// Feasibility tolerance on `⟨y, b⟩ = 1` maintained by every solver.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// The gauge `κ` of the primal problem, which fixes the dual objective `κ°`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gauge {
    /// `κ(X) = tr(X) + δ₊(X)`, polar `max(λ_max, 0)`.
    TracePsd,
    /// `κ(X) = ‖X‖_*`, polar `‖Z‖₂`.
    Nuclear,
}

impl Gauge {
    /// Extreme eigenvalue the polar depends on.
    pub fn eig_target(self) -> EigTarget {
        match self {
            Gauge::TracePsd => EigTarget::LargestAlgebraic,
            Gauge::Nuclear => EigTarget::LargestMagnitude,
        }
    }

    pub fn prune_rule(self) -> PruneRule {
        self.eig_target().prune_rule()
    }

    /// `κ°` evaluated from the extreme eigenvalue returned for [`Gauge::eig_target`].
    pub fn polar_from_eig(self, value: f64) -> f64 {
        match self {
            Gauge::TracePsd => value.max(0.0),
            Gauge::Nuclear => value.abs(),
        }
    }

    /// Sign applied to `(a_iᵀu)²` in the gradient; `sign(λ)` for the nuclear gauge.
    pub fn gradient_sign(self, value: f64) -> f64 {
        match self {
            Gauge::TracePsd => 1.0,
            Gauge::Nuclear => {
                if value < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Sampling weight of a dual coordinate: `max(y_i, 0)` or `|y_i|`.
    pub fn weight(self, y: f64) -> f64 {
        match self {
            Gauge::TracePsd => y.max(0.0),
            Gauge::Nuclear => y.abs(),
        }
    }

    /// `κ(xxᵀ)` for a rank-one primal point; `‖x‖²` for both gauges.
    pub fn primal_rank1(self, x: &nalgebra::DVector<f64>) -> f64 {
        x.norm_squared()
    }

    pub fn name(self) -> &'static str {
        match self {
            Gauge::TracePsd => "psd",
            Gauge::Nuclear => "nuclear",
        }
    }
}

impl std::str::FromStr for Gauge {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "psd" | "trace_psd" => Ok(Gauge::TracePsd),
            "nuclear" => Ok(Gauge::Nuclear),
            other => Err(crate::Error::Parse(format!("unknown gauge {other:?}"))),
        }
    }
}

impl std::fmt::Display for Gauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
