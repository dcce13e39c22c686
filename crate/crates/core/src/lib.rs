//! Gauge-dual first-order solvers for low-rank symmetric matrix recovery.
//!
//! The crate targets real phase retrieval: recover `x` from `b_i = (a_iᵀ x)²`.
//! The lifted semidefinite relaxation is attacked through its gauge dual
//!
//! ```text
//! minimize κ°(A*(y))  subject to ⟨y, b⟩ = 1,
//! ```
//!
//! with `κ°` either `max(λ_max, 0)` (trace + PSD gauge) or the spectral norm
//! (nuclear gauge). Approximate dual solutions then seed a nonconvex rank-1
//! refinement.
//!
//! * [`operators`]: the measurement operator, its adjoint, generators and instance I/O.
//! * [`spectral`]: extreme eigenpairs, thin QR and the low-rank factor update.
//! * [`dual_solve`]: projected gradient, reduced gradient and block coordinate descent.
//! * [`refine`]: nonconvex refinement and its initializations.

pub mod dual_solve;
pub mod error;
pub mod operators;
pub mod refine;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
