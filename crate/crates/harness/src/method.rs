use gaugephase::dual_solve::{CoordinateOpts, GradientOpts};
use gaugephase::refine::RefineConfig;
use gaugephase::spectral::SpectralOpts;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    Dense,
    Sparse,
}

impl std::str::FromStr for BasisChoice {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "sparse" => Ok(Self::Sparse),
            other => Err(HarnessError::Config(format!("unknown basis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualSolver {
    Projected(GradientOpts),
    Reduced(GradientOpts, BasisChoice),
    Coordinate(CoordinateOpts),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitMethod {
    /// Spectral initialization from `Σ b_i a_i a_iᵀ`; no dual solve.
    Wirtinger,
    /// Start at the true signal.
    Oracle,
    /// Seeded Gaussian direction with the usual radial scaling.
    Random,
    Dual(DualSolver),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSpec {
    pub init: InitMethod,
    pub refine: RefineConfig,
    /// Eigensolver for initializations.
    pub spectral: SpectralOpts,
    /// Relative error at or below which a trial counts as recovered.
    pub threshold: f64,
}

impl MethodSpec {
    pub fn new(init: InitMethod) -> Self {
        Self {
            init,
            refine: RefineConfig::default(),
            spectral: SpectralOpts::default(),
            threshold: 1e-3,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.init {
            InitMethod::Wirtinger => "wf",
            InitMethod::Oracle => "oracle",
            InitMethod::Random => "random",
            InitMethod::Dual(DualSolver::Projected(_)) => "dual-pg",
            InitMethod::Dual(DualSolver::Reduced(..)) => "dual-rg",
            InitMethod::Dual(DualSolver::Coordinate(_)) => "dual-cd",
        }
    }

    /// `wf`, `oracle`, `random`, `dual-pg`, `dual-rg` or `dual-cd` with default settings.
    pub fn parse(tag: &str) -> Result<Self> {
        let init = match tag {
            "wf" => InitMethod::Wirtinger,
            "oracle" => InitMethod::Oracle,
            "random" => InitMethod::Random,
            "dual-pg" | "pg" => InitMethod::Dual(DualSolver::Projected(GradientOpts::default())),
            "dual-rg" | "rg" => InitMethod::Dual(DualSolver::Reduced(
                GradientOpts::default(),
                BasisChoice::Sparse,
            )),
            "dual-cd" | "cd" | "dual" => {
                InitMethod::Dual(DualSolver::Coordinate(CoordinateOpts::default()))
            }
            other => return Err(HarnessError::Config(format!("unknown method '{other}'"))),
        };
        Ok(Self::new(init))
    }
}
