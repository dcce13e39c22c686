use crate::error::{Error, Result};

/// Halvings attempted by backtracking before giving up.
pub const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    Fixed(f64),
    /// `t0 / (1 + k/τ)`.
    Decay {
        t0: f64,
        tau: f64,
    },
    /// Armijo backtracking on the exact dual objective, starting from `t0`
    /// and multiplying by `beta` until `f(y⁺) ≤ f(y) − c·t·‖d‖²`.
    Backtracking {
        t0: f64,
        beta: f64,
        c: f64,
    },
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy::Backtracking {
            t0: 1.0,
            beta: 0.5,
            c: 1e-4,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepPolicy::Fixed(t0) => t0 > 0.0,
            StepPolicy::Decay { t0, tau } => t0 > 0.0 && tau > 0.0,
            StepPolicy::Backtracking { t0, beta, c } => {
                t0 > 0.0 && beta > 0.0 && beta < 1.0 && c > 0.0 && c < 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid step policy {self:?}"
            )))
        }
    }

    /// Parses `fixed:T`, `decay:T,TAU` or `backtrack:T,BETA,C`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = args
            .split(',')
            .filter(|a| !a.is_empty())
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("step {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let policy = match (name, nums.as_slice()) {
            ("fixed", [t0]) => StepPolicy::Fixed(*t0),
            ("decay", [t0, tau]) => StepPolicy::Decay { t0: *t0, tau: *tau },
            ("backtrack", []) => StepPolicy::default(),
            ("backtrack", [t0, beta, c]) => StepPolicy::Backtracking {
                t0: *t0,
                beta: *beta,
                c: *c,
            },
            _ => return Err(Error::Parse(format!("unknown step policy {s:?}"))),
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn describe(&self) -> String {
        match *self {
            StepPolicy::Fixed(t0) => format!("fixed:{t0}"),
            StepPolicy::Decay { t0, tau } => format!("decay:{t0},{tau}"),
            StepPolicy::Backtracking { t0, beta, c } => format!("backtrack:{t0},{beta},{c}"),
        }
    }

    pub fn is_line_search(&self) -> bool {
        matches!(self, StepPolicy::Backtracking { .. })
    }
}

/// Step for iteration `k` (1-based); for backtracking this is the initial trial.
pub fn step_size(policy: &StepPolicy, k: usize) -> Result<f64> {
    policy.validate()?;
    Ok(match *policy {
        StepPolicy::Fixed(t0) => t0,
        StepPolicy::Decay { t0, tau } => t0 / (1.0 + k as f64 / tau),
        StepPolicy::Backtracking { t0, .. } => t0,
    })
}

/// Outcome of [`backtrack`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub step: f64,
    /// Objective at the trial point for `step`.
    pub value: f64,
    /// Whether the sufficient-decrease test passed.
    pub accepted: bool,
}

/// Armijo backtracking: shrink `t` by `beta` until
/// `eval(t) ≤ f0 − c·t·dir_norm_sq`, at most [`MAX_HALVINGS`] times.
pub fn backtrack<F>(
    f0: f64,
    dir_norm_sq: f64,
    t0: f64,
    beta: f64,
    c: f64,
    mut eval: F,
) -> Result<LineSearch>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut t = t0;
    let mut value = eval(t)?;
    for _ in 0..MAX_HALVINGS {
        if value <= f0 - c * t * dir_norm_sq {
            return Ok(LineSearch {
                step: t,
                value,
                accepted: true,
            });
        }
        t *= beta;
        value = eval(t)?;
    }
    let accepted = value <= f0 - c * t * dir_norm_sq;
    if !accepted {
        log::warn!("backtracking found no sufficient decrease after {MAX_HALVINGS} reductions (t = {t:.3e})");
    }
    Ok(LineSearch {
        step: t,
        value,
        accepted,
    })
}
