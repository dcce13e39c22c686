use std::fmt::Write as _;

use nalgebra::DVector;

use crate::operators::io::format_f64;
use crate::spectral::EigResult;

/// Current dual iterate and what is known about it.
#[derive(Debug, Clone)]
pub struct DualState {
    pub y: DVector<f64>,
    /// Reduced coordinates (`y = Bz + ȳ`); absent for projected gradient.
    pub z: Option<DVector<f64>>,
    /// Extreme eigenpair of `A*(y)` (or of its estimate) at `y`.
    pub eig: Option<EigResult>,
    /// Dual objective at `y`, exact when available.
    pub objective: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub iteration: usize,
    /// Objective of the estimate the solver steers by.
    pub approx_objective: f64,
    /// `κ°(A*(y))` when it was computed at this iteration.
    pub exact_objective: Option<f64>,
    pub step: f64,
    pub elapsed_seconds: f64,
}

/// Per-iteration record of a solver run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    /// Every dual iterate, including the initial point, when requested.
    pub iterates: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    pub fn new(record_iterates: bool) -> Self {
        Self {
            rows: Vec::new(),
            iterates: record_iterates.then(Vec::new),
        }
    }

    pub(crate) fn push(&mut self, row: TrajectoryRow, y: &DVector<f64>) {
        self.rows.push(row);
        if let Some(it) = &mut self.iterates {
            it.push(y.clone());
        }
    }

    pub fn last_exact(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.exact_objective)
    }

    /// CSV with header `iteration,approx_objective,exact_objective,step,elapsed_seconds`.
    ///
    /// Missing exact values are blank. With `timings = false` the elapsed
    /// column holds `NaN` so that reruns are byte-identical.
    pub fn to_csv(&self, timings: bool) -> String {
        let mut out =
            String::from("iteration,approx_objective,exact_objective,step,elapsed_seconds\n");
        for r in &self.rows {
            let exact = r.exact_objective.map(format_f64).unwrap_or_default();
            let elapsed = if timings { r.elapsed_seconds } else { f64::NAN };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.iteration,
                format_f64(r.approx_objective),
                exact,
                format_f64(r.step),
                format_f64(elapsed)
            );
        }
        out
    }
}
