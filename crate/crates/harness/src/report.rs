use std::fmt::Write as _;

use gaugephase::operators::io::format_f64;

/// One pipeline run: initialization, refinement and scores.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub method: String,
    pub gauge: Option<String>,
    pub regime: Option<String>,
    pub rank: Option<usize>,
    pub block: Option<usize>,
    pub step: Option<String>,
    pub iters: Option<usize>,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    /// Seconds spent computing the initial point.
    pub overhead_s: f64,
    pub refine_s: f64,
    pub dual_objective: Option<f64>,
    /// Error of the initial point; NaN without ground truth.
    pub init_error: f64,
    /// NaN without ground truth.
    pub recovery_error: f64,
    pub objective: f64,
    /// Final objective over the Wirtinger-flow baseline's, when computed.
    pub relative_objective: Option<f64>,
    pub threshold: f64,
}

const FIELDS: [&str; 19] = [
    "method",
    "gauge",
    "regime",
    "rank",
    "block",
    "step",
    "iters",
    "seed",
    "m",
    "n",
    "overhead_s",
    "refine_s",
    "dual_objective",
    "init_error",
    "recovery_error",
    "objective",
    "relative_objective",
    "threshold",
    "recovered",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

fn opt_f(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), format_f64)
}

impl TrialReport {
    pub fn recovered(&self) -> bool {
        self.recovery_error <= self.threshold
    }

    /// Values in [`FIELDS`] order; timings become NaN when `timings` is false.
    fn values(&self, timings: bool) -> Vec<String> {
        let time = |t: f64| format_f64(if timings { t } else { f64::NAN });
        vec![
            self.method.clone(),
            opt(&self.gauge),
            opt(&self.regime),
            opt(&self.rank),
            opt(&self.block),
            opt(&self.step),
            opt(&self.iters),
            self.seed.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            time(self.overhead_s),
            time(self.refine_s),
            opt_f(self.dual_objective),
            format_f64(self.init_error),
            format_f64(self.recovery_error),
            format_f64(self.objective),
            opt_f(self.relative_objective),
            format_f64(self.threshold),
            self.recovered().to_string(),
        ]
    }

    pub fn to_key_values(&self, timings: bool) -> String {
        let mut out = String::new();
        for (k, v) in FIELDS.iter().zip(self.values(timings)) {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn csv_header() -> String {
        FIELDS.join(",")
    }

    pub fn to_csv_row(&self, timings: bool) -> String {
        self.values(timings).join(",")
    }
}
