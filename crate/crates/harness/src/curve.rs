use std::fmt::Write as _;

use gaugephase::operators::io::format_f64;
use gaugephase::rng::{derive_seed, Stream};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::method::MethodSpec;
use crate::problem::ProblemSpec;
use crate::report::TrialReport;
use crate::run::{run_instance, RunOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub m: usize,
    pub method: String,
    pub trials: usize,
    /// Recovered trials over all trials; failed runs count as not recovered.
    pub recovery_rate: f64,
    /// Mean final error over runs that completed (NaN if none did).
    pub mean_error: f64,
    pub mean_overhead_s: f64,
    pub failed: usize,
}

/// Seed of trial `trial` at sample count `m`; every method sees the same instance.
pub fn trial_seed(seed: u64, m: usize, trial: usize) -> u64 {
    derive_seed(seed, Stream::Trial, ((m as u64) << 32) | trial as u64)
}

/// Recovery rate per `(m, method)` over `trials` fresh seeded instances each.
pub fn run_recovery_curve(
    problem: &ProblemSpec,
    ms: &[usize],
    methods: &[MethodSpec],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurveRow>> {
    if trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".into()));
    }
    if methods.is_empty() || ms.is_empty() {
        return Err(HarnessError::Config(
            "need at least one m and one method".into(),
        ));
    }
    let cells: Vec<(usize, usize)> = ms
        .iter()
        .flat_map(|&m| (0..trials).map(move |t| (m, t)))
        .collect();
    let outcomes: Vec<Vec<std::result::Result<TrialReport, HarnessError>>> = cells
        .par_iter()
        .map(|&(m, t)| {
            let s = trial_seed(seed, m, t);
            match problem.with_m(m).build(s) {
                Ok(instance) => methods
                    .iter()
                    .map(|method| {
                        run_instance(&instance, method, s, &RunOptions::default()).map(|o| o.report)
                    })
                    .collect(),
                Err(e) => {
                    let msg = e.to_string();
                    methods
                        .iter()
                        .map(|_| Err(HarnessError::Config(msg.clone())))
                        .collect()
                }
            }
        })
        .collect();

    let mut rows = Vec::new();
    for (mi, &m) in ms.iter().enumerate() {
        let block = &outcomes[mi * trials..(mi + 1) * trials];
        for (k, method) in methods.iter().enumerate() {
            let mut recovered = 0;
            let mut failed = 0;
            let (mut err_sum, mut time_sum, mut done) = (0.0, 0.0, 0usize);
            for trial in block {
                match &trial[k] {
                    Ok(r) => {
                        recovered += usize::from(r.recovered());
                        err_sum += r.recovery_error;
                        time_sum += r.overhead_s;
                        done += 1;
                    }
                    Err(e) => {
                        log::warn!("m={m} {}: {e}", method.tag());
                        failed += 1;
                    }
                }
            }
            let mean = |s: f64| if done > 0 { s / done as f64 } else { f64::NAN };
            rows.push(CurveRow {
                m,
                method: method.tag().to_string(),
                trials,
                recovery_rate: recovered as f64 / trials as f64,
                mean_error: mean(err_sum),
                mean_overhead_s: mean(time_sum),
                failed,
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `m,method,trials,recovery_rate,mean_error,mean_overhead_s,failed`;
/// overheads are NaN when `timings` is false.
pub fn curve_to_csv(rows: &[CurveRow], timings: bool) -> String {
    let mut out = String::from("m,method,trials,recovery_rate,mean_error,mean_overhead_s,failed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.m,
            r.method,
            r.trials,
            format_f64(r.recovery_rate),
            format_f64(r.mean_error),
            format_f64(if timings { r.mean_overhead_s } else { f64::NAN }),
            r.failed
        );
    }
    out
}
