use std::fmt::Write as _;

use gaugephase::operators::gen_gaussian;
use gaugephase::operators::io::format_f64;
use gaugephase::rng::{derive_seed, stream_rng, Stream};
use gaugephase::spectral::dense_eig_reference;
use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AlignRow {
    pub size: usize,
    pub mean: f64,
    pub std: f64,
}

/// `|⟨u, û⟩|` for each size, where `u` is the top eigenvector of
/// `Z = Σ y_i a_i a_iᵀ` and `û` that of the sum over the `|S|` largest `y_i`.
fn alignments(m: usize, n: usize, sizes: &[usize], seed: u64) -> Result<Vec<f64>> {
    let ensemble = gen_gaussian(m, n, seed)?.ensemble;
    let mut rng = stream_rng(seed, Stream::Subsample, 0);
    let y = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
    let top = |w: &DVector<f64>| -> Result<DVector<f64>> {
        let eig = dense_eig_reference(&ensemble.adjoint_dense(w)?)?;
        Ok(eig.vectors.column(0).into_owned())
    };
    let u = top(&y)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| y[j].total_cmp(&y[i]));
    sizes
        .iter()
        .map(|&size| {
            let mut kept = DVector::zeros(m);
            for &i in &order[..size] {
                kept[i] = y[i];
            }
            Ok(u.dot(&top(&kept)?).abs())
        })
        .collect()
}

/// Mean and sample standard deviation of the alignment over `seeds` draws,
/// rows in ascending size.
pub fn run_alignment_study(
    m: usize,
    n: usize,
    sizes: &[usize],
    seeds: usize,
    seed: u64,
) -> Result<Vec<AlignRow>> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() || sizes[0] == 0 || sizes[sizes.len() - 1] > m {
        return Err(HarnessError::Config(format!("sizes must lie in 1..={m}")));
    }
    if seeds == 0 {
        return Err(HarnessError::Config("need at least one seed".into()));
    }
    let per_seed: Vec<Vec<f64>> = (0..seeds)
        .into_par_iter()
        .map(|s| alignments(m, n, &sizes, derive_seed(seed, Stream::Trial, s as u64)))
        .collect::<Result<_>>()?;
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(k, &size)| {
            let vals: Vec<f64> = per_seed.iter().map(|v| v[k]).collect();
            let mean = vals.iter().sum::<f64>() / seeds as f64;
            let std = if seeds > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64).sqrt()
            } else {
                0.0
            };
            AlignRow { size, mean, std }
        })
        .collect())
}

pub fn align_to_csv(rows: &[AlignRow]) -> String {
    let mut out = String::from("size,mean_alignment,std_alignment\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.size,
            format_f64(r.mean),
            format_f64(r.std)
        );
    }
    out
}
