use nalgebra::DVector;
use rand::seq::index;

use super::basis::NullBasis;
use super::Gauge;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Coordinate selection rule for block coordinate descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateScheme {
    Uniform,
    /// Successive sampling with probability proportional to gauge weights,
    /// a cheap stand-in for Gauss-Southwell selection.
    Weighted,
}

impl std::str::FromStr for CoordinateScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CoordinateScheme::Uniform),
            "weighted" => Ok(CoordinateScheme::Weighted),
            other => Err(Error::Parse(format!("unknown coordinate scheme {other:?}"))),
        }
    }
}

/// Draws up to `count` distinct indices with probability proportional to
/// `weights`, one at a time without replacement. Only positive weights are
/// eligible; if fewer than `count` exist, all of them are returned.
///
/// The result is sorted.
pub fn sample_without_replacement(
    weights: &DVector<f64>,
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    let eligible: Vec<usize> = (0..weights.len())
        .filter(|&i| weights[i] > 0.0 && weights[i].is_finite())
        .collect();
    if eligible.is_empty() {
        return Err(Error::ZeroWeights);
    }
    let mut out = if eligible.len() <= count {
        eligible
    } else {
        index::sample_weighted(rng, eligible.len(), |k| weights[eligible[k]], count)
            .map_err(|e| Error::InvalidParameter(format!("weighted sampling: {e}")))?
            .into_iter()
            .map(|k| eligible[k])
            .collect()
    };
    out.sort_unstable();
    Ok(out)
}

/// Picks `block` distinct reduced coordinates `Î ⊆ {0, …, m−2}`.
///
/// The weighted scheme scores coordinate `j` by the gauge weights of the
/// dual entries its basis column touches. Coordinates with zero score are
/// filled in uniformly when too few carry weight; if every score is zero the
/// draw falls back to uniform.
pub fn sample_coordinates(
    y: &DVector<f64>,
    basis: &NullBasis,
    block: usize,
    scheme: CoordinateScheme,
    gauge: Gauge,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    let dim = basis.dim();
    if block < 1 || block > dim {
        return Err(Error::InvalidParameter(format!(
            "block size {block} outside 1..={dim}"
        )));
    }
    if block == dim {
        return Ok((0..dim).collect());
    }
    match scheme {
        CoordinateScheme::Uniform => Ok(uniform(dim, block, rng)),
        CoordinateScheme::Weighted => {
            let scores = DVector::from_fn(dim, |j, _| {
                basis
                    .column_entries(j)
                    .iter()
                    .map(|&(row, _)| gauge.weight(y[row]))
                    .sum::<f64>()
            });
            match sample_without_replacement(&scores, block, rng) {
                Ok(mut picked) => {
                    if picked.len() < block {
                        let rest: Vec<usize> = (0..dim).filter(|&j| !(scores[j] > 0.0)).collect();
                        let extra = index::sample(rng, rest.len(), block - picked.len());
                        picked.extend(extra.into_iter().map(|k| rest[k]));
                        picked.sort_unstable();
                    }
                    Ok(picked)
                }
                Err(Error::ZeroWeights) => {
                    log::debug!("all coordinate weights are zero; sampling uniformly");
                    Ok(uniform(dim, block, rng))
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn uniform(dim: usize, block: usize, rng: &mut Rng) -> Vec<usize> {
    let mut v = index::sample(rng, dim, block).into_vec();
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    /// First-order inclusion probabilities of successive weighted sampling
    /// of two items, by enumerating every ordered pair.
    fn inclusion_two(w: &[f64]) -> Vec<f64> {
        let total: f64 = w.iter().sum();
        let mut p = vec![0.0; w.len()];
        for first in 0..w.len() {
            for second in 0..w.len() {
                if first == second {
                    continue;
                }
                let prob = w[first] / total * w[second] / (total - w[first]);
                p[first] += prob;
                p[second] += prob;
            }
        }
        p
    }

    #[test]
    fn weighted_marginals_match_enumeration() {
        let w = DVector::from_vec(vec![1.0, 2.0, 3.0, 0.5, 4.0, 1.5, 2.5, 0.25, 3.5, 1.0]);
        let expected = inclusion_two(w.as_slice());
        let draws = 10_000;
        let mut counts = vec![0usize; w.len()];
        let mut rng = stream_rng(123, Stream::Test, 0);
        for _ in 0..draws {
            for i in sample_without_replacement(&w, 2, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        for i in 0..w.len() {
            let p = expected[i];
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = counts[i] as f64 / draws as f64;
            assert!((freq - p).abs() <= 3.0 * sigma, "i={i}: freq {freq} vs {p}");
        }
    }

    #[test]
    fn zero_weights_error_and_small_support() {
        let mut rng = stream_rng(1, Stream::Test, 0);
        assert!(matches!(
            sample_without_replacement(&DVector::zeros(4), 2, &mut rng),
            Err(Error::ZeroWeights)
        ));
        let w = DVector::from_vec(vec![0.0, 1.0, 0.0, 2.0]);
        assert_eq!(
            sample_without_replacement(&w, 3, &mut rng).unwrap(),
            vec![1, 3]
        );
    }

    #[test]
    fn coordinates_full_block_and_determinism() {
        let b = DVector::from_vec(vec![1.0, 3.0, 2.0, 0.5, 1.0]);
        let basis = NullBasis::sparse(&b).unwrap();
        let y = basis.anchor().clone();
        let mut rng = stream_rng(0, Stream::Test, 0);
        let all = sample_coordinates(
            &y,
            &basis,
            4,
            CoordinateScheme::Weighted,
            Gauge::TracePsd,
            &mut rng,
        )
        .unwrap();
        assert_eq!(all, vec![0, 1, 2, 3]);

        let draw = |seed| {
            let mut rng = stream_rng(seed, Stream::Coordinates, 0);
            sample_coordinates(
                &y,
                &basis,
                2,
                CoordinateScheme::Uniform,
                Gauge::TracePsd,
                &mut rng,
            )
            .unwrap()
        };
        assert_eq!(draw(5), draw(5));
        assert!(sample_coordinates(
            &y,
            &basis,
            0,
            CoordinateScheme::Uniform,
            Gauge::TracePsd,
            &mut rng
        )
        .is_err());
        assert!(sample_coordinates(
            &y,
            &basis,
            5,
            CoordinateScheme::Uniform,
            Gauge::TracePsd,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn weighted_coordinates_fill_and_fallback() {
        let b = DVector::from_vec(vec![1.0, 3.0, 2.0, 0.5, 1.0, 1.0]);
        let basis = NullBasis::sparse(&b).unwrap();
        let mut rng = stream_rng(2, Stream::Test, 0);
        // every weight zero: uniform fallback still returns `block` coordinates
        let y = DVector::zeros(6);
        let picked = sample_coordinates(
            &y,
            &basis,
            3,
            CoordinateScheme::Weighted,
            Gauge::TracePsd,
            &mut rng,
        )
        .unwrap();
        assert_eq!(picked.len(), 3);
        // a single weighted coordinate is always included, the rest filled uniformly
        let mut y = DVector::zeros(6);
        y[4] = 1.0;
        for _ in 0..20 {
            let picked = sample_coordinates(
                &y,
                &basis,
                3,
                CoordinateScheme::Weighted,
                Gauge::TracePsd,
                &mut rng,
            )
            .unwrap();
            assert_eq!(picked.len(), 3);
            assert!(picked.contains(&3), "{picked:?}"); // row 4 is z-coordinate 3 (pivot is row 1)
        }
    }
}
