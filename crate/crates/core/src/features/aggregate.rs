//! Reduce a source dataset to one or more representative vectors.

use super::{Dataset, FeatureError, FeatureVector, Representative};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mean_of<'a, I>(vectors: I, dim: usize) -> Vec<f64>
where
    I: IntoIterator<Item = &'a FeatureVector>,
{
    // Neumaier summation keeps the mean stable under row reordering.
    let mut sum = vec![0.0; dim];
    let mut comp = vec![0.0; dim];
    let mut n = 0usize;
    for v in vectors {
        n += 1;
        for (k, &x) in v.components.iter().enumerate() {
            let t = sum[k] + x;
            if sum[k].abs() >= x.abs() {
                comp[k] += (sum[k] - t) + x;
            } else {
                comp[k] += (x - t) + sum[k];
            }
            sum[k] = t;
        }
    }
    sum.iter()
        .zip(&comp)
        .map(|(s, c)| (s + c) / n as f64)
        .collect()
}

/// Componentwise mean over a seeded uniform sample (without replacement) of
/// `ceil(fraction * len)` vectors. A fraction of 1 uses every vector.
pub fn aggregate_mean(
    ds: &Dataset,
    sample_fraction: f64,
    seed: u64,
) -> Result<Representative, FeatureError> {
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(FeatureError::InvalidFraction(sample_fraction));
    }
    if ds.is_empty() {
        return Err(FeatureError::Empty);
    }
    let n = ds.len();
    let take = ((sample_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mean = if take == n {
        mean_of(ds.vectors(), ds.dim())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, n, take).into_vec();
        picked.sort_unstable();
        mean_of(picked.iter().map(|&i| &ds.vectors()[i]), ds.dim())
    };
    Ok(Representative {
        source_name: ds.name().to_string(),
        rep_index: 0,
        qualified_name: ds.name().to_string(),
        vector: FeatureVector::new(ds.name(), mean),
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means (Euclidean) with seeded farthest-first initialization.
///
/// Representatives are ordered by descending cluster size (ties by the
/// cluster's initialization order) and named `source_0`, `source_1`, ...;
/// with `k == 1` the single representative keeps the bare source name.
pub fn aggregate_kmeans(
    ds: &Dataset,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Vec<Representative>, FeatureError> {
    let n = ds.len();
    if k == 0 || k > n {
        return Err(FeatureError::InvalidClusterCount { k, count: n });
    }
    let points: Vec<&[f64]> = ds
        .vectors()
        .iter()
        .map(|v| v.components.as_slice())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = vec![points[rng.random_range(0..n)].to_vec()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let mut best = 0;
        for i in 1..n {
            if nearest[i] > nearest[best] {
                best = i;
            }
        }
        let c = points[best].to_vec();
        for (i, p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(p, &c));
        }
        centroids.push(c);
    }

    let mut assignment = vec![usize::MAX; n];
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members = assignment
                .iter()
                .zip(ds.vectors())
                .filter(|(a, _)| **a == c)
                .map(|(_, v)| v);
            let count = assignment.iter().filter(|a| **a == c).count();
            // an emptied cluster keeps its previous centroid
            if count > 0 {
                *centroid = mean_of(members, ds.dim());
            }
        }
    }

    let mut sizes: Vec<(usize, usize)> = (0..k)
        .map(|c| (c, assignment.iter().filter(|a| **a == c).count()))
        .collect();
    sizes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let source = ds.name();
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(rank, &(c, _))| {
            let qualified_name = if k == 1 {
                source.to_string()
            } else {
                format!("{source}_{rank}")
            };
            Representative {
                source_name: source.to_string(),
                rep_index: rank,
                vector: FeatureVector::new(qualified_name.clone(), centroids[c].clone()),
                qualified_name,
            }
        })
        .collect())
}
