//! Seeded Gaussian cluster data standing in for per-source feature sets.
//!
//! Samples are clamped at zero so they look like rectified activations.

use crate::features::{Dataset, FeatureError, FeatureVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIM: usize = 64;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("no cluster specs given")]
    NoClusters,
    #[error("cluster {name:?}: {reason}")]
    InvalidSpec { name: String, reason: String },
    #[error("duplicate cluster name {0:?}")]
    DuplicateName(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub name: String,
    pub center: Vec<f64>,
    pub sigma: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub clusters: Vec<Dataset>,
    pub combined: Dataset,
}

/// Draws `count` isotropic Gaussian samples around each center. Sample ids
/// are `<cluster>_<k>`; the combined dataset keeps cluster order.
pub fn generate(specs: &[ClusterSpec], dim: usize, seed: u64) -> Result<SynthOutput, SynthError> {
    if dim == 0 {
        return Err(SynthError::ZeroDimension);
    }
    if specs.is_empty() {
        return Err(SynthError::NoClusters);
    }
    let mut seen = std::collections::HashSet::new();
    for s in specs {
        let invalid = |reason: String| SynthError::InvalidSpec {
            name: s.name.clone(),
            reason,
        };
        if !seen.insert(s.name.as_str()) {
            return Err(SynthError::DuplicateName(s.name.clone()));
        }
        if s.center.len() != dim {
            return Err(invalid(format!(
                "center has {} components, expected {dim}",
                s.center.len()
            )));
        }
        if !s.sigma.is_finite() || s.sigma <= 0.0 {
            return Err(invalid(format!("sigma must be positive, got {}", s.sigma)));
        }
        if s.count == 0 {
            return Err(invalid("count must be at least 1".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clusters = Vec::with_capacity(specs.len());
    let mut all = Vec::new();
    for s in specs {
        let noise = Normal::new(0.0, s.sigma).expect("sigma validated");
        let vectors: Vec<FeatureVector> = (0..s.count)
            .map(|k| {
                let components = s
                    .center
                    .iter()
                    .map(|c| (c + noise.sample(&mut rng)).max(0.0))
                    .collect();
                FeatureVector::new(format!("{}_{k}", s.name), components)
            })
            .collect();
        all.extend(vectors.iter().cloned());
        clusters.push(Dataset::new(s.name.clone(), vectors)?);
    }
    Ok(SynthOutput {
        clusters,
        combined: Dataset::new("combined", all)?,
    })
}

/// Positions of the bridge clusters along the base-to-outlier segment. All
/// stay closer to the core than to the outlier.
const BRIDGE_FRACTIONS: [f64; 3] = [0.25, 0.35, 0.45];

/// Sixteen clusters around a common base point: twelve core clusters
/// scattered near the base, one outlier `outlier_distance` sigmas away along
/// the first axis, and three bridge clusters on the segment between base and
/// outlier. Names are `c00`..`c11`, `b0`..`b2` (nearest the outlier last)
/// and `outlier`.
///
/// The bridges are the outlier's nearest neighbours, so simplices grown from
/// the outlier toward small content reach for the same three anchors no
/// matter where in the core a target sits.
pub fn outlier_scenario(
    dim: usize,
    sigma: f64,
    count_per_cluster: usize,
    outlier_distance: f64,
    seed: u64,
) -> Vec<ClusterSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c1a5);
    // keep every center well inside the positive orthant so clamping is rare
    let base = 12.0 * sigma;
    let jitter = 4.5 * sigma / (dim as f64).sqrt();
    let mut specs: Vec<ClusterSpec> = (0..12)
        .map(|i| ClusterSpec {
            name: format!("c{i:02}"),
            center: (0..dim)
                .map(|_| base + rng.random_range(-1.0..1.0) * jitter)
                .collect(),
            sigma,
            count: count_per_cluster,
        })
        .collect();
    for (k, f) in BRIDGE_FRACTIONS.into_iter().enumerate() {
        let mut center = vec![base; dim];
        center[0] += f * outlier_distance * sigma;
        specs.push(ClusterSpec {
            name: format!("b{k}"),
            center,
            sigma,
            count: count_per_cluster,
        });
    }
    let mut far = vec![base; dim];
    far[0] += outlier_distance * sigma;
    specs.push(ClusterSpec {
        name: "outlier".into(),
        center: far,
        sigma,
        count: count_per_cluster,
    });
    specs
}
