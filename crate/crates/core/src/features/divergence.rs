//! KL divergence between datasets and entropy of label distributions.
//! All logarithms are base 2.

use super::{aggregate_mean, Dataset, FeatureError};
use crate::labeling::PseudoLabel;
use serde::Serialize;
use std::collections::HashMap;
use std::hash::Hash;

pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Nonnegative components summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(components: Vec<f64>) -> Result<Self, FeatureError> {
        if components.is_empty() {
            return Err(FeatureError::InvalidProbability("empty".into()));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(FeatureError::InvalidProbability(format!(
                "component {bad} is negative or not finite"
            )));
        }
        let total: f64 = components.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(FeatureError::InvalidProbability(format!(
                "components sum to {total}"
            )));
        }
        Ok(Self(components))
    }

    /// Scales nonnegative weights to unit sum.
    pub fn normalize(weights: &[f64]) -> Result<Self, FeatureError> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(FeatureError::InvalidProbability(
                "weights sum to zero".into(),
            ));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn smoothed(&self, epsilon: f64) -> Vec<f64> {
        let total = 1.0 + epsilon * self.0.len() as f64;
        self.0.iter().map(|p| (p + epsilon) / total).collect()
    }
}

/// `KL(p || q)` in bits after adding `epsilon` to every component of both
/// vectors and renormalizing.
pub fn kl_divergence(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    epsilon: f64,
) -> Result<f64, FeatureError> {
    if p.len() != q.len() {
        return Err(FeatureError::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(FeatureError::InvalidEpsilon(epsilon));
    }
    let (ps, qs) = (p.smoothed(epsilon), q.smoothed(epsilon));
    let kl: f64 = ps
        .iter()
        .zip(&qs)
        .map(|(pi, qi)| pi * (pi / qi).log2())
        .sum();
    Ok(kl.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub divergence: f64,
    pub warnings: Vec<String>,
}

fn clamp_and_normalize(
    name: &str,
    mean: &[f64],
) -> Result<(ProbabilityVector, Option<String>), FeatureError> {
    let negatives = mean.iter().filter(|c| **c < 0.0).count();
    let clamped: Vec<f64> = mean.iter().map(|c| c.max(0.0)).collect();
    let warning = (negatives > 0)
        .then(|| format!("{name}: clamped {negatives} negative mean component(s) to zero"));
    let p = ProbabilityVector::normalize(&clamped).map_err(|_| FeatureError::NotNormalizable {
        id: name.to_string(),
        reason: "mean vector is all zero after clamping".into(),
    })?;
    Ok((p, warning))
}

/// Divergence of `target` from `reference`: KL between their normalized
/// mean vectors.
pub fn dataset_divergence(
    target: &Dataset,
    reference: &Dataset,
    sample_fraction: f64,
    seed: u64,
    epsilon: f64,
) -> Result<DivergenceReport, FeatureError> {
    if target.dim() != reference.dim() {
        return Err(FeatureError::DimensionMismatch {
            left: target.dim(),
            right: reference.dim(),
        });
    }
    let t = aggregate_mean(target, sample_fraction, seed)?;
    let r = aggregate_mean(reference, sample_fraction, seed)?;
    let (p, wp) = clamp_and_normalize(target.name(), &t.vector.components)?;
    let (q, wq) = clamp_and_normalize(reference.name(), &r.vector.components)?;
    Ok(DivergenceReport {
        divergence: kl_divergence(&p, &q, epsilon)?,
        warnings: wp.into_iter().chain(wq).collect(),
    })
}

/// Shannon entropy in bits of the empirical distribution of `items`.
pub fn sequence_entropy<T, I>(items: I) -> Option<f64>
where
    T: Hash + Eq,
    I: IntoIterator<Item = T>,
{
    let mut counts: HashMap<T, usize> = HashMap::new();
    let mut total = 0usize;
    for item in items {
        *counts.entry(item).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return None;
    }
    let n = total as f64;
    // sort so the float sum does not depend on hash order
    let mut c: Vec<usize> = counts.into_values().collect();
    c.sort_unstable();
    let h: f64 = c
        .iter()
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum();
    Some(h.max(0.0))
}

/// Entropy of the distribution of full name sequences.
pub fn label_entropy(labels: &[PseudoLabel]) -> Result<f64, FeatureError> {
    sequence_entropy(labels.iter().map(|l| &l.names)).ok_or(FeatureError::NoLabels)
}
