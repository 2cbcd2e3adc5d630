//! Exhaustive search for the smallest or largest simplex spanned by anchors.

use super::{LabelError, RepKey};
use crate::features::{squared_distance, AnchorSet};
use crate::geometry::{simplex_content, DistanceMatrix};
use itertools::Itertools;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalSimplex {
    pub names: Vec<String>,
    pub keys: Vec<RepKey>,
    pub squared_content: f64,
}

/// Searches all (d+1)-subsets of the representatives. Subsets are visited in
/// lexicographic `(source, rep_index)` order and the first extremum wins.
pub fn find_extremal_simplex(
    anchors: &AnchorSet,
    d: usize,
    mode: Extremum,
) -> Result<ExtremalSimplex, LabelError> {
    let reps = anchors.representatives();
    if d == 0 {
        return Err(LabelError::InvalidDimension(0));
    }
    if d + 1 > reps.len() {
        return Err(LabelError::InsufficientCandidates {
            needed: d + 1,
            available: reps.len(),
        });
    }
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|&a, &b| reps[a].key().cmp(&reps[b].key()));

    let n = reps.len();
    let mut pairwise = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = squared_distance(&reps[i].vector, &reps[j].vector, anchors.metric())?;
            pairwise[i * n + j] = v;
            pairwise[j * n + i] = v;
        }
    }

    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in order.iter().copied().combinations(d + 1) {
        let matrix = DistanceMatrix::from_upper(d + 1, |i, j| pairwise[subset[i] * n + subset[j]])?;
        let value = simplex_content(&matrix)?.squared_content;
        let better = match &best {
            None => true,
            Some((_, b)) => match mode {
                Extremum::Min => value < *b,
                Extremum::Max => value > *b,
            },
        };
        if better {
            best = Some((subset, value));
        }
    }
    let (subset, squared_content) = best.expect("at least one subset");
    Ok(ExtremalSimplex {
        names: subset
            .iter()
            .map(|&i| reps[i].qualified_name.clone())
            .collect(),
        keys: subset
            .iter()
            .map(|&i| RepKey {
                source: reps[i].source_name.clone(),
                rep_index: reps[i].rep_index,
            })
            .collect(),
        squared_content,
    })
}
