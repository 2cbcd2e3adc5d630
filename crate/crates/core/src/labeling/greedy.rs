use super::{Decision, LabelError, Policy, PseudoLabel, RepKey};
use crate::features::{squared_distance, AnchorSet, FeatureError, FeatureVector};
use crate::geometry::{simplex_content, DistanceMatrix};
use rayon::prelude::*;
use std::cmp::Ordering;
use thiserror::Error;

/// Failure labeling a single item of a batch.
#[derive(Debug, Error)]
#[error("item {index} ({id}): {error}")]
pub struct ItemError {
    pub index: usize,
    pub id: String,
    #[source]
    pub error: LabelError,
}

/// An anchor set prepared for labeling: representatives in tie-break order
/// and their pairwise squared distances.
#[derive(Debug)]
pub struct Labeler<'a> {
    anchors: &'a AnchorSet,
    /// Representative indices sorted by `(source_name, rep_index)`.
    order: Vec<usize>,
    /// Row-major squared distances between representatives.
    pairwise: Vec<f64>,
}

/// The evolving simplex of one target: vertex 0 is the target, the rest are
/// representatives, with all pairwise squared distances cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState {
    anchors: Vec<usize>,
    sq: Vec<f64>,
}

/// Content minimizer and maximizer over one dimension's candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepExtremes {
    pub min: usize,
    pub min_content: f64,
    pub max: usize,
    pub max_content: f64,
    /// Second candidate in key order, if any.
    pub runner_up: Option<usize>,
    pub candidates: usize,
}

impl StepExtremes {
    /// The kept representative, its content, and for dual decisions the
    /// second recorded one. When every candidate ties, min and max coincide
    /// and the second name falls to the next candidate in key order.
    pub fn pick(&self, decision: Decision) -> (usize, f64, Option<usize>) {
        let (kept, content, other) = if decision.keeps_max() {
            (self.max, self.max_content, self.min)
        } else {
            (self.min, self.min_content, self.max)
        };
        let other = decision
            .is_dual()
            .then_some(if other == kept {
                self.runner_up
            } else {
                Some(other)
            })
            .flatten();
        (kept, content, other)
    }
}

impl SimplexState {
    pub fn new() -> Self {
        Self {
            anchors: Vec::new(),
            sq: vec![0.0],
        }
    }

    /// Current vertex count, target included.
    pub fn order(&self) -> usize {
        self.anchors.len() + 1
    }

    /// Representative indices that joined, in order.
    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// Squared distance between vertices `i` and `j`.
    pub fn squared(&self, i: usize, j: usize) -> f64 {
        self.sq[i * self.order() + j]
    }

    /// Squared distances from a candidate to every current vertex.
    fn row_for(&self, labeler: &Labeler<'_>, to_target: &[f64], candidate: usize) -> Vec<f64> {
        std::iter::once(to_target[candidate])
            .chain(self.anchors.iter().map(|&a| labeler.pair(a, candidate)))
            .collect()
    }

    fn with_row(&self, row: &[f64]) -> Vec<f64> {
        let m = self.order();
        let n = m + 1;
        let mut out = vec![0.0; n * n];
        for i in 0..m {
            out[i * n..i * n + m].copy_from_slice(&self.sq[i * m..(i + 1) * m]);
            out[i * n + m] = row[i];
            out[m * n + i] = row[i];
        }
        out
    }

    /// Returns the state grown by `candidate`.
    pub fn extended(&self, labeler: &Labeler<'_>, to_target: &[f64], candidate: usize) -> Self {
        let row = self.row_for(labeler, to_target, candidate);
        let mut anchors = self.anchors.clone();
        anchors.push(candidate);
        Self {
            anchors,
            sq: self.with_row(&row),
        }
    }
}

impl Default for SimplexState {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a> Labeler<'a> {
    pub fn new(anchors: &'a AnchorSet) -> Result<Self, LabelError> {
        let reps = anchors.representatives();
        let mut order: Vec<usize> = (0..reps.len()).collect();
        order.sort_by(|&a, &b| reps[a].key().cmp(&reps[b].key()));
        let n = reps.len();
        let mut pairwise = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = squared_distance(&reps[i].vector, &reps[j].vector, anchors.metric())?;
                pairwise[i * n + j] = d;
                pairwise[j * n + i] = d;
            }
        }
        Ok(Self {
            anchors,
            order,
            pairwise,
        })
    }

    pub fn anchors(&self) -> &AnchorSet {
        self.anchors
    }

    fn pair(&self, i: usize, j: usize) -> f64 {
        self.pairwise[i * self.anchors.len() + j]
    }

    /// Squared distances from `target` to every representative.
    pub fn target_distances(&self, target: &FeatureVector) -> Result<Vec<f64>, LabelError> {
        if target.dim() != self.anchors.dim() {
            return Err(LabelError::DimensionMismatch {
                target: target.dim(),
                anchors: self.anchors.dim(),
            });
        }
        self.anchors
            .representatives()
            .iter()
            .map(|r| squared_distance(target, &r.vector, self.anchors.metric()))
            .collect::<Result<Vec<_>, FeatureError>>()
            .map_err(LabelError::from)
    }

    /// Evaluates every representative not marked in `excluded` as the next
    /// vertex. Ties keep the candidate first in `(source, rep_index)` order.
    pub fn extremes(
        &self,
        state: &SimplexState,
        to_target: &[f64],
        excluded: &[bool],
    ) -> Result<Option<StepExtremes>, LabelError> {
        let mut best: Option<StepExtremes> = None;
        for &c in &self.order {
            if excluded[c] {
                continue;
            }
            let row = state.row_for(self, to_target, c);
            let matrix = DistanceMatrix::new(state.order() + 1, state.with_row(&row))?;
            let content = simplex_content(&matrix)?.squared_content;
            best = Some(match best {
                None => StepExtremes {
                    min: c,
                    min_content: content,
                    max: c,
                    max_content: content,
                    runner_up: None,
                    candidates: 1,
                },
                Some(mut b) => {
                    if content.total_cmp(&b.min_content) == Ordering::Less {
                        b.min = c;
                        b.min_content = content;
                    }
                    if content.total_cmp(&b.max_content) == Ordering::Greater {
                        b.max = c;
                        b.max_content = content;
                    }
                    if b.candidates == 1 {
                        b.runner_up = Some(c);
                    }
                    b.candidates += 1;
                    b
                }
            });
        }
        Ok(best)
    }

    /// Fails unless the anchor set can supply every name the policy records.
    pub fn check_capacity(&self, policy: &Policy) -> Result<(), LabelError> {
        let needed = policy.label_length();
        if needed > self.anchors.len() {
            return Err(LabelError::InsufficientCandidates {
                needed,
                available: self.anchors.len(),
            });
        }
        Ok(())
    }

    pub fn label(
        &self,
        target: &FeatureVector,
        policy: &Policy,
    ) -> Result<PseudoLabel, LabelError> {
        self.check_capacity(policy)?;
        let to_target = self.target_distances(target)?;
        self.label_with_distances(&to_target, policy)
    }

    fn label_with_distances(
        &self,
        to_target: &[f64],
        policy: &Policy,
    ) -> Result<PseudoLabel, LabelError> {
        let reps = self.anchors.representatives();
        let mut excluded = vec![false; reps.len()];
        let mut state = SimplexState::new();
        let mut label = PseudoLabel {
            names: Vec::with_capacity(policy.label_length()),
            chosen: Vec::with_capacity(policy.max_dimension()),
            contents: Vec::with_capacity(policy.max_dimension()),
        };
        for &decision in policy.decisions() {
            let ext = self
                .extremes(&state, to_target, &excluded)?
                .filter(|e| !decision.is_dual() || e.candidates >= 2)
                .ok_or(LabelError::InsufficientCandidates {
                    needed: policy.label_length(),
                    available: reps.len(),
                })?;
            let (kept, kept_content, other) = ext.pick(decision);
            label.names.push(reps[kept].qualified_name.clone());
            excluded[kept] = true;
            if let Some(other) = other {
                label.names.push(reps[other].qualified_name.clone());
                excluded[other] = true;
            }
            label.chosen.push(RepKey {
                source: reps[kept].source_name.clone(),
                rep_index: reps[kept].rep_index,
            });
            label.contents.push(kept_content);
            state = state.extended(self, to_target, kept);
        }
        debug_assert_eq!(label.names.len(), policy.label_length());
        Ok(label)
    }
}

/// Labels one target.
pub fn label_item(
    target: &FeatureVector,
    anchors: &AnchorSet,
    policy: &Policy,
) -> Result<PseudoLabel, LabelError> {
    Labeler::new(anchors)?.label(target, policy)
}

/// Labels every target, in input order. Items are processed in parallel on
/// the current rayon pool; a failing item does not stop the others.
pub fn label_dataset(
    targets: &[FeatureVector],
    anchors: &AnchorSet,
    policy: &Policy,
) -> Result<Vec<Result<PseudoLabel, ItemError>>, LabelError> {
    let labeler = Labeler::new(anchors)?;
    labeler.check_capacity(policy)?;
    Ok(targets
        .par_iter()
        .enumerate()
        .map(|(index, t)| {
            labeler.label(t, policy).map_err(|error| ItemError {
                index,
                id: t.id.clone(),
                error,
            })
        })
        .collect())
}
