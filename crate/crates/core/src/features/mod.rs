//! Feature vectors, datasets and anchor sets, plus the metrics and
//! information measures defined over them.

mod aggregate;
mod divergence;
mod io;
mod metric;

pub use aggregate::{aggregate_kmeans, aggregate_mean};
pub use divergence::{
    dataset_divergence, kl_divergence, label_entropy, sequence_entropy, DivergenceReport,
    ProbabilityVector, DEFAULT_EPSILON,
};
pub use io::{load_vectors, write_vectors, VectorFormat};
pub use metric::{distance, squared_distance, Metric};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: expected {expected} components, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: component {column} is not a number: {value:?}")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("no vectors found")]
    Empty,
    #[error("vectors must have at least one component")]
    ZeroDimension,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("sample fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("cluster count {k} invalid for {count} vectors")]
    InvalidClusterCount { k: usize, count: usize },
    #[error("vector {id:?} cannot be normalized: {reason}")]
    NotNormalizable { id: String, reason: String },
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("anchor set needs at least 2 representatives, got {0}")]
    TooFewRepresentatives(usize),
    #[error("duplicate representative ({source_name}, {rep_index})")]
    DuplicateRepresentative {
        source_name: String,
        rep_index: usize,
    },
    #[error("duplicate qualified name {0:?}")]
    DuplicateQualifiedName(String),
    #[error("cannot compute entropy of an empty label list")]
    NoLabels,
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub id: String,
    pub components: Vec<f64>,
}

impl FeatureVector {
    pub fn new(id: impl Into<String>, components: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// A named, nonempty collection of equal-length feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    vectors: Vec<FeatureVector>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, vectors: Vec<FeatureVector>) -> Result<Self, FeatureError> {
        let first = vectors.first().ok_or(FeatureError::Empty)?;
        let dim = first.dim();
        if dim == 0 {
            return Err(FeatureError::ZeroDimension);
        }
        for (row, v) in vectors.iter().enumerate() {
            if v.dim() != dim {
                return Err(FeatureError::RaggedRow {
                    row: row + 1,
                    expected: dim,
                    found: v.dim(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            vectors,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vectors(&self) -> &[FeatureVector] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// One representative vector of a source dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Representative {
    pub source_name: String,
    pub rep_index: usize,
    pub qualified_name: String,
    pub vector: FeatureVector,
}

impl Representative {
    /// `(source_name, rep_index)`, the tie-breaking key.
    pub fn key(&self) -> (&str, usize) {
        (&self.source_name, self.rep_index)
    }
}

/// The anchors a target is labeled against.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    representatives: Vec<Representative>,
    metric: Metric,
}

impl AnchorSet {
    pub fn new(representatives: Vec<Representative>, metric: Metric) -> Result<Self, FeatureError> {
        if representatives.len() < 2 {
            return Err(FeatureError::TooFewRepresentatives(representatives.len()));
        }
        let dim = representatives[0].vector.dim();
        if dim == 0 {
            return Err(FeatureError::ZeroDimension);
        }
        let mut keys = HashSet::new();
        let mut names = HashSet::new();
        for rep in &representatives {
            if rep.vector.dim() != dim {
                return Err(FeatureError::DimensionMismatch {
                    left: dim,
                    right: rep.vector.dim(),
                });
            }
            if !keys.insert(rep.key()) {
                return Err(FeatureError::DuplicateRepresentative {
                    source_name: rep.source_name.clone(),
                    rep_index: rep.rep_index,
                });
            }
            if !names.insert(rep.qualified_name.as_str()) {
                return Err(FeatureError::DuplicateQualifiedName(
                    rep.qualified_name.clone(),
                ));
            }
        }
        Ok(Self {
            representatives,
            metric,
        })
    }

    /// One representative per vector, each its own source.
    pub fn from_vectors(vectors: &[FeatureVector], metric: Metric) -> Result<Self, FeatureError> {
        let reps = vectors
            .iter()
            .map(|v| Representative {
                source_name: v.id.clone(),
                rep_index: 0,
                qualified_name: v.id.clone(),
                vector: v.clone(),
            })
            .collect();
        Self::new(reps, metric)
    }

    pub fn representatives(&self) -> &[Representative] {
        &self.representatives
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn dim(&self) -> usize {
        self.representatives[0].vector.dim()
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn to_json(&self) -> Result<String, FeatureError> {
        let file = AnchorSetFile {
            metric: self.metric,
            representatives: self
                .representatives
                .iter()
                .map(|r| RepresentativeRecord {
                    source: r.source_name.clone(),
                    rep_index: r.rep_index,
                    qualified_name: r.qualified_name.clone(),
                    v: r.vector.components.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, FeatureError> {
        let file: AnchorSetFile = serde_json::from_str(text)?;
        let reps = file
            .representatives
            .into_iter()
            .map(|r| Representative {
                vector: FeatureVector::new(r.qualified_name.clone(), r.v),
                source_name: r.source,
                rep_index: r.rep_index,
                qualified_name: r.qualified_name,
            })
            .collect();
        Self::new(reps, file.metric)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct AnchorSetFile {
    metric: Metric,
    representatives: Vec<RepresentativeRecord>,
}

#[derive(Serialize, Deserialize)]
struct RepresentativeRecord {
    source: String,
    rep_index: usize,
    qualified_name: String,
    v: Vec<f64>,
}
