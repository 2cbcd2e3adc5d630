//! Greedy pseudo-labeling by simplex-content extremization.
//!
//! A target starts as a 0-simplex. At every dimension each unused
//! representative is tried as the next vertex, and the policy decision for
//! that dimension picks which name(s) to record and which vertex to keep.

mod counting;
mod extremal;
mod greedy;

pub use counting::{count_policies, count_policies_by_length};
pub use extremal::{find_extremal_simplex, ExtremalSimplex, Extremum};
pub use greedy::{label_dataset, label_item, ItemError, Labeler, SimplexState, StepExtremes};

use crate::features::FeatureError;
use crate::geometry::GeometryError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("policy string is empty")]
    Empty,
    #[error(
        "illegal policy character {found:?} at position {position} (expected one of c, f, C, F)"
    )]
    IllegalCharacter { position: usize, found: char },
}

#[derive(Debug, Error)]
pub enum LabelError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("policy needs {needed} distinct representatives, anchor set has {available}")]
    InsufficientCandidates { needed: usize, available: usize },
    #[error("target has {target} components, anchors have {anchors}")]
    DimensionMismatch { target: usize, anchors: usize },
    #[error("dimension must be at least 1, got {0}")]
    InvalidDimension(u32),
    #[error("length {length} outside [{d}, {}] for dimension {d}", 2 * d)]
    LengthOutOfRange { d: u32, length: u32 },
    #[error("count for dimension {0} overflows u128")]
    CountOverflow(u32),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One policy letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decision {
    /// `c`: record and keep the content minimizer.
    Min,
    /// `f`: record and keep the content maximizer.
    Max,
    /// `C`: record minimizer then maximizer, keep the minimizer.
    MinThenMax,
    /// `F`: record maximizer then minimizer, keep the maximizer.
    MaxThenMin,
}

impl Decision {
    pub const ALL: [Decision; 4] = [
        Decision::Min,
        Decision::Max,
        Decision::MinThenMax,
        Decision::MaxThenMin,
    ];

    pub fn as_char(self) -> char {
        match self {
            Decision::Min => 'c',
            Decision::Max => 'f',
            Decision::MinThenMax => 'C',
            Decision::MaxThenMin => 'F',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'c' => Some(Decision::Min),
            'f' => Some(Decision::Max),
            'C' => Some(Decision::MinThenMax),
            'F' => Some(Decision::MaxThenMin),
            _ => None,
        }
    }

    /// Both extremes are recorded.
    pub fn is_dual(self) -> bool {
        matches!(self, Decision::MinThenMax | Decision::MaxThenMin)
    }

    /// The simplex grows by the maximizer.
    pub fn keeps_max(self) -> bool {
        matches!(self, Decision::Max | Decision::MaxThenMin)
    }

    /// Number of names this decision appends.
    pub fn names_emitted(self) -> usize {
        if self.is_dual() {
            2
        } else {
            1
        }
    }
}

/// A sequence of decisions, one per simplex dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy {
    decisions: Vec<Decision>,
}

impl Policy {
    pub fn new(decisions: Vec<Decision>) -> Result<Self, PolicyError> {
        if decisions.is_empty() {
            return Err(PolicyError::Empty);
        }
        Ok(Self { decisions })
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    /// d_max.
    pub fn max_dimension(&self) -> usize {
        self.decisions.len()
    }

    /// d_max plus one for every dual decision.
    pub fn label_length(&self) -> usize {
        self.decisions.iter().map(|d| d.names_emitted()).sum()
    }
}

impl FromStr for Policy {
    type Err = PolicyError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let decisions = text
            .chars()
            .enumerate()
            .map(|(i, ch)| {
                Decision::from_char(ch).ok_or(PolicyError::IllegalCharacter {
                    position: i + 1,
                    found: ch,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Policy::new(decisions)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.decisions
            .iter()
            .try_for_each(|d| write!(f, "{}", d.as_char()))
    }
}

/// Parses policy notation such as `Cfff`.
pub fn parse_policy(text: &str) -> Result<Policy, PolicyError> {
    text.parse()
}

/// Identity of a representative inside an anchor set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RepKey {
    pub source: String,
    pub rep_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabel {
    /// Qualified representative names in emission order.
    pub names: Vec<String>,
    /// Representatives that joined the simplex, one per dimension.
    pub chosen: Vec<RepKey>,
    /// Squared content of the kept simplex at each dimension.
    pub contents: Vec<f64>,
}

impl PseudoLabel {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}
