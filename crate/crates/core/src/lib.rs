//! Geometric pseudo-labels.
//!
//! Targets are labeled by the names of anchor vectors chosen greedily to
//! extremize the content of a growing simplex, dimension by dimension, under
//! a policy over the alphabet `{c, f, C, F}`.

pub mod analysis;
pub mod features;
pub mod geometry;
pub mod labeling;
pub mod synth;

pub use features::{AnchorSet, Dataset, FeatureVector, Metric, Representative};
pub use labeling::{label_dataset, label_item, parse_policy, Policy, PseudoLabel};
