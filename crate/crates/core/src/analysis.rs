//! Policy-space sweeps: label a dataset under every policy of a given
//! length, lay the entropies out on a 2^d x 2^d grid, and count distinct
//! labels per policy.
//!
//! Grid layout: the row index encodes, most significant bit first, which
//! positions are dual (C/F); the column index encodes which positions pick
//! the maximizer (f/F). Row 0 runs `cc..c` to `ff..f`, the last row `CC..C`
//! to `FF..F`, so the `[[c, f], [C, F]]` pattern repeats at every scale.

use crate::features::{sequence_entropy, AnchorSet, FeatureVector};
use crate::labeling::{label_dataset, Decision, LabelError, Labeler, Policy, SimplexState};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const MAX_SWEEP_DIMENSION: usize = 8;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("sweep dimension must lie in 1..={MAX_SWEEP_DIMENSION}, got {0}")]
    DimensionOutOfRange(usize),
    #[error("grid position ({row}, {col}) outside a {side}x{side} grid")]
    OutOfGrid { row: usize, col: usize, side: usize },
    #[error("no targets to analyse")]
    NoTargets,
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error("item {index} ({id}): {error}")]
    Item {
        index: usize,
        id: String,
        error: LabelError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn check_dimension(d: usize) -> Result<(), AnalysisError> {
    if !(1..=MAX_SWEEP_DIMENSION).contains(&d) {
        return Err(AnalysisError::DimensionOutOfRange(d));
    }
    Ok(())
}

fn decision_at(d: usize, row: usize, col: usize, position: usize) -> Decision {
    let bit = d - 1 - position;
    let dual = (row >> bit) & 1 == 1;
    let far = (col >> bit) & 1 == 1;
    match (dual, far) {
        (false, false) => Decision::Min,
        (false, true) => Decision::Max,
        (true, false) => Decision::MinThenMax,
        (true, true) => Decision::MaxThenMin,
    }
}

/// The policy shown at zero-based grid cell (`row`, `col`).
pub fn policy_at(d: usize, row: usize, col: usize) -> Result<Policy, AnalysisError> {
    check_dimension(d)?;
    let side = 1usize << d;
    if row >= side || col >= side {
        return Err(AnalysisError::OutOfGrid { row, col, side });
    }
    let decisions = (0..d).map(|p| decision_at(d, row, col, p)).collect();
    Ok(Policy::new(decisions).expect("d >= 1"))
}

/// Zero-based grid cell of a policy; inverse of [`policy_at`].
pub fn grid_position(policy: &Policy) -> (usize, usize) {
    let d = policy.max_dimension();
    policy
        .decisions()
        .iter()
        .enumerate()
        .fold((0, 0), |(row, col), (p, dec)| {
            let bit = d - 1 - p;
            (
                row | (usize::from(dec.is_dual()) << bit),
                col | (usize::from(dec.keeps_max()) << bit),
            )
        })
}

/// All 4^d policies in row-major grid order.
pub fn enumerate_policies(d: usize) -> Result<Vec<Policy>, AnalysisError> {
    check_dimension(d)?;
    let side = 1usize << d;
    (0..side * side)
        .map(|i| policy_at(d, i / side, i % side))
        .collect()
}

/// A grid cell that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissingCell {
    pub row: usize,
    pub col: usize,
    pub policy: String,
    pub reason: String,
}

/// A target skipped by a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemFailure {
    pub index: usize,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub d: usize,
    /// Row-major entropies in bits; `None` for missing cells.
    pub entropies: Vec<Option<f64>>,
    /// Row-major count of distinct labels per policy.
    pub unique_counts: Vec<Option<usize>>,
    pub missing: Vec<MissingCell>,
    pub item_failures: Vec<ItemFailure>,
    /// Number of targets that contributed labels.
    pub labeled: usize,
}

impl SweepResult {
    pub fn side(&self) -> usize {
        1 << self.d
    }

    pub fn policy_at(&self, row: usize, col: usize) -> Policy {
        policy_at(self.d, row, col).expect("cell inside grid")
    }

    pub fn entropy(&self, row: usize, col: usize) -> Option<f64> {
        self.entropies[row * self.side() + col]
    }

    pub fn unique_count(&self, row: usize, col: usize) -> Option<usize> {
        self.unique_counts[row * self.side() + col]
    }

    /// Entropy and distinct-label count for a policy.
    pub fn cell(&self, policy: &Policy) -> (Option<f64>, Option<usize>) {
        let (r, c) = grid_position(policy);
        (self.entropy(r, c), self.unique_count(r, c))
    }
}

/// Labels under every policy of length `d` for one target, indexed by the
/// base-4 code of the decision sequence (c=0, f=1, C=2, F=3, first decision
/// most significant). Policies needing more anchors than exist are `None`.
///
/// Policies sharing a prefix share the simplex states of that prefix, so each
/// tree node costs one round of candidate evaluations.
pub fn policy_tree_labels(
    labeler: &Labeler<'_>,
    to_target: &[f64],
    d: usize,
) -> Result<Vec<Option<Vec<u16>>>, LabelError> {
    let mut out = vec![None; 1 << (2 * d)];
    let mut excluded = vec![false; labeler.anchors().len()];
    let mut names = Vec::with_capacity(2 * d);
    walk(
        labeler,
        to_target,
        &SimplexState::new(),
        &mut excluded,
        &mut names,
        d,
        0,
        &mut out,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    labeler: &Labeler<'_>,
    to_target: &[f64],
    state: &SimplexState,
    excluded: &mut [bool],
    names: &mut Vec<u16>,
    remaining: usize,
    code: usize,
    out: &mut [Option<Vec<u16>>],
) -> Result<(), LabelError> {
    if remaining == 0 {
        out[code] = Some(names.clone());
        return Ok(());
    }
    let Some(ext) = labeler.extremes(state, to_target, excluded)? else {
        return Ok(());
    };
    for (digit, decision) in Decision::ALL.iter().enumerate() {
        if decision.is_dual() && ext.candidates < 2 {
            continue;
        }
        let (kept, _, other) = ext.pick(*decision);
        let mark = names.len();
        names.push(kept as u16);
        excluded[kept] = true;
        if let Some(other) = other {
            names.push(other as u16);
            excluded[other] = true;
        }
        let next = state.extended(labeler, to_target, kept);
        walk(
            labeler,
            to_target,
            &next,
            excluded,
            names,
            remaining - 1,
            code * 4 + digit,
            out,
        )?;
        excluded[kept] = false;
        if let Some(other) = other {
            excluded[other] = false;
        }
        names.truncate(mark);
    }
    Ok(())
}

fn tree_code(policy: &Policy) -> usize {
    policy.decisions().iter().fold(0, |acc, d| {
        acc * 4
            + Decision::ALL
                .iter()
                .position(|x| x == d)
                .expect("known decision")
    })
}

type Tally = Vec<HashMap<Vec<u16>, usize>>;

/// Labels every target under every policy of length `d`.
pub fn sweep(
    targets: &[FeatureVector],
    anchors: &AnchorSet,
    d: usize,
) -> Result<SweepResult, AnalysisError> {
    check_dimension(d)?;
    let labeler = Labeler::new(anchors)?;
    let n_codes = 1usize << (2 * d);

    let per_item: Vec<Result<Vec<Option<Vec<u16>>>, ItemFailure>> = targets
        .par_iter()
        .enumerate()
        .map(|(index, t)| {
            labeler
                .target_distances(t)
                .and_then(|dist| policy_tree_labels(&labeler, &dist, d))
                .map_err(|e| ItemFailure {
                    index,
                    id: t.id.clone(),
                    reason: e.to_string(),
                })
        })
        .collect();

    let mut tally: Tally = vec![HashMap::new(); n_codes];
    let mut incomplete = vec![false; n_codes];
    let mut item_failures = Vec::new();
    let mut labeled = 0;
    for item in per_item {
        match item {
            Ok(codes) => {
                labeled += 1;
                for (code, label) in codes.into_iter().enumerate() {
                    match label {
                        Some(l) => *tally[code].entry(l).or_default() += 1,
                        None => incomplete[code] = true,
                    }
                }
            }
            Err(f) => item_failures.push(f),
        }
    }

    let side = 1usize << d;
    let mut entropies = vec![None; n_codes];
    let mut unique_counts = vec![None; n_codes];
    let mut missing = Vec::new();
    for row in 0..side {
        for col in 0..side {
            let policy = policy_at(d, row, col)?;
            let code = tree_code(&policy);
            let cell = row * side + col;
            let reason = if incomplete[code] {
                Some(
                    labeler
                        .check_capacity(&policy)
                        .err()
                        .map_or_else(|| "insufficient candidates".to_string(), |e| e.to_string()),
                )
            } else if labeled == 0 {
                Some("no target could be labeled".to_string())
            } else {
                None
            };
            match reason {
                Some(reason) => missing.push(MissingCell {
                    row,
                    col,
                    policy: policy.to_string(),
                    reason,
                }),
                None => {
                    let counts = &tally[code];
                    entropies[cell] = Some(entropy_of_counts(counts.values().copied(), labeled));
                    unique_counts[cell] = Some(counts.len());
                }
            }
        }
    }

    Ok(SweepResult {
        d,
        entropies,
        unique_counts,
        missing,
        item_failures,
        labeled,
    })
}

fn entropy_of_counts<I: Iterator<Item = usize>>(counts: I, total: usize) -> f64 {
    let mut c: Vec<usize> = counts.collect();
    c.sort_unstable();
    let n = total as f64;
    c.iter()
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelCountRow {
    pub policy: String,
    pub count: usize,
    pub entropy: f64,
}

/// Distinct-label counts per policy, ascending by count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelCountTable {
    pub rows: Vec<LabelCountRow>,
}

impl LabelCountTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("policy,count\n");
        for r in &self.rows {
            s.push_str(&format!("{},{}\n", r.policy, r.count));
        }
        s
    }

    pub fn count_for(&self, policy: &str) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.policy == policy)
            .map(|r| r.count)
    }
}

pub fn label_count_table(
    targets: &[FeatureVector],
    anchors: &AnchorSet,
    policies: &[Policy],
) -> Result<LabelCountTable, AnalysisError> {
    if targets.is_empty() {
        return Err(AnalysisError::NoTargets);
    }
    let mut rows = Vec::with_capacity(policies.len());
    for policy in policies {
        let labels = label_dataset(targets, anchors, policy)?
            .into_iter()
            .map(|r| {
                r.map_err(|e| AnalysisError::Item {
                    index: e.index,
                    id: e.id,
                    error: e.error,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut distinct: Vec<&Vec<String>> = labels.iter().map(|l| &l.names).collect();
        distinct.sort();
        distinct.dedup();
        rows.push(LabelCountRow {
            policy: policy.to_string(),
            count: distinct.len(),
            entropy: sequence_entropy(labels.iter().map(|l| &l.names)).unwrap_or(0.0),
        });
    }
    rows.sort_by_key(|r| r.count);
    Ok(LabelCountTable { rows })
}

/// Table built from a finished sweep, covering every computed cell.
pub fn count_table_from_sweep(result: &SweepResult) -> LabelCountTable {
    let side = result.side();
    let mut rows: Vec<LabelCountRow> = (0..side * side)
        .filter_map(|cell| {
            let (row, col) = (cell / side, cell % side);
            Some(LabelCountRow {
                policy: result.policy_at(row, col).to_string(),
                count: result.unique_counts[cell]?,
                entropy: result.entropies[cell]?,
            })
        })
        .collect();
    rows.sort_by_key(|r| r.count);
    LabelCountTable { rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapFormat {
    Csv,
    Pgm,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("heatmap");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), AnalysisError> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|source| AnalysisError::Io {
            path: path.display().to_string(),
            source,
        })
}

/// Heatmap CSV body: one line per grid row, empty fields for missing cells.
pub fn heatmap_csv(result: &SweepResult) -> String {
    let side = result.side();
    let mut s = String::new();
    for row in 0..side {
        let line: Vec<String> = (0..side)
            .map(|col| {
                result
                    .entropy(row, col)
                    .map_or(String::new(), |e| e.to_string())
            })
            .collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// `row,col,policy` with one-based grid coordinates.
pub fn policy_index_csv(d: usize) -> Result<String, AnalysisError> {
    let side = 1usize << d;
    let mut s = String::from("row,col,policy\n");
    for row in 0..side {
        for col in 0..side {
            s.push_str(&format!(
                "{},{},{}\n",
                row + 1,
                col + 1,
                policy_at(d, row, col)?
            ));
        }
    }
    Ok(s)
}

/// Binary PGM, one pixel per policy, min-max scaled to 0..=255. A constant
/// grid maps to all zeros, as do missing cells.
pub fn heatmap_pgm(result: &SweepResult) -> Vec<u8> {
    let side = result.side();
    let present: Vec<f64> = result.entropies.iter().flatten().copied().collect();
    let lo = present.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut bytes = format!("P5\n{side} {side}\n255\n").into_bytes();
    bytes.extend(result.entropies.iter().map(|e| match e {
        Some(v) if hi > lo => (255.0 * (v - lo) / (hi - lo)).round() as u8,
        _ => 0,
    }));
    bytes
}

/// Writes the heatmap to `path` and returns every file written. CSV output
/// gets a `<stem>.policies.csv` companion; any missing cells or skipped
/// targets go to `<stem>.errors.json`.
pub fn export_heatmap(
    result: &SweepResult,
    path: &Path,
    format: HeatmapFormat,
) -> Result<Vec<PathBuf>, AnalysisError> {
    let mut written = Vec::new();
    match format {
        HeatmapFormat::Csv => {
            write_file(path, heatmap_csv(result).as_bytes())?;
            written.push(path.to_path_buf());
            let companion = sibling(path, "policies.csv");
            write_file(&companion, policy_index_csv(result.d)?.as_bytes())?;
            written.push(companion);
        }
        HeatmapFormat::Pgm => {
            write_file(path, &heatmap_pgm(result))?;
            written.push(path.to_path_buf());
        }
    }
    if !result.missing.is_empty() || !result.item_failures.is_empty() {
        let report = serde_json::json!({
            "missing_cells": result.missing,
            "item_failures": result.item_failures,
        });
        let errors = sibling(path, "errors.json");
        write_file(&errors, report.to_string().as_bytes())?;
        written.push(errors);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Metric, Representative};
    use crate::labeling::parse_policy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_anchors(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> AnchorSet {
        AnchorSet::new(
            (0..n)
                .map(|i| Representative {
                    source_name: format!("s{i:02}"),
                    rep_index: 0,
                    qualified_name: format!("s{i:02}"),
                    vector: FeatureVector::new(
                        format!("s{i:02}"),
                        (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    ),
                })
                .collect(),
            Metric::Euclidean,
        )
        .unwrap()
    }

    fn random_targets(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<FeatureVector> {
        (0..n)
            .map(|i| {
                FeatureVector::new(
                    format!("t{i}"),
                    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn one_dimensional_grid() {
        let p: Vec<String> = enumerate_policies(1)
            .unwrap()
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(p, vec!["c", "f", "C", "F"]);
    }

    #[test]
    fn four_dimensional_landmarks() {
        // one-based (1,9), (1,16), (16,16)
        assert_eq!(policy_at(4, 0, 8).unwrap().to_string(), "fccc");
        assert_eq!(policy_at(4, 0, 15).unwrap().to_string(), "ffff");
        assert_eq!(policy_at(4, 15, 15).unwrap().to_string(), "FFFF");
        assert_eq!(policy_at(4, 0, 0).unwrap().to_string(), "cccc");
        assert_eq!(policy_at(4, 1, 0).unwrap().to_string(), "cccC");
        assert_eq!(policy_at(4, 7, 7).unwrap().to_string(), "cFFF");
        assert_eq!(policy_at(4, 8, 0).unwrap().to_string(), "Cccc");
        assert_eq!(policy_at(4, 10, 9).unwrap().to_string(), "FcCf");
        assert_eq!(policy_at(4, 9, 15).unwrap().to_string(), "FffF");
    }

    #[test]
    fn enumeration_is_complete_and_invertible() {
        for d in 1..=5 {
            let all = enumerate_policies(d).unwrap();
            assert_eq!(all.len(), 1 << (2 * d));
            let mut strings: Vec<String> = all.iter().map(|p| p.to_string()).collect();
            strings.sort();
            strings.dedup();
            assert_eq!(strings.len(), all.len());
            let side = 1 << d;
            for (i, p) in all.iter().enumerate() {
                assert_eq!(grid_position(p), (i / side, i % side));
            }
        }
        assert!(enumerate_policies(0).is_err());
        assert!(enumerate_policies(9).is_err());
    }

    #[test]
    fn policy_tree_matches_direct_labeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let anchors = random_anchors(&mut rng, 7, 6);
        let labeler = Labeler::new(&anchors).unwrap();
        let reps = anchors.representatives();
        for t in random_targets(&mut rng, 5, 6) {
            let dist = labeler.target_distances(&t).unwrap();
            let tree = policy_tree_labels(&labeler, &dist, 3).unwrap();
            for policy in enumerate_policies(3).unwrap() {
                let direct = labeler.label(&t, &policy).unwrap();
                let via_tree: Vec<String> = tree[tree_code(&policy)]
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|&i| reps[i as usize].qualified_name.clone())
                    .collect();
                assert_eq!(direct.names, via_tree, "policy {policy}");
            }
        }
    }

    #[test]
    fn policy_tree_matches_direct_labeling_under_ties() {
        // unit vectors around the origin: every first step ties exactly
        let reps: Vec<Representative> = (0..5)
            .map(|i| Representative {
                source_name: format!("s{i}"),
                rep_index: 0,
                qualified_name: format!("s{i}"),
                vector: FeatureVector::new(
                    format!("s{i}"),
                    (0..5).map(|k| f64::from(u8::from(k == i))).collect(),
                ),
            })
            .collect();
        let anchors = AnchorSet::new(reps, Metric::Euclidean).unwrap();
        let labeler = Labeler::new(&anchors).unwrap();
        let t = FeatureVector::new("t", vec![0.0; 5]);
        let dist = labeler.target_distances(&t).unwrap();
        let tree = policy_tree_labels(&labeler, &dist, 2).unwrap();
        for policy in enumerate_policies(2).unwrap() {
            let direct = labeler.label(&t, &policy).unwrap();
            let via_tree: Vec<String> = tree[tree_code(&policy)]
                .as_ref()
                .unwrap()
                .iter()
                .map(|&i| format!("s{i}"))
                .collect();
            assert_eq!(direct.names, via_tree, "policy {policy}");
        }
        let dual = labeler.label(&t, &"Cc".parse().unwrap()).unwrap();
        assert_eq!(&dual.names[..2], &["s0", "s1"]);
    }

    #[test]
    fn sweep_agrees_with_count_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let anchors = random_anchors(&mut rng, 6, 4);
        let targets = random_targets(&mut rng, 40, 4);
        let result = sweep(&targets, &anchors, 2).unwrap();
        assert!(result.missing.is_empty());
        let policies = enumerate_policies(2).unwrap();
        let table = label_count_table(&targets, &anchors, &policies).unwrap();
        for p in &policies {
            let (entropy, count) = result.cell(p);
            let row = table
                .rows
                .iter()
                .find(|r| r.policy == p.to_string())
                .unwrap();
            assert_eq!(count, Some(row.count));
            assert!((entropy.unwrap() - row.entropy).abs() < 1e-12);
            assert!(entropy.unwrap() <= (targets.len() as f64).log2() + 1e-12);
        }
        assert!(table.rows.windows(2).all(|w| w[0].count <= w[1].count));
    }

    #[test]
    fn single_target_has_zero_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let anchors = random_anchors(&mut rng, 5, 3);
        let targets = random_targets(&mut rng, 1, 3);
        let r = sweep(&targets, &anchors, 2).unwrap();
        assert!(r.entropies.iter().all(|e| *e == Some(0.0)));
        assert!(r.unique_counts.iter().all(|c| *c == Some(1)));
    }

    #[test]
    fn duplicated_anchors_entropy() {
        // targets copy anchors with multiplicities 2, 1, 1
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let anchors = random_anchors(&mut rng, 3, 2);
        let reps = anchors.representatives();
        let targets: Vec<FeatureVector> = [0, 0, 1, 2]
            .iter()
            .map(|&i| reps[i].vector.clone())
            .collect();
        let r = sweep(&targets, &anchors, 1).unwrap();
        let (e, n) = r.cell(&parse_policy("c").unwrap());
        assert!((e.unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(n, Some(3));
    }

    #[test]
    fn too_few_anchors_leave_missing_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let anchors = random_anchors(&mut rng, 3, 3);
        let targets = random_targets(&mut rng, 4, 3);
        let r = sweep(&targets, &anchors, 2).unwrap();
        // only CC, CF, FC, FF need four names
        assert_eq!(r.missing.len(), 4);
        assert!(r.cell(&parse_policy("CF").unwrap()).0.is_none());
        assert!(r.cell(&parse_policy("Cf").unwrap()).0.is_some());
        let csv = heatmap_csv(&r);
        assert_eq!(csv.lines().nth(3).unwrap().matches(',').count(), 3);
    }

    #[test]
    fn bad_items_are_reported_not_fatal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let anchors = random_anchors(&mut rng, 4, 3);
        let mut targets = random_targets(&mut rng, 3, 3);
        targets.push(FeatureVector::new("short", vec![1.0]));
        let r = sweep(&targets, &anchors, 1).unwrap();
        assert_eq!(r.labeled, 3);
        assert_eq!(r.item_failures.len(), 1);
        assert_eq!(r.item_failures[0].id, "short");
    }

    #[test]
    fn identical_targets_count_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let anchors = random_anchors(&mut rng, 6, 3);
        let targets = vec![FeatureVector::new("x", vec![0.1, 0.2, 0.3]); 10];
        let policies = enumerate_policies(2).unwrap();
        let t = label_count_table(&targets, &anchors, &policies).unwrap();
        assert!(t.rows.iter().all(|r| r.count == 1));
        assert!(t.to_csv().starts_with("policy,count\n"));
    }

    #[test]
    fn exports() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let anchors = random_anchors(&mut rng, 4, 3);
        let targets = random_targets(&mut rng, 10, 3);
        let r = sweep(&targets, &anchors, 1).unwrap();
        let csv = dir.path().join("grid.csv");
        let written = export_heatmap(&r, &csv, HeatmapFormat::Csv).unwrap();
        assert_eq!(written.len(), 2);
        let body = fs::read_to_string(&csv).unwrap();
        assert_eq!(body.lines().count(), 2);
        assert!(body.lines().all(|l| l.split(',').count() == 2));
        let index = fs::read_to_string(dir.path().join("grid.policies.csv")).unwrap();
        assert_eq!(index, "row,col,policy\n1,1,c\n1,2,f\n2,1,C\n2,2,F\n");

        let pgm = dir.path().join("grid.pgm");
        export_heatmap(&r, &pgm, HeatmapFormat::Pgm).unwrap();
        let bytes = fs::read(&pgm).unwrap();
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(bytes.len(), b"P5\n2 2\n255\n".len() + 4);
    }

    #[test]
    fn constant_grid_is_black() {
        let r = SweepResult {
            d: 1,
            entropies: vec![Some(0.7); 4],
            unique_counts: vec![Some(2); 4],
            missing: vec![],
            item_failures: vec![],
            labeled: 3,
        };
        let bytes = heatmap_pgm(&r);
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 0, 0, 0]);
        let r = SweepResult {
            entropies: vec![Some(0.0), Some(1.0), Some(0.5), None],
            ..r
        };
        let bytes = heatmap_pgm(&r);
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 255, 128, 0]);
    }

    #[test]
    fn unwritable_path() {
        let r = SweepResult {
            d: 1,
            entropies: vec![Some(0.0); 4],
            unique_counts: vec![Some(1); 4],
            missing: vec![],
            item_failures: vec![],
            labeled: 1,
        };
        let err = export_heatmap(&r, Path::new("/nonexistent/dir/x.csv"), HeatmapFormat::Csv);
        assert!(matches!(err, Err(AnalysisError::Io { .. })));
    }
}
