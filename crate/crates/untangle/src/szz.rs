//! Bug-inducing commit labeling. Fix lines are first cleaned of
//! pure-refactoring deletions, then each surviving line is blamed backward;
//! revisions whose blamed change is a move, refactoring, or propagation are
//! hopped over until an actual authoring change is reached.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::categorize::{LineChangeRecord, Side};
use crate::error::SzzError;
use crate::vcs::{CommitId, RepoHandle};

/// Add-side categories that are never bug-inducing: the line's content
/// existed before this commit, so the trace continues past it.
pub const ADD_SKIP_SET: [&str; 4] = [
    "Add_Move",
    "Add_Refactoring",
    "Add_Propagation",
    "Add_Refactoring_Propagation",
];

/// Del-side categories that are not real bug-fixing statements.
pub const DEL_SKIP_SET: [&str; 4] = [
    "Del_Move",
    "Del_Refactoring",
    "Del_Propagation",
    "Del_Refactoring_Propagation",
];

/// One fix line as read from an annotations file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub fix_commit: CommitId,
    pub path: String,
    /// Line number on the before side of the fix commit.
    pub line: usize,
}

/// All annotated fix lines of one fix commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixAnnotation {
    pub fix_commit: CommitId,
    pub fix_lines: Vec<(String, usize)>,
}

/// Groups rows by fix commit, sorted and deduplicated, so downstream
/// results do not depend on input order.
pub fn group_annotations(rows: &[AnnotationRow]) -> Vec<FixAnnotation> {
    let mut by_commit: BTreeMap<CommitId, BTreeSet<(String, usize)>> = BTreeMap::new();
    for row in rows {
        by_commit
            .entry(row.fix_commit.clone())
            .or_default()
            .insert((row.path.clone(), row.line));
    }
    by_commit
        .into_iter()
        .map(|(fix_commit, lines)| FixAnnotation {
            fix_commit,
            fix_lines: lines.into_iter().collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHop {
    pub commit: CommitId,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BugLabel {
    pub inducing_commit: CommitId,
    pub inducing_path: String,
    pub inducing_line: usize,
    /// Hops from the first blamed revision to the inducing one. Every
    /// non-final hop has a skip-set category; the final one never does
    /// (unless the trace was cut at the history root).
    pub trace: Vec<TraceHop>,
    pub origin_fix: CommitId,
    /// The trace hit the history root and could not continue.
    pub root_flagged: bool,
    /// The inducing commit exceeds the churn cap and is not counted buggy.
    pub excluded: bool,
}

#[derive(Debug, Clone)]
pub struct SzzOptions {
    /// When false the skip set is ignored: plain SZZ, every trace length 1.
    pub skip_refactorings: bool,
    pub max_hops: usize,
    /// Inducing commits changing more lines than this are marked excluded.
    pub max_commit_churn: Option<usize>,
}

impl Default for SzzOptions {
    fn default() -> Self {
        SzzOptions {
            skip_refactorings: true,
            max_hops: 50,
            max_commit_churn: None,
        }
    }
}

/// Supplies categorized line change records per commit. Implementations may
/// compute lazily and cache; lookups are sequential.
pub trait RecordSource {
    fn commit_records(&mut self, commit: &CommitId) -> Result<&[LineChangeRecord], SzzError>;
}

/// A fixed in-memory record table, usable wherever records are precomputed.
impl RecordSource for BTreeMap<String, Vec<LineChangeRecord>> {
    fn commit_records(&mut self, commit: &CommitId) -> Result<&[LineChangeRecord], SzzError> {
        self.get(commit.as_str())
            .map(Vec::as_slice)
            .ok_or_else(|| SzzError::LineOriginUnavailable {
                commit: commit.as_str().to_string(),
                path: String::new(),
                line: 0,
                reason: "no records for commit".into(),
            })
    }
}

/// Drops annotated fix lines whose deletion is itself pure refactoring,
/// move, or propagation; what remains are the real bug-fixing statements.
pub fn filter_fix_lines(
    annotation: &FixAnnotation,
    records: &[LineChangeRecord],
) -> Result<Vec<(String, usize)>, SzzError> {
    let mut del_categories: BTreeMap<(&str, usize), &str> = BTreeMap::new();
    for r in records {
        if r.side == Side::Del {
            del_categories.insert((r.path.as_str(), r.line), r.category.as_str());
        }
    }
    let mut retained = Vec::new();
    for (path, line) in &annotation.fix_lines {
        let category = del_categories.get(&(path.as_str(), *line)).ok_or_else(|| {
            SzzError::UnknownFixLine {
                commit: annotation.fix_commit.as_str().to_string(),
                path: path.clone(),
                line: *line,
            }
        })?;
        if !DEL_SKIP_SET.contains(category) {
            retained.push((path.clone(), *line));
        }
    }
    Ok(retained)
}

/// Traces one fix line back to its bug-inducing commit.
///
/// The line is blamed as of the fix's first parent. If the blamed revision's
/// Add-side record is in the skip set, the trace moves to that record's
/// partner (the deleted line in the blamed revision) and blames again from
/// its first parent; otherwise the blamed revision is bug-inducing. Capped
/// at `max_hops`. A trace that reaches the history root while still inside
/// the skip set stops there with `root_flagged` set.
pub fn trace_origin(
    repo: &RepoHandle,
    source: &mut dyn RecordSource,
    fix_commit: &CommitId,
    path: &str,
    line: usize,
    opts: &SzzOptions,
) -> Result<BugLabel, SzzError> {
    let Some(mut blame_at) = repo.first_parent(fix_commit)? else {
        return Err(SzzError::LineOriginUnavailable {
            commit: fix_commit.as_str().to_string(),
            path: path.to_string(),
            line,
            reason: "fix commit has no parent to blame from".into(),
        });
    };
    let mut cur_path = path.to_string();
    let mut cur_line = line;
    let mut trace: Vec<TraceHop> = Vec::new();
    loop {
        if trace.len() >= opts.max_hops {
            return Err(SzzError::TraceDepthExceeded(opts.max_hops));
        }
        let (blamed, orig_path, orig_line) = repo.blame_line(&blame_at, &cur_path, cur_line)?;
        let records = source.commit_records(&blamed)?;
        let record = records
            .iter()
            .find(|r| r.side == Side::Add && r.path == orig_path && r.line == orig_line);
        let Some(record) = record else {
            // The blamed commit's diff does not add this line. At the
            // history root that means the line predates everything we can
            // see: label the root, flagged.
            if repo.first_parent(&blamed)?.is_none() {
                trace.push(TraceHop {
                    commit: blamed.clone(),
                    category: "Add".into(),
                });
                return Ok(BugLabel {
                    inducing_commit: blamed,
                    inducing_path: orig_path,
                    inducing_line: orig_line,
                    trace,
                    origin_fix: fix_commit.clone(),
                    root_flagged: true,
                    excluded: false,
                });
            }
            return Err(SzzError::LineOriginUnavailable {
                commit: blamed.as_str().to_string(),
                path: orig_path,
                line: orig_line,
                reason: "blamed revision has no Add record for the line".into(),
            });
        };
        trace.push(TraceHop {
            commit: blamed.clone(),
            category: record.category.clone(),
        });
        let skip = opts.skip_refactorings && ADD_SKIP_SET.contains(&record.category.as_str());
        if !skip {
            return Ok(BugLabel {
                inducing_commit: blamed,
                inducing_path: orig_path,
                inducing_line: orig_line,
                trace,
                origin_fix: fix_commit.clone(),
                root_flagged: false,
                excluded: false,
            });
        }
        let Some(partner) = &record.partner else {
            return Err(SzzError::LineOriginUnavailable {
                commit: blamed.as_str().to_string(),
                path: orig_path,
                line: orig_line,
                reason: format!("{} record has no partner line", record.category),
            });
        };
        let (partner_path, partner_line) = (partner.path.clone(), partner.line);
        let Some(grandparent) = repo.first_parent(&blamed)? else {
            // Skip-set change in the root commit: nothing earlier exists.
            return Ok(BugLabel {
                inducing_commit: blamed,
                inducing_path: orig_path,
                inducing_line: orig_line,
                trace,
                origin_fix: fix_commit.clone(),
                root_flagged: true,
                excluded: false,
            });
        };
        blame_at = grandparent;
        cur_path = partner_path;
        cur_line = partner_line;
    }
}

/// One fix line whose trace failed; the run records it and continues.
#[derive(Debug, Clone, Serialize)]
pub struct LineFailure {
    pub fix_commit: CommitId,
    pub path: String,
    pub line: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct LabelOutcome {
    pub labels: Vec<BugLabel>,
    /// (commit, buggy) over the analyzed range, in the range's order.
    pub verdicts: Vec<(CommitId, bool)>,
    pub failures: Vec<LineFailure>,
}

/// Labels a whole dataset: filters each annotation's fix lines, traces the
/// survivors, and renders buggy/clean verdicts over `range`. A commit is
/// buggy iff some non-excluded label names it inducing. Per-line failures
/// are recorded, never fatal. Deterministic under annotation permutation.
pub fn label_dataset(
    repo: &RepoHandle,
    source: &mut dyn RecordSource,
    annotations: &[FixAnnotation],
    range: &[CommitId],
    opts: &SzzOptions,
) -> LabelOutcome {
    let mut sorted: Vec<FixAnnotation> = annotations.to_vec();
    for ann in &mut sorted {
        ann.fix_lines.sort();
        ann.fix_lines.dedup();
    }
    sorted.sort_by(|a, b| a.fix_commit.cmp(&b.fix_commit));

    let mut outcome = LabelOutcome::default();
    for ann in &sorted {
        let del_categories: BTreeMap<(String, usize), String> =
            match source.commit_records(&ann.fix_commit) {
                Ok(records) => records
                    .iter()
                    .filter(|r| r.side == Side::Del)
                    .map(|r| ((r.path.clone(), r.line), r.category.clone()))
                    .collect(),
                Err(e) => {
                    outcome.failures.push(LineFailure {
                        fix_commit: ann.fix_commit.clone(),
                        path: String::new(),
                        line: 0,
                        error: e.to_string(),
                    });
                    continue;
                }
            };
        for (path, line) in ann.fix_lines.iter().cloned() {
            let Some(category) = del_categories.get(&(path.clone(), line)) else {
                outcome.failures.push(LineFailure {
                    fix_commit: ann.fix_commit.clone(),
                    error: SzzError::UnknownFixLine {
                        commit: ann.fix_commit.as_str().to_string(),
                        path: path.clone(),
                        line,
                    }
                    .to_string(),
                    path,
                    line,
                });
                continue;
            };
            if DEL_SKIP_SET.contains(&category.as_str()) {
                continue;
            }
            match trace_origin(repo, source, &ann.fix_commit, &path, line, opts) {
                Ok(mut label) => {
                    if let Some(cap) = opts.max_commit_churn {
                        let churn = source
                            .commit_records(&label.inducing_commit)
                            .map(<[LineChangeRecord]>::len)
                            .unwrap_or(0);
                        if churn > cap {
                            label.excluded = true;
                        }
                    }
                    outcome.labels.push(label);
                }
                Err(e) => outcome.failures.push(LineFailure {
                    fix_commit: ann.fix_commit.clone(),
                    path,
                    line,
                    error: e.to_string(),
                }),
            }
        }
    }

    let buggy: BTreeSet<&str> = outcome
        .labels
        .iter()
        .filter(|l| !l.excluded)
        .map(|l| l.inducing_commit.as_str())
        .collect();
    outcome.verdicts = range
        .iter()
        .map(|c| (c.clone(), buggy.contains(c.as_str())))
        .collect();
    outcome
}
