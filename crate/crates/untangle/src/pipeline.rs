//! End-to-end per-commit analysis: diff the commit against its first
//! parent, match statements, detect built-in refactorings, mark
//! propagation, categorize every changed line, and parse the structures
//! needed for entity-level metrics.

use std::collections::BTreeMap;

use crate::categorize::{categorize_commit, LineChangeRecord, Side};
use crate::diff::{parse_unified_diff, FileDiff};
use crate::error::{PipelineError, SzzError};
use crate::matching::{match_commit, StatementMatch};
use crate::metrics::{compute_rams, RamVector, StructureMap};
use crate::propagation::{name_alterations, NameAlteration};
use crate::refactoring::{detect_builtin, RefactoringInstance};
use crate::structure::{parse_structure, StructureIndex};
use crate::szz::RecordSource;
use crate::vcs::{CommitId, RepoHandle};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Statement-matching cosine similarity threshold (strict).
    pub threshold: f64,
    /// Detect renames and moves from the diff itself, in addition to any
    /// external refactoring report.
    pub builtin_detection: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: 0.8,
            builtin_detection: true,
        }
    }
}

/// Everything derived from one commit.
#[derive(Debug, Clone)]
pub struct CommitAnalysis {
    pub commit: CommitId,
    pub parent: Option<CommitId>,
    /// Text diffs against the first parent.
    pub diffs: Vec<FileDiff>,
    /// Binary diffs, excluded from analysis.
    pub skipped: Vec<FileDiff>,
    pub matches: Vec<StatementMatch>,
    /// External report instances first, then built-in detections; record
    /// `refactoring_ids` index into this list.
    pub instances: Vec<RefactoringInstance>,
    pub alterations: Vec<NameAlteration>,
    pub records: Vec<LineChangeRecord>,
    pub structures_before: StructureMap,
    pub structures_after: StructureMap,
}

fn parse_file(repo: &RepoHandle, commit: &CommitId, path: &str) -> Result<StructureIndex, PipelineError> {
    let version = repo.read_file(commit, path)?;
    Ok(parse_structure(&version.lines))
}

/// Structure maps for the touched files. Renamed files appear under both
/// the old and the new path on both sides, so entity presence checks work
/// regardless of which name a record carries.
fn build_structures(
    repo: &RepoHandle,
    commit: &CommitId,
    parent: Option<&CommitId>,
    diffs: &[FileDiff],
) -> Result<(StructureMap, StructureMap), PipelineError> {
    let mut before = StructureMap::new();
    let mut after = StructureMap::new();
    for fd in diffs {
        let before_struct = match (parent, fd.path_before.as_deref()) {
            (Some(p), Some(path)) => Some(parse_file(repo, p, path)?),
            _ => None,
        };
        let after_struct = match fd.path_after.as_deref() {
            Some(path) => Some(parse_file(repo, commit, path)?),
            None => None,
        };
        let mut keys: Vec<&str> = Vec::new();
        keys.extend(fd.path_before.as_deref());
        keys.extend(fd.path_after.as_deref());
        keys.dedup();
        for key in keys {
            before.insert(key.to_string(), before_struct.clone());
            after.insert(key.to_string(), after_struct.clone());
        }
    }
    Ok((before, after))
}

/// Runs the full analysis for one commit. `external` holds the refactoring
/// report instances for this commit (possibly empty).
pub fn analyze_commit(
    repo: &RepoHandle,
    commit: &CommitId,
    external: &[RefactoringInstance],
    config: &PipelineConfig,
) -> Result<CommitAnalysis, PipelineError> {
    let parent = repo.first_parent(commit)?;
    let diff_text = repo.diff(parent.as_ref(), commit)?;
    let parsed = parse_unified_diff(&diff_text)?;
    let (skipped, diffs): (Vec<FileDiff>, Vec<FileDiff>) =
        parsed.into_iter().partition(|fd| fd.binary);

    let matches = match_commit(&diffs, external, config.threshold);
    let mut instances: Vec<RefactoringInstance> = external.to_vec();
    if config.builtin_detection {
        instances.extend(detect_builtin(&diffs, &matches));
    }
    let alterations = name_alterations(&instances);
    let mut records = categorize_commit(commit.as_str(), &diffs, &matches, &instances, &alterations)?;

    let (structures_before, structures_after) = build_structures(repo, commit, parent.as_ref(), &diffs)?;
    for r in &mut records {
        let map = match r.side {
            Side::Del => &structures_before,
            Side::Add => &structures_after,
        };
        if let Some(Some(idx)) = map.get(&r.path) {
            if let Ok((class, method)) = idx.enclosing(r.line) {
                r.enclosing_class = Some(class);
                r.enclosing_method = method;
            }
        }
    }

    Ok(CommitAnalysis {
        commit: commit.clone(),
        parent,
        diffs,
        skipped,
        matches,
        instances,
        alterations,
        records,
        structures_before,
        structures_after,
    })
}

/// The 66-value metric vector for an analyzed commit.
pub fn commit_rams(analysis: &CommitAnalysis) -> Result<RamVector, crate::error::MetricsError> {
    compute_rams(
        &analysis.records,
        &analysis.structures_before,
        &analysis.structures_after,
    )
}

/// Caching analyzer over one repository plus one refactoring report. Feeds
/// the labeler with categorized records, computing each commit at most once.
pub struct Analyzer {
    repo: RepoHandle,
    config: PipelineConfig,
    report: BTreeMap<String, Vec<RefactoringInstance>>,
    cache: BTreeMap<String, CommitAnalysis>,
}

impl Analyzer {
    pub fn new(
        repo: RepoHandle,
        report: BTreeMap<String, Vec<RefactoringInstance>>,
        config: PipelineConfig,
    ) -> Self {
        Analyzer {
            repo,
            config,
            report,
            cache: BTreeMap::new(),
        }
    }

    pub fn repo(&self) -> &RepoHandle {
        &self.repo
    }

    pub fn analysis(&mut self, commit: &CommitId) -> Result<&CommitAnalysis, PipelineError> {
        if !self.cache.contains_key(commit.as_str()) {
            let external = self
                .report
                .get(commit.as_str())
                .map(Vec::as_slice)
                .unwrap_or_default();
            let analysis = analyze_commit(&self.repo, commit, external, &self.config)?;
            self.cache.insert(commit.as_str().to_string(), analysis);
        }
        Ok(&self.cache[commit.as_str()])
    }
}

impl RecordSource for Analyzer {
    fn commit_records(&mut self, commit: &CommitId) -> Result<&[LineChangeRecord], SzzError> {
        self.analysis(commit)
            .map(|a| a.records.as_slice())
            .map_err(|e| SzzError::Pipeline(Box::new(e)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn synthetic(json: &str) -> RepoHandle {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("repo.json");
        std::fs::write(&path, json).unwrap();
        RepoHandle::open(Path::new(&path)).unwrap()
    }

    /// c2 renames a local variable (statements long enough to pair by
    /// similarity); c3 renames the file without edits.
    const RENAME_REPO: &str = r#"{
      "commits": [
        {"id": "c1", "parents": [],
         "files": {"Calc.java": "class Calc {\n  int run() {\n    int cnt = base + step;\n    cnt += delta * factor;\n    return cnt + offset + 1;\n  }\n}\n"}},
        {"id": "c2", "parents": ["c1"],
         "files": {"Calc.java": "class Calc {\n  int run() {\n    int count = base + step;\n    count += delta * factor;\n    return count + offset + 1;\n  }\n}\n"}},
        {"id": "c3", "parents": ["c2"],
         "files": {"Core.java": "class Calc {\n  int run() {\n    int count = base + step;\n    count += delta * factor;\n    return count + offset + 1;\n  }\n}\n"}}
      ]
    }"#;

    #[test]
    fn root_commit_yields_bare_adds() {
        let repo = synthetic(RENAME_REPO);
        let a = analyze_commit(&repo, &"c1".into(), &[], &PipelineConfig::default()).unwrap();
        assert_eq!(a.parent, None);
        assert_eq!(a.records.len(), 7);
        assert!(a.records.iter().all(|r| r.category == "Add"));
        // Structure enrichment resolves the enclosing class and method.
        let line3 = a
            .records
            .iter()
            .find(|r| r.line == 3)
            .unwrap();
        assert_eq!(line3.enclosing_class.as_deref(), Some("Calc"));
        assert_eq!(line3.enclosing_method.as_deref(), Some("run"));
    }

    #[test]
    fn builtin_detection_finds_the_variable_rename() {
        let repo = synthetic(RENAME_REPO);
        let a = analyze_commit(&repo, &"c2".into(), &[], &PipelineConfig::default()).unwrap();
        // The declaration pair is the rename; the two uses are propagation.
        let adds: BTreeMap<usize, &str> = a
            .records
            .iter()
            .filter(|r| r.side == Side::Add)
            .map(|r| (r.line, r.category.as_str()))
            .collect();
        assert_eq!(adds[&3], "Add_Refactoring");
        assert_eq!(adds[&4], "Add_Propagation");
        assert_eq!(adds[&5], "Add_Propagation");
        // Flags mirror on the Del side.
        let dels: BTreeMap<usize, &str> = a
            .records
            .iter()
            .filter(|r| r.side == Side::Del)
            .map(|r| (r.line, r.category.as_str()))
            .collect();
        assert_eq!(dels[&3], "Del_Refactoring");
        assert_eq!(dels[&4], "Del_Propagation");
        assert_eq!(dels[&5], "Del_Propagation");
        assert!(!a.instances.is_empty());
    }

    #[test]
    fn builtin_detection_can_be_disabled() {
        let repo = synthetic(RENAME_REPO);
        let cfg = PipelineConfig {
            builtin_detection: false,
            ..PipelineConfig::default()
        };
        let a = analyze_commit(&repo, &"c2".into(), &[], &cfg).unwrap();
        assert!(a.instances.is_empty());
        assert!(a
            .records
            .iter()
            .all(|r| !r.flags.refactoring && !r.flags.propagation));
    }

    #[test]
    fn renamed_files_are_aliased_in_both_structure_maps() {
        let repo = synthetic(RENAME_REPO);
        let a = analyze_commit(&repo, &"c3".into(), &[], &PipelineConfig::default()).unwrap();
        // A no-edit rename: one diff entry, no changed lines, and the
        // structure of the file reachable under either name on both sides.
        assert!(a.records.is_empty());
        assert_eq!(a.diffs.len(), 1);
        assert!(a.diffs[0].is_rename());
        for key in ["Calc.java", "Core.java"] {
            assert!(matches!(a.structures_before.get(key), Some(Some(_))), "{key} before");
            assert!(matches!(a.structures_after.get(key), Some(Some(_))), "{key} after");
        }
        let rams = commit_rams(&a).unwrap();
        assert!(rams.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn analyzer_caches_and_feeds_records() {
        use crate::szz::RecordSource;
        let repo = synthetic(RENAME_REPO);
        let mut analyzer = Analyzer::new(repo, BTreeMap::new(), PipelineConfig::default());
        let n1 = analyzer.commit_records(&"c2".into()).unwrap().len();
        let n2 = analyzer.commit_records(&"c2".into()).unwrap().len();
        assert_eq!(n1, n2);
        assert!(n1 > 0);
        assert!(analyzer.commit_records(&"missing".into()).is_err());
    }
}
