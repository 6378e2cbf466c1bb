//! Refactoring-aware metrics. A commit yields 66 values: 18 line-category
//! counts plus, for classes and methods each, 6 touched-entity bucket counts
//! and 18 per-entity averages (global category count over touched entities).
//! Fourteen conventional process metrics can be merged in from a CSV to form
//! 80-value feature vectors.

use std::collections::BTreeMap;

use crate::categorize::{category_index, LineChangeRecord, Side, CATEGORY_LABELS};
use crate::diff::FileDiff;
use crate::error::MetricsError;
use crate::structure::{StructureIndex, TOPLEVEL};

pub const RAM_LEN: usize = 66;
pub const FEATURE_LEN: usize = 80;

/// Bucket counts and per-entity averages for one granularity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntityStats {
    pub purely_added: u64,
    pub purely_deleted: u64,
    pub purely_moved: u64,
    pub purely_refactored: u64,
    pub purely_propagated: u64,
    pub edited: u64,
    pub averages: [f64; 18],
}

impl EntityStats {
    pub fn touched(&self) -> u64 {
        self.purely_added
            + self.purely_deleted
            + self.purely_moved
            + self.purely_refactored
            + self.purely_propagated
            + self.edited
    }

    fn counts(&self) -> [u64; 6] {
        [
            self.purely_added,
            self.purely_deleted,
            self.purely_moved,
            self.purely_refactored,
            self.purely_propagated,
            self.edited,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RamVector {
    pub line_counts: [u64; 18],
    pub class_stats: EntityStats,
    pub method_stats: EntityStats,
}

impl RamVector {
    /// The 66 values in canonical order: line counts, class bucket counts,
    /// class averages, method bucket counts, method averages.
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(RAM_LEN);
        v.extend(self.line_counts.iter().map(|&c| c as f64));
        for stats in [&self.class_stats, &self.method_stats] {
            v.extend(stats.counts().iter().map(|&c| c as f64));
            v.extend(stats.averages.iter().copied());
        }
        v
    }
}

const BUCKET_NAMES: [&str; 6] = [
    "purely_added",
    "purely_deleted",
    "purely_moved",
    "purely_refactored",
    "purely_propagated",
    "edited",
];

/// Column names matching [`RamVector::values`].
pub fn ram_names() -> Vec<String> {
    let mut names = Vec::with_capacity(RAM_LEN);
    for label in CATEGORY_LABELS {
        names.push(format!("lines_{}", label.to_lowercase()));
    }
    for (plural, avg_prefix) in [("classes", "class_avg"), ("methods", "method_avg")] {
        for bucket in BUCKET_NAMES {
            names.push(format!("{plural}_{bucket}"));
        }
        for label in CATEGORY_LABELS {
            names.push(format!("{avg_prefix}_{}", label.to_lowercase()));
        }
    }
    names
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum ClassKey {
    Named(String),
    /// Lines outside every class, one pseudo-entity per file.
    Toplevel(String),
}

#[derive(Default)]
struct Agg {
    n: u64,
    bare_add: u64,
    bare_del: u64,
    move_only: u64,
    prop_only: u64,
    any_bare: bool,
    any_edit: bool,
}

impl Agg {
    fn tally(&mut self, r: &LineChangeRecord) {
        self.n += 1;
        let f = &r.flags;
        if f.is_empty() {
            self.any_bare = true;
            match r.side {
                Side::Add => self.bare_add += 1,
                Side::Del => self.bare_del += 1,
            }
        }
        if f.edit {
            self.any_edit = true;
        }
        if f.mv && !f.refactoring && !f.propagation && !f.edit {
            self.move_only += 1;
        }
        if f.propagation && !f.mv && !f.refactoring && !f.edit {
            self.prop_only += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bucket {
    PurelyAdded,
    PurelyDeleted,
    PurelyMoved,
    PurelyPropagated,
    PurelyRefactored,
    Edited,
}

fn classify(agg: &Agg, present_before: bool, present_after: bool) -> Bucket {
    if agg.bare_add == agg.n && !present_before {
        Bucket::PurelyAdded
    } else if agg.bare_del == agg.n && !present_after {
        Bucket::PurelyDeleted
    } else if agg.move_only == agg.n {
        Bucket::PurelyMoved
    } else if agg.prop_only == agg.n {
        Bucket::PurelyPropagated
    } else if !agg.any_bare && !agg.any_edit {
        Bucket::PurelyRefactored
    } else {
        Bucket::Edited
    }
}

/// Touched path → parsed structure on one side of a commit (`None` when the
/// file does not exist on that side).
pub type StructureMap = BTreeMap<String, Option<StructureIndex>>;

fn class_present(maps: &StructureMap, key: &ClassKey) -> bool {
    match key {
        ClassKey::Named(name) => maps
            .values()
            .flatten()
            .any(|s| s.classes.iter().any(|c| &c.name == name)),
        ClassKey::Toplevel(path) => matches!(maps.get(path), Some(Some(_))),
    }
}

fn method_present(maps: &StructureMap, class: &ClassKey, method: &str) -> bool {
    match class {
        ClassKey::Named(name) => maps.values().flatten().any(|s| {
            s.classes
                .iter()
                .any(|c| &c.name == name && c.methods.iter().any(|m| m.name == method))
        }),
        ClassKey::Toplevel(_) => false,
    }
}

fn entity_stats(buckets: &[Bucket], line_counts: &[u64; 18]) -> EntityStats {
    let mut stats = EntityStats::default();
    for b in buckets {
        match b {
            Bucket::PurelyAdded => stats.purely_added += 1,
            Bucket::PurelyDeleted => stats.purely_deleted += 1,
            Bucket::PurelyMoved => stats.purely_moved += 1,
            Bucket::PurelyPropagated => stats.purely_propagated += 1,
            Bucket::PurelyRefactored => stats.purely_refactored += 1,
            Bucket::Edited => stats.edited += 1,
        }
    }
    let touched = buckets.len();
    if touched > 0 {
        for (i, avg) in stats.averages.iter_mut().enumerate() {
            *avg = line_counts[i] as f64 / touched as f64;
        }
    }
    stats
}

/// Computes the 66-value vector for one commit's records. `before`/`after`
/// map every touched path on the respective side to its structure (`None`
/// when the file does not exist on that side; renamed files should appear
/// under both names).
pub fn compute_rams(
    records: &[LineChangeRecord],
    before: &StructureMap,
    after: &StructureMap,
) -> Result<RamVector, MetricsError> {
    let mut line_counts = [0u64; 18];
    let mut classes: BTreeMap<ClassKey, Agg> = BTreeMap::new();
    let mut methods: BTreeMap<(ClassKey, String), Agg> = BTreeMap::new();

    for r in records {
        line_counts[category_index(r.side, &r.flags)] += 1;
        let map = match r.side {
            Side::Del => before,
            Side::Add => after,
        };
        let idx = map
            .get(&r.path)
            .and_then(Option::as_ref)
            .ok_or_else(|| MetricsError::MissingStructure(r.path.clone()))?;
        let (class, method) =
            idx.enclosing(r.line)
                .map_err(|_| MetricsError::LineOutsideStructure {
                    path: r.path.clone(),
                    line: r.line,
                })?;
        let ckey = if class == TOPLEVEL {
            ClassKey::Toplevel(r.path.clone())
        } else {
            ClassKey::Named(class)
        };
        classes.entry(ckey.clone()).or_default().tally(r);
        if let Some(m) = method {
            methods.entry((ckey, m)).or_default().tally(r);
        }
    }

    let class_buckets: Vec<Bucket> = classes
        .iter()
        .map(|(key, agg)| classify(agg, class_present(before, key), class_present(after, key)))
        .collect();
    let method_buckets: Vec<Bucket> = methods
        .iter()
        .map(|((ckey, m), agg)| {
            classify(
                agg,
                method_present(before, ckey, m),
                method_present(after, ckey, m),
            )
        })
        .collect();

    Ok(RamVector {
        line_counts,
        class_stats: entity_stats(&class_buckets, &line_counts),
        method_stats: entity_stats(&method_buckets, &line_counts),
    })
}

/// The six size/diffusion metrics computable from a diff alone.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicMetrics {
    /// Distinct first path components (subsystems).
    pub ns: u64,
    /// Distinct directories.
    pub nd: u64,
    /// Touched files.
    pub nf: u64,
    /// Churn entropy across files, normalized by log2(max(NF, 2)).
    pub entropy: f64,
    pub la: u64,
    pub ld: u64,
}

pub fn compute_basic_metrics(diffs: &[FileDiff]) -> BasicMetrics {
    let mut per_file: BTreeMap<&str, u64> = BTreeMap::new();
    let (mut la, mut ld) = (0u64, 0u64);
    for fd in diffs {
        if fd.binary {
            continue;
        }
        let mut churn = 0u64;
        for el in &fd.edit_lists {
            churn += (el.del_lines.len() + el.add_lines.len()) as u64;
            la += el.add_lines.len() as u64;
            ld += el.del_lines.len() as u64;
        }
        *per_file.entry(fd.canonical_path()).or_default() += churn;
    }
    let nf = per_file.len() as u64;
    let dirs: std::collections::BTreeSet<&str> = per_file
        .keys()
        .map(|p| p.rsplit_once('/').map(|(d, _)| d).unwrap_or(""))
        .collect();
    let subsystems: std::collections::BTreeSet<&str> = per_file
        .keys()
        .map(|p| p.split('/').next().unwrap_or(""))
        .collect();
    let total: u64 = per_file.values().sum();
    let entropy = if total == 0 {
        0.0
    } else {
        let raw: f64 = per_file
            .values()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.log2()
            })
            .sum();
        raw / (nf.max(2) as f64).log2()
    };
    BasicMetrics {
        ns: subsystems.len() as u64,
        nd: dirs.len() as u64,
        nf,
        entropy,
        la,
        ld,
    }
}

/// Imported metric columns, in vector order, with canonical display names.
pub const KAMEI_FIELDS: [(&str, &str); 14] = [
    ("ns", "NS"),
    ("nd", "ND"),
    ("nf", "NF"),
    ("entropy", "Entropy"),
    ("la", "LA"),
    ("ld", "LD"),
    ("lt", "LT"),
    ("fix", "FIX"),
    ("ndev", "NDEV"),
    ("age", "AGE"),
    ("nuc", "NUC"),
    ("exp", "EXP"),
    ("rexp", "REXP"),
    ("sexp", "SEXP"),
];

/// Parses a process-metric CSV with header
/// `commit_id,ns,nd,nf,entropy,la,ld,lt,fix,ndev,age,nuc,exp,rexp,sexp`
/// (any column order, case-insensitive). Errors name the canonical field:
/// a missing column or cell gives `MissingField("AGE")`, an unparseable cell
/// `NonNumericField`.
pub fn load_kamei_csv(text: &str) -> Result<BTreeMap<String, [f64; 14]>, MetricsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|_| MetricsError::MissingField("commit_id".into()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let commit_col = col("commit_id").ok_or_else(|| MetricsError::MissingField("commit_id".into()))?;
    let mut field_cols = [0usize; 14];
    for (i, (lower, upper)) in KAMEI_FIELDS.iter().enumerate() {
        field_cols[i] = col(lower).ok_or_else(|| MetricsError::MissingField((*upper).into()))?;
    }

    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| MetricsError::MissingField(format!("unreadable row: {e}")))?;
        let commit = record
            .get(commit_col)
            .ok_or_else(|| MetricsError::MissingField("commit_id".into()))?
            .to_string();
        let mut row = [0.0f64; 14];
        for (i, (_, upper)) in KAMEI_FIELDS.iter().enumerate() {
            let raw = record
                .get(field_cols[i])
                .ok_or_else(|| MetricsError::MissingField((*upper).into()))?;
            row[i] = raw.parse().map_err(|_| MetricsError::NonNumericField {
                field: (*upper).into(),
                value: raw.to_string(),
            })?;
        }
        out.insert(commit, row);
    }
    Ok(out)
}

/// Full feature vector: the 66 refactoring-aware values followed by the 14
/// imported columns. When `computed` is given, the six computable slots
/// (NS, ND, NF, Entropy, LA, LD) are overwritten with locally computed
/// values. Fails with `MissingCommitRow` when the CSV lacks the commit.
pub fn merge_external_metrics(
    commit: &str,
    ram: &RamVector,
    rows: &BTreeMap<String, [f64; 14]>,
    computed: Option<&BasicMetrics>,
) -> Result<Vec<f64>, MetricsError> {
    let row = rows
        .get(commit)
        .ok_or_else(|| MetricsError::MissingCommitRow(commit.to_string()))?;
    let mut v = ram.values();
    v.extend_from_slice(row);
    if let Some(b) = computed {
        v[RAM_LEN] = b.ns as f64;
        v[RAM_LEN + 1] = b.nd as f64;
        v[RAM_LEN + 2] = b.nf as f64;
        v[RAM_LEN + 3] = b.entropy;
        v[RAM_LEN + 4] = b.la as f64;
        v[RAM_LEN + 5] = b.ld as f64;
    }
    debug_assert_eq!(v.len(), FEATURE_LEN);
    Ok(v)
}

/// Header names for the merged 80-column vector.
pub fn feature_names() -> Vec<String> {
    let mut names = ram_names();
    names.extend(KAMEI_FIELDS.iter().map(|(lower, _)| lower.to_string()));
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::categorize::{category_label, FlagSet};
    use crate::structure::parse_structure;
    use proptest::prelude::*;

    fn rec(side: Side, path: &str, line: usize, flags: FlagSet) -> LineChangeRecord {
        LineChangeRecord {
            commit: "c".into(),
            side,
            path: path.into(),
            line,
            raw_text: String::new(),
            category: category_label(side, &flags),
            flags,
            partner: None,
            refactoring_ids: vec![],
            enclosing_class: None,
            enclosing_method: None,
        }
    }

    fn flags(mv: bool, r: bool, p: bool, e: bool) -> FlagSet {
        FlagSet {
            mv,
            refactoring: r,
            propagation: p,
            edit: e,
        }
    }

    fn structure(src: &str) -> Option<StructureIndex> {
        Some(parse_structure(
            &src.lines().map(str::to_string).collect::<Vec<_>>(),
        ))
    }

    const CALC: &str = "\
class Calc {
    int add(int x) {
        total += x;
        return total;
    }
    void reset() {
        total = 0;
    }
}
";

    #[test]
    fn refactored_method_and_edited_method_classify_separately() {
        let before: StructureMap = [("Calc.java".to_string(), structure(CALC))].into();
        let after = before.clone();
        let records = vec![
            // add(): a pure rename pair inside lines 2..5.
            rec(Side::Del, "Calc.java", 3, flags(false, true, false, false)),
            rec(Side::Add, "Calc.java", 3, flags(false, true, false, false)),
            // reset(): an edited pair inside lines 6..8.
            rec(Side::Del, "Calc.java", 7, flags(false, false, false, true)),
            rec(Side::Add, "Calc.java", 7, flags(false, false, false, true)),
        ];
        let ram = compute_rams(&records, &before, &after).unwrap();
        assert_eq!(ram.line_counts[category_index(Side::Add, &flags(false, true, false, false))], 1);
        assert_eq!(ram.line_counts[category_index(Side::Del, &flags(false, false, false, true))], 1);
        // One class, touched by both pairs: edit wins.
        assert_eq!(ram.class_stats.touched(), 1);
        assert_eq!(ram.class_stats.edited, 1);
        // Two methods: add() purely refactored, reset() edited.
        assert_eq!(ram.method_stats.touched(), 2);
        assert_eq!(ram.method_stats.purely_refactored, 1);
        assert_eq!(ram.method_stats.edited, 1);
        // Averages divide global category counts by touched entities.
        let add_r = category_index(Side::Add, &flags(false, true, false, false));
        assert_eq!(ram.class_stats.averages[add_r], 1.0);
        assert_eq!(ram.method_stats.averages[add_r], 0.5);
    }

    #[test]
    fn a_new_class_in_a_new_file_is_purely_added() {
        let before: StructureMap = [("New.java".to_string(), None)].into();
        let after: StructureMap = [(
            "New.java".to_string(),
            structure("class Fresh {\n    void go() {\n        run();\n    }\n}\n"),
        )]
        .into();
        let records = vec![
            rec(Side::Add, "New.java", 1, FlagSet::default()),
            rec(Side::Add, "New.java", 2, FlagSet::default()),
            rec(Side::Add, "New.java", 3, FlagSet::default()),
        ];
        let ram = compute_rams(&records, &before, &after).unwrap();
        assert_eq!(ram.class_stats.purely_added, 1);
        assert_eq!(ram.method_stats.purely_added, 1);
        assert_eq!(ram.class_stats.edited, 0);
    }

    #[test]
    fn a_deleted_class_is_purely_deleted_and_a_moved_method_purely_moved() {
        let before: StructureMap = [
            ("Old.java".to_string(), structure("class Old {\n    void bye() {\n        x();\n    }\n}\n")),
            ("Calc.java".to_string(), structure(CALC)),
        ]
        .into();
        let after: StructureMap = [
            ("Old.java".to_string(), None),
            ("Calc.java".to_string(), structure(CALC)),
        ]
        .into();
        let records = vec![
            rec(Side::Del, "Old.java", 1, FlagSet::default()),
            rec(Side::Del, "Old.java", 2, FlagSet::default()),
            rec(Side::Del, "Old.java", 3, FlagSet::default()),
            // A move pair inside Calc.add().
            rec(Side::Del, "Calc.java", 3, flags(true, false, false, false)),
            rec(Side::Add, "Calc.java", 3, flags(true, false, false, false)),
        ];
        let ram = compute_rams(&records, &before, &after).unwrap();
        assert_eq!(ram.class_stats.purely_deleted, 1);
        assert_eq!(ram.method_stats.purely_deleted, 1);
        assert_eq!(ram.method_stats.purely_moved, 1);
        assert_eq!(ram.class_stats.purely_moved, 1);
    }

    #[test]
    fn toplevel_lines_form_a_per_file_pseudo_entity() {
        let src = "import a.b.C;\nclass K {\n}\n";
        let before: StructureMap = [("K.java".to_string(), structure(src))].into();
        let after = before.clone();
        let records = vec![
            rec(Side::Del, "K.java", 1, flags(false, false, true, false)),
            rec(Side::Add, "K.java", 1, flags(false, false, true, false)),
        ];
        let ram = compute_rams(&records, &before, &after).unwrap();
        assert_eq!(ram.class_stats.touched(), 1);
        assert_eq!(ram.class_stats.purely_propagated, 1);
        assert_eq!(ram.method_stats.touched(), 0);
    }

    #[test]
    fn missing_structure_is_reported() {
        let before: StructureMap = BTreeMap::new();
        let after = before.clone();
        let records = vec![rec(Side::Add, "Ghost.java", 1, FlagSet::default())];
        let err = compute_rams(&records, &before, &after).unwrap_err();
        assert!(matches!(err, MetricsError::MissingStructure(p) if p == "Ghost.java"));
    }

    #[test]
    fn vector_and_names_have_66_aligned_entries() {
        let names = ram_names();
        assert_eq!(names.len(), RAM_LEN);
        assert_eq!(RamVector::default().values().len(), RAM_LEN);
        assert_eq!(names[0], "lines_add");
        assert_eq!(names[17], "lines_del_refactoring_propagation_edit");
        assert_eq!(names[18], "classes_purely_added");
        assert_eq!(names[24], "class_avg_add");
        assert_eq!(names[42], "methods_purely_added");
        assert_eq!(names[48], "method_avg_add");
        assert_eq!(feature_names().len(), FEATURE_LEN);
    }

    #[test]
    fn basic_metrics_count_subsystems_directories_and_entropy() {
        use crate::diff::EditList;
        let fd = |path: &str, dels: usize, adds: usize| FileDiff {
            path_before: Some(path.into()),
            path_after: Some(path.into()),
            binary: false,
            edit_lists: vec![EditList::new(
                1,
                vec!["d".into(); dels],
                1,
                vec!["a".into(); adds],
            )],
        };
        let diffs = vec![
            fd("core/src/A.java", 1, 1),
            fd("core/src/B.java", 0, 1),
            fd("util/C.java", 1, 0),
        ];
        let m = compute_basic_metrics(&diffs);
        assert_eq!((m.ns, m.nd, m.nf), (2, 2, 3));
        assert_eq!((m.la, m.ld), (2, 2));
        // churn 2,1,1 over total 4: H = 1.5 bits, normalized by log2(3).
        let expected = 1.5 / 3f64.log2();
        assert!((m.entropy - expected).abs() < 1e-12, "{}", m.entropy);
    }

    #[test]
    fn zero_churn_commits_have_zero_entropy() {
        let diffs = vec![FileDiff {
            path_before: Some("a/X.java".into()),
            path_after: Some("b/X.java".into()),
            binary: false,
            edit_lists: vec![],
        }];
        let m = compute_basic_metrics(&diffs);
        assert_eq!(m.entropy, 0.0);
        assert_eq!(m.nf, 1);
        assert_eq!((m.la, m.ld), (0, 0));
    }

    const KAMEI_CSV: &str = "\
commit_id,ns,nd,nf,entropy,la,ld,lt,fix,ndev,age,nuc,exp,rexp,sexp
c1,1,2,3,0.5,10,4,200,1,3,12.5,7,41,3.2,18
c2,2,2,2,0.9,5,5,100,0,1,3.25,2,10,1.5,4
";

    #[test]
    fn kamei_csv_loads_rows_by_commit() {
        let rows = load_kamei_csv(KAMEI_CSV).unwrap();
        assert_eq!(rows.len(), 2);
        let c1 = &rows["c1"];
        assert_eq!(c1[0], 1.0);
        assert_eq!(c1[9], 12.5); // age
        assert_eq!(c1[13], 18.0); // sexp
    }

    #[test]
    fn kamei_csv_errors_name_canonical_fields() {
        let missing_col = "commit_id,ns,nd,nf,entropy,la,ld,lt,fix,ndev,nuc,exp,rexp,sexp\nc1,1,1,1,0,1,1,1,0,1,1,1,1,1\n";
        let err = load_kamei_csv(missing_col).unwrap_err();
        assert!(matches!(&err, MetricsError::MissingField(f) if f == "AGE"), "{err}");

        let bad_value = KAMEI_CSV.replace("12.5", "n/a");
        let err = load_kamei_csv(&bad_value).unwrap_err();
        assert!(
            matches!(&err, MetricsError::NonNumericField { field, value }
                if field == "AGE" && value == "n/a"),
            "{err}"
        );

        let short_row = "commit_id,ns,nd,nf,entropy,la,ld,lt,fix,ndev,age,nuc,exp,rexp,sexp\nc1,1,2\n";
        let err = load_kamei_csv(short_row).unwrap_err();
        assert!(matches!(&err, MetricsError::MissingField(f) if f == "NF"), "{err}");
    }

    #[test]
    fn merge_appends_rows_and_optionally_prefers_computed() {
        let rows = load_kamei_csv(KAMEI_CSV).unwrap();
        let ram = RamVector::default();
        let v = merge_external_metrics("c1", &ram, &rows, None).unwrap();
        assert_eq!(v.len(), FEATURE_LEN);
        assert_eq!(v[RAM_LEN], 1.0); // imported ns
        assert_eq!(v[RAM_LEN + 4], 10.0); // imported la

        let computed = BasicMetrics {
            ns: 9,
            nd: 8,
            nf: 7,
            entropy: 0.25,
            la: 6,
            ld: 5,
        };
        let v2 = merge_external_metrics("c1", &ram, &rows, Some(&computed)).unwrap();
        assert_eq!(v2[RAM_LEN], 9.0);
        assert_eq!(v2[RAM_LEN + 3], 0.25);
        assert_eq!(v2[RAM_LEN + 5], 5.0);
        assert_eq!(v2[RAM_LEN + 6], 200.0); // lt still imported

        let err = merge_external_metrics("nope", &ram, &rows, None).unwrap_err();
        assert!(matches!(err, MetricsError::MissingCommitRow(c) if c == "nope"));
    }

    proptest! {
        /// avg * touched == global category count, exactly as computed.
        #[test]
        fn averages_times_touched_recover_counts(
            n_refac in 0usize..4,
            n_edit in 0usize..4,
        ) {
            let before: StructureMap = [("Calc.java".to_string(), structure(CALC))].into();
            let after = before.clone();
            let mut records = Vec::new();
            for i in 0..n_refac {
                records.push(rec(Side::Add, "Calc.java", 3 + (i % 2), flags(false, true, false, false)));
            }
            for i in 0..n_edit {
                records.push(rec(Side::Del, "Calc.java", 7 - (i % 2), flags(false, false, false, true)));
            }
            prop_assume!(!records.is_empty());
            let ram = compute_rams(&records, &before, &after).unwrap();
            let touched = ram.class_stats.touched();
            for (i, &avg) in ram.class_stats.averages.iter().enumerate() {
                let recovered = avg * touched as f64;
                prop_assert!((recovered - ram.line_counts[i] as f64).abs() < 1e-9);
            }
        }
    }
}
