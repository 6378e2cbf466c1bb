//! Line-change categorization. Every deleted or added line of a commit gets
//! one of 18 categories: a side (`Add`/`Del`) plus flags `Move`,
//! `Refactoring`, `Propagation`, `Edit`. Matched pairs share one flag set,
//! derived per token: refactoring spans win over propagation, and any
//! changed token left unexplained makes the pair an edit.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diff::FileDiff;
use crate::error::CategorizeError;
use crate::matching::{LineRef, StatementMatch};
use crate::propagation::{align_tokens, mark_propagation, AlignOp, NameAlteration};
use crate::refactoring::{refactoring_token_spans, Origin, RefactoringInstance, ReportSide};
use crate::tokenize::{tokenize, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Add,
    Del,
}

/// The flag portion of a category. Serialized as the list of set flags in
/// the fixed order Move, Refactoring, Propagation, Edit. Move never combines
/// with the others.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlagSet {
    pub mv: bool,
    pub refactoring: bool,
    pub propagation: bool,
    pub edit: bool,
}

impl FlagSet {
    pub fn is_empty(&self) -> bool {
        !(self.mv || self.refactoring || self.propagation || self.edit)
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.mv {
            out.push("Move");
        }
        if self.refactoring {
            out.push("Refactoring");
        }
        if self.propagation {
            out.push("Propagation");
        }
        if self.edit {
            out.push("Edit");
        }
        out
    }
}

impl Serialize for FlagSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.labels().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FlagSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(deserializer)?;
        let mut flags = FlagSet::default();
        for l in &labels {
            match l.as_str() {
                "Move" => flags.mv = true,
                "Refactoring" => flags.refactoring = true,
                "Propagation" => flags.propagation = true,
                "Edit" => flags.edit = true,
                other => return Err(D::Error::custom(format!("unknown change flag {other:?}"))),
            }
        }
        Ok(flags)
    }
}

/// Category string: the side, then each set flag appended with `_` in fixed
/// flag order; a bare side when no flag is set.
pub fn category_label(side: Side, flags: &FlagSet) -> String {
    let mut s = match side {
        Side::Add => String::from("Add"),
        Side::Del => String::from("Del"),
    };
    for l in flags.labels() {
        s.push('_');
        s.push_str(l);
    }
    s
}

/// All 18 categories, Add side first; within a side: bare, Move,
/// Refactoring, Propagation, Edit, then the tangled combinations.
pub const CATEGORY_LABELS: [&str; 18] = [
    "Add",
    "Add_Move",
    "Add_Refactoring",
    "Add_Propagation",
    "Add_Edit",
    "Add_Refactoring_Propagation",
    "Add_Refactoring_Edit",
    "Add_Propagation_Edit",
    "Add_Refactoring_Propagation_Edit",
    "Del",
    "Del_Move",
    "Del_Refactoring",
    "Del_Propagation",
    "Del_Edit",
    "Del_Refactoring_Propagation",
    "Del_Refactoring_Edit",
    "Del_Propagation_Edit",
    "Del_Refactoring_Propagation_Edit",
];

/// Index of `(side, flags)` into [`CATEGORY_LABELS`].
pub fn category_index(side: Side, flags: &FlagSet) -> usize {
    let base = match side {
        Side::Add => 0,
        Side::Del => 9,
    };
    let within = match (flags.mv, flags.refactoring, flags.propagation, flags.edit) {
        (false, false, false, false) => 0,
        (true, false, false, false) => 1,
        (false, true, false, false) => 2,
        (false, false, true, false) => 3,
        (false, false, false, true) => 4,
        (false, true, true, false) => 5,
        (false, true, false, true) => 6,
        (false, false, true, true) => 7,
        (false, true, true, true) => 8,
        _ => unreachable!("Move combines with no other flag"),
    };
    base + within
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartnerRef {
    pub path: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineChangeRecord {
    pub commit: String,
    pub side: Side,
    pub path: String,
    pub line: usize,
    pub raw_text: String,
    pub flags: FlagSet,
    pub category: String,
    pub partner: Option<PartnerRef>,
    /// Indices into the commit's instance list of the refactorings that
    /// explain tokens of this line.
    pub refactoring_ids: Vec<usize>,
    pub enclosing_class: Option<String>,
    pub enclosing_method: Option<String>,
}

/// Per-token refactoring claims on one side of a pair.
#[derive(Default)]
struct SideClaims {
    claimed: BTreeSet<usize>,
    external: BTreeMap<usize, BTreeSet<usize>>,
    builtin: BTreeMap<usize, BTreeSet<usize>>,
}

impl SideClaims {
    fn collect(
        instances: &[RefactoringInstance],
        side: ReportSide,
        path: &str,
        line: usize,
        tokens: &[Token],
    ) -> Self {
        let mut claims = SideClaims::default();
        for (id, inst) in instances.iter().enumerate() {
            if !inst.covers(side, path, line) {
                continue;
            }
            // A range that intersects no token claims nothing here.
            let Ok(span) = refactoring_token_spans(inst, side, path, line, tokens) else {
                continue;
            };
            for i in span {
                claims.claimed.insert(i);
                let bucket = match inst.origin {
                    Origin::ExternalReport => claims.external.entry(i).or_default(),
                    Origin::Builtin => claims.builtin.entry(i).or_default(),
                };
                bucket.insert(id);
            }
        }
        claims
    }

    /// Instance ids for one claimed token; external instances shadow
    /// builtin ones.
    fn ids_at(&self, i: usize) -> Option<&BTreeSet<usize>> {
        match self.external.get(&i) {
            Some(ids) if !ids.is_empty() => Some(ids),
            _ => self.builtin.get(&i),
        }
    }
}

fn pair_flags(
    instances: &[RefactoringInstance],
    alterations: &[NameAlteration],
    del: (&LineRef, &str),
    add: (&LineRef, &str),
) -> (FlagSet, Vec<usize>) {
    let (del_ref, del_text) = del;
    let (add_ref, add_text) = add;
    let (del_path, del_line) = (del_ref.path.as_str(), del_ref.line);
    let (add_path, add_line) = (add_ref.path.as_str(), add_ref.line);
    let d = tokenize(del_text);
    let a = tokenize(add_text);
    let same_tokens = d.len() == a.len() && d.iter().zip(a.iter()).all(|(x, y)| x.text == y.text);
    let mut flags = FlagSet::default();
    let mut ids: BTreeSet<usize> = BTreeSet::new();

    if same_tokens {
        if del_path != add_path || del_line != add_line {
            flags.mv = true;
            for (id, inst) in instances.iter().enumerate() {
                if inst.covers(ReportSide::Before, del_path, del_line)
                    || inst.covers(ReportSide::After, add_path, add_line)
                {
                    ids.insert(id);
                }
            }
        }
        return (flags, ids.into_iter().collect());
    }

    let del_claims = SideClaims::collect(instances, ReportSide::Before, del_path, del_line, &d);
    let add_claims = SideClaims::collect(instances, ReportSide::After, add_path, add_line, &a);

    // A pair is never propagation of the instance whose ranges cover it.
    let excluded: BTreeSet<usize> = instances
        .iter()
        .enumerate()
        .filter(|(_, inst)| {
            inst.covers(ReportSide::Before, del_path, del_line)
                || inst.covers(ReportSide::After, add_path, add_line)
        })
        .map(|(id, _)| id)
        .collect();

    let ops = align_tokens(&d, &a);
    let prop = mark_propagation(&ops, &d, &a, del_path, add_path, alterations, &excluded);

    for op in &ops {
        match *op {
            AlignOp::Equal(..) => {}
            AlignOp::Replace(i, j) => {
                if del_claims.claimed.contains(&i) || add_claims.claimed.contains(&j) {
                    flags.refactoring = true;
                    if let Some(found) = del_claims.ids_at(i) {
                        ids.extend(found);
                    }
                    if let Some(found) = add_claims.ids_at(j) {
                        ids.extend(found);
                    }
                } else if prop.del.contains(&i) || prop.add.contains(&j) {
                    flags.propagation = true;
                } else {
                    flags.edit = true;
                }
            }
            AlignOp::Delete(i) => {
                if del_claims.claimed.contains(&i) {
                    flags.refactoring = true;
                    if let Some(found) = del_claims.ids_at(i) {
                        ids.extend(found);
                    }
                } else if prop.del.contains(&i) {
                    flags.propagation = true;
                } else {
                    flags.edit = true;
                }
            }
            AlignOp::Insert(j) => {
                if add_claims.claimed.contains(&j) {
                    flags.refactoring = true;
                    if let Some(found) = add_claims.ids_at(j) {
                        ids.extend(found);
                    }
                } else if prop.add.contains(&j) {
                    flags.propagation = true;
                } else {
                    flags.edit = true;
                }
            }
        }
    }
    if flags.propagation {
        ids.extend(&prop.sources);
    }
    (flags, ids.into_iter().collect())
}

/// Categorizes every changed line of one commit. Records come out in diff
/// order: per edit-list, deleted lines then added lines. Matched pairs share
/// flags and reference each other through `partner`; unmatched lines are
/// bare `Add`/`Del`. `enclosing_class`/`enclosing_method` are left unset.
pub fn categorize_commit(
    commit: &str,
    diffs: &[FileDiff],
    matches: &[StatementMatch],
    instances: &[RefactoringInstance],
    alterations: &[NameAlteration],
) -> Result<Vec<LineChangeRecord>, CategorizeError> {
    let mut del_text: BTreeMap<(String, usize), String> = BTreeMap::new();
    let mut add_text: BTreeMap<(String, usize), String> = BTreeMap::new();
    let mut order: Vec<(Side, String, usize)> = Vec::new();
    for fd in diffs {
        if fd.binary {
            continue;
        }
        for el in &fd.edit_lists {
            if let Some(pb) = fd.path_before.as_deref() {
                for (line, text) in el.del_line_numbers().zip(el.del_lines.iter()) {
                    del_text.insert((pb.to_string(), line), text.clone());
                    order.push((Side::Del, pb.to_string(), line));
                }
            }
            if let Some(pa) = fd.path_after.as_deref() {
                for (line, text) in el.add_line_numbers().zip(el.add_lines.iter()) {
                    add_text.insert((pa.to_string(), line), text.clone());
                    order.push((Side::Add, pa.to_string(), line));
                }
            }
        }
    }

    let mut by_del: BTreeMap<(String, usize), usize> = BTreeMap::new();
    let mut by_add: BTreeMap<(String, usize), usize> = BTreeMap::new();
    for (mi, m) in matches.iter().enumerate() {
        let dkey = (m.del_ref.path.clone(), m.del_ref.line);
        let akey = (m.add_ref.path.clone(), m.add_ref.line);
        if !del_text.contains_key(&dkey) {
            return Err(CategorizeError::InconsistentInputs(format!(
                "match references unknown deleted line {}:{}",
                m.del_ref.path, m.del_ref.line
            )));
        }
        if !add_text.contains_key(&akey) {
            return Err(CategorizeError::InconsistentInputs(format!(
                "match references unknown added line {}:{}",
                m.add_ref.path, m.add_ref.line
            )));
        }
        if by_del.insert(dkey, mi).is_some() {
            return Err(CategorizeError::InconsistentInputs(format!(
                "deleted line {}:{} appears in two matches",
                m.del_ref.path, m.del_ref.line
            )));
        }
        if by_add.insert(akey, mi).is_some() {
            return Err(CategorizeError::InconsistentInputs(format!(
                "added line {}:{} appears in two matches",
                m.add_ref.path, m.add_ref.line
            )));
        }
    }

    let pair_info: Vec<(FlagSet, Vec<usize>)> = matches
        .iter()
        .map(|m| {
            pair_flags(
                instances,
                alterations,
                (&m.del_ref, &del_text[&(m.del_ref.path.clone(), m.del_ref.line)]),
                (&m.add_ref, &add_text[&(m.add_ref.path.clone(), m.add_ref.line)]),
            )
        })
        .collect();

    let mut records = Vec::with_capacity(order.len());
    for (side, path, line) in order {
        let key = (path.clone(), line);
        let (raw_text, matched) = match side {
            Side::Del => (del_text[&key].clone(), by_del.get(&key)),
            Side::Add => (add_text[&key].clone(), by_add.get(&key)),
        };
        let (flags, partner, ids) = match matched {
            Some(&mi) => {
                let m = &matches[mi];
                let partner = match side {
                    Side::Del => PartnerRef {
                        path: m.add_ref.path.clone(),
                        line: m.add_ref.line,
                    },
                    Side::Add => PartnerRef {
                        path: m.del_ref.path.clone(),
                        line: m.del_ref.line,
                    },
                };
                let (flags, ids) = pair_info[mi].clone();
                (flags, Some(partner), ids)
            }
            None => (FlagSet::default(), None, Vec::new()),
        };
        records.push(LineChangeRecord {
            commit: commit.to_string(),
            side,
            path,
            line,
            raw_text,
            category: category_label(side, &flags),
            flags,
            partner,
            refactoring_ids: ids,
            enclosing_class: None,
            enclosing_method: None,
        });
    }
    Ok(records)
}

/// Review-order groups, most review-worthy first:
///
/// 1. added lines that are new or edited code,
/// 2. deleted lines replaced by edits,
/// 3. propagation on both sides,
/// 4. pure mechanics: moves, pure refactoring lines, bare deletions.
///
/// Records keep their original relative order inside each group; empty
/// groups are dropped.
pub fn reorder_changes(records: &[LineChangeRecord]) -> Vec<Vec<LineChangeRecord>> {
    fn group_of(r: &LineChangeRecord) -> usize {
        if r.side == Side::Add && (r.flags.edit || r.flags.is_empty()) {
            0
        } else if r.side == Side::Del && r.flags.edit {
            1
        } else if r.flags.propagation {
            2
        } else {
            3
        }
    }
    let mut groups: [Vec<LineChangeRecord>; 4] = Default::default();
    for r in records {
        groups[group_of(r)].push(r.clone());
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Clean,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Clean => write!(f, "clean"),
            Verdict::Undecided => write!(f, "undecided"),
        }
    }
}

/// A commit is a pure-refactoring commit when no line carries the Edit flag
/// and no added line is bare (unexplained new code). Bare deletions alone do
/// not disqualify: removed code cannot introduce behavior.
pub fn pure_refactoring_filter(records: &[LineChangeRecord]) -> Result<Verdict, CategorizeError> {
    if records.is_empty() {
        return Err(CategorizeError::EmptyCommit);
    }
    let clean = records
        .iter()
        .all(|r| !r.flags.edit && !(r.side == Side::Add && r.flags.is_empty()));
    Ok(if clean { Verdict::Clean } else { Verdict::Undecided })
}
