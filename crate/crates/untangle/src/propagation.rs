//! Refactoring propagation: derive name alterations from name-altering
//! instances and mark the tokens of a matched pair that merely follow such an
//! alteration (renamed identifiers, added or removed references).

use std::collections::BTreeSet;

use crate::refactoring::{
    extract_identifier, parse_name_altering, AlterationOp, ElementKind, RefactoringInstance,
};
use crate::tokenize::Token;

/// How far an alteration reaches. Variables and parameters are local to the
/// files the instance names; classes, methods and attributes reach every
/// file changed in the commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    File,
    Project,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NameAlteration {
    pub element_kind: ElementKind,
    pub op: AlterationOp,
    /// Present for Rename and Remove.
    pub old_name: Option<String>,
    /// Present for Rename and Add.
    pub new_name: Option<String>,
    /// Index of the originating instance in the commit's instance list.
    pub source_instance: usize,
    pub scope: Scope,
    /// Files named by the instance's own ranges (meaningful for file scope).
    pub paths: BTreeSet<String>,
}

impl NameAlteration {
    pub fn in_scope(&self, path: &str) -> bool {
        match self.scope {
            Scope::Project => true,
            Scope::File => self.paths.contains(path),
        }
    }
}

/// Extracts one alteration per name-altering instance. Instances whose
/// element names do not yield the required identifiers are skipped, as are
/// renames that do not actually change the name.
pub fn name_alterations(instances: &[RefactoringInstance]) -> Vec<NameAlteration> {
    let mut out = Vec::new();
    for (idx, inst) in instances.iter().enumerate() {
        let Some((op, kind)) = parse_name_altering(&inst.type_name) else {
            continue;
        };
        let old = inst
            .left_ranges
            .iter()
            .find_map(|r| extract_identifier(&r.element_name));
        let new = inst
            .right_ranges
            .iter()
            .find_map(|r| extract_identifier(&r.element_name));
        let (old_name, new_name) = match op {
            AlterationOp::Rename => {
                let (Some(o), Some(n)) = (old, new) else { continue };
                if o == n {
                    continue;
                }
                (Some(o), Some(n))
            }
            AlterationOp::Add => {
                let Some(n) = new else { continue };
                (None, Some(n))
            }
            AlterationOp::Remove => {
                let Some(o) = old else { continue };
                (Some(o), None)
            }
        };
        let scope = match kind {
            ElementKind::Variable | ElementKind::Parameter => Scope::File,
            _ => Scope::Project,
        };
        let paths = inst
            .left_ranges
            .iter()
            .chain(inst.right_ranges.iter())
            .map(|r| r.path.clone())
            .collect();
        out.push(NameAlteration {
            element_kind: kind,
            op,
            old_name,
            new_name,
            source_instance: idx,
            scope,
            paths,
        });
    }
    out
}

/// Alignment of a deleted token sequence with an added one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignOp {
    Equal(usize, usize),
    Replace(usize, usize),
    Delete(usize),
    Insert(usize),
}

/// Aligns two token sequences: LCS anchors become `Equal`, gap regions are
/// zipped positionally into `Replace` with leftovers as `Delete`/`Insert`.
pub fn align_tokens(del: &[Token], add: &[Token]) -> Vec<AlignOp> {
    let n = del.len();
    let m = add.len();
    // lcs[i][j] = LCS length of del[i..] and add[j..].
    let mut lcs = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if del[i].text == add[j].text {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let mut ops = Vec::new();
    let flush_gap = |ops: &mut Vec<AlignOp>, d0: usize, d1: usize, a0: usize, a1: usize| {
        let k = (d1 - d0).min(a1 - a0);
        for x in 0..k {
            ops.push(AlignOp::Replace(d0 + x, a0 + x));
        }
        for i in d0 + k..d1 {
            ops.push(AlignOp::Delete(i));
        }
        for j in a0 + k..a1 {
            ops.push(AlignOp::Insert(j));
        }
    };
    let (mut i, mut j) = (0, 0);
    let (mut gi, mut gj) = (0, 0);
    while i < n && j < m {
        if del[i].text == add[j].text {
            flush_gap(&mut ops, gi, i, gj, j);
            ops.push(AlignOp::Equal(i, j));
            i += 1;
            j += 1;
            gi = i;
            gj = j;
        } else if lcs[i + 1][j] >= lcs[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    flush_gap(&mut ops, gi, n, gj, m);
    ops
}

/// Tokens of a matched pair explained by propagation, with the alterations
/// that explain them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PropagationSpans {
    pub del: BTreeSet<usize>,
    pub add: BTreeSet<usize>,
    pub sources: BTreeSet<usize>,
}

/// Marks aligned tokens that follow a name alteration:
///
/// * `Replace` where the old token is a rename's old name and the new token
///   its new name;
/// * `Insert` of an Add-alteration's new name;
/// * `Delete` of a Remove-alteration's old name.
///
/// Alterations out of scope for the pair's paths are ignored, as are those
/// in `excluded` (the instances whose own ranges cover this pair: a pair is
/// never propagation of itself).
pub fn mark_propagation(
    ops: &[AlignOp],
    del_tokens: &[Token],
    add_tokens: &[Token],
    del_path: &str,
    add_path: &str,
    alterations: &[NameAlteration],
    excluded: &BTreeSet<usize>,
) -> PropagationSpans {
    let mut spans = PropagationSpans::default();
    let applicable: Vec<&NameAlteration> = alterations
        .iter()
        .filter(|a| {
            !excluded.contains(&a.source_instance)
                && (a.in_scope(del_path) || a.in_scope(add_path))
        })
        .collect();
    for op in ops {
        match *op {
            AlignOp::Equal(..) => {}
            AlignOp::Replace(i, j) => {
                for a in &applicable {
                    if a.op == AlterationOp::Rename
                        && a.old_name.as_deref() == Some(del_tokens[i].text.as_str())
                        && a.new_name.as_deref() == Some(add_tokens[j].text.as_str())
                    {
                        spans.del.insert(i);
                        spans.add.insert(j);
                        spans.sources.insert(a.source_instance);
                    }
                }
            }
            AlignOp::Delete(i) => {
                for a in &applicable {
                    if a.op == AlterationOp::Remove
                        && a.old_name.as_deref() == Some(del_tokens[i].text.as_str())
                    {
                        spans.del.insert(i);
                        spans.sources.insert(a.source_instance);
                    }
                }
            }
            AlignOp::Insert(j) => {
                for a in &applicable {
                    if a.op == AlterationOp::Add
                        && a.new_name.as_deref() == Some(add_tokens[j].text.as_str())
                    {
                        spans.add.insert(j);
                        spans.sources.insert(a.source_instance);
                    }
                }
            }
        }
    }
    spans
}
