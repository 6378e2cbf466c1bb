//! Statement matching: pair deleted and added lines inside each edit-list,
//! first from refactoring hints, then greedily by cosine similarity strictly
//! above the threshold, then a commit-wide scan for token-identical moves.

use std::collections::BTreeMap;

use crate::diff::{EditList, FileDiff};
use crate::refactoring::{RefactoringInstance, ReportSide};
use crate::tokenize::{cosine, tokenize, TermFreq};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LineRef {
    pub path: String,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Pair aligned through a refactoring instance's left/right ranges.
    Hint,
    /// Pair selected by the greedy cosine phase (includes token-identical
    /// moves, whose similarity is exactly 1).
    Similarity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatementMatch {
    pub del_ref: LineRef,
    pub add_ref: LineRef,
    pub similarity: f64,
    pub provenance: Provenance,
}

/// Matches one edit-list. Hints go first: for each instance whose left
/// ranges cover del lines and right ranges cover add lines of this
/// edit-list, the covered lines are zipped in order regardless of
/// similarity. The remaining lines enter the greedy phase: repeatedly take
/// the highest-cosine pair strictly above `threshold`, ties broken by
/// smaller |del_line - add_line|, then lower del line, then lower add line.
pub fn match_statements(
    path_before: &str,
    path_after: &str,
    el: &EditList,
    hints: &[RefactoringInstance],
    threshold: f64,
) -> Vec<StatementMatch> {
    let dels: Vec<(usize, &String)> = el.del_line_numbers().zip(el.del_lines.iter()).collect();
    let adds: Vec<(usize, &String)> = el.add_line_numbers().zip(el.add_lines.iter()).collect();
    let mut del_used = vec![false; dels.len()];
    let mut add_used = vec![false; adds.len()];
    let mut out = Vec::new();

    let tf_del: Vec<TermFreq> = dels.iter().map(|(_, t)| TermFreq::from_line(t)).collect();
    let tf_add: Vec<TermFreq> = adds.iter().map(|(_, t)| TermFreq::from_line(t)).collect();

    for inst in hints {
        let left: Vec<usize> = dels
            .iter()
            .enumerate()
            .filter(|(di, (line, _))| !del_used[*di] && inst.covers(ReportSide::Before, path_before, *line))
            .map(|(di, _)| di)
            .collect();
        let right: Vec<usize> = adds
            .iter()
            .enumerate()
            .filter(|(ai, (line, _))| !add_used[*ai] && inst.covers(ReportSide::After, path_after, *line))
            .map(|(ai, _)| ai)
            .collect();
        for (&di, &ai) in left.iter().zip(right.iter()) {
            del_used[di] = true;
            add_used[ai] = true;
            out.push(StatementMatch {
                del_ref: LineRef {
                    path: path_before.to_string(),
                    line: dels[di].0,
                },
                add_ref: LineRef {
                    path: path_after.to_string(),
                    line: adds[ai].0,
                },
                similarity: cosine(&tf_del[di], &tf_add[ai]),
                provenance: Provenance::Hint,
            });
        }
    }

    // Greedy phase: sorting candidates once and scanning is equivalent to
    // repeatedly extracting the global maximum under the same tie-breaks.
    let mut candidates: Vec<(f64, usize, usize, usize)> = Vec::new();
    for (di, (dline, _)) in dels.iter().enumerate() {
        if del_used[di] {
            continue;
        }
        for (ai, (aline, _)) in adds.iter().enumerate() {
            if add_used[ai] {
                continue;
            }
            let sim = cosine(&tf_del[di], &tf_add[ai]);
            if sim > threshold {
                candidates.push((sim, dline.abs_diff(*aline), di, ai));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("cosine is finite")
            .then(a.1.cmp(&b.1))
            .then(dels[a.2].0.cmp(&dels[b.2].0))
            .then(adds[a.3].0.cmp(&adds[b.3].0))
    });
    for (sim, _, di, ai) in candidates {
        if del_used[di] || add_used[ai] {
            continue;
        }
        del_used[di] = true;
        add_used[ai] = true;
        out.push(StatementMatch {
            del_ref: LineRef {
                path: path_before.to_string(),
                line: dels[di].0,
            },
            add_ref: LineRef {
                path: path_after.to_string(),
                line: adds[ai].0,
            },
            similarity: sim,
            provenance: Provenance::Similarity,
        });
    }
    out
}

/// Commit-wide move scan over lines left unmatched by [`match_statements`]:
/// token-identical (del, add) pairs across edit-lists and files are matched
/// as moves. Candidate pairs are ranked by longest common path prefix (in
/// components), then smallest line distance, then (path, line) order, and
/// taken greedily, so a same-file counterpart always beats a cross-file one.
pub fn cross_editlist_move_scan(
    diffs: &[FileDiff],
    matched: &[StatementMatch],
) -> Vec<StatementMatch> {
    let used_del: std::collections::BTreeSet<(&str, usize)> = matched
        .iter()
        .map(|m| (m.del_ref.path.as_str(), m.del_ref.line))
        .collect();
    let used_add: std::collections::BTreeSet<(&str, usize)> = matched
        .iter()
        .map(|m| (m.add_ref.path.as_str(), m.add_ref.line))
        .collect();

    let mut dels: Vec<(Vec<String>, String, usize)> = Vec::new();
    let mut adds: Vec<(Vec<String>, String, usize)> = Vec::new();
    for fd in diffs {
        if fd.binary {
            continue;
        }
        for el in &fd.edit_lists {
            if let Some(pb) = fd.path_before.as_deref() {
                for (line, text) in el.del_line_numbers().zip(el.del_lines.iter()) {
                    if used_del.contains(&(pb, line)) {
                        continue;
                    }
                    let toks: Vec<String> = tokenize(text).into_iter().map(|t| t.text).collect();
                    if !toks.is_empty() {
                        dels.push((toks, pb.to_string(), line));
                    }
                }
            }
            if let Some(pa) = fd.path_after.as_deref() {
                for (line, text) in el.add_line_numbers().zip(el.add_lines.iter()) {
                    if used_add.contains(&(pa, line)) {
                        continue;
                    }
                    let toks: Vec<String> = tokenize(text).into_iter().map(|t| t.text).collect();
                    if !toks.is_empty() {
                        adds.push((toks, pa.to_string(), line));
                    }
                }
            }
        }
    }

    let mut adds_by_key: BTreeMap<&[String], Vec<usize>> = BTreeMap::new();
    for (ai, (toks, _, _)) in adds.iter().enumerate() {
        adds_by_key.entry(toks.as_slice()).or_default().push(ai);
    }

    // All identical-token pairs, globally ranked.
    let mut pairs: Vec<(usize, usize, usize, usize)> = Vec::new(); // (prefix, dist, di, ai)
    for (di, (toks, dpath, dline)) in dels.iter().enumerate() {
        if let Some(cands) = adds_by_key.get(toks.as_slice()) {
            for &ai in cands {
                let (_, apath, aline) = &adds[ai];
                pairs.push((
                    common_path_prefix(dpath, apath),
                    dline.abs_diff(*aline),
                    di,
                    ai,
                ));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then_with(|| (&dels[a.2].1, dels[a.2].2).cmp(&(&dels[b.2].1, dels[b.2].2)))
            .then_with(|| (&adds[a.3].1, adds[a.3].2).cmp(&(&adds[b.3].1, adds[b.3].2)))
    });

    let mut del_used = vec![false; dels.len()];
    let mut add_used = vec![false; adds.len()];
    let mut out = Vec::new();
    for (_, _, di, ai) in pairs {
        if del_used[di] || add_used[ai] {
            continue;
        }
        del_used[di] = true;
        add_used[ai] = true;
        out.push(StatementMatch {
            del_ref: LineRef {
                path: dels[di].1.clone(),
                line: dels[di].2,
            },
            add_ref: LineRef {
                path: adds[ai].1.clone(),
                line: adds[ai].2,
            },
            similarity: 1.0,
            provenance: Provenance::Similarity,
        });
    }
    out
}

fn common_path_prefix(a: &str, b: &str) -> usize {
    if a == b {
        // Strictly better than any distinct path sharing all directories.
        return a.split('/').count() + 1;
    }
    a.split('/')
        .zip(b.split('/'))
        .take_while(|(x, y)| x == y)
        .count()
}

/// Full matching for one commit: per-edit-list hint + similarity phases,
/// then the commit-wide move scan over the leftovers.
pub fn match_commit(
    diffs: &[FileDiff],
    instances: &[RefactoringInstance],
    threshold: f64,
) -> Vec<StatementMatch> {
    let mut matches = Vec::new();
    for fd in diffs {
        if fd.binary {
            continue;
        }
        let pb = fd.path_before.clone().unwrap_or_default();
        let pa = fd.path_after.clone().unwrap_or_default();
        for el in &fd.edit_lists {
            matches.extend(match_statements(&pb, &pa, el, instances, threshold));
        }
    }
    let moves = cross_editlist_move_scan(diffs, &matches);
    matches.extend(moves);
    matches
}
