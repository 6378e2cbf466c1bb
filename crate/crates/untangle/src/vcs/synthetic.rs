//! Synthetic backend: a JSON descriptor holds full file snapshots per
//! commit, topologically ordered. Diffs are regenerated on demand and
//! rendered in git's unified shape; renames are detected for identical
//! content only. Blame walks the first-parent chain, remapping line numbers
//! across each commit's edit-lists.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diff::{diff_contents, render_file_diff, split_lines, EditList, FileDiff};
use crate::error::VcsError;
use crate::vcs::{CommitId, FileVersion};

#[derive(Debug, Serialize, Deserialize)]
struct Descriptor {
    commits: Vec<DescriptorCommit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DescriptorCommit {
    id: String,
    #[serde(default)]
    parents: Vec<String>,
    /// Full snapshot: every file existing at this commit, path to content.
    #[serde(default)]
    files: BTreeMap<String, String>,
}

#[derive(Debug)]
struct Data {
    order: Vec<CommitId>,
    commits: BTreeMap<String, DescriptorCommit>,
}

#[derive(Debug, Clone)]
pub struct SyntheticRepo {
    data: Arc<Data>,
}

impl SyntheticRepo {
    pub fn load(path: &Path) -> Result<Self, VcsError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, VcsError> {
        let desc: Descriptor = serde_json::from_str(text).map_err(|e| {
            VcsError::UnsupportedBackend(format!("not a synthetic history descriptor: {e}"))
        })?;
        let mut order = Vec::with_capacity(desc.commits.len());
        let mut commits = BTreeMap::new();
        for c in desc.commits {
            if commits.contains_key(&c.id) {
                return Err(VcsError::Descriptor(format!("duplicate commit id {:?}", c.id)));
            }
            for p in &c.parents {
                if !commits.contains_key(p) {
                    return Err(VcsError::Descriptor(format!(
                        "commit {:?} references parent {:?} not defined earlier",
                        c.id, p
                    )));
                }
            }
            order.push(CommitId(c.id.clone()));
            commits.insert(c.id.clone(), c);
        }
        Ok(SyntheticRepo {
            data: Arc::new(Data { order, commits }),
        })
    }

    fn get(&self, commit: &CommitId) -> Result<&DescriptorCommit, VcsError> {
        self.data
            .commits
            .get(commit.as_str())
            .ok_or_else(|| VcsError::UnknownCommit(commit.as_str().to_string()))
    }

    pub fn commits(&self) -> Vec<CommitId> {
        self.data.order.clone()
    }

    pub fn parents(&self, commit: &CommitId) -> Result<Vec<CommitId>, VcsError> {
        Ok(self.get(commit)?.parents.iter().map(|p| CommitId(p.clone())).collect())
    }

    pub fn diff(&self, parent: Option<&CommitId>, commit: &CommitId) -> Result<String, VcsError> {
        let empty = BTreeMap::new();
        let before = match parent {
            Some(p) => &self.get(p)?.files,
            None => &empty,
        };
        let after = &self.get(commit)?.files;
        let entries = diff_snapshots(before, after);
        Ok(entries.iter().map(render_file_diff).collect())
    }

    pub fn blame_line(
        &self,
        commit: &CommitId,
        path: &str,
        line: usize,
    ) -> Result<(CommitId, String, usize), VcsError> {
        let files = &self.get(commit)?.files;
        let content = files.get(path).ok_or_else(|| VcsError::UnknownPathAtCommit {
            commit: commit.as_str().to_string(),
            path: path.to_string(),
        })?;
        let (lines, _) = split_lines(content);
        if line == 0 || line > lines.len() {
            return Err(VcsError::LineOutOfRange {
                commit: commit.as_str().to_string(),
                path: path.to_string(),
                line,
            });
        }

        let mut cur = commit.clone();
        let mut cur_path = path.to_string();
        let mut cur_line = line;
        loop {
            let data = self.get(&cur)?;
            let Some(parent) = data.parents.first().cloned() else {
                return Ok((cur, cur_path, cur_line));
            };
            let parent_files = &self.data.commits[&parent].files;
            let entries = diff_snapshots(parent_files, &data.files);
            let Some(fd) = entries.iter().find(|f| f.path_after.as_deref() == Some(&cur_path))
            else {
                // File untouched by this commit; keep walking.
                cur = CommitId(parent);
                continue;
            };
            let Some(path_before) = fd.path_before.clone() else {
                // Introduced here.
                return Ok((cur, cur_path, cur_line));
            };
            if fd
                .edit_lists
                .iter()
                .any(|el| el.add_line_numbers().any(|n| n == cur_line))
            {
                return Ok((cur, cur_path, cur_line));
            }
            cur_line = remap_to_parent(&fd.edit_lists, cur_line);
            cur_path = path_before;
            cur = CommitId(parent);
        }
    }

    pub fn read_file(&self, commit: &CommitId, path: &str) -> Result<FileVersion, VcsError> {
        let content = self.get(commit)?.files.get(path).ok_or_else(|| {
            VcsError::UnknownPathAtCommit {
                commit: commit.as_str().to_string(),
                path: path.to_string(),
            }
        })?;
        let (lines, _) = split_lines(content);
        Ok(FileVersion {
            commit: commit.clone(),
            path: path.to_string(),
            lines,
        })
    }
}

/// Shifts an after-side line number (not itself added by the commit) to its
/// position on the before side: every edit block fully above it moves it by
/// the block's deletion/addition imbalance.
fn remap_to_parent(edits: &[EditList], line: usize) -> usize {
    let mut shift: i64 = 0;
    for el in edits {
        let add_len = el.add_lines.len();
        let del_len = el.del_lines.len();
        let after_block_end = if add_len > 0 {
            el.add_start + add_len - 1
        } else {
            el.add_start
        };
        if after_block_end < line {
            shift += del_len as i64 - add_len as i64;
        }
    }
    (line as i64 + shift) as usize
}

/// Diffs two full snapshots into per-file entries ordered by path (entries
/// keyed by their post-image path, pre-image for deletions). Rename
/// detection pairs a deleted path with an added path of identical content.
fn diff_snapshots(
    before: &BTreeMap<String, String>,
    after: &BTreeMap<String, String>,
) -> Vec<FileDiff> {
    let mut deleted: Vec<&String> = before.keys().filter(|p| !after.contains_key(*p)).collect();
    let added: Vec<&String> = after.keys().filter(|p| !before.contains_key(*p)).collect();

    // Greedy identical-content rename pairing in path order.
    let mut renames: BTreeMap<&String, &String> = BTreeMap::new(); // new -> old
    for new_path in &added {
        let content = &after[*new_path];
        if let Some(pos) = deleted.iter().position(|old| &before[*old] == content) {
            renames.insert(new_path, deleted.remove(pos));
        }
    }

    let mut entries: Vec<(String, FileDiff)> = Vec::new();
    for old_path in deleted {
        entries.push((
            old_path.clone(),
            FileDiff {
                path_before: Some(old_path.clone()),
                path_after: None,
                binary: false,
                edit_lists: diff_contents(&before[old_path], ""),
            },
        ));
    }
    for new_path in added {
        if let Some(old_path) = renames.get(&new_path) {
            entries.push((
                new_path.clone(),
                FileDiff {
                    path_before: Some((*old_path).clone()),
                    path_after: Some(new_path.clone()),
                    binary: false,
                    edit_lists: Vec::new(),
                },
            ));
        } else {
            entries.push((
                new_path.clone(),
                FileDiff {
                    path_before: None,
                    path_after: Some(new_path.clone()),
                    binary: false,
                    edit_lists: diff_contents("", &after[new_path]),
                },
            ));
        }
    }
    for (path, content) in before {
        if let Some(new_content) = after.get(path) {
            if content != new_content {
                entries.push((
                    path.clone(),
                    FileDiff {
                        path_before: Some(path.clone()),
                        path_after: Some(path.clone()),
                        binary: false,
                        edit_lists: diff_contents(content, new_content),
                    },
                ));
            }
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries.into_iter().map(|(_, fd)| fd).collect()
}
