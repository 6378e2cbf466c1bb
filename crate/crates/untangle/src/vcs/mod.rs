//! Repository access. Two interchangeable backends: real git work trees
//! (shelling out to the `git` binary) and synthetic JSON histories used for
//! deterministic tests. Handles are cheap to clone; workers clone their own.

pub mod git;
pub mod synthetic;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::VcsError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommitId(pub String);

impl CommitId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CommitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CommitId {
    fn from(s: &str) -> Self {
        CommitId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileVersion {
    pub commit: CommitId,
    pub path: String,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Git,
    Synthetic,
}

#[derive(Debug, Clone)]
pub enum RepoHandle {
    Git(git::GitRepo),
    Synthetic(synthetic::SyntheticRepo),
}

impl RepoHandle {
    /// Opens a repository. A directory must be a git work tree; a file must
    /// be a synthetic history descriptor.
    pub fn open(location: &Path) -> Result<Self, VcsError> {
        if !location.exists() {
            return Err(VcsError::NotARepository(location.display().to_string()));
        }
        if location.is_dir() {
            if git::is_git_repo(location) {
                Ok(RepoHandle::Git(git::GitRepo::new(location)))
            } else {
                Err(VcsError::NotARepository(location.display().to_string()))
            }
        } else {
            Ok(RepoHandle::Synthetic(synthetic::SyntheticRepo::load(location)?))
        }
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self {
            RepoHandle::Git(_) => BackendKind::Git,
            RepoHandle::Synthetic(_) => BackendKind::Synthetic,
        }
    }

    /// All commits, oldest first along the first-parent topology.
    pub fn commits(&self) -> Result<Vec<CommitId>, VcsError> {
        match self {
            RepoHandle::Git(r) => r.commits(),
            RepoHandle::Synthetic(r) => Ok(r.commits()),
        }
    }

    pub fn parents(&self, commit: &CommitId) -> Result<Vec<CommitId>, VcsError> {
        match self {
            RepoHandle::Git(r) => r.parents(commit),
            RepoHandle::Synthetic(r) => r.parents(commit),
        }
    }

    pub fn first_parent(&self, commit: &CommitId) -> Result<Option<CommitId>, VcsError> {
        Ok(self.parents(commit)?.into_iter().next())
    }

    /// Unified zero-context diff (`-U0`, rename detection on) between
    /// `parent` and `commit`. `parent = None` diffs against the empty tree.
    pub fn diff(&self, parent: Option<&CommitId>, commit: &CommitId) -> Result<String, VcsError> {
        match self {
            RepoHandle::Git(r) => r.diff(parent, commit),
            RepoHandle::Synthetic(r) => r.diff(parent, commit),
        }
    }

    /// Who last touched `line` of `path` as of `commit`, following renames
    /// along the first-parent chain. Returns the blamed commit and the
    /// line's path and number inside that commit.
    pub fn blame_line(
        &self,
        commit: &CommitId,
        path: &str,
        line: usize,
    ) -> Result<(CommitId, String, usize), VcsError> {
        match self {
            RepoHandle::Git(r) => r.blame_line(commit, path, line),
            RepoHandle::Synthetic(r) => r.blame_line(commit, path, line),
        }
    }

    pub fn read_file(&self, commit: &CommitId, path: &str) -> Result<FileVersion, VcsError> {
        match self {
            RepoHandle::Git(r) => r.read_file(commit, path),
            RepoHandle::Synthetic(r) => r.read_file(commit, path),
        }
    }
}
