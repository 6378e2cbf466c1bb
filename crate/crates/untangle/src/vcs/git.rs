//! Git backend: shells out to the `git` binary with a pinned locale and
//! unquoted paths so output stays machine-parseable.

use std::path::{Path, PathBuf};
use std::process::Command;

use crate::diff::split_lines;
use crate::error::VcsError;
use crate::vcs::{CommitId, FileVersion};

/// SHA-1 of git's well-known empty tree object, used to diff root commits.
const EMPTY_TREE: &str = "4b825dc642cb6eb9a060e54bf8d69288fbee4904";

pub fn is_git_repo(dir: &Path) -> bool {
    Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["rev-parse", "--git-dir"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[derive(Debug, Clone)]
pub struct GitRepo {
    dir: PathBuf,
}

impl GitRepo {
    pub fn new(dir: &Path) -> Self {
        GitRepo { dir: dir.to_path_buf() }
    }

    fn run(&self, args: &[&str]) -> Result<Vec<u8>, VcsError> {
        let out = Command::new("git")
            .arg("-C")
            .arg(&self.dir)
            .args(["-c", "core.quotepath=off"])
            .args(args)
            .env("LC_ALL", "C")
            .output()?;
        if out.status.success() {
            Ok(out.stdout)
        } else {
            Err(classify_failure(
                args,
                &String::from_utf8_lossy(&out.stderr),
            ))
        }
    }

    fn run_text(&self, args: &[&str]) -> Result<String, VcsError> {
        Ok(String::from_utf8_lossy(&self.run(args)?).into_owned())
    }

    pub fn commits(&self) -> Result<Vec<CommitId>, VcsError> {
        let text = self.run_text(&["rev-list", "--topo-order", "--reverse", "--first-parent", "HEAD"])?;
        Ok(text.split_whitespace().map(CommitId::from).collect())
    }

    /// Resolves a revision range expression (e.g. `A..B`) to commit ids,
    /// oldest first.
    pub fn rev_list(&self, range: &str) -> Result<Vec<CommitId>, VcsError> {
        let text = self.run_text(&["rev-list", "--topo-order", "--reverse", range])?;
        Ok(text.split_whitespace().map(CommitId::from).collect())
    }

    pub fn parents(&self, commit: &CommitId) -> Result<Vec<CommitId>, VcsError> {
        let text = self.run_text(&["log", "-1", "--format=%P", commit.as_str()])?;
        Ok(text.split_whitespace().map(CommitId::from).collect())
    }

    pub fn diff(&self, parent: Option<&CommitId>, commit: &CommitId) -> Result<String, VcsError> {
        let base = parent.map(|p| p.as_str().to_string()).unwrap_or_else(|| EMPTY_TREE.to_string());
        self.run_text(&["diff", "-U0", "-M", &base, commit.as_str()])
    }

    pub fn blame_line(
        &self,
        commit: &CommitId,
        path: &str,
        line: usize,
    ) -> Result<(CommitId, String, usize), VcsError> {
        let range = format!("{line},{line}");
        let text = self.run_text(&[
            "blame",
            "--porcelain",
            "--first-parent",
            "-L",
            &range,
            commit.as_str(),
            "--",
            path,
        ])?;
        parse_porcelain_blame(&text).ok_or_else(|| VcsError::GitCommand(format!(
            "unparseable blame output for {commit}:{path}:{line}"
        )))
    }

    pub fn read_file(&self, commit: &CommitId, path: &str) -> Result<FileVersion, VcsError> {
        let spec = format!("{}:{}", commit.as_str(), path);
        let bytes = self.run(&["show", &spec])?;
        let (lines, _) = split_lines(&String::from_utf8_lossy(&bytes));
        Ok(FileVersion {
            commit: commit.clone(),
            path: path.to_string(),
            lines,
        })
    }
}

/// First header line is `<sha> <orig_line> <final_line> [<group size>]`; the
/// entry's `filename` field names the path inside the blamed commit.
fn parse_porcelain_blame(text: &str) -> Option<(CommitId, String, usize)> {
    let mut lines = text.lines();
    let head = lines.next()?;
    let mut parts = head.split(' ');
    let sha = parts.next()?;
    let orig: usize = parts.next()?.parse().ok()?;
    let filename = lines
        .filter_map(|l| l.strip_prefix("filename "))
        .next()?;
    Some((CommitId::from(sha), filename.to_string(), orig))
}

fn classify_failure(args: &[&str], stderr: &str) -> VcsError {
    let lower = stderr.to_lowercase();
    let subject = args.iter().rev().find(|a| !a.starts_with('-')).copied().unwrap_or("");
    if lower.contains("has only") && lower.contains("lines") {
        // e.g. "fatal: file demo.java has only 3 lines"
        return VcsError::LineOutOfRange {
            commit: String::new(),
            path: subject.to_string(),
            line: 0,
        };
    }
    if lower.contains("no such path")
        || lower.contains("does not exist in")
        || lower.contains("exists on disk, but not in")
    {
        return VcsError::UnknownPathAtCommit {
            commit: String::new(),
            path: subject.to_string(),
        };
    }
    if lower.contains("bad revision")
        || lower.contains("unknown revision")
        || lower.contains("invalid object name")
        || lower.contains("bad object")
    {
        return VcsError::UnknownCommit(subject.to_string());
    }
    VcsError::GitCommand(format!("git {} failed: {}", args.join(" "), stderr.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn porcelain_blame_header_parses() {
        let text = "\
9f3a0c1d2e4b5a697887969594a3b2c1d0e9f8a7 12 12 1
author Someone
author-mail <s@example.org>
summary touch the line
filename src/Util.java
\tint x = 1;
";
        let (sha, path, line) = parse_porcelain_blame(text).unwrap();
        assert_eq!(sha.as_str(), "9f3a0c1d2e4b5a697887969594a3b2c1d0e9f8a7");
        assert_eq!(path, "src/Util.java");
        assert_eq!(line, 12);
    }

    #[test]
    fn stderr_classification_maps_common_failures() {
        assert!(matches!(
            classify_failure(&["blame", "--", "f.java"], "fatal: no such path f.java in HEAD"),
            VcsError::UnknownPathAtCommit { .. }
        ));
        assert!(matches!(
            classify_failure(&["blame", "--", "f.java"], "fatal: file f.java has only 3 lines"),
            VcsError::LineOutOfRange { .. }
        ));
        assert!(matches!(
            classify_failure(&["log", "deadbeef"], "fatal: bad revision 'deadbeef'"),
            VcsError::UnknownCommit(_)
        ));
        assert!(matches!(
            classify_failure(&["fetch"], "fatal: unable to access remote"),
            VcsError::GitCommand(_)
        ));
    }
}
