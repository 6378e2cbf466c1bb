//! Unified diff model: parsing git output, rendering, applying, generating.
//!
//! The central unit is the [`EditList`]: one contiguous run of deleted lines
//! paired with one contiguous run of added lines. With `-U0` diffs every
//! hunk is exactly one edit-list; with context or interleaved runs a hunk is
//! split into several.

use crate::error::DiffError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditList {
    /// Header value for the deleted run: the first deleted line in the
    /// before file, or, when nothing is deleted, the before line after which
    /// the added run inserts (git's convention, 0 for top of file).
    pub del_start: usize,
    pub del_lines: Vec<String>,
    /// Header value for the added run, mirrored convention.
    pub add_start: usize,
    pub add_lines: Vec<String>,
    /// The last deleted line had no trailing newline in the before file.
    pub del_missing_newline: bool,
    /// The last added line has no trailing newline in the after file.
    pub add_missing_newline: bool,
}

impl EditList {
    pub fn new(del_start: usize, del_lines: Vec<String>, add_start: usize, add_lines: Vec<String>) -> Self {
        EditList {
            del_start,
            del_lines,
            add_start,
            add_lines,
            del_missing_newline: false,
            add_missing_newline: false,
        }
    }

    /// 1-based before-file line numbers of the deleted run.
    pub fn del_line_numbers(&self) -> impl Iterator<Item = usize> + '_ {
        let start = self.del_start;
        (0..self.del_lines.len()).map(move |k| start + k)
    }

    /// 1-based after-file line numbers of the added run.
    pub fn add_line_numbers(&self) -> impl Iterator<Item = usize> + '_ {
        let start = self.add_start;
        (0..self.add_lines.len()).map(move |k| start + k)
    }

    /// First before-file line replaced or displaced by this edit (where the
    /// deleted run sits, or where a pure insertion lands).
    fn before_anchor(&self) -> usize {
        if self.del_lines.is_empty() {
            self.del_start + 1
        } else {
            self.del_start
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileDiff {
    /// Path in the parent commit; absent for newly added files.
    pub path_before: Option<String>,
    /// Path in the child commit; absent for deleted files.
    pub path_after: Option<String>,
    /// Binary payload: no line content is available.
    pub binary: bool,
    pub edit_lists: Vec<EditList>,
}

impl FileDiff {
    /// The path the change is filed under: after-side, falling back to the
    /// before-side for deletions.
    pub fn canonical_path(&self) -> &str {
        self.path_after
            .as_deref()
            .or(self.path_before.as_deref())
            .unwrap_or("")
    }

    pub fn is_rename(&self) -> bool {
        matches!((&self.path_before, &self.path_after), (Some(b), Some(a)) if b != a)
    }
}

/// Sums (added, deleted) line counts over all non-binary files.
pub fn total_churn(diffs: &[FileDiff]) -> (u64, u64) {
    let mut added = 0u64;
    let mut deleted = 0u64;
    for fd in diffs {
        if fd.binary {
            continue;
        }
        for el in &fd.edit_lists {
            added += el.add_lines.len() as u64;
            deleted += el.del_lines.len() as u64;
        }
    }
    (added, deleted)
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Default)]
struct PendingFile {
    git_before: Option<String>,
    git_after: Option<String>,
    /// Path from the `---` marker; `Some(None)` means /dev/null.
    marker_before: Option<Option<String>>,
    marker_after: Option<Option<String>>,
    new_file: bool,
    deleted_file: bool,
    binary: bool,
    edit_lists: Vec<EditList>,
}

impl PendingFile {
    fn finish(self) -> Option<FileDiff> {
        let path_before = match self.marker_before {
            Some(p) => p,
            None if self.new_file => None,
            None => self.git_before,
        };
        let path_after = match self.marker_after {
            Some(p) => p,
            None if self.deleted_file => None,
            None => self.git_after,
        };
        if path_before.is_none() && path_after.is_none() {
            return None;
        }
        Some(FileDiff {
            path_before,
            path_after,
            binary: self.binary,
            edit_lists: self.edit_lists,
        })
    }
}

#[derive(Clone, Copy, PartialEq)]
enum LastSide {
    None,
    Del,
    Add,
    Context,
}

struct HunkState {
    dels_left: usize,
    adds_left: usize,
    before_next: usize,
    after_next: usize,
    builder: Option<RunBuilder>,
    done: Vec<EditList>,
    last_side: LastSide,
}

struct RunBuilder {
    del_start: Option<usize>,
    add_start: Option<usize>,
    del_lines: Vec<String>,
    add_lines: Vec<String>,
    del_missing_newline: bool,
    add_missing_newline: bool,
}

impl HunkState {
    fn new(del_start: usize, del_count: usize, add_start: usize, add_count: usize) -> Self {
        HunkState {
            dels_left: del_count,
            adds_left: add_count,
            before_next: if del_count > 0 { del_start } else { del_start + 1 },
            after_next: if add_count > 0 { add_start } else { add_start + 1 },
            builder: None,
            done: Vec::new(),
            last_side: LastSide::None,
        }
    }

    fn builder(&mut self) -> &mut RunBuilder {
        self.builder.get_or_insert_with(|| RunBuilder {
            del_start: None,
            add_start: None,
            del_lines: Vec::new(),
            add_lines: Vec::new(),
            del_missing_newline: false,
            add_missing_newline: false,
        })
    }

    fn flush(&mut self) {
        if let Some(b) = self.builder.take() {
            if b.del_lines.is_empty() && b.add_lines.is_empty() {
                return;
            }
            let del_start = match b.del_start {
                Some(s) => s,
                None => self.before_next.saturating_sub(1),
            };
            let add_start = match b.add_start {
                Some(s) => s,
                None => self.after_next.saturating_sub(1),
            };
            self.done.push(EditList {
                del_start,
                del_lines: b.del_lines,
                add_start,
                add_lines: b.add_lines,
                del_missing_newline: b.del_missing_newline,
                add_missing_newline: b.add_missing_newline,
            });
        }
    }

    fn push_del(&mut self, text: &str) {
        if self.builder.as_ref().is_some_and(|b| !b.add_lines.is_empty()) {
            self.flush();
        }
        let next = self.before_next;
        let b = self.builder();
        b.del_start.get_or_insert(next);
        b.del_lines.push(text.to_string());
        self.before_next += 1;
        self.dels_left -= 1;
        self.last_side = LastSide::Del;
    }

    fn push_add(&mut self, text: &str) {
        let next = self.after_next;
        let b = self.builder();
        b.add_start.get_or_insert(next);
        b.add_lines.push(text.to_string());
        self.after_next += 1;
        self.adds_left -= 1;
        self.last_side = LastSide::Add;
    }

    fn push_context(&mut self) {
        self.flush();
        self.before_next += 1;
        self.after_next += 1;
        self.dels_left -= 1;
        self.adds_left -= 1;
        self.last_side = LastSide::Context;
    }

    fn mark_missing_newline(&mut self) {
        match self.last_side {
            LastSide::Del => {
                if let Some(b) = self.builder.as_mut() {
                    b.del_missing_newline = true;
                }
            }
            LastSide::Add => {
                if let Some(b) = self.builder.as_mut() {
                    b.add_missing_newline = true;
                }
            }
            _ => {}
        }
    }

    fn exhausted(&self) -> bool {
        self.dels_left == 0 && self.adds_left == 0
    }
}

fn malformed(offset: usize, reason: impl Into<String>) -> DiffError {
    DiffError::MalformedDiff {
        offset,
        reason: reason.into(),
    }
}

/// Parses `git diff` / `git show` unified output into per-file edit-lists.
///
/// Tolerates the usual git extended headers, rename/copy entries, binary
/// markers, and `\ No newline at end of file` markers. Unknown lines raise
/// [`DiffError::MalformedDiff`] with the byte offset.
pub fn parse_unified_diff(text: &str) -> Result<Vec<FileDiff>, DiffError> {
    let mut files: Vec<FileDiff> = Vec::new();
    let mut cur: Option<PendingFile> = None;
    let mut hunk: Option<HunkState> = None;
    let mut offset = 0usize;

    let finish_hunk = |cur: &mut Option<PendingFile>, hunk: &mut Option<HunkState>| {
        if let Some(mut h) = hunk.take() {
            h.flush();
            if let Some(f) = cur.as_mut() {
                f.edit_lists.append(&mut h.done);
            }
        }
    };

    for raw in text.split_inclusive('\n') {
        let line_start = offset;
        offset += raw.len();
        let line = raw.strip_suffix('\n').unwrap_or(raw);

        let hunk_exhausted = hunk.as_ref().map(HunkState::exhausted);
        if hunk_exhausted == Some(false) {
            let h = hunk.as_mut().expect("hunk present");
            if let Some(rest) = line.strip_prefix('-') {
                if h.dels_left == 0 {
                    return Err(malformed(line_start, "more deleted lines than the hunk header announced"));
                }
                h.push_del(rest);
            } else if let Some(rest) = line.strip_prefix('+') {
                if h.adds_left == 0 {
                    return Err(malformed(line_start, "more added lines than the hunk header announced"));
                }
                h.push_add(rest);
            } else if line.starts_with(' ') || line.is_empty() {
                if h.dels_left == 0 || h.adds_left == 0 {
                    return Err(malformed(line_start, "context line does not fit the hunk header"));
                }
                h.push_context();
            } else if line.starts_with('\\') {
                h.mark_missing_newline();
            } else {
                return Err(malformed(line_start, format!("unexpected hunk body line {:?}", clip(line))));
            }
            continue;
        }
        if hunk_exhausted == Some(true) {
            if line.starts_with('\\') {
                hunk.as_mut().expect("hunk present").mark_missing_newline();
                continue;
            }
            finish_hunk(&mut cur, &mut hunk);
            // Fall through: this line starts the next header.
        }

        if let Some(rest) = line.strip_prefix("diff --git ") {
            if let Some(f) = cur.take() {
                files.extend(f.finish());
            }
            let (b, a) = parse_git_header_paths(rest);
            cur = Some(PendingFile {
                git_before: b,
                git_after: a,
                ..PendingFile::default()
            });
        } else if line.starts_with("index ")
            || line.starts_with("old mode ")
            || line.starts_with("new mode ")
            || line.starts_with("similarity index ")
            || line.starts_with("dissimilarity index ")
            || line.starts_with("mode change ")
            || line.starts_with("Submodule ")
        {
            // Metadata with no line content.
        } else if line.starts_with("new file mode ") {
            cur.get_or_insert_with(PendingFile::default).new_file = true;
        } else if line.starts_with("deleted file mode ") {
            cur.get_or_insert_with(PendingFile::default).deleted_file = true;
        } else if let Some(rest) = line.strip_prefix("rename from ").or_else(|| line.strip_prefix("copy from ")) {
            cur.get_or_insert_with(PendingFile::default).git_before = Some(unquote_path(rest));
        } else if let Some(rest) = line.strip_prefix("rename to ").or_else(|| line.strip_prefix("copy to ")) {
            cur.get_or_insert_with(PendingFile::default).git_after = Some(unquote_path(rest));
        } else if line.starts_with("Binary files ") || line == "GIT binary patch" {
            cur.get_or_insert_with(PendingFile::default).binary = true;
        } else if let Some(rest) = line.strip_prefix("--- ") {
            cur.get_or_insert_with(PendingFile::default).marker_before = Some(parse_marker_path(rest, "a/"));
        } else if let Some(rest) = line.strip_prefix("+++ ") {
            cur.get_or_insert_with(PendingFile::default).marker_after = Some(parse_marker_path(rest, "b/"));
        } else if let Some(rest) = line.strip_prefix("@@ ") {
            if cur.is_none() {
                return Err(malformed(line_start, "hunk header before any file header"));
            }
            let (ds, dc, r#as, ac) = parse_hunk_header(rest).ok_or_else(|| {
                malformed(line_start, format!("unparseable hunk header {:?}", clip(line)))
            })?;
            hunk = Some(HunkState::new(ds, dc, r#as, ac));
        } else if line.is_empty() {
            // Blank separator.
        } else {
            return Err(malformed(line_start, format!("unrecognized line {:?}", clip(line))));
        }
    }

    if let Some(h) = hunk.as_ref() {
        if !h.exhausted() {
            return Err(malformed(offset, "diff truncated inside a hunk"));
        }
    }
    finish_hunk(&mut cur, &mut hunk);
    if let Some(f) = cur.take() {
        files.extend(f.finish());
    }
    Ok(files)
}

fn clip(line: &str) -> String {
    let mut s: String = line.chars().take(60).collect();
    if s.len() < line.len() {
        s.push_str("...");
    }
    s
}

/// "-1,5 +2,3 @@ trailing" -> (1, 5, 2, 3). Counts default to 1.
fn parse_hunk_header(rest: &str) -> Option<(usize, usize, usize, usize)> {
    let rest = rest.strip_prefix('-')?;
    let (del, rest) = split_range(rest)?;
    let rest = rest.strip_prefix(" +")?;
    let (add, rest) = split_range(rest)?;
    let rest = rest.trim_start();
    if !rest.starts_with("@@") {
        return None;
    }
    Some((del.0, del.1, add.0, add.1))
}

fn split_range(s: &str) -> Option<((usize, usize), &str)> {
    let end = s
        .find(|c: char| !c.is_ascii_digit() && c != ',')
        .unwrap_or(s.len());
    let (head, rest) = s.split_at(end);
    let (start, count) = match head.split_once(',') {
        Some((a, b)) => (a.parse().ok()?, b.parse().ok()?),
        None => (head.parse().ok()?, 1),
    };
    Some(((start, count), rest))
}

/// Path from a `---`/`+++` marker: handles /dev/null, quoting, the a/ b/
/// prefixes, and a possible trailing tab from non-git diff producers.
fn parse_marker_path(rest: &str, prefix: &str) -> Option<String> {
    let rest = rest.split('\t').next().unwrap_or(rest);
    if rest == "/dev/null" {
        return None;
    }
    let unquoted = unquote_path(rest);
    Some(
        unquoted
            .strip_prefix(prefix)
            .map(str::to_string)
            .unwrap_or(unquoted),
    )
}

fn parse_git_header_paths(rest: &str) -> (Option<String>, Option<String>) {
    if rest.starts_with('"') {
        let (first, after) = take_quoted(rest);
        let after = after.trim_start();
        let second = unquote_path(after);
        return (strip_side_prefix(&first, "a/"), strip_side_prefix(&second, "b/"));
    }
    // Unquoted: split at the last " b/" so equal paths with spaces survive.
    if let Some(pos) = rest.rfind(" b/") {
        let first = &rest[..pos];
        let second = &rest[pos + 1..];
        return (strip_side_prefix(first, "a/"), strip_side_prefix(second, "b/"));
    }
    (None, None)
}

fn strip_side_prefix(path: &str, prefix: &str) -> Option<String> {
    Some(path.strip_prefix(prefix).unwrap_or(path).to_string())
}

/// Splits a leading C-style quoted string off `s`, returning (unquoted, rest).
fn take_quoted(s: &str) -> (String, &str) {
    let bytes = s.as_bytes();
    debug_assert_eq!(bytes.first(), Some(&b'"'));
    let mut out = Vec::new();
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'"' => return (String::from_utf8_lossy(&out).into_owned(), &s[i + 1..]),
            b'\\' if i + 1 < bytes.len() => {
                i += 1;
                match bytes[i] {
                    b'n' => out.push(b'\n'),
                    b't' => out.push(b'\t'),
                    b'r' => out.push(b'\r'),
                    b'\\' => out.push(b'\\'),
                    b'"' => out.push(b'"'),
                    b'0'..=b'7' => {
                        let mut v = 0u32;
                        let mut digits = 0;
                        while digits < 3 && i < bytes.len() && (b'0'..=b'7').contains(&bytes[i]) {
                            v = v * 8 + (bytes[i] - b'0') as u32;
                            i += 1;
                            digits += 1;
                        }
                        i -= 1;
                        out.push(v as u8);
                    }
                    other => out.push(other),
                }
                i += 1;
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    (String::from_utf8_lossy(&out[..]).into_owned(), "")
}

fn unquote_path(s: &str) -> String {
    if s.starts_with('"') {
        take_quoted(s).0
    } else {
        s.to_string()
    }
}

/// Quotes a path the way git does when it contains bytes needing escapes.
fn quote_path(path: &str) -> String {
    let needs = path
        .chars()
        .any(|c| c == '"' || c == '\\' || (c as u32) < 0x20);
    if !needs {
        return path.to_string();
    }
    let mut out = String::from("\"");
    for c in path.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\{:03o}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn render_range(start: usize, count: usize) -> String {
    if count == 1 {
        format!("{start}")
    } else {
        format!("{start},{count}")
    }
}

pub fn render_hunk_header(el: &EditList) -> String {
    format!(
        "@@ -{} +{} @@\n",
        render_range(el.del_start, el.del_lines.len()),
        render_range(el.add_start, el.add_lines.len())
    )
}

/// The `-`/`+` body of one hunk, including no-newline markers.
pub fn render_hunk_body(el: &EditList) -> String {
    let mut out = String::new();
    for (i, l) in el.del_lines.iter().enumerate() {
        out.push('-');
        out.push_str(l);
        out.push('\n');
        if el.del_missing_newline && i + 1 == el.del_lines.len() {
            out.push_str("\\ No newline at end of file\n");
        }
    }
    for (i, l) in el.add_lines.iter().enumerate() {
        out.push('+');
        out.push_str(l);
        out.push('\n');
        if el.add_missing_newline && i + 1 == el.add_lines.len() {
            out.push_str("\\ No newline at end of file\n");
        }
    }
    out
}

pub fn render_hunk(el: &EditList) -> String {
    let mut out = render_hunk_header(el);
    out.push_str(&render_hunk_body(el));
    out
}

/// Renders one file entry the way `git diff -U0 -M` would (minus index
/// lines, which carry object ids we do not track).
pub fn render_file_diff(fd: &FileDiff) -> String {
    let before_label = fd.path_before.as_deref();
    let after_label = fd.path_after.as_deref();
    let header_a = before_label.or(after_label).unwrap_or("");
    let header_b = after_label.or(before_label).unwrap_or("");
    let mut out = format!(
        "diff --git {} {}\n",
        quote_path(&format!("a/{header_a}")),
        quote_path(&format!("b/{header_b}"))
    );
    match (before_label, after_label) {
        (None, Some(_)) => out.push_str("new file mode 100644\n"),
        (Some(_), None) => out.push_str("deleted file mode 100644\n"),
        (Some(b), Some(a)) if b != a => {
            if fd.edit_lists.is_empty() {
                out.push_str("similarity index 100%\n");
            }
            out.push_str(&format!("rename from {}\n", quote_path(b)));
            out.push_str(&format!("rename to {}\n", quote_path(a)));
        }
        _ => {}
    }
    if fd.binary {
        out.push_str(&format!(
            "Binary files {} and {} differ\n",
            before_label
                .map(|p| quote_path(&format!("a/{p}")))
                .unwrap_or_else(|| "/dev/null".into()),
            after_label
                .map(|p| quote_path(&format!("b/{p}")))
                .unwrap_or_else(|| "/dev/null".into()),
        ));
        return out;
    }
    if !fd.edit_lists.is_empty() {
        out.push_str(&format!(
            "--- {}\n",
            before_label
                .map(|p| quote_path(&format!("a/{p}")))
                .unwrap_or_else(|| "/dev/null".into())
        ));
        out.push_str(&format!(
            "+++ {}\n",
            after_label
                .map(|p| quote_path(&format!("b/{p}")))
                .unwrap_or_else(|| "/dev/null".into())
        ));
        for el in &fd.edit_lists {
            out.push_str(&render_hunk(el));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

/// Splits file content into lines, reporting whether a final newline was
/// present. A trailing newline does not produce an empty last line.
pub fn split_lines(content: &str) -> (Vec<String>, bool) {
    if content.is_empty() {
        return (Vec::new(), true);
    }
    let had_newline = content.ends_with('\n');
    let body = if had_newline {
        &content[..content.len() - 1]
    } else {
        content
    };
    (body.split('\n').map(str::to_string).collect(), had_newline)
}

pub fn join_lines(lines: &[String], final_newline: bool) -> String {
    if lines.is_empty() {
        return String::new();
    }
    let mut out = lines.join("\n");
    if final_newline {
        out.push('\n');
    }
    out
}

/// Applies a file's edit-lists to its before content, byte-exactly,
/// including the no-newline-at-EOF state on both sides.
pub fn apply_file_diff(before: &str, fd: &FileDiff) -> Result<String, DiffError> {
    let (before_lines, before_final_newline) = split_lines(before);
    let mut edits: Vec<&EditList> = fd.edit_lists.iter().collect();
    edits.sort_by_key(|el| el.before_anchor());

    enum LastFrom {
        Before(usize),
        Add(bool),
    }
    let mut out: Vec<String> = Vec::new();
    let mut last_from: Option<LastFrom> = None;
    let mut cursor = 1usize; // next before line to copy, 1-based

    let copy_until = |out: &mut Vec<String>, last: &mut Option<LastFrom>, cursor: &mut usize, end: usize| -> Result<(), DiffError> {
        while *cursor < end {
            let idx = *cursor - 1;
            let line = before_lines.get(idx).ok_or_else(|| DiffError::MalformedDiff {
                offset: 0,
                reason: format!("edit refers past end of before file (line {cursor})"),
            })?;
            out.push(line.clone());
            *last = Some(LastFrom::Before(idx));
            *cursor += 1;
        }
        Ok(())
    };

    for el in edits {
        let anchor = el.before_anchor();
        copy_until(&mut out, &mut last_from, &mut cursor, anchor)?;
        for (k, expected) in el.del_lines.iter().enumerate() {
            let idx = cursor - 1 + k;
            match before_lines.get(idx) {
                Some(actual) if actual == expected => {}
                other => {
                    return Err(DiffError::MalformedDiff {
                        offset: 0,
                        reason: format!(
                            "delete mismatch at before line {}: expected {:?}, found {:?}",
                            idx + 1,
                            expected,
                            other
                        ),
                    })
                }
            }
        }
        cursor += el.del_lines.len();
        if !el.add_lines.is_empty() {
            out.extend(el.add_lines.iter().cloned());
            last_from = Some(LastFrom::Add(el.add_missing_newline));
        }
    }
    copy_until(&mut out, &mut last_from, &mut cursor, before_lines.len() + 1)?;

    let final_newline = match last_from {
        Some(LastFrom::Add(missing)) => !missing,
        Some(LastFrom::Before(idx)) => idx + 1 < before_lines.len() || before_final_newline,
        None => true,
    };
    Ok(join_lines(&out, final_newline))
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Zero-context line diff of two line arrays via longest common subsequence.
/// Ties in the LCS table prefer deletions, which matches git on inputs
/// without repeated ambiguous lines.
pub fn diff_lines(before: &[String], after: &[String]) -> Vec<EditList> {
    let n = before.len();
    let m = after.len();
    // lcs[i][j] = LCS length of before[i..] and after[j..].
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if before[i] == after[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    #[derive(PartialEq, Clone, Copy)]
    enum Op {
        Keep,
        Del,
        Add,
    }
    let mut ops = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < m {
        if i < n && j < m && before[i] == after[j] {
            ops.push(Op::Keep);
            i += 1;
            j += 1;
        } else if i < n && (j >= m || lcs[i + 1][j] >= lcs[i][j + 1]) {
            ops.push(Op::Del);
            i += 1;
        } else {
            ops.push(Op::Add);
            j += 1;
        }
    }

    let mut out = Vec::new();
    let (mut bi, mut ai) = (0usize, 0usize); // lines consumed on each side
    let mut k = 0;
    while k < ops.len() {
        if ops[k] == Op::Keep {
            bi += 1;
            ai += 1;
            k += 1;
            continue;
        }
        let (b0, a0) = (bi, ai);
        let mut del = Vec::new();
        let mut add = Vec::new();
        while k < ops.len() && ops[k] != Op::Keep {
            match ops[k] {
                Op::Del => {
                    del.push(before[bi].clone());
                    bi += 1;
                }
                Op::Add => {
                    add.push(after[ai].clone());
                    ai += 1;
                }
                Op::Keep => unreachable!(),
            }
            k += 1;
        }
        out.push(EditList::new(
            if del.is_empty() { b0 } else { b0 + 1 },
            del,
            if add.is_empty() { a0 } else { a0 + 1 },
            add,
        ));
    }
    out
}

/// Diffs two full file contents, handling missing final newlines: a changed
/// newline state makes the affected line part of the edit.
pub fn diff_contents(before: &str, after: &str) -> Vec<EditList> {
    let (mut before_lines, before_nl) = split_lines(before);
    let (mut after_lines, after_nl) = split_lines(after);
    // A line without its final newline is distinct from the same line with
    // one; tag it so the LCS cannot pair them silently.
    const TAG: &str = "\u{0}<no-newline>";
    if !before_nl {
        if let Some(last) = before_lines.last_mut() {
            last.push_str(TAG);
        }
    }
    if !after_nl {
        if let Some(last) = after_lines.last_mut() {
            last.push_str(TAG);
        }
    }
    let mut edits = diff_lines(&before_lines, &after_lines);
    for el in &mut edits {
        let del_len = el.del_lines.len();
        for (k, l) in el.del_lines.iter_mut().enumerate() {
            if let Some(stripped) = l.strip_suffix(TAG) {
                *l = stripped.to_string();
                debug_assert_eq!(k + 1, del_len);
                el.del_missing_newline = true;
            }
        }
        let add_len = el.add_lines.len();
        for (k, l) in el.add_lines.iter_mut().enumerate() {
            if let Some(stripped) = l.strip_suffix(TAG) {
                *l = stripped.to_string();
                debug_assert_eq!(k + 1, add_len);
                el.add_missing_newline = true;
            }
        }
    }
    edits
}
