//! Refactoring instances: ingestion of detector reports, token-span
//! resolution on changed lines, and a builtin fallback detector for simple
//! renames and statement moves.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::diff::FileDiff;
use crate::error::ReportError;
use crate::matching::StatementMatch;
use crate::tokenize::{tokenize, Token, TokenKind};

/// Where an instance came from. External instances win over builtin ones
/// when both explain the same token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    ExternalReport,
    Builtin,
}

/// Which side of a commit a range or line belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportSide {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeRange {
    pub path: String,
    pub start_line: usize,
    pub end_line: usize,
    pub start_column: Option<usize>,
    pub end_column: Option<usize>,
    pub element_type: String,
    pub element_name: String,
}

impl CodeRange {
    pub fn covers(&self, path: &str, line: usize) -> bool {
        self.path == path && self.start_line <= line && line <= self.end_line
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefactoringInstance {
    pub type_name: String,
    pub description: String,
    pub left_ranges: Vec<CodeRange>,
    pub right_ranges: Vec<CodeRange>,
    pub origin: Origin,
}

impl RefactoringInstance {
    pub fn ranges(&self, side: ReportSide) -> &[CodeRange] {
        match side {
            ReportSide::Before => &self.left_ranges,
            ReportSide::After => &self.right_ranges,
        }
    }

    pub fn covers(&self, side: ReportSide, path: &str, line: usize) -> bool {
        self.ranges(side).iter().any(|r| r.covers(path, line))
    }
}

/// Kinds of named elements a name-altering refactoring can touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ElementKind {
    Class,
    Method,
    Attribute,
    Parameter,
    Variable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlterationOp {
    Rename,
    Add,
    Remove,
}

/// Recognizes name-altering refactoring types: exactly two words, the first
/// `Rename`/`Add`/`Remove`, the second an element kind. Longer types such as
/// "Add Parameter Modifier" are not name-altering.
pub fn parse_name_altering(type_name: &str) -> Option<(AlterationOp, ElementKind)> {
    let words: Vec<&str> = type_name.split_whitespace().collect();
    if words.len() != 2 {
        return None;
    }
    let op = match words[0] {
        "Rename" => AlterationOp::Rename,
        "Add" => AlterationOp::Add,
        "Remove" => AlterationOp::Remove,
        _ => return None,
    };
    let kind = match words[1] {
        "Class" => ElementKind::Class,
        "Method" => ElementKind::Method,
        "Attribute" => ElementKind::Attribute,
        "Parameter" => ElementKind::Parameter,
        "Variable" => ElementKind::Variable,
        _ => return None,
    };
    Some((op, kind))
}

/// Pulls the bare identifier out of a report code-element string.
///
/// Methods look like `public getName() : String`: the identifier directly
/// before the first `(`. Everything else (`_file : File`, `org.pkg.Name`)
/// takes the last identifier of the dotted head before any `:`.
pub fn extract_identifier(element_name: &str) -> Option<String> {
    let toks = tokenize(element_name);
    if let Some(paren) = toks.iter().position(|t| t.text == "(") {
        return toks[..paren]
            .iter()
            .rev()
            .find(|t| t.kind == TokenKind::Identifier)
            .map(|t| t.text.clone());
    }
    let head_end = toks.iter().position(|t| t.text == ":").unwrap_or(toks.len());
    toks[..head_end]
        .iter()
        .rev()
        .find(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.text.clone())
}

fn json_type(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn want_array<'a>(v: &'a Value, key: &str, at: &str) -> Result<&'a Vec<Value>, ReportError> {
    let path = format!("{at}.{key}");
    match v.get(key) {
        Some(Value::Array(a)) => Ok(a),
        Some(other) => Err(ReportError::SchemaError {
            path,
            reason: format!("expected array, found {}", json_type(other)),
        }),
        None => Err(ReportError::SchemaError {
            path,
            reason: "missing field".into(),
        }),
    }
}

fn want_str(v: &Value, key: &str, at: &str) -> Result<String, ReportError> {
    let path = format!("{at}.{key}");
    match v.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(ReportError::SchemaError {
            path,
            reason: format!("expected string, found {}", json_type(other)),
        }),
        None => Err(ReportError::SchemaError {
            path,
            reason: "missing field".into(),
        }),
    }
}

fn opt_str(v: &Value, key: &str, at: &str) -> Result<String, ReportError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(ReportError::SchemaError {
            path: format!("{at}.{key}"),
            reason: format!("expected string or null, found {}", json_type(other)),
        }),
    }
}

fn want_line(v: &Value, key: &str, at: &str) -> Result<usize, ReportError> {
    let path = format!("{at}.{key}");
    match v.get(key) {
        Some(Value::Number(n)) => n
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| ReportError::SchemaError {
                path: path.clone(),
                reason: format!("expected non-negative integer, found {n}"),
            }),
        Some(other) => Err(ReportError::SchemaError {
            path,
            reason: format!("expected number, found {}", json_type(other)),
        }),
        None => Err(ReportError::SchemaError {
            path,
            reason: "missing field".into(),
        }),
    }
}

fn opt_column(v: &Value, key: &str, at: &str) -> Result<Option<usize>, ReportError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => match n.as_u64() {
            // Detectors use 0 for "column unknown".
            Some(0) => Ok(None),
            Some(c) => Ok(Some(c as usize)),
            None => Err(ReportError::SchemaError {
                path: format!("{at}.{key}"),
                reason: format!("expected non-negative integer, found {n}"),
            }),
        },
        Some(other) => Err(ReportError::SchemaError {
            path: format!("{at}.{key}"),
            reason: format!("expected number or null, found {}", json_type(other)),
        }),
    }
}

fn parse_location(v: &Value, at: &str) -> Result<CodeRange, ReportError> {
    let range = CodeRange {
        path: want_str(v, "filePath", at)?,
        start_line: want_line(v, "startLine", at)?,
        end_line: want_line(v, "endLine", at)?,
        start_column: opt_column(v, "startColumn", at)?,
        end_column: opt_column(v, "endColumn", at)?,
        element_type: opt_str(v, "codeElementType", at)?,
        element_name: opt_str(v, "codeElement", at)?,
    };
    if range.start_line > range.end_line {
        return Err(ReportError::SchemaError {
            path: at.to_string(),
            reason: format!(
                "startLine {} is greater than endLine {}",
                range.start_line, range.end_line
            ),
        });
    }
    Ok(range)
}

/// Parses a detector report into per-commit instance lists.
///
/// Schema: `{"commits": [{"sha1": …, "refactorings": [{"type", "description",
/// "leftSideLocations": […], "rightSideLocations": […]}]}]}` where each
/// location carries `filePath`, `startLine`, `endLine`, optional
/// `startColumn`/`endColumn`, `codeElementType`, `codeElement`. Errors name
/// the offending JSON path.
pub fn load_report(json_text: &str) -> Result<BTreeMap<String, Vec<RefactoringInstance>>, ReportError> {
    let root: Value = serde_json::from_str(json_text).map_err(|e| ReportError::SchemaError {
        path: "$".into(),
        reason: format!("invalid JSON: {e}"),
    })?;
    let commits = want_array(&root, "commits", "$")?;
    let mut out: BTreeMap<String, Vec<RefactoringInstance>> = BTreeMap::new();
    for (ci, commit) in commits.iter().enumerate() {
        let at = format!("$.commits[{ci}]");
        let sha = want_str(commit, "sha1", &at)?;
        let refactorings = want_array(commit, "refactorings", &at)?;
        let entry = out.entry(sha).or_default();
        for (ri, r) in refactorings.iter().enumerate() {
            let rat = format!("{at}.refactorings[{ri}]");
            let type_name = want_str(r, "type", &rat)?;
            let description = opt_str(r, "description", &rat)?;
            let mut sides = [Vec::new(), Vec::new()];
            for (si, key) in ["leftSideLocations", "rightSideLocations"].iter().enumerate() {
                let locs = want_array(r, key, &rat)?;
                for (li, loc) in locs.iter().enumerate() {
                    sides[si].push(parse_location(loc, &format!("{rat}.{key}[{li}]"))?);
                }
            }
            let [left_ranges, right_ranges] = sides;
            entry.push(RefactoringInstance {
                type_name,
                description,
                left_ranges,
                right_ranges,
                origin: Origin::ExternalReport,
            });
        }
    }
    Ok(out)
}

fn location_json(r: &CodeRange) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("filePath".into(), json!(r.path));
    obj.insert("startLine".into(), json!(r.start_line));
    obj.insert("endLine".into(), json!(r.end_line));
    if let Some(c) = r.start_column {
        obj.insert("startColumn".into(), json!(c));
    }
    if let Some(c) = r.end_column {
        obj.insert("endColumn".into(), json!(c));
    }
    obj.insert("codeElementType".into(), json!(r.element_type));
    obj.insert("codeElement".into(), json!(r.element_name));
    Value::Object(obj)
}

/// Inverse of [`load_report`]: `load_report(serialize_report(m)) == m` for
/// any map of external instances.
pub fn serialize_report(map: &BTreeMap<String, Vec<RefactoringInstance>>) -> String {
    let commits: Vec<Value> = map
        .iter()
        .map(|(sha, instances)| {
            let refs: Vec<Value> = instances
                .iter()
                .map(|inst| {
                    json!({
                        "type": inst.type_name,
                        "description": inst.description,
                        "leftSideLocations": inst.left_ranges.iter().map(location_json).collect::<Vec<_>>(),
                        "rightSideLocations": inst.right_ranges.iter().map(location_json).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json!({"sha1": sha, "refactorings": refs})
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "commits": commits })).expect("report is valid JSON")
}

/// Token indices (into `tokens`) of `line` that belong to `inst` on `side`.
///
/// Ranges with columns select the tokens lying fully inside the column
/// window; a multi-line range constrains only its first line from
/// `start_column` and its last line up to `end_column`, interior lines are
/// whole. Column-less ranges of name-altering instances narrow to tokens
/// spelling the element's identifier; any other column-less range claims the
/// whole line. Returns `NoIntersection` when a covering range selects no
/// token.
pub fn refactoring_token_spans(
    inst: &RefactoringInstance,
    side: ReportSide,
    path: &str,
    line: usize,
    tokens: &[Token],
) -> Result<BTreeSet<usize>, ReportError> {
    let name_altering = parse_name_altering(&inst.type_name).is_some();
    let mut picked = BTreeSet::new();
    let mut covered = false;
    for range in inst.ranges(side) {
        if !range.covers(path, line) {
            continue;
        }
        covered = true;
        let has_columns = range.start_column.is_some() && range.end_column.is_some();
        if has_columns {
            let lo = if line == range.start_line {
                range.start_column.unwrap()
            } else {
                1
            };
            let hi = if line == range.end_line {
                range.end_column.unwrap()
            } else {
                usize::MAX
            };
            for (i, t) in tokens.iter().enumerate() {
                if t.start_col >= lo && t.end_col <= hi {
                    picked.insert(i);
                }
            }
        } else if name_altering {
            if let Some(name) = extract_identifier(&range.element_name) {
                for (i, t) in tokens.iter().enumerate() {
                    if t.text == name {
                        picked.insert(i);
                    }
                }
            }
        } else {
            picked.extend(0..tokens.len());
        }
    }
    if covered && picked.is_empty() && !tokens.is_empty() {
        return Err(ReportError::NoIntersection {
            path: path.to_string(),
            line,
        });
    }
    Ok(picked)
}

const TYPE_KEYWORDS: [&str; 9] = [
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
];

fn looks_like_type(t: &Token) -> bool {
    match t.kind {
        TokenKind::Identifier => true,
        TokenKind::Keyword => TYPE_KEYWORDS.contains(&t.text.as_str()),
        TokenKind::Operator | TokenKind::Punctuation => t.text == ">" || t.text == "]",
        _ => false,
    }
}

/// Is `tokens[k]` the declared name at its line? Returns the declared kind.
fn declaration_kind(tokens: &[Token], k: usize) -> Option<ElementKind> {
    let prev = if k > 0 { Some(&tokens[k - 1]) } else { None };
    let next = tokens.get(k + 1);
    if let Some(p) = prev {
        if p.kind == TokenKind::Keyword && matches!(p.text.as_str(), "class" | "interface" | "enum") {
            return Some(ElementKind::Class);
        }
    }
    let prev_is_type = prev.is_some_and(looks_like_type);
    if next.is_some_and(|n| n.text == "(") && prev_is_type {
        return Some(ElementKind::Method);
    }
    if prev_is_type && next.is_some_and(|n| matches!(n.text.as_str(), "=" | ";" | "," | ")" | ":")) {
        let open = tokens[..k].iter().filter(|t| t.text == "(").count();
        let close = tokens[..k].iter().filter(|t| t.text == ")").count();
        return Some(if open > close {
            ElementKind::Parameter
        } else {
            ElementKind::Variable
        });
    }
    None
}

fn rename_type_name(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Class => "Rename Class",
        ElementKind::Method => "Rename Method",
        ElementKind::Attribute => "Rename Attribute",
        ElementKind::Parameter => "Rename Parameter",
        ElementKind::Variable => "Rename Variable",
    }
}

fn element_type_name(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Class => "class",
        ElementKind::Method => "method",
        ElementKind::Attribute => "attribute",
        ElementKind::Parameter => "parameter",
        ElementKind::Variable => "variable",
    }
}

/// Fallback detector used when no external report covers a commit. It finds:
///
/// * renames: matched pairs whose token sequences differ in exactly one
///   identifier position, grouped per file pair; a group is kept only when
///   the old name maps to a single new name (and vice versa) within its file
///   pair and at least one pair is a declaration site. Emitted ranges hold
///   the declaration lines only, so other occurrences surface as
///   propagation, not refactoring.
/// * moves: matched token-identical pairs at a different position become
///   `Move Statement` instances.
pub fn detect_builtin(diffs: &[FileDiff], matches: &[StatementMatch]) -> Vec<RefactoringInstance> {
    let mut del_toks: BTreeMap<(&str, usize), Vec<Token>> = BTreeMap::new();
    let mut add_toks: BTreeMap<(&str, usize), Vec<Token>> = BTreeMap::new();
    for fd in diffs {
        if fd.binary {
            continue;
        }
        for el in &fd.edit_lists {
            if let Some(pb) = fd.path_before.as_deref() {
                for (line, text) in el.del_line_numbers().zip(el.del_lines.iter()) {
                    del_toks.insert((pb, line), tokenize(text));
                }
            }
            if let Some(pa) = fd.path_after.as_deref() {
                for (line, text) in el.add_line_numbers().zip(el.add_lines.iter()) {
                    add_toks.insert((pa, line), tokenize(text));
                }
            }
        }
    }

    let mut moves = Vec::new();
    type Occurrence = (String, usize, String, usize, usize); // del path/line, add path/line, token index
    // (old, new) -> occurrence list, keyed by (del_path, add_path) file pair.
    type RenameGroup = BTreeMap<(String, String), Vec<Occurrence>>;
    let mut groups: BTreeMap<(String, String), RenameGroup> = BTreeMap::new();

    for m in matches {
        let Some(d) = del_toks.get(&(m.del_ref.path.as_str(), m.del_ref.line)) else {
            continue;
        };
        let Some(a) = add_toks.get(&(m.add_ref.path.as_str(), m.add_ref.line)) else {
            continue;
        };
        let same_text = d.len() == a.len() && d.iter().zip(a.iter()).all(|(x, y)| x.text == y.text);
        if same_text {
            if !d.is_empty() && (m.del_ref.path != m.add_ref.path || m.del_ref.line != m.add_ref.line) {
                moves.push(RefactoringInstance {
                    type_name: "Move Statement".into(),
                    description: format!(
                        "statement moved from {}:{} to {}:{}",
                        m.del_ref.path, m.del_ref.line, m.add_ref.path, m.add_ref.line
                    ),
                    left_ranges: vec![CodeRange {
                        path: m.del_ref.path.clone(),
                        start_line: m.del_ref.line,
                        end_line: m.del_ref.line,
                        start_column: None,
                        end_column: None,
                        element_type: "statement".into(),
                        element_name: String::new(),
                    }],
                    right_ranges: vec![CodeRange {
                        path: m.add_ref.path.clone(),
                        start_line: m.add_ref.line,
                        end_line: m.add_ref.line,
                        start_column: None,
                        end_column: None,
                        element_type: "statement".into(),
                        element_name: String::new(),
                    }],
                    origin: Origin::Builtin,
                });
            }
            continue;
        }
        if d.len() != a.len() {
            continue;
        }
        let diffs_at: Vec<usize> = (0..d.len()).filter(|&i| d[i].text != a[i].text).collect();
        if let [k] = diffs_at.as_slice() {
            let k = *k;
            if d[k].kind == TokenKind::Identifier && a[k].kind == TokenKind::Identifier {
                groups
                    .entry((m.del_ref.path.clone(), m.add_ref.path.clone()))
                    .or_default()
                    .entry((d[k].text.clone(), a[k].text.clone()))
                    .or_default()
                    .push((
                        m.del_ref.path.clone(),
                        m.del_ref.line,
                        m.add_ref.path.clone(),
                        m.add_ref.line,
                        k,
                    ));
            }
        }
    }

    let mut renames = Vec::new();
    for ((_, _), by_pair) in &groups {
        // Consistency within the file pair: old <-> new must be one-to-one.
        let mut old_to_new: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let mut new_to_old: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (old, new) in by_pair.keys() {
            old_to_new.entry(old).or_default().insert(new);
            new_to_old.entry(new).or_default().insert(old);
        }
        for ((old, new), occs) in by_pair {
            if old_to_new[old.as_str()].len() != 1 || new_to_old[new.as_str()].len() != 1 {
                continue;
            }
            let mut decls: Vec<&Occurrence> = occs
                .iter()
                .filter(|(_, _, apath, aline, k)| {
                    add_toks
                        .get(&(apath.as_str(), *aline))
                        .and_then(|toks| declaration_kind(toks, *k))
                        .is_some()
                })
                .collect();
            if decls.is_empty() {
                continue;
            }
            decls.sort_by_key(|(dp, dl, _, _, _)| (dp.clone(), *dl));
            let kind = decls
                .iter()
                .find_map(|(_, _, apath, aline, k)| {
                    declaration_kind(&add_toks[&(apath.as_str(), *aline)], *k)
                })
                .expect("filtered to declaration sites");
            let left_ranges = decls
                .iter()
                .map(|(dpath, dline, _, _, _)| CodeRange {
                    path: dpath.clone(),
                    start_line: *dline,
                    end_line: *dline,
                    start_column: None,
                    end_column: None,
                    element_type: element_type_name(kind).into(),
                    element_name: old.clone(),
                })
                .collect();
            let right_ranges = decls
                .iter()
                .map(|(_, _, apath, aline, _)| CodeRange {
                    path: apath.clone(),
                    start_line: *aline,
                    end_line: *aline,
                    start_column: None,
                    end_column: None,
                    element_type: element_type_name(kind).into(),
                    element_name: new.clone(),
                })
                .collect();
            renames.push(RefactoringInstance {
                type_name: rename_type_name(kind).into(),
                description: format!("{old} renamed to {new}"),
                left_ranges,
                right_ranges,
                origin: Origin::Builtin,
            });
        }
    }

    renames.extend(moves);
    renames
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{LineRef, Provenance};

    const RENAME_REPORT: &str = r#"{
      "commits": [
        {
          "sha1": "a3f9c2d",
          "refactorings": [
            {
              "type": "Rename Variable",
              "description": "Rename Variable iter : Iterator to iterator : Iterator in method parse",
              "leftSideLocations": [
                {"filePath": "src/Parser.java", "startLine": 41, "endLine": 41,
                 "codeElementType": "VARIABLE_DECLARATION", "codeElement": "iter : Iterator"},
                {"filePath": "src/Parser.java", "startLine": 44, "endLine": 44,
                 "codeElementType": "STATEMENT", "codeElement": "iter : Iterator"}
              ],
              "rightSideLocations": [
                {"filePath": "src/Parser.java", "startLine": 41, "endLine": 41,
                 "codeElementType": "VARIABLE_DECLARATION", "codeElement": "iterator : Iterator"},
                {"filePath": "src/Parser.java", "startLine": 44, "endLine": 44,
                 "codeElementType": "STATEMENT", "codeElement": "iterator : Iterator"}
              ]
            }
          ]
        }
      ]
    }"#;

    #[test]
    fn empty_report_loads_to_an_empty_map() {
        let map = load_report(r#"{"commits": []}"#).unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn rename_variable_report_loads_field_by_field() {
        let map = load_report(RENAME_REPORT).unwrap();
        let instances = &map["a3f9c2d"];
        assert_eq!(instances.len(), 1);
        let inst = &instances[0];
        assert_eq!(inst.type_name, "Rename Variable");
        assert_eq!(inst.origin, Origin::ExternalReport);
        assert_eq!(inst.left_ranges.len(), 2);
        assert_eq!(inst.right_ranges.len(), 2);
        let l0 = &inst.left_ranges[0];
        assert_eq!(l0.path, "src/Parser.java");
        assert_eq!((l0.start_line, l0.end_line), (41, 41));
        assert_eq!(l0.start_column, None);
        assert_eq!(l0.element_type, "VARIABLE_DECLARATION");
        assert_eq!(l0.element_name, "iter : Iterator");
        assert_eq!(inst.right_ranges[1].element_name, "iterator : Iterator");
    }

    #[test]
    fn schema_errors_name_the_json_path() {
        let bad = r#"{"commits": [{"sha1": "x", "refactorings": [{"type": 3,
                      "leftSideLocations": [], "rightSideLocations": []}]}]}"#;
        let err = load_report(bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("$.commits[0].refactorings[0].type"), "{msg}");

        let bad2 = r#"{"commits": [{"refactorings": []}]}"#;
        let msg2 = load_report(bad2).unwrap_err().to_string();
        assert!(msg2.contains("$.commits[0].sha1"), "{msg2}");

        let bad3 = r#"{"commits": [{"sha1": "x", "refactorings": [
            {"type": "Extract Method", "leftSideLocations": [
               {"filePath": "a", "startLine": 9, "endLine": 3}],
             "rightSideLocations": []}]}]}"#;
        let msg3 = load_report(bad3).unwrap_err().to_string();
        assert!(msg3.contains("startLine 9 is greater than endLine 3"), "{msg3}");
    }

    #[test]
    fn serialize_then_load_is_identity() {
        let map = load_report(RENAME_REPORT).unwrap();
        let text = serialize_report(&map);
        let back = load_report(&text).unwrap();
        assert_eq!(map, back);
    }

    #[test]
    fn name_altering_types_are_exactly_two_word_forms() {
        assert_eq!(
            parse_name_altering("Rename Variable"),
            Some((AlterationOp::Rename, ElementKind::Variable))
        );
        assert_eq!(
            parse_name_altering("Add Parameter"),
            Some((AlterationOp::Add, ElementKind::Parameter))
        );
        assert_eq!(
            parse_name_altering("Remove Attribute"),
            Some((AlterationOp::Remove, ElementKind::Attribute))
        );
        assert_eq!(parse_name_altering("Add Parameter Modifier"), None);
        assert_eq!(parse_name_altering("Extract Method"), None);
        assert_eq!(parse_name_altering("Rename Package"), None);
    }

    #[test]
    fn identifier_extraction_handles_common_element_shapes() {
        assert_eq!(extract_identifier("_file : File"), Some("_file".into()));
        assert_eq!(
            extract_identifier("public getName() : String"),
            Some("getName".into())
        );
        assert_eq!(extract_identifier("org.example.OldName"), Some("OldName".into()));
        assert_eq!(extract_identifier("names : List<String>"), Some("names".into()));
        assert_eq!(extract_identifier(""), None);
    }

    fn inst_with_left(range: CodeRange, type_name: &str) -> RefactoringInstance {
        RefactoringInstance {
            type_name: type_name.into(),
            description: String::new(),
            left_ranges: vec![range],
            right_ranges: vec![],
            origin: Origin::ExternalReport,
        }
    }

    #[test]
    fn column_window_selects_fully_contained_tokens() {
        // Line: "int iter = source.iterator();" with a range over cols 5..12.
        let line = "int iter = source.iterator();";
        let toks = tokenize(line);
        let inst = inst_with_left(
            CodeRange {
                path: "f".into(),
                start_line: 7,
                end_line: 7,
                start_column: Some(5),
                end_column: Some(12),
                element_type: "VARIABLE_DECLARATION".into(),
                element_name: "iter : Iterator".into(),
            },
            "Extract Variable",
        );
        let spans = refactoring_token_spans(&inst, ReportSide::Before, "f", 7, &toks).unwrap();
        let texts: Vec<&str> = spans.iter().map(|&i| toks[i].text.as_str()).collect();
        // "iter" occupies cols 5-8; "=" at col 10 is inside; "int" (1-3) and
        // "source" (12+) are not fully contained.
        assert_eq!(texts, vec!["iter", "="]);
    }

    #[test]
    fn columnless_rename_narrows_to_the_identifier_tokens() {
        let line = "Iterator iter = source.iterator();";
        let toks = tokenize(line);
        let inst = inst_with_left(
            CodeRange {
                path: "f".into(),
                start_line: 3,
                end_line: 3,
                start_column: None,
                end_column: None,
                element_type: "VARIABLE_DECLARATION".into(),
                element_name: "iter : Iterator".into(),
            },
            "Rename Variable",
        );
        let spans = refactoring_token_spans(&inst, ReportSide::Before, "f", 3, &toks).unwrap();
        let texts: Vec<&str> = spans.iter().map(|&i| toks[i].text.as_str()).collect();
        assert_eq!(texts, vec!["iter"]);
    }

    #[test]
    fn columnless_non_name_altering_range_claims_the_whole_line() {
        let line = "return cache.get(key);";
        let toks = tokenize(line);
        let inst = inst_with_left(
            CodeRange {
                path: "f".into(),
                start_line: 12,
                end_line: 14,
                start_column: None,
                end_column: None,
                element_type: "STATEMENT".into(),
                element_name: String::new(),
            },
            "Extract Method",
        );
        let spans = refactoring_token_spans(&inst, ReportSide::Before, "f", 13, &toks).unwrap();
        assert_eq!(spans.len(), toks.len());
    }

    #[test]
    fn multiline_column_range_constrains_only_the_edge_lines() {
        let first = "foo(bar,";
        let last = "    baz);";
        let toks_first = tokenize(first);
        let toks_last = tokenize(last);
        let inst = inst_with_left(
            CodeRange {
                path: "f".into(),
                start_line: 1,
                end_line: 2,
                start_column: Some(5),
                end_column: Some(8),
                element_type: "STATEMENT".into(),
                element_name: String::new(),
            },
            "Extract Method",
        );
        // First line: only tokens starting at col >= 5 ("bar" at 5-7, "," at 8).
        let s1 = refactoring_token_spans(&inst, ReportSide::Before, "f", 1, &toks_first).unwrap();
        let t1: Vec<&str> = s1.iter().map(|&i| toks_first[i].text.as_str()).collect();
        assert_eq!(t1, vec!["bar", ","]);
        // Last line: tokens ending at col <= 8 ("baz" at 5-7, ")" at 8).
        let s2 = refactoring_token_spans(&inst, ReportSide::Before, "f", 2, &toks_last).unwrap();
        let t2: Vec<&str> = s2.iter().map(|&i| toks_last[i].text.as_str()).collect();
        assert_eq!(t2, vec!["baz", ")"]);
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let line = "return x;";
        let toks = tokenize(line);
        let inst = inst_with_left(
            CodeRange {
                path: "f".into(),
                start_line: 5,
                end_line: 5,
                start_column: None,
                end_column: None,
                element_type: "VARIABLE_DECLARATION".into(),
                element_name: "iter : Iterator".into(),
            },
            "Rename Variable",
        );
        let err = refactoring_token_spans(&inst, ReportSide::Before, "f", 5, &toks).unwrap_err();
        assert!(matches!(err, ReportError::NoIntersection { line: 5, .. }));
    }

    fn mk_match(path: &str, dline: usize, aline: usize) -> StatementMatch {
        StatementMatch {
            del_ref: LineRef { path: path.into(), line: dline },
            add_ref: LineRef { path: path.into(), line: aline },
            similarity: 0.9,
            provenance: Provenance::Similarity,
        }
    }

    fn one_file_diff(path: &str, dels: &[(usize, &str)], adds: &[(usize, &str)]) -> Vec<FileDiff> {
        // One edit list per line keeps fixture line numbers explicit.
        let mut edit_lists = Vec::new();
        for (line, text) in dels {
            edit_lists.push(crate::diff::EditList::new(*line, vec![text.to_string()], *line, vec![]));
        }
        for (line, text) in adds {
            edit_lists.push(crate::diff::EditList::new(*line, vec![], *line, vec![text.to_string()]));
        }
        vec![FileDiff {
            path_before: Some(path.into()),
            path_after: Some(path.into()),
            binary: false,
            edit_lists,
        }]
    }

    #[test]
    fn builtin_detects_a_consistent_variable_rename() {
        let diffs = one_file_diff(
            "A.java",
            &[(4, "int iter = 0;"), (9, "use(iter);")],
            &[(4, "int iterator = 0;"), (9, "use(iterator);")],
        );
        let matches = vec![mk_match("A.java", 4, 4), mk_match("A.java", 9, 9)];
        let found = detect_builtin(&diffs, &matches);
        assert_eq!(found.len(), 1);
        let inst = &found[0];
        assert_eq!(inst.type_name, "Rename Variable");
        assert_eq!(inst.origin, Origin::Builtin);
        // Only the declaration line is claimed; the use at line 9 is left
        // for propagation.
        assert_eq!(inst.left_ranges.len(), 1);
        assert_eq!(inst.left_ranges[0].start_line, 4);
        assert_eq!(inst.left_ranges[0].element_name, "iter");
        assert_eq!(inst.right_ranges[0].element_name, "iterator");
    }

    #[test]
    fn builtin_rejects_inconsistent_renames() {
        // "iter" maps to two different new names in the same file.
        let diffs = one_file_diff(
            "A.java",
            &[(4, "int iter = 0;"), (9, "int iter = 1;")],
            &[(4, "int iterator = 0;"), (9, "int cursor = 1;")],
        );
        let matches = vec![mk_match("A.java", 4, 4), mk_match("A.java", 9, 9)];
        assert!(detect_builtin(&diffs, &matches).is_empty());
    }

    #[test]
    fn builtin_rename_requires_a_declaration_site() {
        // Usage-only change: no declaration on the add side.
        let diffs = one_file_diff("A.java", &[(9, "use(iter);")], &[(9, "use(iterator);")]);
        let matches = vec![mk_match("A.java", 9, 9)];
        assert!(detect_builtin(&diffs, &matches).is_empty());
    }

    #[test]
    fn builtin_classifies_parameter_method_and_class_declarations() {
        let cases = [
            ("void run(int iter) {", "void run(int cursor) {", "Rename Parameter"),
            ("int total() {", "int sum() {", "Rename Method"),
            ("class Foo {", "class Bar {", "Rename Class"),
        ];
        for (before, after, expected) in cases {
            let diffs = one_file_diff("A.java", &[(4, before)], &[(4, after)]);
            let matches = vec![mk_match("A.java", 4, 4)];
            let found = detect_builtin(&diffs, &matches);
            assert_eq!(found.len(), 1, "{before}");
            assert_eq!(found[0].type_name, expected, "{before}");
        }
    }

    #[test]
    fn builtin_emits_moves_for_identical_pairs_at_new_positions() {
        let diffs = one_file_diff("A.java", &[(4, "doWork();")], &[(11, "doWork();")]);
        let mut m = mk_match("A.java", 4, 11);
        m.similarity = 1.0;
        let found = detect_builtin(&diffs, &[m]);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].type_name, "Move Statement");
        assert_eq!(found[0].left_ranges[0].start_line, 4);
        assert_eq!(found[0].right_ranges[0].start_line, 11);
    }

    #[test]
    fn builtin_ignores_identical_pairs_at_the_same_position() {
        let diffs = one_file_diff("A.java", &[(4, "doWork();")], &[(4, "doWork();")]);
        let found = detect_builtin(&diffs, &[mk_match("A.java", 4, 4)]);
        assert!(found.is_empty());
    }
}
