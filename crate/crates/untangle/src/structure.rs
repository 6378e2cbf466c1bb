//! Lightweight structural index over Java-style sources.
//!
//! A brace-depth scanner recovers class and method line ranges without a
//! full parser. It is deliberately heuristic: anonymous classes, lambdas,
//! and initializer blocks open anonymous scopes and their contents attach to
//! the innermost named class. Lines outside every class belong to the
//! synthetic `<toplevel>` scope.

use crate::error::StructureError;
use crate::tokenize::{tokenize, Token, TokenKind};

pub const TOPLEVEL: &str = "<toplevel>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodInfo {
    pub name: String,
    /// Declaration tokens up to the opening brace, joined with single spaces.
    pub signature_text: String,
    pub start_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub name: String,
    pub start_line: usize,
    pub end_line: usize,
    pub methods: Vec<MethodInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StructureIndex {
    pub classes: Vec<ClassInfo>,
    pub line_count: usize,
}

/// Strips comments from one line while tracking block-comment state across
/// lines. String and char literals shield their contents.
fn strip_comments(line: &str, in_block: bool) -> (String, bool) {
    #[derive(PartialEq)]
    enum S {
        Code,
        Block,
        Str,
        Chr,
    }
    let chars: Vec<char> = line.chars().collect();
    let mut out = String::new();
    let mut state = if in_block { S::Block } else { S::Code };
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match state {
            S::Code => {
                if c == '/' && chars.get(i + 1) == Some(&'/') {
                    break;
                }
                if c == '/' && chars.get(i + 1) == Some(&'*') {
                    state = S::Block;
                    out.push(' ');
                    i += 2;
                    continue;
                }
                if c == '"' {
                    state = S::Str;
                } else if c == '\'' {
                    state = S::Chr;
                }
                out.push(c);
                i += 1;
            }
            S::Block => {
                if c == '*' && chars.get(i + 1) == Some(&'/') {
                    state = S::Code;
                    i += 2;
                } else {
                    i += 1;
                }
            }
            S::Str | S::Chr => {
                if c == '\\' && i + 1 < chars.len() {
                    out.push(c);
                    out.push(chars[i + 1]);
                    i += 2;
                    continue;
                }
                let closing = if state == S::Str { '"' } else { '\'' };
                out.push(c);
                if c == closing {
                    state = S::Code;
                }
                i += 1;
            }
        }
    }
    // Literals never span lines, so only block comments carry over.
    (out, state == S::Block)
}

const CONTROL_KEYWORDS: &[&str] = &[
    "if", "for", "while", "switch", "catch", "synchronized", "return", "throw", "new", "assert",
    "else", "do", "try", "case", "break", "continue",
];

/// Index of the name declared by a class-like segment, if any: the
/// identifier right after `class`/`interface`/`enum`/`record`.
fn class_name(segment: &[(Token, usize)]) -> Option<usize> {
    for (k, (tok, _)) in segment.iter().enumerate() {
        let class_like = matches!(tok.text.as_str(), "class" | "interface" | "enum")
            && tok.kind == TokenKind::Keyword
            || tok.text == "record" && tok.kind == TokenKind::Identifier;
        if class_like {
            if let Some((next, _)) = segment.get(k + 1) {
                if next.kind == TokenKind::Identifier {
                    return Some(k + 1);
                }
            }
        }
    }
    None
}

/// Index of the method name in a declaration-like segment: the identifier
/// directly before the first `(` once annotations are skipped, provided no
/// `=` intervenes and the identifier is not a control keyword.
fn method_name(segment: &[(Token, usize)]) -> Option<usize> {
    let mut k = 0;
    while k < segment.len() {
        let (tok, _) = &segment[k];
        if tok.text == "@" {
            // Skip annotation: @, dotted name, optional balanced parens.
            k += 1;
            while k + 1 < segment.len()
                && segment[k + 1].0.text == "."
                && segment[k].0.kind == TokenKind::Identifier
            {
                k += 2;
            }
            if k < segment.len() && segment[k].0.kind == TokenKind::Identifier {
                k += 1;
            }
            if k < segment.len() && segment[k].0.text == "(" {
                let mut depth = 0i32;
                while k < segment.len() {
                    match segment[k].0.text.as_str() {
                        "(" => depth += 1,
                        ")" => {
                            depth -= 1;
                            if depth == 0 {
                                k += 1;
                                break;
                            }
                        }
                        _ => {}
                    }
                    k += 1;
                }
            }
            continue;
        }
        if tok.text == "=" {
            return None;
        }
        if tok.text == "(" {
            if k == 0 {
                return None;
            }
            let (prev, _) = &segment[k - 1];
            let callable = prev.kind == TokenKind::Identifier
                && !CONTROL_KEYWORDS.contains(&prev.text.as_str());
            return callable.then_some(k - 1);
        }
        k += 1;
    }
    None
}

/// Builds the structural index of a file given as lines.
pub fn parse_structure(lines: &[String]) -> StructureIndex {
    enum Scope {
        Class { slot: usize },
        Method { class_slot: usize, slot: usize },
        Block,
    }

    let mut classes: Vec<ClassInfo> = Vec::new();
    let mut stack: Vec<Scope> = Vec::new();
    let mut segment: Vec<(Token, usize)> = Vec::new();
    let mut in_block_comment = false;

    for (idx, raw) in lines.iter().enumerate() {
        let line_no = idx + 1;
        let (code, still_in_block) = strip_comments(raw, in_block_comment);
        in_block_comment = still_in_block;
        for tok in tokenize(&code) {
            match tok.text.as_str() {
                "{" => {
                    let innermost_class = stack.iter().rev().find_map(|s| match s {
                        Scope::Class { slot } => Some(*slot),
                        _ => None,
                    });
                    let at_class_depth =
                        matches!(stack.last(), Some(Scope::Class { .. }));
                    if let Some(name_idx) = class_name(&segment) {
                        let start_line = segment.first().map(|(_, l)| *l).unwrap_or(line_no);
                        classes.push(ClassInfo {
                            name: segment[name_idx].0.text.clone(),
                            start_line,
                            end_line: start_line,
                            methods: Vec::new(),
                        });
                        stack.push(Scope::Class {
                            slot: classes.len() - 1,
                        });
                    } else if at_class_depth {
                        if let Some(name_idx) = method_name(&segment) {
                            let class_slot = innermost_class.expect("class depth implies a class");
                            let start_line = segment.first().map(|(_, l)| *l).unwrap_or(line_no);
                            let signature_text = segment
                                .iter()
                                .map(|(t, _)| t.text.as_str())
                                .collect::<Vec<_>>()
                                .join(" ");
                            classes[class_slot].methods.push(MethodInfo {
                                name: segment[name_idx].0.text.clone(),
                                signature_text,
                                start_line,
                                end_line: start_line,
                            });
                            stack.push(Scope::Method {
                                class_slot,
                                slot: classes[class_slot].methods.len() - 1,
                            });
                        } else {
                            stack.push(Scope::Block);
                        }
                    } else {
                        stack.push(Scope::Block);
                    }
                    segment.clear();
                }
                "}" => {
                    match stack.pop() {
                        Some(Scope::Class { slot }) => classes[slot].end_line = line_no,
                        Some(Scope::Method { class_slot, slot }) => {
                            classes[class_slot].methods[slot].end_line = line_no
                        }
                        _ => {}
                    }
                    segment.clear();
                }
                ";" => segment.clear(),
                _ => segment.push((tok, line_no)),
            }
        }
    }
    // Unbalanced input: close anything left open at EOF.
    while let Some(scope) = stack.pop() {
        match scope {
            Scope::Class { slot } => classes[slot].end_line = lines.len(),
            Scope::Method { class_slot, slot } => {
                classes[class_slot].methods[slot].end_line = lines.len()
            }
            Scope::Block => {}
        }
    }
    StructureIndex {
        classes,
        line_count: lines.len(),
    }
}

impl StructureIndex {
    /// (class, method) enclosing a 1-based line: the innermost class range
    /// containing it (or `<toplevel>`) and the innermost method within that
    /// class, if any.
    pub fn enclosing(&self, line: usize) -> Result<(String, Option<String>), StructureError> {
        if line == 0 || line > self.line_count {
            return Err(StructureError::LineOutOfRange {
                line,
                line_count: self.line_count,
            });
        }
        let class = self
            .classes
            .iter()
            .filter(|c| c.start_line <= line && line <= c.end_line)
            .min_by_key(|c| c.end_line - c.start_line);
        match class {
            None => Ok((TOPLEVEL.to_string(), None)),
            Some(c) => {
                let method = c
                    .methods
                    .iter()
                    .filter(|m| m.start_line <= line && line <= m.end_line)
                    .min_by_key(|m| m.end_line - m.start_line)
                    .map(|m| m.name.clone());
                Ok((c.name.clone(), method))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(src: &str) -> Vec<String> {
        src.lines().map(str::to_string).collect()
    }

    #[test]
    fn indexes_a_class_with_two_methods() {
        let src = "\
package demo;

public class Calc {
    private int total;

    public int add(int x) {
        total += x;
        return total;
    }

    public void reset() { total = 0; }
}
";
        let idx = parse_structure(&lines(src));
        assert_eq!(idx.line_count, 12);
        assert_eq!(idx.classes.len(), 1);
        let c = &idx.classes[0];
        assert_eq!(c.name, "Calc");
        assert_eq!((c.start_line, c.end_line), (3, 12));
        assert_eq!(c.methods.len(), 2);
        assert_eq!(c.methods[0].name, "add");
        assert_eq!(c.methods[0].signature_text, "public int add ( int x )");
        assert_eq!((c.methods[0].start_line, c.methods[0].end_line), (6, 9));
        assert_eq!(c.methods[1].name, "reset");
        assert_eq!((c.methods[1].start_line, c.methods[1].end_line), (11, 11));

        assert_eq!(idx.enclosing(1).unwrap(), (TOPLEVEL.into(), None));
        assert_eq!(idx.enclosing(4).unwrap(), ("Calc".into(), None));
        assert_eq!(idx.enclosing(7).unwrap(), ("Calc".into(), Some("add".into())));
        assert_eq!(idx.enclosing(11).unwrap(), ("Calc".into(), Some("reset".into())));
    }

    #[test]
    fn nested_classes_bind_to_the_innermost_scope() {
        let src = "\
class Outer {
    void outerMethod() {
    }
    static class Inner {
        void innerMethod() {
            int x = 1;
        }
    }
}
";
        let idx = parse_structure(&lines(src));
        assert_eq!(idx.classes.len(), 2);
        assert_eq!(idx.classes[0].name, "Outer");
        assert_eq!(idx.classes[1].name, "Inner");
        assert_eq!(idx.enclosing(6).unwrap(), ("Inner".into(), Some("innerMethod".into())));
        assert_eq!(idx.enclosing(2).unwrap(), ("Outer".into(), Some("outerMethod".into())));
    }

    #[test]
    fn braces_in_literals_and_comments_do_not_confuse_the_scanner() {
        let src = "\
class A {
    String s = \"}{\"; // }
    /* {
       } */
    char c = '}';
    void m() {
    }
}
";
        let idx = parse_structure(&lines(src));
        assert_eq!(idx.classes.len(), 1);
        assert_eq!(idx.classes[0].end_line, 8);
        assert_eq!(idx.classes[0].methods.len(), 1);
        assert_eq!(idx.enclosing(7).unwrap().1.as_deref(), Some("m"));
    }

    #[test]
    fn control_flow_and_initializers_are_not_methods() {
        let src = "\
class A {
    int[] xs = {1, 2};
    static { }
    void m() {
        if (true) {
            while (false) { }
        }
        Runnable r = () -> { };
    }
}
";
        let idx = parse_structure(&lines(src));
        let c = &idx.classes[0];
        assert_eq!(c.methods.len(), 1);
        assert_eq!(c.methods[0].name, "m");
        assert_eq!((c.methods[0].start_line, c.methods[0].end_line), (4, 9));
        assert_eq!(idx.enclosing(6).unwrap(), ("A".into(), Some("m".into())));
    }

    #[test]
    fn annotations_with_arguments_do_not_hide_the_method_name() {
        let src = "\
class A {
    @SuppressWarnings(\"all\")
    @Deprecated
    public String name() {
        return \"a\";
    }
}
";
        let idx = parse_structure(&lines(src));
        let m = &idx.classes[0].methods[0];
        assert_eq!(m.name, "name");
        assert_eq!(m.start_line, 2); // annotation opens the declaration
    }

    #[test]
    fn interfaces_enums_and_records_are_class_like() {
        let src = "\
interface Shape {
    double area();
    default String label() {
        return \"shape\";
    }
}
enum Color { RED, GREEN }
record Point(int x, int y) {
    int sum() { return x + y; }
}
";
        let idx = parse_structure(&lines(src));
        let names: Vec<&str> = idx.classes.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["Shape", "Color", "Point"]);
        assert_eq!(idx.classes[0].methods.len(), 1); // area() has no body
        assert_eq!(idx.classes[0].methods[0].name, "label");
        assert_eq!(idx.classes[2].methods[0].name, "sum");
    }

    #[test]
    fn anonymous_class_members_attach_to_the_named_class() {
        let src = "\
class A {
    Runnable r = new Runnable() {
        public void run() { }
    };
}
";
        let idx = parse_structure(&lines(src));
        // run() sits inside an anonymous scope: not indexed as a method of A.
        assert!(idx.classes[0].methods.is_empty());
        assert_eq!(idx.enclosing(3).unwrap(), ("A".into(), None));
    }

    #[test]
    fn out_of_range_lines_are_rejected() {
        let idx = parse_structure(&lines("class A { }\n"));
        assert!(matches!(
            idx.enclosing(0),
            Err(StructureError::LineOutOfRange { .. })
        ));
        assert!(matches!(
            idx.enclosing(2),
            Err(StructureError::LineOutOfRange { line: 2, line_count: 1 })
        ));
    }

    #[test]
    fn block_comments_spanning_lines_are_ignored() {
        let src = "\
/* class Fake {
   void ghost() {
*/
class Real {
}
";
        let idx = parse_structure(&lines(src));
        assert_eq!(idx.classes.len(), 1);
        assert_eq!(idx.classes[0].name, "Real");
    }
}
