//! Statement tokenization and term-frequency cosine similarity.
//!
//! Lines are tokenized with a Java-flavoured lexer: identifiers, keywords,
//! numbers, string/char literals, operators, and punctuation. Comments are
//! stripped. Similarity between two lines is the cosine of their raw token
//! count vectors; there is no IDF weighting and no case folding.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Number,
    StringLiteral,
    CharLiteral,
    Operator,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    /// 1-based column of the first character.
    pub start_col: usize,
    /// 1-based column of the last character, inclusive.
    pub end_col: usize,
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "false",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "null",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "true",
    "try",
    "void",
    "volatile",
    "while",
];

/// Multi-character operators, longest first so maximal munch is a linear scan.
const OPERATORS: &[&str] = &[
    ">>>=", ">>>", "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "->", "::", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

const SINGLE_OPERATORS: &str = "+-*/%=<>!&|^~?:";
const PUNCTUATION: &str = "()[]{};,.@";

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Tokenizes one source line. Comments never produce tokens; an unterminated
/// block comment swallows the rest of the line.
pub fn tokenize(line: &str) -> Vec<Token> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && i + 1 < chars.len() {
            if chars[i + 1] == '/' {
                break;
            }
            if chars[i + 1] == '*' {
                match find_block_comment_end(&chars, i + 2) {
                    Some(end) => {
                        i = end;
                        continue;
                    }
                    None => break,
                }
            }
        }
        if c == '"' || c == '\'' {
            let (text, next) = scan_quoted(&chars, i, c);
            let kind = if c == '"' {
                TokenKind::StringLiteral
            } else {
                TokenKind::CharLiteral
            };
            tokens.push(Token {
                text,
                kind,
                start_col: i + 1,
                end_col: next,
            });
            i = next;
            continue;
        }
        if c.is_ascii_digit() {
            let (text, next) = scan_number(&chars, i);
            tokens.push(Token {
                text,
                kind: TokenKind::Number,
                start_col: i + 1,
                end_col: next,
            });
            i = next;
            continue;
        }
        if is_ident_start(c) {
            let mut j = i + 1;
            while j < chars.len() && is_ident_continue(chars[j]) {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let kind = if KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            tokens.push(Token {
                text,
                kind,
                start_col: i + 1,
                end_col: j,
            });
            i = j;
            continue;
        }
        if let Some(op) = OPERATORS
            .iter()
            .find(|op| chars[i..].starts_with(&op.chars().collect::<Vec<_>>()[..]))
        {
            tokens.push(Token {
                text: (*op).to_string(),
                kind: TokenKind::Operator,
                start_col: i + 1,
                end_col: i + op.len(),
            });
            i += op.len();
            continue;
        }
        if SINGLE_OPERATORS.contains(c) {
            tokens.push(Token {
                text: c.to_string(),
                kind: TokenKind::Operator,
                start_col: i + 1,
                end_col: i + 1,
            });
            i += 1;
            continue;
        }
        if PUNCTUATION.contains(c) {
            tokens.push(Token {
                text: c.to_string(),
                kind: TokenKind::Punctuation,
                start_col: i + 1,
                end_col: i + 1,
            });
            i += 1;
            continue;
        }
        // Anything else (stray unicode, backslash) is an opaque one-char operator.
        tokens.push(Token {
            text: c.to_string(),
            kind: TokenKind::Operator,
            start_col: i + 1,
            end_col: i + 1,
        });
        i += 1;
    }
    tokens
}

fn find_block_comment_end(chars: &[char], from: usize) -> Option<usize> {
    let mut i = from;
    while i + 1 < chars.len() {
        if chars[i] == '*' && chars[i + 1] == '/' {
            return Some(i + 2);
        }
        i += 1;
    }
    None
}

/// Scans a quoted literal starting at `start` (which holds `quote`). The
/// returned text keeps the quotes; an unterminated literal runs to the end of
/// the line. Returns (text, index one past the literal).
fn scan_quoted(chars: &[char], start: usize, quote: char) -> (String, usize) {
    let mut i = start + 1;
    while i < chars.len() {
        if chars[i] == '\\' {
            i = (i + 2).min(chars.len());
            continue;
        }
        if chars[i] == quote {
            i += 1;
            return (chars[start..i].iter().collect(), i);
        }
        i += 1;
    }
    (chars[start..].iter().collect(), chars.len())
}

fn scan_number(chars: &[char], start: usize) -> (String, usize) {
    let mut i = start + 1;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() || c == '_' || c == '.' {
            i += 1;
            continue;
        }
        // Exponent sign: 1e+5, 0x1p-3.
        if (c == '+' || c == '-') && matches!(chars[i - 1], 'e' | 'E' | 'p' | 'P') {
            i += 1;
            continue;
        }
        break;
    }
    (chars[start..i].iter().collect(), i)
}

/// Raw token counts of one line. Token text is the term; kind is ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermFreq {
    counts: BTreeMap<String, u64>,
}

impl TermFreq {
    pub fn from_tokens(tokens: &[Token]) -> Self {
        let mut counts = BTreeMap::new();
        for t in tokens {
            *counts.entry(t.text.clone()).or_insert(0) += 1;
        }
        TermFreq { counts }
    }

    pub fn from_line(line: &str) -> Self {
        Self::from_tokens(&tokenize(line))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Cosine similarity of two count vectors. Either side empty yields 0.
///
/// The norms are multiplied before the square root so that rational results
/// of small integer counts stay exact: the classic boundary pair
/// `int x = 5 ;` vs `int y = 5 ;` evaluates to exactly 0.8 and a strict
/// `> 0.8` threshold excludes it on every platform.
pub fn cosine(a: &TermFreq, b: &TermFreq) -> f64 {
    if a.counts.is_empty() || b.counts.is_empty() {
        return 0.0;
    }
    let mut dot = 0u64;
    for (term, ca) in &a.counts {
        if let Some(cb) = b.counts.get(term) {
            dot += ca * cb;
        }
    }
    if dot == 0 {
        return 0.0;
    }
    let na2: u64 = a.counts.values().map(|c| c * c).sum();
    let nb2: u64 = b.counts.values().map(|c| c * c).sum();
    dot as f64 / ((na2 as f64) * (nb2 as f64)).sqrt()
}

pub fn line_similarity(a: &str, b: &str) -> f64 {
    cosine(&TermFreq::from_line(a), &TermFreq::from_line(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(line: &str) -> Vec<String> {
        tokenize(line).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn empty_line_has_no_tokens() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t ").is_empty());
    }

    #[test]
    fn declaration_tokenizes_to_five_tokens() {
        let toks = tokenize("int x = 5;");
        let got: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(got, ["int", "x", "=", "5", ";"]);
        let kinds: Vec<TokenKind> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            [
                TokenKind::Keyword,
                TokenKind::Identifier,
                TokenKind::Operator,
                TokenKind::Number,
                TokenKind::Punctuation,
            ]
        );
    }

    #[test]
    fn string_literals_are_opaque_and_comments_are_stripped() {
        assert_eq!(texts(r#"a=="s;x"//c"#), ["a", "==", r#""s;x""#]);
        assert_eq!(texts("a /* b */ c"), ["a", "c"]);
        assert_eq!(texts("a /* unterminated"), ["a"]);
        assert_eq!(texts(r"'\''+x"), [r"'\''", "+", "x"]);
    }

    #[test]
    fn columns_are_one_based_inclusive() {
        let toks = tokenize("ab + cd");
        assert_eq!((toks[0].start_col, toks[0].end_col), (1, 2));
        assert_eq!((toks[1].start_col, toks[1].end_col), (4, 4));
        assert_eq!((toks[2].start_col, toks[2].end_col), (6, 7));
    }

    #[test]
    fn multi_char_operators_use_maximal_munch() {
        assert_eq!(texts("a>>>=b"), ["a", ">>>=", "b"]);
        assert_eq!(texts("x->y::z"), ["x", "->", "y", "::", "z"]);
        assert_eq!(texts("i++ - --j"), ["i", "++", "-", "--", "j"]);
    }

    #[test]
    fn numbers_keep_exponents_and_suffixes() {
        assert_eq!(texts("1e+5 0x1F 2.5f"), ["1e+5", "0x1F", "2.5f"]);
    }

    #[test]
    fn cosine_of_identical_nonempty_lines_is_exactly_one() {
        assert_eq!(line_similarity("return a + b ;", "return a + b ;"), 1.0);
    }

    #[test]
    fn cosine_of_single_token_rename_is_exactly_four_fifths() {
        // Both lines have five distinct tokens; four are shared.
        let s = line_similarity("int x = 5 ;", "int y = 5 ;");
        assert_eq!(s, 0.8);
        // Right at the threshold: a strict > 0.8 comparison rejects it.
        assert!(s <= 0.8);
    }

    #[test]
    fn cosine_of_appended_term_exceeds_threshold() {
        // dot = 6, |a|^2 = 5, |b|^2 = 9 (the longer side has "+" twice).
        let s = line_similarity("return a + b ;", "return a + b + c ;");
        let expected = 6.0 / (5.0f64 * 9.0).sqrt();
        assert_eq!(s, expected);
        assert!(s > 0.8);
        assert!((s - 0.894_427_190_999_915_9).abs() < 1e-12);
    }

    #[test]
    fn cosine_of_disjoint_or_empty_lines_is_zero() {
        assert_eq!(line_similarity("a b", "c d"), 0.0);
        assert_eq!(line_similarity("", "c d"), 0.0);
        assert_eq!(line_similarity("", ""), 0.0);
    }

    proptest! {
        /// Rendering tokens separated by spaces and re-tokenizing yields the
        /// same token texts: tokenization is stable under its own output.
        #[test]
        fn retokenizing_rendered_tokens_is_identity(line in "[ -~]{0,60}") {
            let first = texts(&line);
            let rendered = first.join(" ");
            let second = texts(&rendered);
            prop_assert_eq!(first, second);
        }

        /// Cosine is symmetric and bounded.
        #[test]
        fn cosine_is_symmetric_and_bounded(a in "[ -~]{0,40}", b in "[ -~]{0,40}") {
            let ab = line_similarity(&a, &b);
            let ba = line_similarity(&b, &a);
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        }

        /// Every line is maximally similar to itself.
        #[test]
        fn cosine_with_self_is_one_or_zero(a in "[ -~]{0,40}") {
            let s = line_similarity(&a, &a);
            let tf = TermFreq::from_line(&a);
            if tf.is_empty() {
                prop_assert_eq!(s, 0.0);
            } else {
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }
}
