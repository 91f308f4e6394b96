//! Sentence splitting and tokenization.

use std::fmt;

use thiserror::Error;

use crate::diagnostics::{Code, Diagnostic, Span};

/// Closed keyword set. Every terminal word of the description and
/// specification grammars appears here.
pub const KEYWORDS: &[&str] = &[
    "after", "always", "and", "be", "can", "cannot", "case", "deadlock", "does", "entering",
    "equal", "eventually", "every", "for", "from", "go", "hold", "holds", "if", "implies", "in",
    "initially", "is", "it", "leads", "leaving", "less", "might", "more", "never", "not", "occurs",
    "only", "or", "received", "send", "shall", "spent", "than", "that", "the", "then", "time",
    "to", "within",
];

pub fn is_keyword(word: &str) -> bool {
    let lower = word.to_ascii_lowercase();
    KEYWORDS.binary_search(&lower.as_str()).is_ok()
}

/// One input sentence together with where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub span: Span,
}

impl Sentence {
    /// A sentence that is not backed by a file: line 1, starting at column 1.
    pub fn detached(text: &str) -> Self {
        Sentence {
            text: text.to_string(),
            span: Span::new(1, 1, text.chars().count() + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Number,
    Period,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Keywords are lowercased; everything else keeps its spelling.
    pub text: String,
    /// Spelling as written in the input.
    pub raw: String,
    pub span: Span,
}

impl Token {
    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }

    pub fn is_word(&self) -> bool {
        matches!(self.kind, TokenKind::Keyword | TokenKind::Identifier)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Keyword => write!(f, "`{}`", self.text),
            TokenKind::Identifier => write!(f, "identifier `{}`", self.raw),
            TokenKind::Number => write!(f, "number {}", self.raw),
            TokenKind::Period => f.write_str("`.`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unexpected character `{ch}`")]
    IllegalChar { ch: char, span: Span },
    #[error("rational number `{text}`; bounds must be nonnegative integers")]
    Rational { text: String, span: Span },
    #[error("malformed word `{text}`; names start with a letter")]
    MalformedWord { text: String, span: Span },
}

impl LexError {
    pub fn span(&self) -> Span {
        match self {
            LexError::IllegalChar { span, .. }
            | LexError::Rational { span, .. }
            | LexError::MalformedWord { span, .. } => *span,
        }
    }

    pub fn to_diagnostic(&self, sentence: &Sentence) -> Diagnostic {
        let code = match self {
            LexError::Rational { .. } => Code::RationalNumber,
            _ => Code::LexError,
        };
        Diagnostic::error(code, self.to_string(), sentence.text.clone(), self.span())
    }
}

/// Splits text into sentences. A sentence ends at a period or at the end of
/// its line; blank lines and `#` comment lines are skipped. A period between
/// two digits does not end a sentence so that `10.5` reaches the lexer and is
/// reported as a rational bound.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let mut out = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let chars: Vec<char> = line.chars().collect();
        let mut start = 0;
        for i in 0..chars.len() {
            if chars[i] != '.' {
                continue;
            }
            let between_digits = i > 0
                && chars[i - 1].is_ascii_digit()
                && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit());
            if between_digits {
                continue;
            }
            push_piece(&mut out, &chars, start, i + 1, line_no);
            start = i + 1;
        }
        push_piece(&mut out, &chars, start, chars.len(), line_no);
    }
    out
}

fn push_piece(out: &mut Vec<Sentence>, chars: &[char], start: usize, end: usize, line: usize) {
    let piece = &chars[start..end];
    let Some(first) = piece.iter().position(|c| !c.is_whitespace()) else {
        return;
    };
    let last = piece.iter().rposition(|c| !c.is_whitespace()).unwrap();
    let body: String = piece[first..=last].iter().collect();
    // A lone period or comma run carries no tokens.
    if body.chars().all(|c| c == '.' || c == ',' || c.is_whitespace()) {
        return;
    }
    out.push(Sentence {
        text: body,
        span: Span::new(line, start + first + 1, start + last + 2),
    });
}

/// Tokenizes one sentence. Columns in the returned spans are absolute,
/// offset by the sentence's own span.
pub fn tokenize(sentence: &Sentence) -> Result<Vec<Token>, LexError> {
    let line = sentence.span.line;
    let base = sentence.span.col_start;
    let chars: Vec<char> = sentence.text.chars().collect();
    let span_of = |from: usize, to: usize| Span::new(line, base + from, base + to);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() || c == ',' {
            i += 1;
            continue;
        }
        if c == '.' {
            let rest_blank = chars[i + 1..].iter().all(|c| c.is_whitespace());
            if !rest_blank {
                return Err(LexError::IllegalChar { ch: c, span: span_of(i, i + 1) });
            }
            // Trailing period is dropped.
            break;
        }
        let start = i;
        if c.is_ascii_alphabetic() {
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let raw: String = chars[start..i].iter().collect();
            let lower = raw.to_ascii_lowercase();
            let (kind, text) = if is_keyword(&lower) {
                (TokenKind::Keyword, lower)
            } else {
                (TokenKind::Identifier, raw.clone())
            };
            tokens.push(Token { kind, text, raw, span: span_of(start, i) });
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                let mut end = i + 1;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                return Err(LexError::Rational {
                    text: chars[start..end].iter().collect(),
                    span: span_of(start, end),
                });
            }
            if i < chars.len() && is_word_char(chars[i]) {
                while i < chars.len() && is_word_char(chars[i]) {
                    i += 1;
                }
                return Err(LexError::MalformedWord {
                    text: chars[start..i].iter().collect(),
                    span: span_of(start, i),
                });
            }
            let raw: String = chars[start..i].iter().collect();
            tokens.push(Token {
                kind: TokenKind::Number,
                text: raw.clone(),
                raw,
                span: span_of(start, i),
            });
        } else if c == '_' {
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            return Err(LexError::MalformedWord {
                text: chars[start..i].iter().collect(),
                span: span_of(start, i),
            });
        } else {
            return Err(LexError::IllegalChar { ch: c, span: span_of(i, i + 1) });
        }
    }
    Ok(tokens)
}

/// Convenience wrapper for text that is not part of a file.
pub fn tokenize_str(text: &str) -> Result<Vec<Token>, LexError> {
    tokenize(&Sentence::detached(text))
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(tokens: &[Token]) -> Vec<(TokenKind, &str)> {
        tokens.iter().map(|t| (t.kind, t.text.as_str())).collect()
    }

    #[test]
    fn keyword_table_is_sorted() {
        let mut sorted = KEYWORDS.to_vec();
        sorted.sort();
        assert_eq!(sorted, KEYWORDS);
    }

    #[test]
    fn split_single_sentence() {
        let s = split_sentences("Gate can be Free Occ and it is initially Free.\n");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].text, "Gate can be Free Occ and it is initially Free.");
        assert_eq!(s[0].span, Span::new(1, 1, 47));
    }

    #[test]
    fn split_empty() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("\n\n   \n").is_empty());
    }

    #[test]
    fn split_skips_comments() {
        let s = split_sentences("# comment\nA can only be L.");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].text, "A can only be L.");
        assert_eq!(s[0].span.line, 2);
    }

    #[test]
    fn split_on_periods_and_newlines() {
        let s = split_sentences("A can only be L. B can only be M\n  C can only be N");
        let texts: Vec<&str> = s.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, ["A can only be L.", "B can only be M", "C can only be N"]);
        assert_eq!(s[1].span, Span::new(1, 18, 33));
        assert_eq!(s[2].span, Span::new(2, 3, 18));
    }

    #[test]
    fn split_keeps_decimal_together() {
        let s = split_sentences("For A, the time spent in L cannot be more than 2.5.");
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn tokenize_init_single() {
        let t = tokenize_str("A can only be L.").unwrap();
        assert_eq!(
            kinds(&t),
            [
                (TokenKind::Identifier, "A"),
                (TokenKind::Keyword, "can"),
                (TokenKind::Keyword, "only"),
                (TokenKind::Keyword, "be"),
                (TokenKind::Identifier, "L"),
            ]
        );
    }

    #[test]
    fn tokenize_time_constraint() {
        let t = tokenize_str("more than or equal to 10").unwrap();
        assert_eq!(
            kinds(&t),
            [
                (TokenKind::Keyword, "more"),
                (TokenKind::Keyword, "than"),
                (TokenKind::Keyword, "or"),
                (TokenKind::Keyword, "equal"),
                (TokenKind::Keyword, "to"),
                (TokenKind::Number, "10"),
            ]
        );
    }

    #[test]
    fn tokenize_illegal_char() {
        let err = tokenize_str("Train can fly$").unwrap_err();
        assert_eq!(err, LexError::IllegalChar { ch: '$', span: Span::new(1, 14, 15) });
    }

    #[test]
    fn keywords_case_insensitive_identifiers_not() {
        let t = tokenize_str("If Stop is received, then Train CAN go").unwrap();
        assert!(t[0].is_keyword("if"));
        assert_eq!(t[1].text, "Stop");
        assert!(t[4].is_keyword("then"));
        assert!(t[6].is_keyword("can"));
        assert_eq!(t[6].raw, "CAN");
    }

    #[test]
    fn commas_dropped_spans_absolute() {
        let sentence = Sentence { text: "For Train, x".into(), span: Span::new(4, 10, 22) };
        let t = tokenize(&sentence).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[1].span, Span::new(4, 14, 19));
        assert_eq!(t[2].span, Span::new(4, 21, 22));
    }

    #[test]
    fn rational_is_diagnosed() {
        let err = tokenize_str("cannot be more than 2.5").unwrap_err();
        assert!(matches!(err, LexError::Rational { ref text, .. } if text == "2.5"));
        let d = err.to_diagnostic(&Sentence::detached("cannot be more than 2.5"));
        assert_eq!(d.code, Code::RationalNumber);
    }

    #[test]
    fn malformed_words() {
        assert!(matches!(tokenize_str("10s"), Err(LexError::MalformedWord { .. })));
        assert!(matches!(tokenize_str("_x"), Err(LexError::MalformedWord { .. })));
        assert!(matches!(tokenize_str("Zürich"), Err(LexError::IllegalChar { ch: 'ü', .. })));
    }

    #[test]
    fn inner_period_is_illegal() {
        assert!(matches!(tokenize_str("A. B"), Err(LexError::IllegalChar { ch: '.', .. })));
    }
}
