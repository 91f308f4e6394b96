//! Positioned diagnostics shared by every compiler stage.
//!
//! A diagnostic always points back at the sentence that caused it, so the
//! human form can be read next to the input file and the structured form can
//! be consumed line by line by editors or scripts.

use std::fmt;

use serde::Serialize;

/// A source position: 1-based line, 1-based start column and exclusive end
/// column, all counted in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Span {
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl Span {
    pub fn new(line: usize, col_start: usize, col_end: usize) -> Self {
        Span {
            line,
            col_start,
            col_end,
        }
    }

    /// Smallest span covering both `self` and `other` (same line assumed).
    pub fn to(self, other: Span) -> Span {
        Span {
            line: self.line,
            col_start: self.col_start.min(other.col_start),
            col_end: self.col_end.max(other.col_end),
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.line == other.line
            && self.col_start <= other.col_start
            && other.col_end <= self.col_end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// Closed set of diagnostic categories across all stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Code {
    LexError,
    RationalNumber,
    ParseError,
    MissingInit,
    DuplicateInit,
    DuplicateLocation,
    ConflictingInitial,
    UnknownLocation,
    UnknownAutomaton,
    UnknownClock,
    UnknownChannel,
    DuplicateName,
    AnchorMismatch,
    UnreachableLocation,
    InvalidIdentifier,
    ReductionUnsound,
}

impl Code {
    pub fn as_str(&self) -> &'static str {
        match self {
            Code::LexError => "LexError",
            Code::RationalNumber => "RationalNumber",
            Code::ParseError => "ParseError",
            Code::MissingInit => "MissingInit",
            Code::DuplicateInit => "DuplicateInit",
            Code::DuplicateLocation => "DuplicateLocation",
            Code::ConflictingInitial => "ConflictingInitial",
            Code::UnknownLocation => "UnknownLocation",
            Code::UnknownAutomaton => "UnknownAutomaton",
            Code::UnknownClock => "UnknownClock",
            Code::UnknownChannel => "UnknownChannel",
            Code::DuplicateName => "DuplicateName",
            Code::AnchorMismatch => "AnchorMismatch",
            Code::UnreachableLocation => "UnreachableLocation",
            Code::InvalidIdentifier => "InvalidIdentifier",
            Code::ReductionUnsound => "ReductionUnsound",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub sentence: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>, sentence: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            sentence: sentence.into(),
            span,
        }
    }

    pub fn warning(code: Code, message: impl Into<String>, sentence: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            sentence: sentence.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}] {}:{} {}",
            self.severity, self.code, self.span.line, self.span.col_start, self.message
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Structured,
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// Renders diagnostics with errors first, each group ordered by position.
pub fn render(diagnostics: &[Diagnostic], format: Format) -> String {
    let mut ordered: Vec<&Diagnostic> = diagnostics.iter().collect();
    ordered.sort_by_key(|d| (d.severity, d.span.line, d.span.col_start));
    let mut out = String::new();
    for d in ordered {
        match format {
            Format::Human => out.push_str(&d.to_string()),
            Format::Structured => {
                out.push_str(&serde_json::to_string(d).expect("diagnostic serializes"))
            }
        }
        out.push('\n');
    }
    out
}
