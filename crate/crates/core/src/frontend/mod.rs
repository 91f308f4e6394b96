//! Sentence splitting, tokenizing and parsing.

pub mod ast;
pub mod lexer;
pub mod parser;

pub use ast::*;
pub use lexer::{split_sentences, tokenize, tokenize_str, LexError, Sentence, Token, TokenKind};
pub use parser::{parse_description, parse_specification, ParseError};

use crate::diagnostics::{Code, Diagnostic};

/// A parsed tree together with the sentence it came from.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub ast: T,
    pub sentence: Sentence,
}

impl ParseError {
    pub fn to_diagnostic(&self, sentence: &Sentence) -> Diagnostic {
        Diagnostic::error(Code::ParseError, self.to_string(), sentence.text.clone(), self.span)
    }
}

pub fn parse_description_sentence(sentence: &Sentence) -> Result<Description, Diagnostic> {
    let tokens = tokenize(sentence).map_err(|e| e.to_diagnostic(sentence))?;
    parser::parse_description_at(&tokens, sentence.span).map_err(|e| e.to_diagnostic(sentence))
}

pub fn parse_specification_sentence(sentence: &Sentence) -> Result<Specification, Diagnostic> {
    let tokens = tokenize(sentence).map_err(|e| e.to_diagnostic(sentence))?;
    parser::parse_specification_at(&tokens, sentence.span).map_err(|e| e.to_diagnostic(sentence))
}

/// Parses every description sentence in `text`, collecting one diagnostic per
/// rejected sentence.
pub fn parse_descriptions(text: &str) -> (Vec<Parsed<Description>>, Vec<Diagnostic>) {
    parse_all(text, parse_description_sentence)
}

pub fn parse_specifications(text: &str) -> (Vec<Parsed<Specification>>, Vec<Diagnostic>) {
    parse_all(text, parse_specification_sentence)
}

fn parse_all<T>(
    text: &str,
    parse: fn(&Sentence) -> Result<T, Diagnostic>,
) -> (Vec<Parsed<T>>, Vec<Diagnostic>) {
    let mut parsed = Vec::new();
    let mut diagnostics = Vec::new();
    for sentence in split_sentences(text) {
        match parse(&sentence) {
            Ok(ast) => parsed.push(Parsed { ast, sentence }),
            Err(d) => diagnostics.push(d),
        }
    }
    (parsed, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::Span;

    #[test]
    fn diagnostics_carry_file_positions() {
        let text = "Gate can be Free Occ and it is initially Free.\n\nTrain go to Cross.\n";
        let (parsed, diags) = parse_descriptions(text);
        assert_eq!(parsed.len(), 1);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, Code::ParseError);
        assert_eq!(diags[0].span, Span::new(3, 7, 9));
        assert_eq!(diags[0].sentence, "Train go to Cross.");
    }

    #[test]
    fn lex_errors_become_diagnostics() {
        let (_, diags) = parse_descriptions("Train can fly$");
        assert_eq!(diags[0].code, Code::LexError);
        assert_eq!(diags[0].span, Span::new(1, 14, 15));
    }
}
