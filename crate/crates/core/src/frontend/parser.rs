//! Recursive-descent parser for description and specification sentences.
//!
//! Both grammars are LL with at most four tokens of lookahead (the
//! "for A L shall" shorthand), so no backtracking is needed.
//!
//! Names are resolved by grammar position only. A keyword may still be used
//! as a name (the channel `Go` collides with the keyword `go`): in a position
//! that admits exactly one name any word is taken; inside a name list a
//! keyword is taken when it is capitalized and cannot end the list there.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::lexer::{Token, TokenKind};
use crate::diagnostics::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Never empty.
    pub expected: BTreeSet<String>,
    pub found: Option<String>,
    pub span: Span,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let expected: Vec<&str> = self.expected.iter().map(String::as_str).collect();
        if expected.len() == 1 {
            write!(f, "expected {}", expected[0])?;
        } else {
            write!(f, "expected one of {}", expected.join(", "))?;
        }
        match &self.found {
            Some(found) => write!(f, ", found {found}"),
            None => f.write_str(", found end of sentence"),
        }
    }
}

type PResult<T> = Result<T, ParseError>;

const NAME: &str = "name";
const NUMBER: &str = "number";
const END: &str = "end of sentence";

pub fn parse_description(tokens: &[Token]) -> PResult<Description> {
    Parser::new(tokens).description()
}

pub fn parse_specification(tokens: &[Token]) -> PResult<Specification> {
    Parser::new(tokens).specification()
}

/// Same as [`parse_description`], with errors on an empty token list placed
/// at `fallback`.
pub fn parse_description_at(tokens: &[Token], fallback: Span) -> PResult<Description> {
    Parser::new(tokens).with_fallback(fallback).description()
}

pub fn parse_specification_at(tokens: &[Token], fallback: Span) -> PResult<Specification> {
    Parser::new(tokens).with_fallback(fallback).specification()
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    fallback: Span,
}

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token]) -> Self {
        Parser {
            tokens,
            pos: 0,
            fallback: Span::new(1, 1, 1),
        }
    }

    fn with_fallback(mut self, span: Span) -> Self {
        self.fallback = span;
        self
    }

    fn peek_at(&self, n: usize) -> Option<&'a Token> {
        self.tokens.get(self.pos + n)
    }

    fn at(&self, kw: &str) -> bool {
        self.peek_at(0).is_some_and(|t| t.is_keyword(kw))
    }

    fn at_offset(&self, n: usize, kw: &str) -> bool {
        self.peek_at(n).is_some_and(|t| t.is_keyword(kw))
    }

    fn error<I, S>(&self, expected: I) -> ParseError
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let expected: BTreeSet<String> = expected.into_iter().map(Into::into).collect();
        debug_assert!(!expected.is_empty());
        match self.peek_at(0) {
            Some(tok) => ParseError {
                expected,
                found: Some(tok.to_string()),
                span: tok.span,
            },
            None => ParseError {
                expected,
                found: None,
                span: self.tokens.last().map(|t| t.span).unwrap_or(self.fallback),
            },
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<&'a Token> {
        match self.peek_at(0) {
            Some(tok) if tok.is_keyword(kw) => {
                self.pos += 1;
                Ok(tok)
            }
            _ => Err(self.error([format!("`{kw}`")])),
        }
    }

    fn keywords(&mut self, kws: &[&str]) -> PResult<()> {
        for kw in kws {
            self.keyword(kw)?;
        }
        Ok(())
    }

    fn name(&mut self) -> PResult<Name> {
        match self.peek_at(0) {
            Some(tok) if tok.is_word() => {
                self.pos += 1;
                Ok(Name {
                    text: tok.raw.clone(),
                    span: tok.span,
                })
            }
            _ => Err(self.error([NAME])),
        }
    }

    /// One or more names. `follow` lists the keywords that may end the list.
    fn names(&mut self, follow: &[&str]) -> PResult<Vec<Name>> {
        let mut out = vec![self.name()?];
        while let Some(tok) = self.peek_at(0) {
            let takes = match tok.kind {
                TokenKind::Identifier => true,
                TokenKind::Keyword => {
                    !follow.contains(&tok.text.as_str())
                        && tok.raw.starts_with(|c: char| c.is_ascii_uppercase())
                }
                _ => false,
            };
            if !takes {
                break;
            }
            out.push(self.name()?);
        }
        Ok(out)
    }

    fn number(&mut self) -> PResult<u32> {
        match self.peek_at(0) {
            Some(tok) if tok.kind == TokenKind::Number => match tok.text.parse::<u32>() {
                Ok(n) => {
                    self.pos += 1;
                    Ok(n)
                }
                Err(_) => Err(ParseError {
                    expected: [format!("{NUMBER} below {}", u32::MAX)].into(),
                    found: Some(tok.to_string()),
                    span: tok.span,
                }),
            },
            _ => Err(self.error([NUMBER])),
        }
    }

    fn end(&mut self, alternatives: &[&str]) -> PResult<()> {
        if self.peek_at(0).is_none() {
            return Ok(());
        }
        let mut expected: Vec<String> = alternatives.iter().map(|k| format!("`{k}`")).collect();
        expected.push(END.to_string());
        Err(self.error(expected))
    }

    // ---- description grammar ----

    fn description(&mut self) -> PResult<Description> {
        let desc = if self.at("for") {
            Description::Invariant(self.invariant()?)
        } else if self.at("if") {
            Description::Transition(self.conditional()?)
        } else if self.peek_at(0).is_some_and(Token::is_word) {
            self.name_led()?
        } else {
            return Err(self.error([NAME, "`for`", "`if`"]));
        };
        self.end(&[])?;
        Ok(desc)
    }

    fn name_led(&mut self) -> PResult<Description> {
        let automaton = self.name()?;
        self.keyword("can")?;
        if self.at("only") {
            self.keywords(&["only", "be"])?;
            let loc = self.name()?;
            let d = InitDecl {
                automaton,
                locations: vec![loc.clone()],
                initial: loc,
                form: InitForm::Single,
            };
            return Ok(Description::Init(d));
        }
        if self.at("be") {
            self.keyword("be")?;
            let locations = self.names(&["and"])?;
            self.keywords(&["and", "it", "is", "initially"])?;
            let initial = self.name()?;
            let d = InitDecl {
                automaton,
                locations,
                initial,
                form: InitForm::Multiple,
            };
            return Ok(Description::Init(d));
        }
        let (kind, channel) = if self.at("send") {
            self.keyword("send")?;
            let ch = self.name()?;
            self.keyword("and")?;
            (TransitionKind::Sync, Some(ch))
        } else if self.at("go") {
            (TransitionKind::Simple, None)
        } else {
            return Err(self.error(["`only`", "`be`", "`send`", "`go`"]));
        };
        let (sources, targets) = self.go()?;
        let t = TransitionDecl {
            kind,
            automaton,
            channel,
            conditions: Vec::new(),
            sources,
            targets,
        };
        Ok(Description::Transition(t))
    }

    fn go(&mut self) -> PResult<(Vec<Name>, Vec<Name>)> {
        self.keywords(&["go", "from"])?;
        let sources = self.names(&["to"])?;
        self.keyword("to")?;
        let targets = self.names(&[])?;
        Ok((sources, targets))
    }

    fn invariant(&mut self) -> PResult<InvariantDecl> {
        self.keyword("for")?;
        let automaton = self.name()?;
        let short = self.at("the")
            && self.at_offset(1, "time")
            && self.at_offset(2, "spent")
            && self.at_offset(3, "in");
        if short {
            self.keywords(&["the", "time", "spent", "in"])?;
            let location = self.name()?;
            self.keywords(&["cannot", "be"])?;
            let bounds = self.lower_bounds()?;
            let condition = TimeCondition {
                mode: Mode::Entering,
                anchor: location.clone(),
                bounds,
            };
            return Ok(InvariantDecl {
                automaton,
                location,
                form: InvariantForm::Short,
                conditions: vec![condition],
            });
        }
        let mut conditions = Vec::new();
        loop {
            conditions.push(self.time_condition(&["cannot", "be"], Self::lower_bounds)?);
            if self.at("and") && self.at_offset(1, "the") {
                self.pos += 1;
                continue;
            }
            break;
        }
        if !self.at("in") {
            return Err(self.error(["`in`", "`and`"]));
        }
        self.keyword("in")?;
        let location = self.name()?;
        Ok(InvariantDecl {
            automaton,
            location,
            form: InvariantForm::Long,
            conditions,
        })
    }

    fn conditional(&mut self) -> PResult<TransitionDecl> {
        self.keyword("if")?;
        if self.at("the") {
            let conditions = self.time_conditions()?;
            self.keyword("then")?;
            let automaton = self.name()?;
            self.keyword("can")?;
            let (kind, channel) = if self.at("send") {
                self.keyword("send")?;
                let ch = self.name()?;
                self.keyword("and")?;
                (TransitionKind::TimeCondSync, Some(ch))
            } else if self.at("go") {
                (TransitionKind::TimeCond, None)
            } else {
                return Err(self.error(["`send`", "`go`"]));
            };
            let (sources, targets) = self.go()?;
            return Ok(TransitionDecl {
                kind,
                automaton,
                channel,
                conditions,
                sources,
                targets,
            });
        }
        let channel = self.name().map_err(|_| self.error([NAME, "`the`"]))?;
        self.keywords(&["is", "received"])?;
        let (kind, conditions) = if self.at("and") {
            self.keyword("and")?;
            (TransitionKind::SyncTimeCond, self.time_conditions()?)
        } else if self.at("then") {
            (TransitionKind::SyncCond, Vec::new())
        } else {
            return Err(self.error(["`and`", "`then`"]));
        };
        self.keyword("then")?;
        let automaton = self.name()?;
        self.keyword("can")?;
        let (sources, targets) = self.go()?;
        Ok(TransitionDecl {
            kind,
            automaton,
            channel: Some(channel),
            conditions,
            sources,
            targets,
        })
    }

    fn time_conditions(&mut self) -> PResult<Vec<TimeCondition>> {
        let mut out = Vec::new();
        loop {
            out.push(self.time_condition(&["is"], Self::bounds)?);
            if self.at("and") && self.at_offset(1, "the") {
                self.pos += 1;
                continue;
            }
            return Ok(out);
        }
    }

    /// "the time spent after entering|leaving L <verb> <bounds>"
    fn time_condition(
        &mut self,
        verb: &[&str],
        bounds: fn(&mut Self) -> PResult<Vec<Bound>>,
    ) -> PResult<TimeCondition> {
        self.keywords(&["the", "time", "spent", "after"])?;
        let mode = if self.at("entering") {
            Mode::Entering
        } else if self.at("leaving") {
            Mode::Leaving
        } else {
            return Err(self.error(["`entering`", "`leaving`"]));
        };
        self.pos += 1;
        let anchor = self.name()?;
        self.keywords(verb)?;
        let bounds = bounds(self)?;
        Ok(TimeCondition { mode, anchor, bounds })
    }

    /// Time constraint: conjunction of "more than", "less than" and "equal to".
    fn bounds(&mut self) -> PResult<Vec<Bound>> {
        let mut out = vec![self.bound()?];
        while self.at("and")
            && (self.at_offset(1, "more") || self.at_offset(1, "less") || self.at_offset(1, "equal"))
        {
            self.pos += 1;
            out.push(self.bound()?);
        }
        Ok(out)
    }

    fn bound(&mut self) -> PResult<Bound> {
        let relation = if self.at("more") || self.at("less") {
            let more = self.at("more");
            self.pos += 1;
            self.keyword("than")?;
            let inclusive = self.or_equal_to()?;
            match (more, inclusive) {
                (true, false) => Relation::Gt,
                (true, true) => Relation::Ge,
                (false, false) => Relation::Lt,
                (false, true) => Relation::Le,
            }
        } else if self.at("equal") {
            self.keywords(&["equal", "to"])?;
            Relation::Eq
        } else {
            return Err(self.error(["`more`", "`less`", "`equal`"]));
        };
        let value = self.number()?;
        Ok(Bound { relation, value })
    }

    /// Invariant constraint: conjunction of "more than [or equal to] N".
    fn lower_bounds(&mut self) -> PResult<Vec<Bound>> {
        let mut out = Vec::new();
        loop {
            self.keywords(&["more", "than"])?;
            let relation = if self.or_equal_to()? { Relation::Ge } else { Relation::Gt };
            let value = self.number()?;
            out.push(Bound { relation, value });
            if self.at("and") && self.at_offset(1, "more") {
                self.pos += 1;
                continue;
            }
            return Ok(out);
        }
    }

    fn or_equal_to(&mut self) -> PResult<bool> {
        if self.at("or") {
            self.keywords(&["or", "equal", "to"])?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    // ---- specification grammar ----

    fn specification(&mut self) -> PResult<Specification> {
        let spec = if self.at("it") {
            self.keyword("it")?;
            let quantifier = self.path_quantifier()?;
            self.keywords(&["be", "the", "case", "that"])?;
            let formula = self.state_formula()?;
            Specification::General { quantifier, formula }
        } else if self.at("deadlock") {
            self.keywords(&["deadlock", "never", "occurs"])?;
            Specification::Deadlock
        } else if self.at("for")
            && self.peek_at(1).is_some_and(Token::is_word)
            && self.peek_at(2).is_some_and(Token::is_word)
            && self.at_offset(3, "shall")
        {
            self.keyword("for")?;
            let automaton = self.name()?;
            let location = self.name()?;
            self.keywords(&["shall", "hold", "within", "every"])?;
            let bound = self.number()?;
            Specification::Shorthand { automaton, location, bound }
        } else if self.at("for") {
            let lhs = self.state_formula()?;
            if !self.at("leads") {
                return Err(self.error(["`leads`", "`and`", "`or`", "`implies`"]));
            }
            self.keywords(&["leads", "to"])?;
            let rhs = self.state_formula()?;
            Specification::LeadsTo(lhs, rhs)
        } else {
            return Err(self.error(["`it`", "`deadlock`", "`for`"]));
        };
        self.end(&[])?;
        Ok(spec)
    }

    fn path_quantifier(&mut self) -> PResult<PathQuantifier> {
        let shall = if self.at("shall") {
            true
        } else if self.at("might") {
            false
        } else {
            return Err(self.error(["`shall`", "`might`"]));
        };
        self.pos += 1;
        let always = if self.at("always") {
            true
        } else if self.at("eventually") {
            false
        } else {
            return Err(self.error(["`always`", "`eventually`"]));
        };
        self.pos += 1;
        Ok(match (shall, always) {
            (true, true) => PathQuantifier::ShallAlways,
            (true, false) => PathQuantifier::ShallEventually,
            (false, true) => PathQuantifier::MightAlways,
            (false, false) => PathQuantifier::MightEventually,
        })
    }

    fn state_formula(&mut self) -> PResult<StateFormula> {
        let lhs = self.spec_atom()?;
        let op = if self.at("and") {
            Connective::And
        } else if self.at("or") {
            Connective::Or
        } else if self.at("implies") {
            Connective::Implies
        } else {
            return Ok(StateFormula::Atom(lhs));
        };
        self.pos += 1;
        let rhs = self.state_formula()?;
        Ok(StateFormula::Chain { lhs, op, rhs: Box::new(rhs) })
    }

    fn spec_atom(&mut self) -> PResult<SpecAtom> {
        self.keyword("for")?;
        let automaton = self.name()?;
        if self.at("the") {
            let condition = self.time_condition(&["is"], Self::bounds)?;
            return Ok(SpecAtom::Time { automaton, condition });
        }
        let locations = self.names(&["holds", "does", "shall"])?;
        let holds = if self.at("holds") {
            self.pos += 1;
            true
        } else if self.at("does") {
            self.keywords(&["does", "not", "hold"])?;
            false
        } else {
            return Err(self.error(["`holds`", "`does`", NAME]));
        };
        Ok(SpecAtom::Location { automaton, locations, holds })
    }
}
