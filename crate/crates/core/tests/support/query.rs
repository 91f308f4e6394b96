//! Minimal parser for UPPAAL verifier queries, used to check that rendered
//! queries read back as the intended tree. Precedence follows the UPPAAL
//! manual: `not` binds tighter than `and`, which binds tighter than `or`,
//! which binds tighter than `imply`.

use nlta::spec_compiler::{Query, StateExpr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Loc(String, String),
    Cmp(String, String, String, u32),
    Deadlock,
    Not(Box<Expr>),
    Bin(String, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Path(String, Expr),
    LeadsTo(Expr, Expr),
}

fn lex(s: &str) -> Vec<String> {
    let mut raw = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            raw.push(chars[start..i].iter().collect::<String>());
        } else {
            let rest: String = chars[i..].iter().collect();
            let tok = ["-->", "<=", ">=", "=="]
                .into_iter()
                .find(|t| rest.starts_with(t))
                .map(String::from)
                .unwrap_or_else(|| c.to_string());
            i += tok.chars().count();
            raw.push(tok);
        }
    }
    // `A[]`, `E<>` and friends arrive as three tokens.
    let mut out: Vec<String> = Vec::new();
    let mut j = 0;
    while j < raw.len() {
        let pair = raw.get(j + 1).zip(raw.get(j + 2));
        let quant = matches!(raw[j].as_str(), "A" | "E")
            && matches!(pair, Some((a, b)) if (a == "[" && b == "]") || (a == "<" && b == ">"));
        if quant {
            out.push(format!("{}{}{}", raw[j], raw[j + 1], raw[j + 2]));
            j += 3;
        } else {
            out.push(raw[j].clone());
            j += 1;
        }
    }
    out
}

struct P {
    toks: Vec<String>,
    pos: usize,
}

impl P {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(String::as_str)
    }

    fn next(&mut self) -> Result<String, String> {
        let t = self.toks.get(self.pos).cloned().ok_or("unexpected end")?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: &str) -> Result<(), String> {
        let got = self.next()?;
        if got == t {
            Ok(())
        } else {
            Err(format!("expected {t}, found {got}"))
        }
    }

    fn binary(&mut self, level: usize) -> Result<Expr, String> {
        const OPS: [&str; 3] = ["imply", "or", "and"];
        if level == OPS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while self.peek() == Some(OPS[level]) {
            self.pos += 1;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Bin(OPS[level].to_string(), Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        match self.peek() {
            Some("not") => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Some("(") => {
                self.pos += 1;
                let e = self.binary(0)?;
                self.expect(")")?;
                Ok(e)
            }
            Some("deadlock") => {
                self.pos += 1;
                Ok(Expr::Deadlock)
            }
            _ => {
                let a = self.next()?;
                self.expect(".")?;
                let b = self.next()?;
                match self.peek() {
                    Some(op @ ("<" | "<=" | ">" | ">=" | "==")) => {
                        let op = op.to_string();
                        self.pos += 1;
                        let n = self.next()?.parse().map_err(|_| "bad number".to_string())?;
                        Ok(Expr::Cmp(a, b, op, n))
                    }
                    _ => Ok(Expr::Loc(a, b)),
                }
            }
        }
    }
}

pub fn parse(query: &str) -> Result<Tree, String> {
    let mut p = P { toks: lex(query), pos: 0 };
    let tree = match p.peek() {
        Some(q @ ("A[]" | "A<>" | "E[]" | "E<>")) => {
            let q = q.to_string();
            p.pos += 1;
            Tree::Path(q, p.binary(0)?)
        }
        _ => {
            let lhs = p.binary(0)?;
            p.expect("-->")?;
            Tree::LeadsTo(lhs, p.binary(0)?)
        }
    };
    if p.pos != p.toks.len() {
        return Err(format!("trailing tokens after {}", p.pos));
    }
    Ok(tree)
}

fn fold(op: &str, mut items: Vec<Expr>) -> Expr {
    let first = items.remove(0);
    items
        .into_iter()
        .fold(first, |acc, e| Expr::Bin(op.to_string(), Box::new(acc), Box::new(e)))
}

/// The tree a correct rendering of `expr` must parse to.
pub fn expected(expr: &StateExpr) -> Expr {
    match expr {
        StateExpr::Location { automaton, locations, holds } => {
            let refs = locations.iter().map(|l| Expr::Loc(automaton.clone(), l.clone())).collect();
            let e = fold("or", refs);
            if *holds {
                e
            } else {
                Expr::Not(Box::new(e))
            }
        }
        StateExpr::Clock { automaton, clock, bounds } => {
            let cmps = bounds
                .iter()
                .map(|(r, n)| Expr::Cmp(automaton.clone(), clock.to_string(), r.symbol().to_string(), *n))
                .collect();
            fold("and", cmps)
        }
        StateExpr::Binary { lhs, op, rhs } => {
            Expr::Bin(op.keyword().to_string(), Box::new(expected(lhs)), Box::new(expected(rhs)))
        }
    }
}

pub fn expected_query(q: &Query) -> Tree {
    match q {
        Query::Path { quantifier, formula } => Tree::Path(quantifier.symbol().to_string(), expected(formula)),
        Query::LeadsTo(a, b) => Tree::LeadsTo(expected(a), expected(b)),
        Query::DeadlockFree => Tree::Path("A[]".into(), Expr::Not(Box::new(Expr::Deadlock))),
    }
}
