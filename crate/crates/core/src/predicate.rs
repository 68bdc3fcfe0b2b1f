//! State predicates: conjunctions of linear constraints over place counts,
//! e.g. `CLA=2 & CA=2` or `LA+2*PU<=3`, or an explicit node set.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::net::Marking;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredicateError {
    #[error("column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Eq,
    Le,
    Ge,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Eq => "=",
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
        })
    }
}

/// `sum(coef * q(place)) cmp constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, i64)>,
    pub cmp: Comparator,
    pub constant: i64,
}

impl LinearConstraint {
    pub fn holds(&self, q: &Marking) -> bool {
        let lhs: i128 = self
            .terms
            .iter()
            .map(|&(p, a)| a as i128 * q.get(p) as i128)
            .sum();
        let rhs = self.constant as i128;
        match self.cmp {
            Comparator::Eq => lhs == rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatePredicate {
    /// Conjunction; the empty conjunction is `true`.
    Linear(Vec<LinearConstraint>),
    /// Explicit graph node indices.
    Nodes(BTreeSet<usize>),
}

impl StatePredicate {
    pub fn always() -> Self {
        StatePredicate::Linear(Vec::new())
    }

    /// Conjunction of two linear predicates.
    pub fn and(&self, other: &StatePredicate) -> Option<StatePredicate> {
        match (self, other) {
            (StatePredicate::Linear(a), StatePredicate::Linear(b)) => {
                Some(StatePredicate::Linear(a.iter().chain(b).cloned().collect()))
            }
            (StatePredicate::Nodes(a), StatePredicate::Nodes(b)) => {
                Some(StatePredicate::Nodes(a.intersection(b).copied().collect()))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Op(&'static str),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, PredicateError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| PredicateError::Syntax {
                column: col,
                message: format!("integer `{s}` out of range"),
            })?;
            out.push((Tok::Int(v), col));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let op = match (c, two.as_str()) {
                (_, "<=") => "<=",
                (_, ">=") => ">=",
                ('=', _) => "=",
                ('+', _) => "+",
                ('-', _) => "-",
                ('*', _) => "*",
                ('&', _) => "&",
                _ => {
                    return Err(PredicateError::Syntax {
                        column: col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            i += op.len();
            out.push((Tok::Op(op), col));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    places: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn error(&self, message: &str) -> PredicateError {
        PredicateError::Syntax {
            column: self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col),
            message: message.to_string(),
        }
    }

    /// Linear side: returns (per-place coefficients, constant).
    fn side(&mut self) -> Result<(Vec<i64>, i64), PredicateError> {
        let mut coefs = vec![0i64; self.places.len()];
        let mut constant = 0i64;
        let mut sign = 1;
        if self.peek() == Some(&Tok::Op("-")) {
            self.pos += 1;
            sign = -1;
        }
        loop {
            match self.peek().cloned() {
                Some(Tok::Int(v)) => {
                    self.pos += 1;
                    if self.peek() == Some(&Tok::Op("*")) {
                        self.pos += 1;
                        let p = self.place()?;
                        coefs[p] += sign * v;
                    } else {
                        constant += sign * v;
                    }
                }
                Some(Tok::Ident(_)) => {
                    let p = self.place()?;
                    coefs[p] += sign;
                }
                _ => return Err(self.error("expected place or integer")),
            }
            sign = match self.peek() {
                Some(Tok::Op("+")) => 1,
                Some(Tok::Op("-")) => -1,
                _ => break,
            };
            self.pos += 1;
        }
        Ok((coefs, constant))
    }

    fn place(&mut self) -> Result<usize, PredicateError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.places
                    .iter()
                    .position(|p| *p == name)
                    .ok_or(PredicateError::UnknownPlace(name))
            }
            _ => Err(self.error("expected place name")),
        }
    }

    fn constraint(&mut self) -> Result<LinearConstraint, PredicateError> {
        let (lhs, lc) = self.side()?;
        let cmp = match self.peek() {
            Some(Tok::Op("=")) => Comparator::Eq,
            Some(Tok::Op("<=")) => Comparator::Le,
            Some(Tok::Op(">=")) => Comparator::Ge,
            _ => return Err(self.error("expected `=`, `<=` or `>=`")),
        };
        self.pos += 1;
        let (rhs, rc) = self.side()?;
        let terms = lhs
            .iter()
            .zip(&rhs)
            .enumerate()
            .filter_map(|(p, (a, b))| (a != b).then_some((p, a - b)))
            .collect();
        Ok(LinearConstraint {
            terms,
            cmp,
            constant: rc - lc,
        })
    }
}

/// Parses `constraint (& constraint)*` against the given place names. The
/// empty string and `true` denote the always-true predicate.
pub fn parse_predicate(text: &str, places: &[String]) -> Result<StatePredicate, PredicateError> {
    let toks = tokenize(text)?;
    if toks.is_empty() || (toks.len() == 1 && toks[0].0 == Tok::Ident("true".into())) {
        return Ok(StatePredicate::always());
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end_col: text.chars().count() + 1,
        places,
    };
    let mut constraints = vec![parser.constraint()?];
    while parser.peek() == Some(&Tok::Op("&")) {
        parser.pos += 1;
        constraints.push(parser.constraint()?);
    }
    if parser.pos < parser.toks.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(StatePredicate::Linear(constraints))
}
