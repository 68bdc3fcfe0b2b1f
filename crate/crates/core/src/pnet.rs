//! The line-oriented `.pnet` text format.
//!
//! ```text
//! # tiny net, parameterized by k
//! net TN
//! param k = 2
//! place A init 3
//! place B init 0
//! trans t1 : in A:k , out B:1
//! trans t2 : in A:1 B:1 , out A:k+1
//! ```
//!
//! Weights and initial markings are affine expressions over the declared
//! parameters (`3`, `k`, `2*k+1`, `x-y`). They are evaluated while parsing,
//! so the resulting [`PetriNet`] is fully concrete. An empty arc list is
//! written `-`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::net::{Marking, NetError, PetriNet};

/// `constant + sum(coefficient * parameter)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AffineExpr {
    pub constant: i64,
    pub terms: BTreeMap<String, i64>,
}

impl AffineExpr {
    pub fn constant(c: i64) -> Self {
        AffineExpr {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn eval(&self, bindings: &BTreeMap<String, i64>) -> Result<i64, NetError> {
        self.terms.iter().try_fold(self.constant, |acc, (name, &coef)| {
            let value = bindings
                .get(name)
                .ok_or_else(|| NetError::UnboundParameter(name.clone()))?;
            coef.checked_mul(*value)
                .and_then(|v| acc.checked_add(v))
                .ok_or(NetError::Overflow)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> NetError {
    NetError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn tokenize(line_no: usize, line: &str) -> Result<Vec<Token>, NetError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        } else if c.is_whitespace() {
            i += 1;
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse()
                .map_err(|_| syntax(line_no, col, format!("integer `{text}` out of range")))?;
            out.push(Token {
                tok: Tok::Int(value),
                col,
            });
        } else if ":,=+-*".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
        } else {
            return Err(syntax(line_no, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    line: usize,
    line_len: usize,
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + offset).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.col)
            .unwrap_or(self.line_len + 1)
    }

    fn error(&self, message: impl Into<String>) -> NetError {
        syntax(self.line, self.col(), message)
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), NetError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let col = self.col();
                self.pos += 1;
                Ok((s.clone(), col))
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), NetError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{kw}`"))),
        }
    }

    fn sym(&mut self, c: char) -> Result<(), NetError> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn int(&mut self) -> Result<i64, NetError> {
        let negative = if self.peek() == Some(&Tok::Sym('-')) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(if negative { -v } else { *v })
            }
            _ => Err(self.error("expected integer")),
        }
    }

    fn end(&self) -> Result<(), NetError> {
        if self.pos < self.toks.len() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn term(&mut self, sign: i64, expr: &mut AffineExpr) -> Result<(), NetError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                let coef = sign * v;
                if self.peek() == Some(&Tok::Sym('*')) {
                    self.pos += 1;
                    let (name, _) = self.ident("parameter name")?;
                    *expr.terms.entry(name).or_insert(0) += coef;
                } else {
                    expr.constant += coef;
                }
                Ok(())
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                *expr.terms.entry(name.clone()).or_insert(0) += sign;
                Ok(())
            }
            _ => Err(self.error("expected integer or parameter")),
        }
    }

    fn affine(&mut self) -> Result<AffineExpr, NetError> {
        let mut expr = AffineExpr::default();
        let mut sign = 1;
        if self.peek() == Some(&Tok::Sym('-')) {
            self.pos += 1;
            sign = -1;
        }
        self.term(sign, &mut expr)?;
        loop {
            let sign = match self.peek() {
                Some(Tok::Sym('+')) => 1,
                Some(Tok::Sym('-')) => -1,
                _ => break,
            };
            self.pos += 1;
            self.term(sign, &mut expr)?;
        }
        Ok(expr)
    }

    /// `-` or one or more `place:affine` arcs.
    fn arcs(&mut self) -> Result<Vec<(String, usize, AffineExpr)>, NetError> {
        if self.peek() == Some(&Tok::Sym('-')) {
            self.pos += 1;
            return Ok(Vec::new());
        }
        let mut arcs = Vec::new();
        loop {
            let (place, col) = self.ident("place name")?;
            self.sym(':')?;
            arcs.push((place, col, self.affine()?));
            let next_is_arc = matches!(self.peek(), Some(Tok::Ident(_)))
                && self.peek_at(1) == Some(&Tok::Sym(':'));
            if !next_is_arc {
                break;
            }
        }
        Ok(arcs)
    }
}

struct PlaceDecl {
    name: String,
    line: usize,
    init: AffineExpr,
}

struct TransDecl {
    name: String,
    line: usize,
    input: Vec<(String, usize, AffineExpr)>,
    output: Vec<(String, usize, AffineExpr)>,
}

/// Parses a `.pnet` document. `bindings` override declared parameter
/// defaults and must only name declared parameters.
pub fn parse_net(
    text: &str,
    bindings: &BTreeMap<String, i64>,
) -> Result<(PetriNet, Marking), NetError> {
    let mut name: Option<String> = None;
    let mut params: Vec<(String, Option<i64>)> = Vec::new();
    let mut places: Vec<PlaceDecl> = Vec::new();
    let mut transitions: Vec<TransDecl> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut declare = |id: &str, line: usize, col: usize| -> Result<(), NetError> {
        if seen.insert(id.to_string(), line).is_some() {
            return Err(syntax(line, col, format!("duplicate identifier `{id}`")));
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line,
            line_len: raw.chars().count(),
            toks: &toks,
            pos: 0,
        };
        let (kw, _) = cur.ident("declaration keyword")?;
        match kw.as_str() {
            "net" => {
                if name.is_some() {
                    return Err(syntax(line, 1, "duplicate `net` declaration"));
                }
                name = Some(cur.ident("net name")?.0);
            }
            "param" => {
                let (id, col) = cur.ident("parameter name")?;
                let default = if cur.peek() == Some(&Tok::Sym('=')) {
                    cur.pos += 1;
                    Some(cur.int()?)
                } else {
                    None
                };
                if params.iter().any(|(p, _)| p == &id) {
                    return Err(syntax(line, col, format!("duplicate parameter `{id}`")));
                }
                params.push((id, default));
            }
            "place" => {
                let (id, col) = cur.ident("place name")?;
                declare(&id, line, col)?;
                let init = if cur.peek().is_some() {
                    cur.keyword("init")?;
                    cur.affine()?
                } else {
                    AffineExpr::constant(0)
                };
                places.push(PlaceDecl {
                    name: id,
                    line,
                    init,
                });
            }
            "trans" => {
                let (id, col) = cur.ident("transition name")?;
                declare(&id, line, col)?;
                cur.sym(':')?;
                cur.keyword("in")?;
                let input = cur.arcs()?;
                cur.sym(',')?;
                cur.keyword("out")?;
                let output = cur.arcs()?;
                transitions.push(TransDecl {
                    name: id,
                    line,
                    input,
                    output,
                });
            }
            other => {
                return Err(syntax(line, 1, format!("unknown declaration `{other}`")));
            }
        }
        cur.end()?;
    }

    let name = name.ok_or_else(|| syntax(1, 1, "missing `net <name>` declaration"))?;
    for key in bindings.keys() {
        if !params.iter().any(|(p, _)| p == key) {
            return Err(NetError::UnknownParameter(key.clone()));
        }
    }
    let mut values = BTreeMap::new();
    for (p, default) in &params {
        if let Some(v) = bindings.get(p).copied().or(*default) {
            values.insert(p.clone(), v);
        }
    }

    let place_index: HashMap<&str, usize> = places
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();
    let d = places.len();

    let mut init = Vec::with_capacity(d);
    for p in &places {
        let v = p.init.eval(&values)?;
        if v < 0 {
            return Err(NetError::NegativeValue {
                what: format!("initial marking of `{}` (line {})", p.name, p.line),
                value: v,
            });
        }
        init.push(v);
    }

    let mut pre = Vec::with_capacity(transitions.len());
    let mut post = Vec::with_capacity(transitions.len());
    for t in &transitions {
        let mut columns = [vec![0i64; d], vec![0i64; d]];
        for (column, arcs) in columns.iter_mut().zip([&t.input, &t.output]) {
            for (place, col, expr) in arcs {
                let p = *place_index
                    .get(place.as_str())
                    .ok_or_else(|| syntax(t.line, *col, format!("unknown place `{place}`")))?;
                if column[p] != 0 {
                    return Err(syntax(t.line, *col, format!("duplicate arc for `{place}`")));
                }
                let w = expr.eval(&values)?;
                if w < 0 {
                    return Err(NetError::NegativeValue {
                        what: format!("weight of `{place}` on `{}` (line {})", t.name, t.line),
                        value: w,
                    });
                }
                column[p] = w;
            }
        }
        let [pre_col, post_col] = columns;
        pre.push(pre_col);
        post.push(post_col);
    }

    let net = PetriNet::new(
        name,
        places.into_iter().map(|p| p.name).collect(),
        transitions.into_iter().map(|t| t.name).collect(),
        pre,
        post,
        values,
    )?;
    Ok((net, Marking::new(init)?))
}

/// Writes a net in `.pnet` form with all weights as integers.
pub fn to_pnet(net: &PetriNet, init: &Marking) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "net {}", net.name());
    for (p, v) in net.params() {
        let _ = writeln!(out, "param {p} = {v}");
    }
    for (p, name) in net.places().iter().enumerate() {
        let _ = writeln!(out, "place {name} init {}", init.get(p));
    }
    let arcs = |column: &[i64]| {
        let parts: Vec<String> = column
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .map(|(p, w)| format!("{}:{w}", net.places()[p]))
            .collect();
        if parts.is_empty() {
            "-".to_string()
        } else {
            parts.join(" ")
        }
    };
    for (t, name) in net.transitions().iter().enumerate() {
        let _ = writeln!(
            out,
            "trans {name} : in {} , out {}",
            arcs(net.pre_column(t)),
            arcs(net.post_column(t))
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TN: &str = "\
net TN
param k
place A init 0
place B init 0
trans t1 : in A:k , out B:1
trans t2 : in A:1 B:1 , out A:k+1
";

    fn bind(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn parses_parameterized_tn() {
        let (net, q0) = parse_net(TN, &bind(&[("k", 2)])).unwrap();
        assert_eq!(net.places(), ["A", "B"]);
        assert_eq!(net.pre(0, 0), 2);
        assert_eq!(net.post(0, 1), 3);
        assert_eq!(q0.as_slice(), &[0, 0]);
        assert_eq!(net.params()["k"], 2);
    }

    #[test]
    fn single_place_no_transitions() {
        let (net, q0) = parse_net("net one\nplace P0 init 1\n", &BTreeMap::new()).unwrap();
        assert_eq!(net.dim(), 1);
        assert!(net.transitions().is_empty());
        assert_eq!(q0.as_slice(), &[1]);
    }

    #[test]
    fn affine_forms() {
        let src = "net e\nparam x = 3\nparam y = 2\nplace p init 2*x-y+1 # comment\n\
                   trans t : in - , out p:x - 1\n";
        let (net, q0) = parse_net(src, &BTreeMap::new()).unwrap();
        assert_eq!(q0.as_slice(), &[5]);
        assert_eq!(net.post(0, 0), 2);
    }

    #[test]
    fn bindings_override_defaults() {
        let src = "net e\nparam x = 3\nplace p init x\n";
        let (_, q0) = parse_net(src, &bind(&[("x", 7)])).unwrap();
        assert_eq!(q0.as_slice(), &[7]);
        assert_eq!(
            parse_net(src, &bind(&[("z", 1)])).unwrap_err(),
            NetError::UnknownParameter("z".into())
        );
    }

    #[test]
    fn error_cases() {
        assert_eq!(
            parse_net(TN, &BTreeMap::new()).unwrap_err(),
            NetError::UnboundParameter("k".into())
        );
        assert!(matches!(
            parse_net(TN, &bind(&[("k", -1)])).unwrap_err(),
            NetError::NegativeValue { value: -1, .. }
        ));
        let dup = "net d\nplace A init 0\nplace A init 1\n";
        assert!(matches!(
            parse_net(dup, &BTreeMap::new()).unwrap_err(),
            NetError::Syntax { line: 3, column: 7, .. }
        ));
        let bad = "net d\nplace A init 0\ntrans t : in A:1 out A:1\n";
        assert!(matches!(
            parse_net(bad, &BTreeMap::new()).unwrap_err(),
            NetError::Syntax { line: 3, column: 18, .. }
        ));
        let unknown = "net d\nplace A init 0\ntrans t : in Z:1 , out -\n";
        assert!(matches!(
            parse_net(unknown, &BTreeMap::new()).unwrap_err(),
            NetError::Syntax { line: 3, column: 14, .. }
        ));
        assert!(parse_net("place A init 0\n", &BTreeMap::new()).is_err());
        assert!(parse_net("net x\nplace A init ?\n", &BTreeMap::new()).is_err());
    }

    #[test]
    fn serializer_round_trip() {
        let (net, q0) = parse_net(TN, &bind(&[("k", 3)])).unwrap();
        let text = to_pnet(&net, &q0);
        assert!(text.contains("trans t2 : in A:1 B:1 , out A:4"));
        let (again, q1) = parse_net(&text, &BTreeMap::new()).unwrap();
        assert_eq!(again, net);
        assert_eq!(q1, q0);
    }
}
