//! Parser for the textual set/relation form:
//!
//! ```text
//! { [N] -> [i] : 0 <= i <= N + 1 }
//! { [T, N] -> [t, i] -> [t', i'] : t' = t + 1 and i' = i or false }
//! ```
//!
//! Constraints chain comparisons (`0 <= i < N`), conjunctions use `and`,
//! disjunctions use `or`. Integer literals multiply names or parenthesised
//! groups implicitly (`2phi`, `2(phi + 1)`).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{AffineExpr, Conjunction, Constraint, IntegerRelation, IntegerSet, Space};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Colon,
    Arrow,
    Plus,
    Minus,
    Star,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { pos, msg: msg.into() })
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let v: i64 = match text[start..i].parse() {
                Ok(v) => v,
                Err(_) => return err(start, "integer literal out of range"),
            };
            out.push((start, Tok::Int(v)));
            continue;
        }
        let two = if i + 1 < bytes.len() { &text[i..i + 2] } else { "" };
        let (tok, len) = match two {
            "->" => (Tok::Arrow, 2),
            "<=" => (Tok::Le, 2),
            ">=" => (Tok::Ge, 2),
            "==" => (Tok::Eq, 2),
            "&&" => (Tok::Ident("and".into()), 2),
            "||" => (Tok::Ident("or".into()), 2),
            _ => match c {
                b'{' => (Tok::LBrace, 1),
                b'}' => (Tok::RBrace, 1),
                b'[' => (Tok::LBrack, 1),
                b']' => (Tok::RBrack, 1),
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                b',' => (Tok::Comma, 1),
                b':' => (Tok::Colon, 1),
                b'+' => (Tok::Plus, 1),
                b'-' => (Tok::Minus, 1),
                b'*' => (Tok::Star, 1),
                b'<' => (Tok::Lt, 1),
                b'>' => (Tok::Gt, 1),
                b'=' => (Tok::Eq, 1),
                _ => return err(start, format!("unexpected character `{}`", c as char)),
            },
        };
        out.push((start, tok));
        i += len;
    }
    Ok(out)
}

/// Linear form keyed by name, used while parsing.
#[derive(Debug, Clone, Default)]
struct Lin {
    terms: BTreeMap<String, i64>,
    constant: i64,
}

impl Lin {
    fn add(mut self, other: Lin, sign: i64) -> Result<Lin> {
        for (k, v) in other.terms {
            let e = self.terms.entry(k).or_insert(0);
            *e = v
                .checked_mul(sign)
                .and_then(|v| e.checked_add(v))
                .ok_or(Error::Overflow("parsed expression"))?;
        }
        self.constant = other
            .constant
            .checked_mul(sign)
            .and_then(|v| self.constant.checked_add(v))
            .ok_or(Error::Overflow("parsed expression"))?;
        self.terms.retain(|_, v| *v != 0);
        Ok(self)
    }

    fn scale(mut self, k: i64) -> Result<Lin> {
        for v in self.terms.values_mut() {
            *v = v.checked_mul(k).ok_or(Error::Overflow("parsed expression"))?;
        }
        self.constant = self.constant.checked_mul(k).ok_or(Error::Overflow("parsed expression"))?;
        self.terms.retain(|_, v| *v != 0);
        Ok(self)
    }

    fn is_const(&self) -> bool {
        self.terms.is_empty()
    }
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
}

#[derive(Clone, Copy)]
enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let at = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => err(at, format!("expected {:?}, found {:?}", want, t)),
            None => err(at, format!("expected {:?}, found end of input", want)),
        }
    }

    fn tuple(&mut self) -> Result<Vec<String>> {
        self.expect(Tok::LBrack)?;
        let mut names = Vec::new();
        if self.peek() == Some(&Tok::RBrack) {
            self.bump();
            return Ok(names);
        }
        loop {
            let at = self.offset();
            match self.bump() {
                Some(Tok::Ident(n)) => names.push(n),
                _ => return err(at, "expected a name in tuple"),
            }
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBrack) => return Ok(names),
                _ => return err(self.offset(), "expected `,` or `]`"),
            }
        }
    }

    /// `{ tuple (-> tuple)* [: body] }`, returning the tuples and the body.
    fn header_and_body(&mut self) -> Result<(Vec<Vec<String>>, Option<Vec<Vec<(Lin, Cmp, Lin)>>>)> {
        self.expect(Tok::LBrace)?;
        let mut tuples = alloc::vec![self.tuple()?];
        while self.peek() == Some(&Tok::Arrow) {
            self.bump();
            tuples.push(self.tuple()?);
        }
        let body = match self.bump() {
            Some(Tok::RBrace) => None,
            Some(Tok::Colon) => {
                let b = self.disjunction()?;
                self.expect(Tok::RBrace)?;
                Some(b)
            }
            _ => return err(self.offset(), "expected `:` or `}`"),
        };
        if self.pos < self.toks.len() {
            return err(self.offset(), "trailing input after `}`");
        }
        Ok((tuples, body))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(n)) if n == kw)
    }

    /// `None` entries in the inner list stand for a literal `false`.
    fn disjunction(&mut self) -> Result<Vec<Vec<(Lin, Cmp, Lin)>>> {
        let mut out = Vec::new();
        loop {
            if let Some(c) = self.conjunction()? {
                out.push(c);
            }
            if self.is_kw("or") {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }

    fn conjunction(&mut self) -> Result<Option<Vec<(Lin, Cmp, Lin)>>> {
        let mut out = Vec::new();
        let mut feasible = true;
        loop {
            if self.is_kw("true") {
                self.bump();
            } else if self.is_kw("false") {
                self.bump();
                feasible = false;
            } else {
                out.extend(self.chain()?);
            }
            if self.is_kw("and") {
                self.bump();
            } else {
                return Ok(if feasible { Some(out) } else { None });
            }
        }
    }

    /// A comparison chain; each operand may be a comma-separated list, in
    /// which case every pair of neighbouring operands is compared.
    fn chain(&mut self) -> Result<Vec<(Lin, Cmp, Lin)>> {
        let mut lhs = self.expr_list()?;
        let mut out = Vec::new();
        loop {
            let op = match self.peek() {
                Some(Tok::Le) => Cmp::Le,
                Some(Tok::Lt) => Cmp::Lt,
                Some(Tok::Ge) => Cmp::Ge,
                Some(Tok::Gt) => Cmp::Gt,
                Some(Tok::Eq) => Cmp::Eq,
                _ => break,
            };
            self.bump();
            let rhs = self.expr_list()?;
            for l in &lhs {
                for r in &rhs {
                    out.push((l.clone(), op, r.clone()));
                }
            }
            lhs = rhs;
        }
        if out.is_empty() {
            return err(self.offset(), "expected a comparison");
        }
        Ok(out)
    }

    fn expr_list(&mut self) -> Result<Vec<Lin>> {
        let mut out = alloc::vec![self.expr()?];
        while self.peek() == Some(&Tok::Comma) {
            self.bump();
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Lin> {
        let mut sign = 1;
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                sign = -1;
            }
            Some(Tok::Plus) => {
                self.bump();
            }
            _ => {}
        }
        let mut acc = Lin::default().add(self.term()?, sign)?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(self.term()?, 1)?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.add(self.term()?, -1)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Lin> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            let at = self.offset();
            let rhs = self.factor()?;
            acc = mul(acc, rhs, at)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Lin> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(v)) => {
                let lit = Lin { terms: BTreeMap::new(), constant: v };
                match self.peek() {
                    Some(Tok::Ident(n)) if !is_keyword(n) => {
                        let f = self.factor()?;
                        mul(lit, f, at)
                    }
                    Some(Tok::LParen) => {
                        let f = self.factor()?;
                        mul(lit, f, at)
                    }
                    _ => Ok(lit),
                }
            }
            Some(Tok::Ident(n)) if !is_keyword(&n) => {
                let mut terms = BTreeMap::new();
                terms.insert(n, 1);
                Ok(Lin { terms, constant: 0 })
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Minus) => Ok(self.factor()?.scale(-1)?),
            Some(t) => err(at, format!("unexpected {:?} in expression", t)),
            None => err(at, "unexpected end of input in expression"),
        }
    }
}

fn is_keyword(n: &str) -> bool {
    matches!(n, "and" | "or" | "true" | "false")
}

fn mul(a: Lin, b: Lin, at: usize) -> Result<Lin> {
    if a.is_const() {
        b.scale(a.constant)
    } else if b.is_const() {
        a.scale(b.constant)
    } else {
        err(at, "product of two non-constant terms is not affine")
    }
}

fn lower(space: &Space, body: Option<Vec<Vec<(Lin, Cmp, Lin)>>>) -> Result<Vec<Conjunction>> {
    let n = space.n_cols();
    let to_expr = |l: &Lin| -> Result<AffineExpr> {
        let mut e = AffineExpr::constant(n, l.constant);
        for (name, &v) in &l.terms {
            let col = space.col(name).ok_or_else(|| Error::UnknownDimension(name.clone()))?;
            e.coeffs[col] = v;
        }
        Ok(e)
    };
    let Some(body) = body else {
        return Ok(alloc::vec![Vec::new()]);
    };
    body.iter()
        .map(|conj| {
            conj.iter()
                .map(|(l, op, r)| {
                    let (l, r) = (to_expr(l)?, to_expr(r)?);
                    match op {
                        Cmp::Le => Constraint::le_of(&l, &r),
                        Cmp::Lt => Constraint::lt_of(&l, &r),
                        Cmp::Ge => Constraint::le_of(&r, &l),
                        Cmp::Gt => Constraint::lt_of(&r, &l),
                        Cmp::Eq => Constraint::eq_of(&l, &r),
                    }
                })
                .collect()
        })
        .collect()
}

fn resolve_params(declared: Option<Vec<String>>, ambient: Option<&[String]>) -> Result<Vec<String>> {
    match (declared, ambient) {
        (None, None) => Ok(Vec::new()),
        (Some(d), None) => Ok(d),
        (None, Some(a)) => Ok(a.to_vec()),
        (Some(d), Some(a)) => {
            if let Some(bad) = d.iter().find(|p| !a.contains(p)) {
                return Err(Error::UnknownDimension(bad.clone()));
            }
            Ok(a.to_vec())
        }
    }
}

pub(super) fn parse_set(text: &str, ambient: Option<&[String]>) -> Result<IntegerSet> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, end: text.len() };
    let (mut tuples, body) = p.header_and_body()?;
    let (declared, dims) = match tuples.len() {
        1 => (None, tuples.pop().unwrap()),
        2 => {
            let dims = tuples.pop().unwrap();
            (tuples.pop(), dims)
        }
        k => return err(0, format!("a set has one or two tuples, found {}", k)),
    };
    let space = Space::new(dims, resolve_params(declared, ambient)?)?;
    let disjuncts = lower(&space, body)?;
    IntegerSet::from_disjuncts(space, disjuncts)
}

pub(super) fn parse_relation(text: &str, ambient: Option<&[String]>) -> Result<IntegerRelation> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, end: text.len() };
    let (mut tuples, body) = p.header_and_body()?;
    let (declared, input, output) = match tuples.len() {
        2 => {
            let o = tuples.pop().unwrap();
            (None, tuples.pop().unwrap(), o)
        }
        3 => {
            let o = tuples.pop().unwrap();
            let i = tuples.pop().unwrap();
            (tuples.pop(), i, o)
        }
        k => return err(0, format!("a relation has two or three tuples, found {}", k)),
    };
    let n_in = input.len();
    let mut dims = input;
    dims.extend(output);
    let space = Space::new(dims, resolve_params(declared, ambient)?)?;
    let disjuncts = lower(&space, body)?;
    IntegerRelation::from_set(n_in, IntegerSet::from_disjuncts(space, disjuncts)?)
}

/// Parse a bare affine expression over `space` (schedule rows).
pub fn parse_affine(text: &str, space: &Space) -> Result<AffineExpr> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, end: text.len() };
    let lin = p.expr()?;
    if p.pos < toks.len() {
        return err(p.offset(), "trailing input after expression");
    }
    let mut e = AffineExpr::constant(space.n_cols(), lin.constant);
    for (name, v) in lin.terms {
        let col = space.col(&name).ok_or(Error::UnknownDimension(name))?;
        e.coeffs[col] = v;
    }
    Ok(e)
}
