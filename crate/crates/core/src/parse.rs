//! Text input: a small arithmetic expression grammar shared by field
//! literals, residue polynomials, series and polynomials over a local ring.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/' | <juxtaposition>) unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | symbol | '(' expr ')'
//! ```
//!
//! Juxtaposition is only recognised directly after an integer literal
//! (`2i`, `3x`), and binds like `*`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement, FieldKind};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Sym(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
pub(crate) enum Expr {
    Int(BigInt),
    Sym(String, usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        match c {
            c if c.is_whitespace() => k += 1,
            '0'..='9' => {
                let start = k;
                while k < chars.len() && chars[k].1.is_ascii_digit() {
                    k += 1;
                }
                let digits: String = chars[start..k].iter().map(|(_, c)| c).collect();
                out.push((Tok::Int(digits.parse().unwrap()), pos));
            }
            c if c.is_ascii_alphabetic() => {
                let start = k;
                while k < chars.len() && (chars[k].1.is_ascii_alphanumeric() || chars[k].1 == '_') {
                    k += 1;
                }
                let name: String = chars[start..k].iter().map(|(_, c)| c).collect();
                out.push((Tok::Sym(name), pos));
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => return Err(Error::parse(pos, format!("unexpected character `{c}`"))),
                };
                out.push((tok, pos));
                k += 1;
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    let pos = self.pos();
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), pos);
                }
                Some(Tok::Sym(_)) | Some(Tok::LParen) if self.after_integer() => {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn after_integer(&self) -> bool {
        self.at > 0 && matches!(self.toks[self.at - 1].0, Tok::Int(_))
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let e = u32::try_from(n).map_err(|_| Error::parse(pos, "exponent too large"))?;
                    return Ok(Expr::Pow(Box::new(base), e));
                }
                _ => return Err(Error::parse(pos, "expected a non-negative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Expr::Int(n)),
            Some(Tok::Sym(s)) => Ok(Expr::Sym(s, pos)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let close = self.pos();
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::parse(close, "expected `)`")),
                }
            }
            Some(_) => Err(Error::parse(pos, "expected a number, symbol or `(`")),
            None => Err(Error::parse(pos, "unexpected end of input")),
        }
    }
}

pub(crate) fn parse_expr(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return Err(Error::parse(p.pos(), "unexpected trailing input"));
    }
    Ok(e)
}

/// A target for expression evaluation.
pub(crate) trait Algebra {
    type Value: Clone;
    fn int(&self, n: &BigInt) -> Self::Value;
    fn symbol(&self, name: &str, pos: usize) -> Result<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn neg(&self, a: &Self::Value) -> Self::Value;
    fn div(&self, a: &Self::Value, b: &Self::Value, pos: usize) -> Result<Self::Value>;
    fn one(&self) -> Self::Value {
        self.int(&BigInt::from(1))
    }
}

pub(crate) fn evaluate<A: Algebra>(alg: &A, e: &Expr) -> Result<A::Value> {
    Ok(match e {
        Expr::Int(n) => alg.int(n),
        Expr::Sym(s, pos) => alg.symbol(s, *pos)?,
        Expr::Add(a, b) => alg.add(&evaluate(alg, a)?, &evaluate(alg, b)?),
        Expr::Sub(a, b) => alg.sub(&evaluate(alg, a)?, &evaluate(alg, b)?),
        Expr::Mul(a, b) => alg.mul(&evaluate(alg, a)?, &evaluate(alg, b)?),
        Expr::Div(a, b, pos) => alg.div(&evaluate(alg, a)?, &evaluate(alg, b)?, *pos)?,
        Expr::Neg(a) => alg.neg(&evaluate(alg, a)?),
        Expr::Pow(a, k) => {
            let base = evaluate(alg, a)?;
            let mut acc = alg.one();
            for _ in 0..*k {
                acc = alg.mul(&acc, &base);
            }
            acc
        }
    })
}

pub(crate) fn parse_with<A: Algebra>(alg: &A, src: &str) -> Result<A::Value> {
    evaluate(alg, &parse_expr(src)?)
}

/// Field literals: integers, fractions, `i` in the Gaussian rationals and the
/// function variable in a rational function field.
pub(crate) struct FieldAlgebra<'a>(pub &'a FieldContext);

impl FieldAlgebra<'_> {
    /// Symbols that denote field elements, or `None` for an unknown name.
    pub(crate) fn field_symbol(ctx: &FieldContext, name: &str) -> Option<FieldElement> {
        if name == "i" {
            return ctx.imaginary_unit();
        }
        if ctx.variable_name() == Some(name) {
            return ctx.variable();
        }
        None
    }
}

impl Algebra for FieldAlgebra<'_> {
    type Value = FieldElement;
    fn int(&self, n: &BigInt) -> FieldElement {
        self.0.from_bigint(n)
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<FieldElement> {
        Self::field_symbol(self.0, name)
            .ok_or_else(|| Error::parse(pos, format!("unknown symbol `{name}` in field {}", self.0)))
    }
    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a + b
    }
    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a - b
    }
    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a * b
    }
    fn neg(&self, a: &FieldElement) -> FieldElement {
        -a
    }
    fn div(&self, a: &FieldElement, b: &FieldElement, pos: usize) -> Result<FieldElement> {
        a.checked_div(b).map_err(|e| Error::parse(pos, e.to_string()))
    }
}

pub fn parse_field_element(ctx: &FieldContext, src: &str) -> Result<FieldElement> {
    parse_with(&FieldAlgebra(ctx), src)
}

/// Splits `name(arg, arg, ...)` at top-level commas.
pub(crate) fn split_call(src: &str) -> Result<(String, Vec<String>)> {
    let src = src.trim();
    let Some(open) = src.find('(') else {
        return Ok((src.to_string(), Vec::new()));
    };
    if !src.ends_with(')') {
        return Err(Error::parse(src.len(), "expected `)` at end"));
    }
    let name = src[..open].trim().to_string();
    let inner = &src[open + 1..src.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::parse(open + 1 + k, "unbalanced `)`"));
                }
            }
            ',' if depth == 0 => {
                args.push(inner[start..k].trim().to_string());
                start = k + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::parse(src.len(), "unbalanced `(`"));
    }
    if !inner.trim().is_empty() {
        args.push(inner[start..].trim().to_string());
    }
    Ok((name, args))
}

/// Field specs: `Q`, `GF(p)`, `Qi`, `RatFunc(<base>, <variable>)`.
pub fn parse_field_spec(src: &str) -> Result<FieldContext> {
    let (name, args) = split_call(src)?;
    match (name.as_str(), args.as_slice()) {
        ("Q", []) => Ok(FieldContext::rationals()),
        ("Qi", []) => Ok(FieldContext::gaussian()),
        ("GF", [p]) => {
            let p: u64 = p
                .parse()
                .map_err(|_| Error::parse(3, format!("`{p}` is not a valid modulus")))?;
            FieldContext::prime(p)
        }
        ("RatFunc", [base, var]) => {
            let base = parse_field_spec(base)?;
            if matches!(base.kind(), FieldKind::RationalFunctions { .. }) {
                return Err(Error::InvalidContext("nested rational function fields are not supported".into()));
            }
            FieldContext::rational_functions(base, var)
        }
        _ => Err(Error::parse(0, format!("unknown field spec `{}`", src.trim()))),
    }
}
