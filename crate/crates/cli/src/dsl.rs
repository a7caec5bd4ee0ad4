//! Text syntax for form germs.
//!
//! ```text
//! form   := term (('+' | '-') term)*
//! term   := factor ('^' factor)*
//! factor := power (('*' | '/') power)*
//! power  := atom ('**' integer)?
//! atom   := number | var | 'd' var | 'd' '(' form ')' | '(' form ')' | '-' atom
//! ```
//!
//! `*` binds tighter than `^`, which binds tighter than `+`. An identifier
//! `dX` where `X` is a chart variable is the basis one-form `dX`, unless
//! `dX` is itself a chart variable. Division is by nonzero constants only.

use std::fmt;
use std::sync::Arc;

use martinet_core::exterior::EXACT_JET;
use martinet_core::{Chart, DiffForm, Error as CoreError, Rational, TruncatedPoly};
use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DslErrorKind {
    Syntax(String),
    UnknownVariable(String),
    DegreeMismatch(String),
    Math(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DslError {
    pub pos: Pos,
    pub kind: DslErrorKind,
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DslErrorKind::Syntax(m) => write!(f, "{}: syntax error: {m}", self.pos),
            DslErrorKind::UnknownVariable(v) => write!(f, "{}: unknown variable `{v}`", self.pos),
            DslErrorKind::DegreeMismatch(m) => write!(f, "{}: degree mismatch: {m}", self.pos),
            DslErrorKind::Math(m) => write!(f, "{}: {m}", self.pos),
        }
    }
}

impl std::error::Error for DslError {}

fn err<T>(pos: Pos, kind: DslErrorKind) -> Result<T, DslError> {
    Err(DslError { pos, kind })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number {n}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::StarStar => "`**`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str, first_line: usize) -> Result<Vec<(Tok, Pos)>, DslError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, first_line, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int: String = chars[start..i].iter().collect();
            let mut value = Rational::from_integer(int.parse::<BigInt>().unwrap_or_default());
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[fs..i].iter().collect();
                if !frac.is_empty() {
                    let num: BigInt = frac.parse().expect("digits");
                    let den = num_traits::pow(BigInt::from(10), frac.len());
                    value += Rational::new(num, den);
                }
            }
            if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_') {
                return err(Pos { line, col: col + i - start }, DslErrorKind::Syntax("expected an operator after a number".into()));
            }
            Tok::Num(value)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' if chars.get(i) == Some(&'*') => {
                    i += 1;
                    Tok::StarStar
                }
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' | '∧' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return err(pos, DslErrorKind::Syntax(format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, col }));
    Ok(out)
}

/// Syntax tree of a form expression; names are resolved against a chart
/// only on evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum FormExpr {
    Const(Rational),
    /// An identifier: a variable or, failing that, a basis one-form `dX`.
    Name(String, Pos),
    D(Box<FormExpr>, Pos),
    Neg(Box<FormExpr>),
    Add(Box<FormExpr>, Box<FormExpr>, Pos),
    Sub(Box<FormExpr>, Box<FormExpr>, Pos),
    Mul(Box<FormExpr>, Box<FormExpr>, Pos),
    Div(Box<FormExpr>, Box<FormExpr>, Pos),
    Wedge(Box<FormExpr>, Box<FormExpr>, Pos),
    Pow(Box<FormExpr>, u32, Pos),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), DslError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            err(self.pos(), DslErrorKind::Syntax(format!("expected {}, found {}", describe(&t), describe(self.peek()))))
        }
    }

    fn form(&mut self) -> Result<FormExpr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = FormExpr::Add(Box::new(lhs), Box::new(self.term()?), pos);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = FormExpr::Sub(Box::new(lhs), Box::new(self.term()?), pos);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<FormExpr, DslError> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Caret {
            let pos = self.pos();
            self.bump();
            lhs = FormExpr::Wedge(Box::new(lhs), Box::new(self.factor()?), pos);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<FormExpr, DslError> {
        let mut lhs = self.power()?;
        loop {
            let pos = self.pos();
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = FormExpr::Mul(Box::new(lhs), Box::new(self.power()?), pos);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = FormExpr::Div(Box::new(lhs), Box::new(self.power()?), pos);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<FormExpr, DslError> {
        let base = self.atom()?;
        if *self.peek() != Tok::StarStar {
            return Ok(base);
        }
        let pos = self.pos();
        self.bump();
        match self.bump() {
            (Tok::Num(n), p) => {
                if !n.is_integer() || n < Rational::zero() || n > Rational::from_integer(64.into()) {
                    return err(p, DslErrorKind::Syntax("exponent must be an integer between 0 and 64".into()));
                }
                let e: u32 = n.to_integer().try_into().expect("small exponent");
                Ok(FormExpr::Pow(Box::new(base), e, pos))
            }
            (t, p) => err(p, DslErrorKind::Syntax(format!("expected an exponent, found {}", describe(&t)))),
        }
    }

    fn atom(&mut self) -> Result<FormExpr, DslError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(n) => Ok(FormExpr::Const(n)),
            Tok::Minus => Ok(FormExpr::Neg(Box::new(self.power()?))),
            Tok::LParen => {
                let inner = self.form()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "d" && *self.peek() == Tok::LParen => {
                self.bump();
                let inner = self.form()?;
                self.expect(Tok::RParen)?;
                Ok(FormExpr::D(Box::new(inner), pos))
            }
            Tok::Ident(name) => Ok(FormExpr::Name(name, pos)),
            t => err(pos, DslErrorKind::Syntax(format!("expected a form, found {}", describe(&t)))),
        }
    }
}

/// Parses an expression whose first line is numbered `first_line`.
pub fn parse_expr_at(text: &str, first_line: usize) -> Result<FormExpr, DslError> {
    let toks = lex(text, first_line)?;
    if toks.len() == 1 {
        return err(toks[0].1, DslErrorKind::Syntax("empty expression".into()));
    }
    let mut p = Parser { toks, at: 0 };
    let e = p.form()?;
    if *p.peek() != Tok::End {
        return err(p.pos(), DslErrorKind::Syntax(format!("unexpected {}", describe(p.peek()))));
    }
    Ok(e)
}

pub fn parse_expr(text: &str) -> Result<FormExpr, DslError> {
    parse_expr_at(text, 1)
}

fn math(pos: Pos, e: CoreError) -> DslError {
    DslError { pos, kind: DslErrorKind::Math(e.to_string()) }
}

impl FormExpr {
    /// Nesting depth of `d(...)`.
    fn d_depth(&self) -> u32 {
        match self {
            FormExpr::Const(_) | FormExpr::Name(..) => 0,
            FormExpr::D(a, _) => 1 + a.d_depth(),
            FormExpr::Neg(a) | FormExpr::Pow(a, ..) => a.d_depth(),
            FormExpr::Add(a, b, _)
            | FormExpr::Sub(a, b, _)
            | FormExpr::Mul(a, b, _)
            | FormExpr::Div(a, b, _)
            | FormExpr::Wedge(a, b, _) => a.d_depth().max(b.d_depth()),
        }
    }

    /// Evaluates at working order `work`; every `d` costs one order.
    fn eval_at(&self, chart: &Arc<Chart>, work: u32) -> Result<DiffForm, DslError> {
        let func = |p: TruncatedPoly| DiffForm::function(p);
        Ok(match self {
            FormExpr::Const(c) => func(TruncatedPoly::constant(chart, work, c.clone())),
            FormExpr::Name(name, pos) => {
                if let Some(i) = chart.index_of(name) {
                    func(TruncatedPoly::var(chart, work, i))
                } else if let Some(i) = name.strip_prefix('d').and_then(|rest| chart.index_of(rest)) {
                    DiffForm::basis(chart, work, i)
                } else {
                    return err(*pos, DslErrorKind::UnknownVariable(name.clone()));
                }
            }
            FormExpr::D(inner, pos) => {
                let w = inner.eval_at(chart, work)?;
                if w.degree() >= chart.dim() {
                    return err(*pos, DslErrorKind::DegreeMismatch(format!("d of a {}-form in dimension {}", w.degree(), chart.dim())));
                }
                w.ext_d()
            }
            FormExpr::Neg(inner) => -&inner.eval_at(chart, work)?,
            FormExpr::Add(a, b, pos) | FormExpr::Sub(a, b, pos) => {
                let (x, y) = (a.eval_at(chart, work)?, b.eval_at(chart, work)?);
                let (x, y) = match (x.degree(), y.degree()) {
                    (p, q) if p == q => (x, y),
                    (0, q) if x.is_zero() => (DiffForm::zero(chart, q, work), y),
                    (p, 0) if y.is_zero() => (x, DiffForm::zero(chart, p, work)),
                    (p, q) => {
                        return err(*pos, DslErrorKind::DegreeMismatch(format!("cannot add a {p}-form and a {q}-form")))
                    }
                };
                if matches!(self, FormExpr::Add(..)) {
                    &x + &y
                } else {
                    &x - &y
                }
            }
            FormExpr::Mul(a, b, pos) => {
                let (x, y) = (a.eval_at(chart, work)?, b.eval_at(chart, work)?);
                if x.degree() > 0 && y.degree() > 0 {
                    return err(
                        *pos,
                        DslErrorKind::DegreeMismatch(format!(
                            "`*` multiplies by functions; use `^` for a {}-form and a {}-form",
                            x.degree(),
                            y.degree()
                        )),
                    );
                }
                x.wedge(&y).map_err(|e| math(*pos, e))?
            }
            FormExpr::Div(a, b, pos) => {
                let x = a.eval_at(chart, work)?;
                let y = b.eval_at(chart, work)?;
                let c = (y.degree() == 0)
                    .then(|| y.coeff(0))
                    .filter(|p| p.terms().keys().all(|m| m.degree() == 0))
                    .map(|p| p.constant_term());
                match c {
                    Some(c) if !c.is_zero() => x.scale(&c.recip()),
                    Some(_) => return err(*pos, DslErrorKind::Math("division by zero".into())),
                    None => return err(*pos, DslErrorKind::Math("division is by nonzero constants only".into())),
                }
            }
            FormExpr::Wedge(a, b, pos) => {
                let (x, y) = (a.eval_at(chart, work)?, b.eval_at(chart, work)?);
                x.wedge(&y).map_err(|e| math(*pos, e))?
            }
            FormExpr::Pow(a, e, pos) => {
                let x = a.eval_at(chart, work)?;
                if x.degree() != 0 {
                    return err(*pos, DslErrorKind::DegreeMismatch("`**` applies to functions".into()));
                }
                let base = x.coeff(0);
                let mut acc = TruncatedPoly::constant(chart, work, Rational::one());
                for _ in 0..*e {
                    acc = &acc * &base;
                }
                func(acc)
            }
        })
    }

    pub fn eval(&self, chart: &Arc<Chart>, jet: u32) -> Result<DiffForm, DslError> {
        let work = jet.saturating_add(self.d_depth()).min(EXACT_JET);
        Ok(self.eval_at(chart, work)?.truncate(jet))
    }
}

/// `text` as a form on `chart`, truncated at order `jet`.
pub fn parse(text: &str, chart: &Arc<Chart>, jet: u32) -> Result<DiffForm, DslError> {
    parse_expr(text)?.eval(chart, jet)
}

/// A 0-form expression as a polynomial.
pub fn parse_poly(text: &str, chart: &Arc<Chart>, jet: u32) -> Result<TruncatedPoly, DslError> {
    let w = parse(text, chart, jet)?;
    if w.degree() != 0 {
        return err(Pos { line: 1, col: 1 }, DslErrorKind::DegreeMismatch(format!("expected a function, got a {}-form", w.degree())));
    }
    Ok(w.coeff(0))
}

/// Prints in the syntax `parse` reads back.
pub fn print(w: &DiffForm) -> String {
    w.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Arc<Chart> {
        Chart::new(["p1", "x", "y", "z"]).unwrap()
    }

    #[test]
    fn precedence_of_star_over_wedge() {
        let c = chart();
        let a = parse("x*dx^dy", &c, 8).unwrap();
        let b = parse("(x*dx)^dy", &c, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.degree(), 2);
    }

    #[test]
    fn decimals_are_exact() {
        let c = chart();
        let a = parse("0.05*x", &c, 8).unwrap();
        let b = parse("x/20", &c, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn variable_named_like_a_differential_wins() {
        let c = Chart::new(["x", "dx"]).unwrap();
        assert_eq!(parse("dx", &c, 4).unwrap().degree(), 0);
    }

    #[test]
    fn error_positions() {
        let c = chart();
        let e = parse("x*dx +\n  dx^dy", &c, 8).unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 6 });
        assert!(matches!(e.kind, DslErrorKind::DegreeMismatch(_)));
        let e = parse("dx ^ dw", &c, 8).unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 6 });
        assert_eq!(e.kind, DslErrorKind::UnknownVariable("dw".into()));
        let e = parse("d(x", &c, 8).unwrap_err();
        assert!(matches!(e.kind, DslErrorKind::Syntax(_)));
        assert!(parse("dx*dy", &c, 8).is_err());
        assert!(parse("x/y", &c, 8).is_err());
        assert!(parse("", &c, 8).is_err());
        assert!(parse("2x", &c, 8).is_err());
    }

    #[test]
    fn jet_truncation() {
        let c = chart();
        let w = parse("x**5*dx", &c, 4).unwrap();
        assert!(w.is_zero());
    }
}
