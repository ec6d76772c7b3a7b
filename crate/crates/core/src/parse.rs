//! Polynomial expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*')? unary)*          juxtaposition multiplies
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer ('/' integer)? | identifier | '(' expr ')'
//! ```
//!
//! Identifiers are `[A-Za-z_][A-Za-z0-9_']*`. The Unicode minus sign is accepted for `-`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::field::{Coeff, Field};
use crate::graded::GcPoly;
use crate::poly::{Poly, PolyRing};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = text.chars().enumerate().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (col, c) = chars[i];
        let col = col + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push((col, Tok::Plus));
                i += 1;
            }
            '-' | '−' => {
                out.push((col, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((col, Tok::Star));
                i += 1;
            }
            '^' => {
                out.push((col, Tok::Caret));
                i += 1;
            }
            '/' => {
                out.push((col, Tok::Slash));
                i += 1;
            }
            '(' => {
                out.push((col, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((col, Tok::RParen));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().map(|(_, c)| c).collect();
                out.push((col, Tok::Int(s.parse().expect("digits"))));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_' || chars[i].1 == '\'') {
                    i += 1;
                }
                out.push((col, Tok::Ident(chars[start..i].iter().map(|(_, c)| c).collect())));
            }
            other => return Err(Error::parse(format!("column {col}"), format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Expr {
    Num(BigRational),
    Var(String, usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(self.end)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(format!("column {}", self.col()), msg)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
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
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Int(_) | Tok::Ident(_) | Tok::LParen) => {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    let e: u32 = n.try_into().map_err(|_| self.err("exponent too large"))?;
                    self.pos += 1;
                    return Ok(Expr::Pow(Box::new(base), e));
                }
                _ => return Err(self.err("expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Int(d)) if d != BigInt::from(0) => {
                            self.pos += 1;
                            Ok(Expr::Num(BigRational::new(n, d)))
                        }
                        Some(Tok::Int(_)) => Err(self.err("zero denominator")),
                        _ => Err(self.err("expected an integer denominator")),
                    }
                } else {
                    Ok(Expr::Num(BigRational::from_integer(n)))
                }
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Var(s, col))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => Err(self.err("unexpected token")),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

fn parse_expr(text: &str) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count() + 1,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

trait Algebra: Sized {
    fn num(&self, c: Coeff) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn pow(&self, k: u32) -> Self;
}

impl Algebra for GcPoly {
    fn num(&self, c: Coeff) -> Self {
        GcPoly::constant(self.field(), c)
    }
    fn add(&self, o: &Self) -> Self {
        GcPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        GcPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        GcPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        GcPoly::neg(self)
    }
    fn pow(&self, k: u32) -> Self {
        GcPoly::pow(self, k)
    }
}

impl Algebra for Poly {
    fn num(&self, c: Coeff) -> Self {
        Poly::constant(self.ring(), c)
    }
    fn add(&self, o: &Self) -> Self {
        Poly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Poly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Poly::mul(self, o)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn pow(&self, k: u32) -> Self {
        Poly::pow(self, k)
    }
}

fn eval<A: Algebra>(e: &Expr, zero: &A, field: Field, var: &dyn Fn(&str, usize) -> Result<A>) -> Result<A> {
    Ok(match e {
        Expr::Num(r) => {
            let c = field
                .from_rational(r)
                .map_err(|_| Error::parse("literal", format!("{r} is not defined in {field}")))?;
            zero.num(c)
        }
        Expr::Var(name, col) => var(name, *col)?,
        Expr::Add(a, b) => eval(a, zero, field, var)?.add(&eval(b, zero, field, var)?),
        Expr::Sub(a, b) => eval(a, zero, field, var)?.sub(&eval(b, zero, field, var)?),
        Expr::Mul(a, b) => eval(a, zero, field, var)?.mul(&eval(b, zero, field, var)?),
        Expr::Neg(a) => eval(a, zero, field, var)?.neg(),
        Expr::Pow(a, k) => eval(a, zero, field, var)?.pow(*k),
    })
}

/// Parses into a graded-commutative polynomial; `lookup` maps names to (variable, degree).
pub fn parse_gc(text: &str, field: Field, lookup: &dyn Fn(&str) -> Option<(u32, i32)>) -> Result<GcPoly> {
    let e = parse_expr(text)?;
    let zero = GcPoly::zero(field);
    eval(&e, &zero, field, &|name, col| {
        lookup(name)
            .map(|(v, d)| GcPoly::var(field, v, d))
            .ok_or_else(|| Error::parse(format!("column {col}"), format!("unknown identifier '{name}'")))
    })
}

/// Parses into a polynomial of `ring` whose variables are named by `names`.
pub fn parse_poly(text: &str, ring: PolyRing, names: &[String]) -> Result<Poly> {
    let e = parse_expr(text)?;
    let zero = ring.zero();
    eval(&e, &zero, ring.field, &|name, col| {
        names
            .iter()
            .position(|n| n == name)
            .map(|i| ring.var(i))
            .ok_or_else(|| Error::parse(format!("column {col}"), format!("unknown identifier '{name}'")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> (PolyRing, Vec<String>) {
        (PolyRing::new(Field::Rationals, 2), vec!["x".into(), "y".into()])
    }

    #[test]
    fn precedence_and_juxtaposition() {
        let (r, n) = ring();
        let a = parse_poly("2x^2 - 3/2*y + (x+y)^2", r, &n).unwrap();
        let b = parse_poly("3*x^2 + 2*x*y + y^2 - 3/2 y", r, &n).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_poly("−x", r, &n).unwrap(), r.var(0).neg());
    }

    #[test]
    fn positioned_errors() {
        let (r, n) = ring();
        let e = parse_poly("x + z", r, &n).unwrap_err();
        assert!(e.to_string().contains("column 5"), "{e}");
        assert!(parse_poly("x +", r, &n).is_err());
        assert!(parse_poly("x^y", r, &n).is_err());
        assert!(parse_poly("(x", r, &n).is_err());
        assert!(parse_poly("1/0", r, &n).is_err());
        assert!(parse_poly("x $ y", r, &n).is_err());
    }

    #[test]
    fn literals_mod_p() {
        let f = Field::prime(5).unwrap();
        let r = PolyRing::new(f, 1);
        let n = vec!["x".to_string()];
        assert_eq!(parse_poly("7", r, &n).unwrap(), Poly::constant(r, f.from_i64(2)));
        assert!(parse_poly("1/5", r, &n).is_err());
    }
}
