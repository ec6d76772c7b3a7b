use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::{format_coeff, Coeff, Field};

pub type Exps = SmallVec<[u32; 8]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    Lex,
    GrevLex,
    /// Grevlex on the first `k` variables, ties broken by grevlex on the rest.
    Block(usize),
}

fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        o => return o,
    }
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return b[i].cmp(&a[i]);
        }
    }
    Ordering::Equal
}

impl MonomialOrder {
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self {
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::GrevLex => grevlex(a, b),
            MonomialOrder::Block(k) => {
                let k = (*k).min(a.len());
                grevlex(&a[..k], &b[..k]).then_with(|| grevlex(&a[k..], &b[k..]))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PolyRing {
    pub field: Field,
    pub nvars: usize,
    pub order: MonomialOrder,
}

impl PolyRing {
    pub fn new(field: Field, nvars: usize) -> Self {
        PolyRing {
            field,
            nvars,
            order: MonomialOrder::GrevLex,
        }
    }

    pub fn with_order(self, order: MonomialOrder) -> Self {
        PolyRing { order, ..self }
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(*self)
    }

    pub fn one(&self) -> Poly {
        Poly::constant(*self, self.field.one())
    }

    pub fn var(&self, i: usize) -> Poly {
        let mut e = Exps::from_elem(0, self.nvars);
        e[i] = 1;
        Poly::monomial(*self, e, self.field.one())
    }

    pub fn unit_exps(&self) -> Exps {
        Exps::from_elem(0, self.nvars)
    }
}

pub fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn lcm(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

pub fn exps_sub(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn exps_add(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

/// Sparse polynomial; terms sorted strictly descending in the ring's order, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    ring: PolyRing,
    terms: Vec<(Exps, Coeff)>,
}

impl Poly {
    pub fn zero(ring: PolyRing) -> Self {
        Poly {
            ring,
            terms: Vec::new(),
        }
    }

    pub fn constant(ring: PolyRing, c: Coeff) -> Self {
        Self::monomial(ring, ring.unit_exps(), c)
    }

    pub fn monomial(ring: PolyRing, e: Exps, c: Coeff) -> Self {
        assert_eq!(e.len(), ring.nvars);
        if c.is_zero() {
            return Self::zero(ring);
        }
        Poly {
            ring,
            terms: vec![(e, c)],
        }
    }

    pub fn from_terms(ring: PolyRing, terms: impl IntoIterator<Item = (Exps, Coeff)>) -> Self {
        let f = ring.field;
        let mut acc: HashMap<Exps, Coeff> = HashMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), ring.nvars, "exponent vector length");
            let slot = acc.entry(e).or_insert_with(Coeff::zero);
            *slot = f.add(slot, &c);
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| ring.order.cmp(&b.0, &a.0));
        Poly { ring, terms }
    }

    pub fn ring(&self) -> PolyRing {
        self.ring
    }

    pub fn field(&self) -> Field {
        self.ring.field
    }

    pub fn terms(&self) -> &[(Exps, Coeff)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.iter().all(|&e| e == 0))
    }

    pub fn constant_value(&self) -> Option<Coeff> {
        if self.is_zero() {
            Some(Coeff::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn lead(&self) -> Option<&(Exps, Coeff)> {
        self.terms.first()
    }

    pub fn lm(&self) -> &Exps {
        &self.terms[0].0
    }

    pub fn lc(&self) -> &Coeff {
        &self.terms[0].1
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn merge(ring: PolyRing, a: Vec<(Exps, Coeff)>, b: Vec<(Exps, Coeff)>) -> Vec<(Exps, Coeff)> {
        let f = ring.field;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut ia = a.into_iter().peekable();
        let mut ib = b.into_iter().peekable();
        loop {
            match (ia.peek(), ib.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(ia.next().unwrap()),
                (None, Some(_)) => out.push(ib.next().unwrap()),
                (Some(x), Some(y)) => match ring.order.cmp(&x.0, &y.0) {
                    Ordering::Greater => out.push(ia.next().unwrap()),
                    Ordering::Less => out.push(ib.next().unwrap()),
                    Ordering::Equal => {
                        let (e, c1) = ia.next().unwrap();
                        let (_, c2) = ib.next().unwrap();
                        let c = f.add(&c1, &c2);
                        if !c.is_zero() {
                            out.push((e, c));
                        }
                    }
                },
            }
        }
        out
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.ring, other.ring);
        Poly {
            ring: self.ring,
            terms: Self::merge(self.ring, self.terms.clone(), other.terms.clone()),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        let f = self.ring.field;
        Poly {
            ring: self.ring,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), f.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.ring);
        }
        let f = self.ring.field;
        Poly {
            ring: self.ring,
            terms: self.terms.iter().map(|(e, d)| (e.clone(), f.mul(c, d))).collect(),
        }
    }

    /// `c * x^m * self`.
    pub fn mul_term(&self, m: &[u32], c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.ring);
        }
        let f = self.ring.field;
        Poly {
            ring: self.ring,
            terms: self
                .terms
                .iter()
                .map(|(e, d)| (exps_add(e, m), f.mul(c, d)))
                .collect(),
        }
    }

    /// `self += c * x^m * g`, in place.
    pub fn add_mul_term(&mut self, c: &Coeff, m: &[u32], g: &Poly) {
        if c.is_zero() || g.is_zero() {
            return;
        }
        let shifted = g.mul_term(m, c).terms;
        let own = std::mem::take(&mut self.terms);
        self.terms = Self::merge(self.ring, own, shifted);
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.ring, other.ring);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.ring);
        }
        let f = self.ring.field;
        let mut acc: HashMap<Exps, Coeff> = HashMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let slot = acc.entry(exps_add(e1, e2)).or_insert_with(Coeff::zero);
                *slot = f.add(slot, &f.mul(c1, c2));
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| self.ring.order.cmp(&b.0, &a.0));
        Poly {
            ring: self.ring,
            terms,
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut r = Poly::constant(self.ring, self.ring.field.one());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.ring.field.inv(self.lc());
        self.scale(&inv)
    }

    /// Re-sorts the terms under another order on the same variables.
    pub fn with_order(&self, order: MonomialOrder) -> Poly {
        let ring = self.ring.with_order(order);
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        Poly { ring, terms }
    }

    /// Renames variables: variable `i` of `self` becomes variable `map[i]` of `target`.
    pub fn embed(&self, target: PolyRing, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.ring.nvars);
        Poly::from_terms(
            target,
            self.terms.iter().map(|(e, c)| {
                let mut ne = target.unit_exps();
                for (i, &k) in e.iter().enumerate() {
                    ne[map[i]] += k;
                }
                (ne, c.clone())
            }),
        )
    }

    /// Evaluates with variable `i` replaced by `images[i]`, all in one target ring.
    pub fn substitute(&self, target: PolyRing, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.ring.nvars);
        let mut acc = Poly::zero(target);
        let mut powers: HashMap<(usize, u32), Poly> = HashMap::new();
        for (e, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let p = powers
                    .entry((i, k))
                    .or_insert_with(|| images[i].pow(k))
                    .clone();
                t = t.mul(&p);
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn uses_only(&self, vars: &[bool]) -> bool {
        self.terms
            .iter()
            .all(|(e, _)| e.iter().enumerate().all(|(i, &k)| k == 0 || vars[i]))
    }

    pub fn evaluate(&self, point: &[Coeff]) -> Coeff {
        let f = self.ring.field;
        let mut acc = f.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                t = f.mul(&t, &f.pow(&point[i], k));
            }
            acc = f.add(&acc, &t);
        }
        acc
    }

    /// Exact quotient; fails if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Result<Poly> {
        if d.is_zero() {
            return Err(Error::pre("division by zero polynomial"));
        }
        let f = self.ring.field;
        let mut rem = self.clone();
        let mut quo = Poly::zero(self.ring);
        while let Some((e, c)) = rem.lead().cloned() {
            if !divides(d.lm(), &e) {
                return Err(Error::pre("inexact polynomial division"));
            }
            let m = exps_sub(&e, d.lm());
            let q = f.div(&c, d.lc());
            quo.add_mul_term(&q, &m, &Poly::constant(self.ring, f.one()));
            rem.add_mul_term(&f.neg(&q), &m, d);
        }
        Ok(quo)
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let f = self.ring.field;
        let mut s = String::new();
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let neg = f.is_negative(c);
            let abs = if neg { -c.clone() } else { c.clone() };
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = format_exps(e, names);
            if mono.is_empty() {
                s.push_str(&format_coeff(&abs));
            } else if abs.is_one() {
                s.push_str(&mono);
            } else {
                let _ = write!(s, "{}*{}", format_coeff(&abs), mono);
            }
        }
        s
    }
}

pub fn format_exps(e: &[u32], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{}", names[i], k)),
        }
    }
    parts.join("*")
}

/// Substitution map `P_src -> P_dst` given by images of the source variables.
#[derive(Clone, Debug)]
pub struct PolyMap {
    pub target: PolyRing,
    pub images: Vec<Poly>,
}

impl PolyMap {
    pub fn apply(&self, p: &Poly) -> Poly {
        p.substitute(self.target, &self.images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> PolyRing {
        PolyRing::new(Field::Rationals, n)
    }

    #[test]
    fn grevlex_order() {
        let o = MonomialOrder::GrevLex;
        assert_eq!(o.cmp(&[2, 0], &[1, 1]), Ordering::Greater);
        assert_eq!(o.cmp(&[1, 1, 0], &[1, 0, 1]), Ordering::Greater);
        assert_eq!(o.cmp(&[0, 0, 2], &[1, 0, 0]), Ordering::Greater);
        assert_eq!(MonomialOrder::Lex.cmp(&[1, 0], &[0, 5]), Ordering::Greater);
        assert_eq!(MonomialOrder::Block(1).cmp(&[1, 0], &[0, 5]), Ordering::Greater);
    }

    #[test]
    fn arithmetic_and_exact_division() {
        let r = ring(2);
        let x = r.var(0);
        let y = r.var(1);
        let p = x.add(&y).mul(&x.sub(&y));
        assert_eq!(p, x.pow(2).sub(&y.pow(2)));
        assert_eq!(p.div_exact(&x.add(&y)).unwrap(), x.sub(&y));
        assert!(p.div_exact(&x).is_err());
    }

    #[test]
    fn substitution_and_display() {
        let r = ring(2);
        let x = r.var(0);
        let y = r.var(1);
        let p = x.pow(2).add(&y.scale(&Field::Rationals.from_i64(-3)));
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(p.to_string_with(&names), "x^2 - 3*y");
        let q = p.substitute(r, &[y.clone(), x.clone()]);
        assert_eq!(q.to_string_with(&names), "y^2 - 3*x");
    }
}
