//! Free strictly graded-commutative algebras: even variables are polynomial, odd variables
//! exterior, monomials kept sorted by variable index with Koszul signs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::field::{format_coeff, Coeff, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub var: u32,
    pub exp: u32,
    pub degree: i32,
}

impl Factor {
    pub fn is_odd(&self) -> bool {
        self.degree % 2 != 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GcMonomial(SmallVec<[Factor; 4]>);

impl GcMonomial {
    pub fn one() -> Self {
        GcMonomial(SmallVec::new())
    }

    pub fn var(var: u32, degree: i32) -> Self {
        GcMonomial(smallvec::smallvec![Factor { var, exp: 1, degree }])
    }

    /// Builds from factors in any order, returning the sign of the reordering; `None` if zero.
    pub fn from_factors(factors: &[Factor]) -> Option<(Self, bool)> {
        let mut m = GcMonomial::one();
        let mut neg = false;
        for f in factors {
            if f.exp == 0 {
                continue;
            }
            let (p, s) = m.mul(&GcMonomial(smallvec::smallvec![*f]))?;
            m = p;
            neg ^= s;
        }
        Some((m, neg))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i32 {
        self.0.iter().map(|f| f.degree * f.exp as i32).sum()
    }

    pub fn exponent(&self, var: u32) -> u32 {
        self.0.iter().find(|f| f.var == var).map_or(0, |f| f.exp)
    }

    /// Product with sign (`true` = negative); `None` when an odd variable repeats.
    pub fn mul(&self, other: &GcMonomial) -> Option<(GcMonomial, bool)> {
        let mut swaps = 0u32;
        for b in other.0.iter().filter(|f| f.is_odd()) {
            for a in self.0.iter().filter(|f| f.is_odd()) {
                if a.var == b.var {
                    return None;
                }
                if a.var > b.var {
                    swaps += 1;
                }
            }
        }
        let mut out: SmallVec<[Factor; 4]> = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            if j == other.0.len() || (i < self.0.len() && self.0[i].var < other.0[j].var) {
                out.push(self.0[i]);
                i += 1;
            } else if i == self.0.len() || other.0[j].var < self.0[i].var {
                out.push(other.0[j]);
                j += 1;
            } else {
                let mut f = self.0[i];
                f.exp += other.0[j].exp;
                out.push(f);
                i += 1;
                j += 1;
            }
        }
        Some((GcMonomial(out), swaps % 2 == 1))
    }

    /// Splits into the factors accepted by `keep` and the rest (no sign: used for even splits).
    pub fn split(&self, keep: impl Fn(&Factor) -> bool) -> (GcMonomial, GcMonomial) {
        let mut a = SmallVec::new();
        let mut b = SmallVec::new();
        for f in &self.0 {
            if keep(f) {
                a.push(*f);
            } else {
                b.push(*f);
            }
        }
        (GcMonomial(a), GcMonomial(b))
    }

    pub fn format(&self, name: &dyn Fn(u32) -> String) -> String {
        self.0
            .iter()
            .map(|f| {
                if f.exp == 1 {
                    name(f.var)
                } else {
                    format!("{}^{}", name(f.var), f.exp)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Element of a free strictly graded-commutative algebra over the field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GcPoly {
    field: Field,
    terms: BTreeMap<GcMonomial, Coeff>,
}

impl GcPoly {
    pub fn zero(field: Field) -> Self {
        GcPoly {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: Field) -> Self {
        Self::constant(field, field.one())
    }

    pub fn constant(field: Field, c: Coeff) -> Self {
        Self::term(field, GcMonomial::one(), c)
    }

    pub fn term(field: Field, m: GcMonomial, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        GcPoly { field, terms }
    }

    pub fn var(field: Field, var: u32, degree: i32) -> Self {
        Self::term(field, GcMonomial::var(var, degree), field.one())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<GcMonomial, Coeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: GcMonomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let f = self.field;
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = f.add(v, &c);
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &GcPoly) -> GcPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &GcPoly) -> GcPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GcPoly {
        let f = self.field;
        GcPoly {
            field: f,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), f.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> GcPoly {
        if c.is_zero() {
            return GcPoly::zero(self.field);
        }
        let f = self.field;
        GcPoly {
            field: f,
            terms: self.terms.iter().map(|(m, d)| (m.clone(), f.mul(c, d))).collect(),
        }
    }

    pub fn mul(&self, other: &GcPoly) -> GcPoly {
        let f = self.field;
        let mut out = GcPoly::zero(f);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((m, neg)) = m1.mul(m2) {
                    let c = f.mul(c1, c2);
                    out.add_term(m, if neg { f.neg(&c) } else { c });
                }
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &GcMonomial) -> GcPoly {
        self.mul(&GcPoly::term(self.field, m.clone(), self.field.one()))
    }

    pub fn pow(&self, k: u32) -> GcPoly {
        let mut r = GcPoly::one(self.field);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Degree of a nonzero homogeneous element.
    pub fn homogeneous_degree(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(GcMonomial::degree);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn is_homogeneous_of(&self, degree: i32) -> bool {
        self.terms.keys().all(|m| m.degree() == degree)
    }

    pub fn homogeneous_parts(&self) -> BTreeMap<i32, GcPoly> {
        let mut out: BTreeMap<i32, GcPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree())
                .or_insert_with(|| GcPoly::zero(self.field))
                .add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|f| f.var))
            .collect()
    }

    /// Ring homomorphism given by images of variables (images must respect parity).
    pub fn substitute(&self, image: &dyn Fn(u32) -> GcPoly) -> GcPoly {
        let f = self.field;
        let mut out = GcPoly::zero(f);
        let mut cache: BTreeMap<u32, GcPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut t = GcPoly::constant(f, c.clone());
            for fac in m.factors() {
                let img = cache.entry(fac.var).or_insert_with(|| image(fac.var)).clone();
                t = t.mul(&img.pow(fac.exp));
                if t.is_zero() {
                    break;
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Degree +1 derivation determined by its values on variables (graded Leibniz rule).
    pub fn derivation(&self, d: &dyn Fn(u32) -> GcPoly) -> GcPoly {
        let f = self.field;
        let mut out = GcPoly::zero(f);
        let mut cache: BTreeMap<u32, GcPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let facs = m.factors();
            for i in 0..facs.len() {
                let dv = cache.entry(facs[i].var).or_insert_with(|| d(facs[i].var)).clone();
                if dv.is_zero() {
                    continue;
                }
                let prefix = GcMonomial(facs[..i].iter().copied().collect());
                let suffix = GcMonomial(facs[i + 1..].iter().copied().collect());
                let mut coef = c.clone();
                if prefix.degree() % 2 != 0 {
                    coef = f.neg(&coef);
                }
                let e = facs[i].exp;
                let mut rest = facs[i];
                rest.exp = e - 1;
                let lower = GcMonomial::from_factors(&[rest]).map(|(m, _)| m).unwrap_or_default();
                coef = f.mul(&coef, &f.from_i64(e as i64));
                let mut t = GcPoly::term(f, prefix, coef);
                t = t.mul(&GcPoly::term(f, lower, f.one()));
                t = t.mul(&dv);
                t = t.mul(&GcPoly::term(f, suffix, f.one()));
                out = out.add(&t);
            }
        }
        out
    }

    pub fn format(&self, name: &dyn Fn(u32) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let f = self.field;
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = f.is_negative(c);
            let abs = if neg { -c.clone() } else { c.clone() };
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = m.format(name);
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

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rationals;

    #[test]
    fn odd_square_vanishes_and_signs() {
        let v = GcPoly::var(Q, 0, -1);
        let w = GcPoly::var(Q, 1, -1);
        assert!(v.mul(&v).is_zero());
        assert_eq!(v.mul(&w), w.mul(&v).neg());
        let u = GcPoly::var(Q, 2, -2);
        assert_eq!(u.mul(&v), v.mul(&u));
        assert!(!u.mul(&u).is_zero());
    }

    #[test]
    fn leibniz_on_koszul_datum() {
        // d(y) = x, y odd, x even of degree 0: d(y x^k) = x^{k+1}
        let x = GcPoly::var(Q, 0, 0);
        let y = GcPoly::var(Q, 1, -1);
        let d = |v: u32| if v == 1 { GcPoly::var(Q, 0, 0) } else { GcPoly::zero(Q) };
        for k in 0..4 {
            let e = y.mul(&x.pow(k));
            assert_eq!(e.derivation(&d), x.pow(k + 1));
        }
    }

    #[test]
    fn derivation_sign_on_products() {
        // d(y1 y2) = d(y1) y2 - y1 d(y2)
        let y1 = GcPoly::var(Q, 1, -1);
        let y2 = GcPoly::var(Q, 2, -1);
        let x = GcPoly::var(Q, 0, 0);
        let d = |v: u32| if v == 0 { GcPoly::zero(Q) } else { GcPoly::var(Q, 0, 0) };
        let lhs = y1.mul(&y2).derivation(&d);
        let rhs = x.mul(&y2).sub(&y1.mul(&x));
        assert_eq!(lhs, rhs);
    }
}
