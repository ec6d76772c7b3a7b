use crate::error::{Error, Result};
use crate::poly::{coprime, divides, exps_sub, lcm, MonomialOrder, Poly, PolyRing};

/// Reduced Gröbner basis of an ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    ring: PolyRing,
    gens: Vec<Poly>,
}

/// Remainder of `f` under full multivariate division by `basis`.
pub fn reduce(f: &Poly, basis: &[Poly]) -> Poly {
    let field = f.field();
    let mut p = f.clone();
    let mut rem: Vec<(crate::poly::Exps, crate::field::Coeff)> = Vec::new();
    'outer: while let Some((e, c)) = p.lead().cloned() {
        for g in basis {
            if divides(g.lm(), &e) {
                let q = field.div(&c, g.lc());
                p.add_mul_term(&field.neg(&q), &exps_sub(&e, g.lm()), g);
                continue 'outer;
            }
        }
        rem.push((e.clone(), c.clone()));
        p.add_mul_term(&field.neg(&c), &e, &Poly::constant(p.ring(), field.one()));
    }
    Poly::from_terms(f.ring(), rem)
}

fn spoly(f: &Poly, g: &Poly) -> Poly {
    let field = f.field();
    let l = lcm(f.lm(), g.lm());
    let mut s = f.mul_term(&exps_sub(&l, f.lm()), &field.inv(f.lc()));
    s.add_mul_term(&field.neg(&field.inv(g.lc())), &exps_sub(&l, g.lm()), g);
    s
}

impl GroebnerBasis {
    /// Gröbner basis of the ideal generated by `gens` (possibly empty) in `ring`.
    pub fn new(ring: PolyRing, gens: &[Poly]) -> Self {
        let order = ring.order;
        let mut basis: Vec<Poly> = Vec::new();
        for g in gens {
            assert_eq!(g.ring().nvars, ring.nvars, "generator ring");
            let g = if g.ring() == ring { g.clone() } else { g.with_order(order) };
            let r = reduce(&g, &basis);
            if !r.is_zero() {
                basis.push(r.monic());
            }
        }
        if basis.iter().any(|g| g.is_constant()) {
            return GroebnerBasis {
                ring,
                gens: vec![ring.one()],
            };
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for j in 0..basis.len() {
            for i in 0..j {
                pairs.push((i, j));
            }
        }
        while !pairs.is_empty() {
            let (pos, _) = pairs
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    let la = lcm(basis[a.0].lm(), basis[a.1].lm());
                    let lb = lcm(basis[b.0].lm(), basis[b.1].lm());
                    order.cmp(&la, &lb)
                })
                .unwrap();
            let (i, j) = pairs.swap_remove(pos);
            if coprime(basis[i].lm(), basis[j].lm()) {
                continue;
            }
            let l = lcm(basis[i].lm(), basis[j].lm());
            let chain = (0..basis.len()).any(|k| {
                k != i
                    && k != j
                    && divides(basis[k].lm(), &l)
                    && !pairs.contains(&(i.min(k), i.max(k)))
                    && !pairs.contains(&(j.min(k), j.max(k)))
            });
            if chain {
                continue;
            }
            let r = reduce(&spoly(&basis[i], &basis[j]), &basis);
            if r.is_zero() {
                continue;
            }
            if r.is_constant() {
                return GroebnerBasis {
                    ring,
                    gens: vec![ring.one()],
                };
            }
            let n = basis.len();
            basis.push(r.monic());
            for k in 0..n {
                pairs.push((k, n));
            }
        }
        GroebnerBasis {
            ring,
            gens: interreduce(basis),
        }
    }

    pub fn ring(&self) -> PolyRing {
        self.ring
    }

    pub fn gens(&self) -> &[Poly] {
        &self.gens
    }

    pub fn is_unit(&self) -> bool {
        self.gens.iter().any(|g| g.is_constant())
    }

    pub fn reduce(&self, f: &Poly) -> Poly {
        let f = if f.ring() == self.ring { f.clone() } else { f.with_order(self.ring.order) };
        reduce(&f, &self.gens)
    }

    pub fn contains(&self, f: &Poly) -> bool {
        self.reduce(f).is_zero()
    }
}

fn interreduce(mut basis: Vec<Poly>) -> Vec<Poly> {
    basis.sort_by(|a, b| a.ring().order.cmp(a.lm(), b.lm()));
    let mut minimal: Vec<Poly> = Vec::new();
    for g in basis {
        if minimal.iter().any(|h| divides(h.lm(), g.lm())) {
            continue;
        }
        minimal.retain(|h| !divides(g.lm(), h.lm()));
        minimal.push(g);
    }
    let mut out = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<Poly> = minimal
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let lead = Poly::monomial(minimal[i].ring(), minimal[i].lm().clone(), minimal[i].lc().clone());
        let tail = minimal[i].sub(&lead);
        out.push(lead.add(&reduce(&tail, &others)).monic());
    }
    out.sort_by(|a, b| a.ring().order.cmp(b.lm(), a.lm()));
    out
}

/// Reduced Gröbner basis of a nonempty generator list sharing one ring.
pub fn buchberger(gens: &[Poly], order: MonomialOrder) -> Result<GroebnerBasis> {
    let first = gens
        .first()
        .ok_or_else(|| Error::pre("buchberger needs at least one generator"))?;
    let nvars = first.ring().nvars;
    let field = first.field();
    if gens.iter().any(|g| g.ring().nvars != nvars || g.field() != field) {
        return Err(Error::Mismatch("generators live in different rings".into()));
    }
    let ring = PolyRing::new(field, nvars).with_order(order);
    Ok(GroebnerBasis::new(ring, gens))
}

pub fn normal_form(f: &Poly, g: &GroebnerBasis) -> Result<Poly> {
    if f.ring().nvars != g.ring.nvars || f.field() != g.ring.field {
        return Err(Error::Mismatch("polynomial and basis use different variables".into()));
    }
    Ok(g.reduce(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn ring(n: usize, order: MonomialOrder) -> PolyRing {
        PolyRing::new(Field::Rationals, n).with_order(order)
    }

    #[test]
    fn chain_of_linear_forms() {
        let r = ring(3, MonomialOrder::Lex);
        let (x, y, z) = (r.var(0), r.var(1), r.var(2));
        let g = buchberger(&[x.sub(&y), y.sub(&z)], MonomialOrder::Lex).unwrap();
        assert_eq!(g.gens(), &[x.sub(&z), y.sub(&z)]);
    }

    #[test]
    fn univariate_gcd() {
        let r = ring(1, MonomialOrder::Lex);
        let x = r.var(0);
        let one = r.one();
        let g = buchberger(&[x.pow(2).sub(&one), x.pow(3).sub(&one)], MonomialOrder::Lex).unwrap();
        assert_eq!(g.gens(), &[x.sub(&one)]);
    }

    #[test]
    fn normal_form_examples() {
        let r = ring(2, MonomialOrder::Lex);
        let (x, y) = (r.var(0), r.var(1));
        let g = buchberger(&[x.pow(2).sub(&y)], MonomialOrder::Lex).unwrap();
        let nf = normal_form(&x.pow(2).add(&y), &g).unwrap();
        assert_eq!(nf, y.scale(&Field::Rationals.from_i64(2)));
        let gx = buchberger(std::slice::from_ref(&x), MonomialOrder::Lex).unwrap();
        assert!(normal_form(&x.mul(&y), &gx).unwrap().is_zero());
        assert!(normal_form(&r.zero(), &gx).unwrap().is_zero());
    }

    #[test]
    fn mismatch_is_reported() {
        let r2 = ring(2, MonomialOrder::GrevLex);
        let r3 = ring(3, MonomialOrder::GrevLex);
        let g = buchberger(&[r2.var(0)], MonomialOrder::GrevLex).unwrap();
        assert!(matches!(normal_form(&r3.var(0), &g), Err(Error::Mismatch(_))));
        assert!(buchberger(&[], MonomialOrder::Lex).is_err());
    }
}
