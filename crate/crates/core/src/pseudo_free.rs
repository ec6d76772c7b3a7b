//! Generator specifications, pseudo-free modules and commutative pseudo-free graded rings.

use std::collections::{BTreeMap, HashSet};
use std::sync::{Arc, OnceLock};

use crate::dg::DgRing;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::graded::{Factor, GcMonomial, GcPoly};
use crate::space::{FiniteSpace, OpenSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: i32,
    pub support: OpenSet,
}

/// The indexing data `(I, {U_i}, {n_i})`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GeneratorSpec {
    pub entries: Vec<Generator>,
}

impl GeneratorSpec {
    pub fn new(entries: Vec<Generator>) -> Result<Self> {
        let mut seen = HashSet::new();
        for g in &entries {
            if !seen.insert(g.name.as_str()) {
                return Err(Error::pre(format!("duplicate generator id {}", g.name)));
            }
            if g.degree > 0 {
                return Err(Error::pre(format!("generator {} has positive degree {}", g.name, g.degree)));
            }
        }
        Ok(GeneratorSpec { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ids of degree `n`.
    pub fn graded_slice(&self, n: i32) -> Vec<String> {
        self.entries
            .iter()
            .filter(|g| g.degree == n)
            .map(|g| g.name.clone())
            .collect()
    }

    /// Ids whose support contains `x`, with degrees.
    pub fn local_index_set(&self, space: &FiniteSpace, x: &str) -> Result<Vec<(String, i32)>> {
        let xi = space.index(x)?;
        Ok(self
            .entries
            .iter()
            .filter(|g| g.support.contains(xi))
            .map(|g| (g.name.clone(), g.degree))
            .collect())
    }
}

/// Graded pseudo-free module pseudo-generated by a specification.
#[derive(Clone, Debug)]
pub struct PsfModule {
    pub spec: GeneratorSpec,
    pub space: Arc<FiniteSpace>,
}

impl PsfModule {
    pub fn stalk_basis(&self, x: usize, n: i32) -> Vec<String> {
        self.spec
            .entries
            .iter()
            .filter(|g| g.degree == n && g.support.contains(x))
            .map(|g| g.name.clone())
            .collect()
    }
}

/// Local section: one stalk value per point of an open set. Variables are generator indices of
/// the ambient ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Section {
    pub open: OpenSet,
    pub values: BTreeMap<usize, GcPoly>,
}

impl Section {
    pub fn uniform(open: OpenSet, value: GcPoly) -> Self {
        Section {
            open,
            values: open.points().map(|x| (x, value.clone())).collect(),
        }
    }

    pub fn zero(open: OpenSet, field: Field) -> Self {
        Self::uniform(open, GcPoly::zero(field))
    }

    pub fn at(&self, x: usize) -> Option<&GcPoly> {
        self.values.get(&x)
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(GcPoly::is_zero)
    }

    pub fn restrict(&self, open: OpenSet) -> Section {
        Section {
            open,
            values: self
                .values
                .iter()
                .filter(|(x, _)| open.contains(**x))
                .map(|(x, v)| (*x, v.clone()))
                .collect(),
        }
    }

    pub fn map_values(&self, f: impl Fn(usize, &GcPoly) -> GcPoly) -> Section {
        Section {
            open: self.open,
            values: self.values.iter().map(|(x, v)| (*x, f(*x, v))).collect(),
        }
    }

    /// Pointwise product over the intersection of the opens.
    pub fn mul(&self, other: &Section) -> Result<Section> {
        let open = self.open.intersect(&other.open)?;
        Ok(Section {
            open,
            values: open
                .points()
                .map(|x| (x, self.values[&x].mul(&other.values[&x])))
                .collect(),
        })
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        let open = self.open.intersect(&other.open)?;
        Ok(Section {
            open,
            values: open
                .points()
                .map(|x| (x, self.values[&x].add(&other.values[&x])))
                .collect(),
        })
    }
}

/// Counts of monomials of one stalk, indexed by (cohomological degree, weight in degree-0 variables).
pub type MonomialCounts = BTreeMap<(i32, u32), usize>;

/// Enumerates monomials of the free strictly graded-commutative algebra on `vars`
/// with degree in `[n_min, 0]` and degree-0 weight at most `w_max`.
pub fn enumerate_monomials(vars: &[(u32, i32)], n_min: i32, w_max: u32) -> Vec<GcMonomial> {
    fn go(
        vars: &[(u32, i32)],
        i: usize,
        deg: i32,
        weight: u32,
        n_min: i32,
        w_max: u32,
        acc: &mut Vec<Factor>,
        out: &mut Vec<GcMonomial>,
    ) {
        if i == vars.len() {
            out.push(GcMonomial::from_factors(acc).expect("distinct variables").0);
            return;
        }
        let (v, d) = vars[i];
        let odd = d % 2 != 0;
        let mut e = 0u32;
        loop {
            let nd = deg + d * e as i32;
            let nw = if d == 0 { weight + e } else { weight };
            if nd < n_min || nw > w_max || (odd && e > 1) {
                break;
            }
            if e > 0 {
                acc.push(Factor { var: v, exp: e, degree: d });
            }
            go(vars, i + 1, nd, nw, n_min, w_max, acc, out);
            if e > 0 {
                acc.pop();
            }
            e += 1;
            if d == 0 && e > w_max {
                break;
            }
        }
    }
    let mut out = Vec::new();
    go(vars, 0, 0, 0, n_min, w_max, &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatnessReport {
    pub degree: i32,
    /// Per point name: coefficients of the generating function in the degree-0 weight.
    pub ranks: BTreeMap<String, Vec<usize>>,
    /// Points where the rank is finite (no degree-0 generator in the stalk).
    pub finite: BTreeMap<String, bool>,
}

/// Commutative pseudo-free graded ring `A ⊗ K_X[I]` over a base (or the constant sheaf).
#[derive(Debug)]
pub struct PsfRing {
    pub space: Arc<FiniteSpace>,
    pub field: Field,
    pub base: Option<Arc<DgRing>>,
    pub spec: GeneratorSpec,
    ring: OnceLock<Arc<DgRing>>,
}

impl PsfRing {
    pub fn new(space: Arc<FiniteSpace>, field: Field, base: Option<Arc<DgRing>>, spec: GeneratorSpec) -> Result<Self> {
        if let Some(b) = &base {
            if b.space().id() != space.id() || b.field() != field {
                return Err(Error::Mismatch("base lives on another space or field".into()));
            }
        }
        for g in &spec.entries {
            if g.support.space_id() != space.id() {
                return Err(Error::Mismatch(format!("support of {} is not an open set of the space", g.name)));
            }
        }
        Ok(PsfRing {
            space,
            field,
            base,
            spec,
            ring: OnceLock::new(),
        })
    }

    /// The ring with zero differential on the new generators.
    pub fn as_dg(&self) -> Arc<DgRing> {
        self.ring
            .get_or_init(|| {
                let base = self
                    .base
                    .clone()
                    .unwrap_or_else(|| DgRing::constant(self.space.clone(), self.field));
                let zero: Vec<Section> = self
                    .spec
                    .entries
                    .iter()
                    .map(|g| Section::zero(g.support, self.field))
                    .collect();
                DgRing::from_parts(&base, self.spec.entries.clone(), zero, Vec::new())
                    .expect("pseudo-free ring with zero differential is valid")
            })
            .clone()
    }

    /// Variables of the stalk at `x` as (generator index, degree), base variables first.
    pub fn stalk_ring(&self, x: usize) -> Vec<(u32, i32)> {
        let r = self.as_dg();
        r.local_vars(x)
    }

    pub fn monomial_counts(&self, x: usize, n_min: i32, w_max: u32) -> MonomialCounts {
        let vars = self.stalk_ring(x);
        let mut out = MonomialCounts::new();
        for m in enumerate_monomials(&vars, n_min, w_max) {
            let w: u32 = m.factors().iter().filter(|f| f.degree == 0).map(|f| f.exp).sum();
            *out.entry((m.degree(), w)).or_insert(0) += 1;
        }
        out
    }

    /// Pointwise product with Koszul signs; both sections must use variables of this ring.
    pub fn multiply(&self, s: &Section, t: &Section) -> Result<Section> {
        let r = self.as_dg();
        for sec in [s, t] {
            for (x, v) in &sec.values {
                if !v.vars().iter().all(|&i| r.is_local(i, *x)) {
                    return Err(Error::Mismatch("section uses variables outside this ring".into()));
                }
            }
        }
        s.mul(t)
    }

    /// Stalkwise freeness of the degree-`n` component over the base stalk: the basis consists of
    /// monomials in the new generators; reported by degree-0 weight up to `w_max`.
    pub fn flatness_check(&self, n: i32, w_max: u32) -> FlatnessReport {
        let r = self.as_dg();
        let own = r.num_base_gens() as u32;
        let mut ranks = BTreeMap::new();
        let mut finite = BTreeMap::new();
        for x in 0..self.space.len() {
            let vars: Vec<(u32, i32)> = r.local_vars(x).into_iter().filter(|(v, _)| *v >= own).collect();
            let mut coeffs = vec![0usize; w_max as usize + 1];
            for m in enumerate_monomials(&vars, n, w_max) {
                if m.degree() == n {
                    let w: u32 = m.factors().iter().filter(|f| f.degree == 0).map(|f| f.exp).sum();
                    coeffs[w as usize] += 1;
                }
            }
            let name = self.space.name(x).to_string();
            finite.insert(name.clone(), !vars.iter().any(|(_, d)| *d == 0));
            ranks.insert(name, coeffs);
        }
        FlatnessReport { degree: n, ranks, finite }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_on(space: &FiniteSpace, gens: &[(&str, i32, u64)]) -> GeneratorSpec {
        GeneratorSpec::new(
            gens.iter()
                .map(|(n, d, m)| Generator {
                    name: n.to_string(),
                    degree: *d,
                    support: space.open_set(*m).unwrap(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn slices_and_local_sets() {
        let x = FiniteSpace::sierpinski();
        let s = spec_on(&x, &[("a", 0, 0b01), ("b", -1, 0b11)]);
        assert_eq!(s.graded_slice(-1), vec!["b"]);
        assert!(s.graded_slice(1).is_empty());
        assert_eq!(s.local_index_set(&x, "o").unwrap().len(), 2);
        assert_eq!(s.local_index_set(&x, "c").unwrap(), vec![("b".to_string(), -1)]);
        assert!(GeneratorSpec::default().graded_slice(0).is_empty());
        assert!(s.local_index_set(&x, "zz").is_err());
    }

    #[test]
    fn duplicate_and_positive_rejected() {
        let x = FiniteSpace::point();
        let w = x.whole();
        let g = |n: &str, d| Generator { name: n.into(), degree: d, support: w };
        assert!(GeneratorSpec::new(vec![g("a", 0), g("a", -1)]).is_err());
        assert!(GeneratorSpec::new(vec![g("a", 1)]).is_err());
    }

    #[test]
    fn stalk_basis_dichotomy() {
        let x = Arc::new(FiniteSpace::sierpinski());
        let m = PsfModule {
            spec: spec_on(&x, &[("t", -1, 0b01), ("u", 0, 0b11), ("v", 0, 0b11)]),
            space: x.clone(),
        };
        assert_eq!(m.stalk_basis(0, -1), vec!["t"]);
        assert!(m.stalk_basis(1, -1).is_empty());
        assert_eq!(m.stalk_basis(1, 0).len(), 2);
    }

    #[test]
    fn monomials_of_mixed_algebra() {
        // u:0, v:-1 ; degree -1 has v u^k
        let ms = enumerate_monomials(&[(0, 0), (1, -1)], -1, 3);
        let deg_minus_one: Vec<_> = ms.iter().filter(|m| m.degree() == -1).collect();
        assert_eq!(deg_minus_one.len(), 4);
        // w:-2 alone: one monomial per even degree
        let ws = enumerate_monomials(&[(0, -2)], -6, 0);
        assert_eq!(ws.len(), 4);
    }

    #[test]
    fn flatness_of_empty_spec() {
        let x = Arc::new(FiniteSpace::point());
        let r = PsfRing::new(x, Field::Rationals, None, GeneratorSpec::default()).unwrap();
        let rep0 = r.flatness_check(0, 2);
        assert_eq!(rep0.ranks["pt"], vec![1, 0, 0]);
        let rep1 = r.flatness_check(-1, 2);
        assert_eq!(rep1.ranks["pt"], vec![0, 0, 0]);
    }
}
