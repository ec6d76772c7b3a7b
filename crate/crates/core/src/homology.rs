//! Stalkwise cohomology as finitely presented modules over the degree-0 ring, and comparison of
//! morphisms on chains and on cohomology.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dg::{DgRing, SheafHom};
use crate::error::{Error, Result};
use crate::module::{fin_dim_isomorphic, syzygies, ModVec, ModuleGb, ModulePresentation};
use crate::poly::PolyRing;
use crate::stalk::{Complex, RingPullback, StalkAlgebra};

/// Inclusive degree window `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Window {
    pub min: i32,
    pub max: i32,
}

impl Window {
    pub fn new(min: i32, max: i32) -> Result<Self> {
        if min > max {
            return Err(Error::pre(format!("empty window {min}:{max}")));
        }
        Ok(Window { min, max })
    }

    pub fn degrees(&self) -> impl DoubleEndedIterator<Item = i32> {
        self.min..=self.max
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::parse("window", "expected MIN:MAX"))?;
        let a: i32 = a.trim().parse().map_err(|_| Error::parse("window", "bad lower bound"))?;
        let b: i32 = b.trim().parse().map_err(|_| Error::parse("window", "bad upper bound"))?;
        Window::new(a, b)
    }
}

/// Cohomology of one stalk in one degree.
#[derive(Clone, Debug)]
pub struct DegreeReport {
    pub module: ModulePresentation,
}

impl DegreeReport {
    pub fn rank(&self) -> usize {
        self.module.ngens
    }

    pub fn dim(&self) -> Option<usize> {
        self.module.k_dim()
    }

    pub fn presentation(&self) -> String {
        format_presentation(&self.module)
    }
}

pub fn format_presentation(m: &ModulePresentation) -> String {
    if m.ngens == 0 {
        return "0".into();
    }
    let ring = format!("{}[{}]", m.ring.field, m.vars.join(","));
    if m.relations.is_empty() {
        return format!("{ring}^{}", m.ngens);
    }
    let rels: Vec<String> = m
        .relations
        .iter()
        .map(|r| {
            let entries: Vec<String> = r.0.iter().map(|p| p.to_string_with(&m.vars)).collect();
            format!("({})", entries.join(", "))
        })
        .collect();
    format!("{ring}^{} / <{}>", m.ngens, rels.join(", "))
}

#[derive(Clone, Debug)]
pub struct CohomologyReport {
    pub window: Window,
    /// Point name → degree → cohomology.
    pub per_point: BTreeMap<String, BTreeMap<i32, DegreeReport>>,
}

impl CohomologyReport {
    pub fn get(&self, point: &str, n: i32) -> Option<&DegreeReport> {
        self.per_point.get(point).and_then(|m| m.get(&n))
    }

    pub fn is_acyclic(&self) -> bool {
        self.per_point.values().flat_map(|m| m.values()).all(|d| d.module.is_zero())
    }
}

/// `H^n` of a complex of presented modules, pruned, with cycle representatives.
pub fn cohomology_at<C: Complex + ?Sized>(c: &C, n: i32) -> ModulePresentation {
    let ring = c.ring();
    let names = c.var_names();
    let r = c.rank(n);
    if r == 0 {
        return ModulePresentation::zero(ring, names);
    }
    let cycles = cycles_of(c, n);
    if cycles.is_empty() {
        return ModulePresentation::zero(ring, names);
    }
    let mut gens = cycles.clone();
    gens.extend(c.d_columns(n - 1));
    gens.extend(c.relations(n));
    let s = cycles.len();
    let rels: Vec<ModVec> = syzygies(ring, r, &gens)
        .into_iter()
        .map(|v| v.slice(0, s))
        .filter(|v| !v.is_zero())
        .collect();
    let mut p = ModulePresentation::new(ring, names, s, rels);
    p.representatives = cycles;
    p.pruned()
}

/// Generators of the cycle module `{v ∈ P^rank(n) : d v ∈ relations(n+1)}`.
pub fn cycles_of<C: Complex + ?Sized>(c: &C, n: i32) -> Vec<ModVec> {
    let ring = c.ring();
    let r = c.rank(n);
    let r1 = c.rank(n + 1);
    if r1 == 0 {
        return (0..r).map(|j| ModVec::unit(ring, r, j)).collect();
    }
    let mut gens = c.d_columns(n);
    gens.extend(c.relations(n + 1));
    let mut out: Vec<ModVec> = Vec::new();
    for v in syzygies(ring, r1, &gens) {
        let z = v.slice(0, r);
        if !z.is_zero() && !out.contains(&z) {
            out.push(z);
        }
    }
    out
}

/// Cohomology of every stalk in the window; stalk and degree tasks run in parallel.
pub fn cohomology(ring: &DgRing, window: Window) -> Result<CohomologyReport> {
    let space = ring.space();
    let tasks: Vec<(usize, i32)> = (0..space.len())
        .flat_map(|x| window.degrees().map(move |n| (x, n)))
        .collect();
    let results: Vec<(usize, i32, ModulePresentation)> = tasks
        .par_iter()
        .map(|&(x, n)| {
            let s = ring.stalk(x);
            (x, n, cohomology_at(&*s, n))
        })
        .collect();
    let mut per_point: BTreeMap<String, BTreeMap<i32, DegreeReport>> = BTreeMap::new();
    for x in 0..space.len() {
        per_point.insert(space.name(x).to_string(), BTreeMap::new());
    }
    for (x, n, module) in results {
        per_point
            .get_mut(space.name(x))
            .expect("point registered")
            .insert(n, DegreeReport { module });
    }
    Ok(CohomologyReport { window, per_point })
}

/// Cohomology of an arbitrary complex in the window.
pub fn complex_cohomology<C: Complex + Sync + ?Sized>(c: &C, window: Window) -> BTreeMap<i32, ModulePresentation> {
    window
        .degrees()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| (n, cohomology_at(c, n)))
        .collect()
}

/// Isomorphism of finite-dimensional presented modules as modules over the named variables only.
pub fn iso_over(p1: &ModulePresentation, p2: &ModulePresentation, act_vars: &[String]) -> Result<bool> {
    if p1.ring.field != p2.ring.field {
        return Err(Error::Mismatch("modules over different fields".into()));
    }
    let a = p1.to_fin_dim(act_vars)?;
    let b = p2.to_fin_dim(act_vars)?;
    Ok(fin_dim_isomorphic(&a, &b))
}

/// Compares two reports point by point and degree by degree; returns the first mismatch.
pub fn reports_isomorphic(a: &CohomologyReport, b: &CohomologyReport, act_vars: &[String]) -> Result<Option<(String, i32)>> {
    for (pt, degs) in &a.per_point {
        for (n, da) in degs {
            let Some(db) = b.get(pt, *n) else {
                return Ok(Some((pt.clone(), *n)));
            };
            let vars: Vec<String> = act_vars
                .iter()
                .filter(|v| da.module.vars.contains(v) && db.module.vars.contains(v))
                .cloned()
                .collect();
            if !iso_over(&da.module, &db.module, &vars)? {
                return Ok(Some((pt.clone(), *n)));
            }
        }
    }
    Ok(None)
}

fn forward_images(phi: &SheafHom, x: usize, sa: &StalkAlgebra, sb: &StalkAlgebra) -> Vec<crate::poly::Poly> {
    sa.pvars
        .iter()
        .map(|&v| sb.poly_of(&phi.image_at(v as usize, x)))
        .collect()
}

/// Ring map `P_A → P_B / ideal0(B)` on degree-0 chains.
pub fn chain_pullback(phi: &SheafHom, x: usize) -> RingPullback {
    let sa = phi.source.stalk(x);
    let sb = phi.target.stalk(x);
    RingPullback::new(sa.pring, sb.pring, forward_images(phi, x, &sa, &sb), sb.ideal0())
}

/// Ring map `P_A → H^0(B_x)`.
pub fn h0_pullback(phi: &SheafHom, x: usize) -> RingPullback {
    let sa = phi.source.stalk(x);
    let sb = phi.target.stalk(x);
    RingPullback::new(sa.pring, sb.pring, forward_images(phi, x, &sa, &sb), sb.h0_ideal())
}

fn map_vector(phi: &SheafHom, x: usize, n: i32, sa: &StalkAlgebra, sb: &StalkAlgebra, v: &ModVec) -> ModVec {
    sb.coords(&phi.eval_at(x, &sa.element(n, v)), n)
}

fn in_span(ring: PolyRing, rank: usize, span: &[ModVec], targets: &[ModVec]) -> bool {
    if targets.is_empty() {
        return true;
    }
    let gb = ModuleGb::new(ring, rank, span);
    targets.iter().all(|t| gb.contains(t))
}

/// Chain-level surjectivity checks at one point and degree (requires a surjective `chain`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainChecks {
    pub map_surjective: bool,
    pub boundaries_surjective: bool,
    pub cohomology_surjective: bool,
}

pub fn chain_checks(phi: &SheafHom, x: usize, n: i32, chain: &RingPullback) -> ChainChecks {
    let sa = phi.source.stalk(x);
    let sb = phi.target.stalk(x);
    let pa = sa.pring;
    let b_n = sb.rank(n);
    let mut rels: Vec<ModVec> = sb.component(n).relations.iter().map(|v| chain.pull_vec(v)).collect();
    rels.extend(chain.kernel_relations(b_n));
    let pull_basis = |n: i32, v: &ModVec| chain.pull_vec(&map_vector(phi, x, n, &sa, &sb, v));

    let a_n = sa.rank(n);
    let images: Vec<ModVec> = (0..a_n).map(|j| pull_basis(n, &ModVec::unit(pa, a_n, j))).collect();
    let mut span = images.clone();
    span.extend(rels.iter().cloned());
    let units: Vec<ModVec> = (0..b_n).map(|j| ModVec::unit(pa, b_n, j)).collect();
    let map_surjective = in_span(pa, b_n, &span, &units);

    let src_bd: Vec<ModVec> = sa.d_matrix(n - 1).iter().map(|v| pull_basis(n, v)).collect();
    let tgt_bd: Vec<ModVec> = sb.d_matrix(n - 1).iter().map(|v| chain.pull_vec(v)).collect();
    let mut span = src_bd;
    span.extend(rels.iter().cloned());
    let boundaries_surjective = in_span(pa, b_n, &span, &tgt_bd);

    // cycles of B^n viewed as a P_A-module
    let b_n1 = sb.rank(n + 1);
    let tgt_cycles: Vec<ModVec> = if b_n1 == 0 {
        units
    } else {
        let mut gens: Vec<ModVec> = sb.d_matrix(n).iter().map(|v| chain.pull_vec(v)).collect();
        gens.extend(sb.component(n + 1).relations.iter().map(|v| chain.pull_vec(v)));
        gens.extend(chain.kernel_relations(b_n1));
        syzygies(pa, b_n1, &gens)
            .into_iter()
            .map(|v| v.slice(0, b_n))
            .filter(|v| !v.is_zero())
            .collect()
    };
    let mut span: Vec<ModVec> = cycles_of(&*sa, n).iter().map(|v| pull_basis(n, v)).collect();
    span.extend(tgt_bd);
    span.extend(rels);
    let cohomology_surjective = in_span(pa, b_n, &span, &tgt_cycles);
    ChainChecks {
        map_surjective,
        boundaries_surjective,
        cohomology_surjective,
    }
}

/// Surjectivity and injectivity of `H^n(φ)` at `x`; both false when `H^0(φ)` is not surjective
/// (the target cannot be pulled back).
pub fn h_comparison(phi: &SheafHom, x: usize, n: i32, h0: &RingPullback) -> (bool, bool) {
    let sa = phi.source.stalk(x);
    let sb = phi.target.stalk(x);
    if !h0.surjective() {
        return (false, false);
    }
    let ha = cohomology_at(&*sa, n);
    let hb = cohomology_at(&*sb, n);
    let pa = sa.pring;
    let s_a = ha.ngens;
    let s_b = hb.ngens;
    let mut cols = Vec::with_capacity(s_a);
    if s_b > 0 {
        let mut lift_gens = hb.representatives.clone();
        lift_gens.extend(sb.d_matrix(n - 1));
        lift_gens.extend(sb.component(n).relations.iter().cloned());
        let lifter = crate::module::Lifter::new(sb.pring, sb.rank(n), &lift_gens);
        for z in &ha.representatives {
            let img = map_vector(phi, x, n, &sa, &sb, z);
            let c = lifter
                .lift(&img)
                .expect("a morphism of complexes maps cycles to cycles");
            cols.push(h0.pull_vec(&c.slice(0, s_b)));
        }
    } else {
        cols = vec![ModVec::zero(pa, 0); s_a];
    }
    let mut span = cols.clone();
    span.extend(hb.relations.iter().map(|r| h0.pull_vec(r)));
    span.extend(h0.kernel_relations(s_b));
    let units: Vec<ModVec> = (0..s_b).map(|j| ModVec::unit(pa, s_b, j)).collect();
    let surjective = in_span(pa, s_b, &span, &units);
    let injective = if s_a == 0 {
        true
    } else {
        let kernel: Vec<ModVec> = syzygies(pa, s_b, &span)
            .into_iter()
            .map(|v| v.slice(0, s_a))
            .filter(|v| !v.is_zero())
            .collect();
        in_span(pa, s_a, &ha.relations, &kernel)
    };
    (surjective, injective)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QisoVerdict {
    pub holds: bool,
    /// First failing (point, degree).
    pub witness: Option<(String, i32)>,
    pub detail: String,
}

/// Whether `H^n(φ)` is bijective at every point for every `n` in the window (window-relative).
pub fn is_quasi_iso(phi: &SheafHom, window: Window) -> Result<QisoVerdict> {
    let space = phi.source.space().clone();
    if space.id() != phi.target.space().id() {
        return Err(Error::Mismatch("morphism between different spaces".into()));
    }
    let per_point: Vec<Option<(i32, String)>> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let h0 = h0_pullback(phi, x);
            if !h0.surjective() {
                return Some((0, "H^0 is not surjective".to_string()));
            }
            for n in window.degrees().rev() {
                let (s, i) = h_comparison(phi, x, n, &h0);
                if !(s && i) {
                    let what = match (s, i) {
                        (false, false) => "neither injective nor surjective",
                        (false, true) => "not surjective",
                        _ => "not injective",
                    };
                    return Some((n, format!("H^{n} {what}")));
                }
            }
            None
        })
        .collect();
    for (x, r) in per_point.into_iter().enumerate() {
        if let Some((n, detail)) = r {
            return Ok(QisoVerdict {
                holds: false,
                witness: Some((space.name(x).to_string(), n)),
                detail,
            });
        }
    }
    Ok(QisoVerdict {
        holds: true,
        witness: None,
        detail: format!("bijective on H^n for n in [{}, {}]", window.min, window.max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::graded::GcPoly;
    use crate::pseudo_free::{Generator, Section};
    use crate::space::FiniteSpace;
    use std::sync::Arc;

    fn koszul(relation_x: bool) -> (Arc<DgRing>, Arc<DgRing>) {
        let space = Arc::new(FiniteSpace::point());
        let f = Field::Rationals;
        let k = DgRing::constant(space.clone(), f);
        let w = space.whole();
        let a = DgRing::from_parts(
            &k,
            vec![Generator { name: "x".into(), degree: 0, support: w }],
            vec![Section::zero(w, f)],
            Vec::new(),
        )
        .unwrap();
        let rels = if relation_x { vec![Section::uniform(w, GcPoly::var(f, 0, 0))] } else { Vec::new() };
        let b = DgRing::from_parts(
            &a,
            vec![Generator { name: "y".into(), degree: -1, support: w }],
            vec![Section::uniform(w, GcPoly::var(f, 0, 0))],
            rels,
        )
        .unwrap();
        (a, b)
    }

    #[test]
    fn koszul_is_acyclic_below_zero() {
        let (_, b) = koszul(false);
        let rep = cohomology(&b, Window::new(-3, 0).unwrap()).unwrap();
        assert_eq!(rep.get("pt", 0).unwrap().dim(), Some(1));
        for n in -3..0 {
            assert!(rep.get("pt", n).unwrap().module.is_zero(), "degree {n}");
        }
    }

    #[test]
    fn self_intersection_model() {
        let (_, b) = koszul(true);
        let rep = cohomology(&b, Window::new(-2, 0).unwrap()).unwrap();
        assert_eq!(rep.get("pt", 0).unwrap().dim(), Some(1));
        assert_eq!(rep.get("pt", -1).unwrap().dim(), Some(1));
        assert!(rep.get("pt", -2).unwrap().module.is_zero());
    }

    #[test]
    fn free_ring_cohomology_is_itself() {
        let (a, _) = koszul(false);
        let rep = cohomology(&a, Window::new(-1, 0).unwrap()).unwrap();
        assert_eq!(rep.get("pt", 0).unwrap().rank(), 1);
        assert!(rep.get("pt", 0).unwrap().module.relations.is_empty());
    }

    #[test]
    fn identity_is_quasi_iso() {
        let (_, b) = koszul(false);
        let v = is_quasi_iso(&SheafHom::identity(&b), Window::new(-2, 0).unwrap()).unwrap();
        assert!(v.holds, "{v:?}");
    }

    #[test]
    fn koszul_maps_quasi_isomorphically_to_quotient() {
        let (a, b) = koszul(false);
        let f = Field::Rationals;
        let w = a.space().whole();
        let kx = a.base_ring();
        let q = DgRing::from_parts(
            &kx,
            vec![Generator { name: "x".into(), degree: 0, support: w }],
            vec![Section::zero(w, f)],
            vec![Section::uniform(w, GcPoly::var(f, 0, 0))],
        )
        .unwrap();
        let phi = SheafHom::new(
            b.clone(),
            q,
            vec![Section::uniform(w, GcPoly::var(f, 0, 0)), Section::zero(w, f)],
        )
        .unwrap();
        let v = is_quasi_iso(&phi, Window::new(-3, 0).unwrap()).unwrap();
        assert!(v.holds, "{v:?}");
        let cpb = chain_pullback(&phi, 0);
        assert!(cpb.surjective());
        let c = chain_checks(&phi, 0, 0, &cpb);
        assert!(c.map_surjective && c.boundaries_surjective && c.cohomology_surjective);
    }

    #[test]
    fn map_to_zero_ring_fails_in_degree_zero() {
        let (a, _) = koszul(false);
        let f = Field::Rationals;
        let w = a.space().whole();
        let zero = DgRing::from_parts(
            &a.base_ring(),
            vec![Generator { name: "x".into(), degree: 0, support: w }],
            vec![Section::zero(w, f)],
            vec![Section::uniform(w, GcPoly::one(f))],
        )
        .unwrap();
        let phi = SheafHom::new(a.clone(), zero, vec![Section::uniform(w, GcPoly::var(f, 0, 0))]).unwrap();
        let v = is_quasi_iso(&phi, Window::new(-1, 0).unwrap()).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness, Some(("pt".to_string(), 0)));
    }
}
