//! Stalks as complexes of finitely presented modules over their degree-0 polynomial ring.
//!
//! At a point `x` the stalk of a presented DG ring is `S/I` where `S` is free graded-commutative on
//! the local generators. With `P` the polynomial ring on the degree-0 local generators, the
//! degree-`n` component of `S` is free over `P` on the monomials of degree `n` in the negative
//! generators, and the component of `I` is spanned by such monomials times the relations.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::dg::{DgModuleSheaf, DgRing};
use crate::field::Field;
use crate::graded::{GcMonomial, GcPoly};
use crate::groebner::GroebnerBasis;
use crate::module::{ModVec, ModuleGb};
use crate::poly::{MonomialOrder, Poly, PolyRing};
use crate::pseudo_free::enumerate_monomials;

/// A bounded complex of finitely presented `P`-modules `P^{rank(n)} / relations(n)` with
/// `P`-linear differentials given by images of the basis vectors.
pub trait Complex {
    fn ring(&self) -> PolyRing;
    fn var_names(&self) -> Vec<String>;
    fn rank(&self, n: i32) -> usize;
    fn relations(&self, n: i32) -> Vec<ModVec>;
    /// Images in degree `n + 1` of the basis vectors of degree `n`.
    fn d_columns(&self, n: i32) -> Vec<ModVec>;
}

pub struct Component {
    pub degree: i32,
    pub basis: Vec<GcMonomial>,
    index: HashMap<GcMonomial, usize>,
    pub relations: Vec<ModVec>,
    gb: OnceLock<ModuleGb>,
    d: OnceLock<Vec<ModVec>>,
}

pub struct StalkAlgebra {
    pub point: usize,
    pub field: Field,
    pub pring: PolyRing,
    pub pvars: Vec<u32>,
    pub pnames: Vec<String>,
    pub neg_vars: Vec<(u32, i32)>,
    pos: HashMap<u32, usize>,
    diff: HashMap<u32, GcPoly>,
    relations: Vec<(i32, GcPoly)>,
    comps: Mutex<BTreeMap<i32, Arc<OnceLock<Arc<Component>>>>>,
    ideal0: OnceLock<GroebnerBasis>,
    h0_ideal: OnceLock<GroebnerBasis>,
}

impl std::fmt::Debug for StalkAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StalkAlgebra")
            .field("point", &self.point)
            .field("pvars", &self.pnames)
            .field("neg_vars", &self.neg_vars)
            .finish()
    }
}

impl StalkAlgebra {
    pub fn new(ring: &DgRing, x: usize) -> Self {
        let field = ring.field();
        let local = ring.local_vars(x);
        let pvars: Vec<u32> = local.iter().filter(|(_, d)| *d == 0).map(|(v, _)| *v).collect();
        let pnames = pvars.iter().map(|&v| ring.gen_name(v)).collect();
        let neg_vars = local.iter().filter(|(_, d)| *d < 0).copied().collect();
        let pos = pvars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let diff = local
            .iter()
            .map(|&(v, _)| {
                let val = ring
                    .differential(v as usize)
                    .at(x)
                    .cloned()
                    .unwrap_or_else(|| GcPoly::zero(field));
                (v, val)
            })
            .collect();
        let mut relations = Vec::new();
        for r in ring.relations() {
            if let Some(v) = r.at(x) {
                for (d, p) in v.homogeneous_parts() {
                    if !p.is_zero() {
                        relations.push((d, p));
                    }
                }
            }
        }
        StalkAlgebra {
            point: x,
            field,
            pring: PolyRing::new(field, pvars.len()),
            pvars,
            pnames,
            neg_vars,
            pos,
            diff,
            relations,
            comps: Mutex::new(BTreeMap::new()),
            ideal0: OnceLock::new(),
            h0_ideal: OnceLock::new(),
        }
    }

    fn basis_list(&self, n: i32) -> Vec<GcMonomial> {
        if n > 0 {
            return Vec::new();
        }
        enumerate_monomials(&self.neg_vars, n, 0)
            .into_iter()
            .filter(|m| m.degree() == n)
            .collect()
    }

    pub fn component(&self, n: i32) -> Arc<Component> {
        let cell = {
            let mut comps = self.comps.lock().expect("stalk cache poisoned");
            comps.entry(n).or_default().clone()
        };
        cell.get_or_init(|| Arc::new(self.build_component(n))).clone()
    }

    fn build_component(&self, n: i32) -> Component {
        let basis = self.basis_list(n);
        let index: HashMap<GcMonomial, usize> = basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut comp = Component {
            degree: n,
            basis,
            index,
            relations: Vec::new(),
            gb: OnceLock::new(),
            d: OnceLock::new(),
        };
        let mut rels = Vec::new();
        for (dr, r) in &self.relations {
            if *dr < n {
                continue;
            }
            for m in self.basis_list(n - dr) {
                let v = self.coords_in(&comp, &r.mul_monomial(&m));
                if !v.is_zero() && !rels.contains(&v) {
                    rels.push(v);
                }
            }
        }
        comp.relations = rels;
        comp
    }

    pub fn rank(&self, n: i32) -> usize {
        if n > 0 {
            0
        } else {
            self.component(n).basis.len()
        }
    }

    fn coords_in(&self, comp: &Component, a: &GcPoly) -> ModVec {
        let rank = comp.basis.len();
        let mut terms: Vec<Vec<(crate::poly::Exps, crate::field::Coeff)>> = vec![Vec::new(); rank];
        for (m, c) in a.terms() {
            assert_eq!(m.degree(), comp.degree, "coordinates of an element of another degree");
            let (even, rest) = m.split(|f| f.degree == 0);
            let j = *comp
                .index
                .get(&rest)
                .expect("monomial in generators local to the point");
            let mut e = self.pring.unit_exps();
            for f in even.factors() {
                e[self.pos[&f.var]] += f.exp;
            }
            terms[j].push((e, c.clone()));
        }
        ModVec(terms.into_iter().map(|t| Poly::from_terms(self.pring, t)).collect())
    }

    /// Coordinates of a homogeneous element of degree `n`.
    pub fn coords(&self, a: &GcPoly, n: i32) -> ModVec {
        if n > 0 {
            assert!(a.is_zero());
            return ModVec(Vec::new());
        }
        self.coords_in(&self.component(n), a)
    }

    pub fn element(&self, n: i32, v: &ModVec) -> GcPoly {
        let mut out = GcPoly::zero(self.field);
        if n > 0 {
            return out;
        }
        let comp = self.component(n);
        for (j, p) in v.0.iter().enumerate() {
            for (e, c) in p.terms() {
                let factors: Vec<crate::graded::Factor> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| crate::graded::Factor {
                        var: self.pvars[i],
                        exp: k,
                        degree: 0,
                    })
                    .collect();
                let (pm, _) = GcMonomial::from_factors(&factors).expect("even factors");
                let (m, _) = pm.mul(&comp.basis[j]).expect("disjoint variables");
                out = out.add(&GcPoly::term(self.field, m, c.clone()));
            }
        }
        out
    }

    pub fn gb(&self, n: i32) -> ModuleGb {
        let comp = self.component(n);
        comp.gb
            .get_or_init(|| ModuleGb::new(self.pring, comp.basis.len(), &comp.relations))
            .clone()
    }

    pub fn d(&self, a: &GcPoly) -> GcPoly {
        a.derivation(&|v| self.diff.get(&v).cloned().unwrap_or_else(|| GcPoly::zero(self.field)))
    }

    /// Columns `d(basis_j)` in degree `n + 1`.
    pub fn d_matrix(&self, n: i32) -> Vec<ModVec> {
        if n > 0 {
            return Vec::new();
        }
        let comp = self.component(n);
        comp.d
            .get_or_init(|| {
                comp.basis
                    .iter()
                    .map(|m| {
                        let dm = self.d(&GcPoly::term(self.field, m.clone(), self.field.one()));
                        self.coords(&dm, n + 1)
                    })
                    .collect()
            })
            .clone()
    }

    pub fn is_zero(&self, a: &GcPoly) -> bool {
        a.homogeneous_parts().into_iter().all(|(d, p)| {
            if d > 0 {
                p.is_zero()
            } else {
                self.gb(d).reduce(&self.coords(&p, d)).is_zero()
            }
        })
    }

    pub fn normal_form(&self, a: &GcPoly) -> GcPoly {
        let mut out = GcPoly::zero(self.field);
        for (d, p) in a.homogeneous_parts() {
            if d > 0 {
                continue;
            }
            let v = self.gb(d).reduce(&self.coords(&p, d));
            out = out.add(&self.element(d, &v));
        }
        out
    }

    /// Relations in degree 0 as an ideal of `P`.
    pub fn ideal0(&self) -> &GroebnerBasis {
        self.ideal0.get_or_init(|| {
            let rels: Vec<Poly> = self.component(0).relations.iter().map(|v| v.0[0].clone()).collect();
            GroebnerBasis::new(self.pring, &rels)
        })
    }

    /// The ideal of `P` whose quotient is `H^0` of the stalk.
    pub fn h0_ideal(&self) -> &GroebnerBasis {
        self.h0_ideal.get_or_init(|| {
            let mut gens: Vec<Poly> = self.component(0).relations.iter().map(|v| v.0[0].clone()).collect();
            gens.extend(self.d_matrix(-1).iter().map(|v| v.0[0].clone()));
            GroebnerBasis::new(self.pring, &gens)
        })
    }

    pub fn poly_of(&self, a: &GcPoly) -> Poly {
        self.coords(a, 0).0[0].clone()
    }

    pub fn gc_of(&self, p: &Poly) -> GcPoly {
        self.element(0, &ModVec(vec![p.clone()]))
    }

    pub fn format_vec(&self, n: i32, v: &ModVec, names: &dyn Fn(u32) -> String) -> String {
        self.element(n, v).format(names)
    }
}

impl Complex for StalkAlgebra {
    fn ring(&self) -> PolyRing {
        self.pring
    }

    fn var_names(&self) -> Vec<String> {
        self.pnames.clone()
    }

    fn rank(&self, n: i32) -> usize {
        StalkAlgebra::rank(self, n)
    }

    fn relations(&self, n: i32) -> Vec<ModVec> {
        if n > 0 {
            Vec::new()
        } else {
            self.component(n).relations.clone()
        }
    }

    fn d_columns(&self, n: i32) -> Vec<ModVec> {
        self.d_matrix(n)
    }
}

/// A complex given by explicit data on a window of degrees; zero outside.
#[derive(Clone, Debug)]
pub struct ExplicitComplex {
    pub ring: PolyRing,
    pub names: Vec<String>,
    pub ranks: BTreeMap<i32, usize>,
    pub rels: BTreeMap<i32, Vec<ModVec>>,
    pub d: BTreeMap<i32, Vec<ModVec>>,
}

impl Complex for ExplicitComplex {
    fn ring(&self) -> PolyRing {
        self.ring
    }

    fn var_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn rank(&self, n: i32) -> usize {
        self.ranks.get(&n).copied().unwrap_or(0)
    }

    fn relations(&self, n: i32) -> Vec<ModVec> {
        self.rels.get(&n).cloned().unwrap_or_default()
    }

    fn d_columns(&self, n: i32) -> Vec<ModVec> {
        let r = self.rank(n + 1);
        match self.d.get(&n) {
            Some(cols) if r > 0 => cols.clone(),
            _ => vec![ModVec::zero(self.ring, r); self.rank(n)],
        }
    }
}

/// Stalk at `x` of `B ⊗_A M` for a free DG module `M` over the base `A` of `B`, on degrees
/// `[n_min, n_max]` (differentials out of `n_max` included).
pub fn module_tensor_complex(b: &DgRing, m: &DgModuleSheaf, x: usize, n_min: i32, n_max: i32) -> ExplicitComplex {
    let s = b.stalk(x);
    let ring = s.pring;
    let local: Vec<usize> = (0..m.gens.len()).filter(|&j| m.gens[j].support.contains(x)).collect();
    let block = |n: i32| -> Vec<(usize, usize, i32)> {
        let mut off = 0;
        let mut out = Vec::new();
        for &j in &local {
            let deg = n - m.gens[j].degree;
            out.push((j, off, deg));
            off += s.rank(deg);
        }
        out
    };
    let total = |n: i32| -> usize { block(n).iter().map(|&(_, _, d)| s.rank(d)).sum() };
    let place = |n: i32, j: usize, v: &ModVec, acc: &mut ModVec| {
        for (jj, off, _) in block(n) {
            if jj == j {
                for (i, p) in v.0.iter().enumerate() {
                    acc.0[off + i] = acc.0[off + i].add(p);
                }
            }
        }
    };
    let mut ranks = BTreeMap::new();
    let mut rels = BTreeMap::new();
    let mut d = BTreeMap::new();
    for n in n_min..=n_max + 1 {
        let r = total(n);
        ranks.insert(n, r);
        let mut rs = Vec::new();
        for (j, _, deg) in block(n) {
            for v in Complex::relations(&*s, deg) {
                let mut acc = ModVec::zero(ring, r);
                place(n, j, &v, &mut acc);
                rs.push(acc);
            }
        }
        rels.insert(n, rs);
    }
    for n in n_min..=n_max {
        let r1 = total(n + 1);
        let mut cols = Vec::new();
        for (j, _, deg) in block(n) {
            let coeffs = m.coefficients_at(j, x);
            for (bi, bm) in s.component(deg).basis.clone().iter().enumerate() {
                let mut acc = ModVec::zero(ring, r1);
                if deg < 0 {
                    place(n + 1, j, &s.d_matrix(deg)[bi], &mut acc);
                }
                let bpoly = GcPoly::term(s.field, bm.clone(), s.field.one());
                for (k, c) in &coeffs {
                    let mut prod = bpoly.mul(c);
                    if deg % 2 != 0 {
                        prod = prod.neg();
                    }
                    let kd = n + 1 - m.gens[*k].degree;
                    if kd <= 0 && !prod.is_zero() {
                        place(n + 1, *k, &s.coords(&prod, kd), &mut acc);
                    }
                }
                cols.push(acc);
            }
        }
        d.insert(n, cols);
    }
    ExplicitComplex {
        ring,
        names: s.pnames.clone(),
        ranks,
        rels,
        d,
    }
}

/// Ring map `P_src → P_dst / J` given by images of the source variables, with preimages of the
/// target variables and the kernel computed through the graph ideal in an elimination order.
#[derive(Clone, Debug)]
pub struct RingPullback {
    pub src: PolyRing,
    pub dst: PolyRing,
    pub forward: Vec<Poly>,
    pub preimages: Vec<Option<Poly>>,
    pub kernel: Vec<Poly>,
    target_ideal: GroebnerBasis,
}

impl RingPullback {
    pub fn new(src: PolyRing, dst: PolyRing, forward: Vec<Poly>, dst_ideal: &GroebnerBasis) -> Self {
        let nb = dst.nvars;
        let na = src.nvars;
        let g = PolyRing::new(src.field, nb + na).with_order(MonomialOrder::Block(nb));
        let bmap: Vec<usize> = (0..nb).collect();
        let mut gens: Vec<Poly> = dst_ideal.gens().iter().map(|p| p.embed(g, &bmap)).collect();
        for (i, f) in forward.iter().enumerate() {
            gens.push(g.var(nb + i).sub(&f.embed(g, &bmap)));
        }
        let gb = GroebnerBasis::new(g, &gens);
        let is_a: Vec<bool> = (0..nb + na).map(|i| i >= nb).collect();
        let back: Vec<Poly> = (0..nb)
            .map(|_| src.zero())
            .chain((0..na).map(|i| src.var(i)))
            .collect();
        let preimages = (0..nb)
            .map(|j| {
                let nf = gb.reduce(&g.var(j));
                nf.uses_only(&is_a).then(|| nf.substitute(src, &back))
            })
            .collect();
        let kernel = gb
            .gens()
            .iter()
            .filter(|p| p.uses_only(&is_a))
            .map(|p| p.substitute(src, &back))
            .collect();
        RingPullback {
            src,
            dst,
            forward,
            preimages,
            kernel,
            target_ideal: dst_ideal.clone(),
        }
    }

    pub fn surjective(&self) -> bool {
        self.preimages.iter().all(Option::is_some)
    }

    /// A source polynomial mapping to `p` modulo the target ideal (requires surjectivity).
    pub fn pull(&self, p: &Poly) -> Poly {
        let imgs: Vec<Poly> = self
            .preimages
            .iter()
            .map(|q| q.clone().expect("pullback along a surjection"))
            .collect();
        p.substitute(self.src, &imgs)
    }

    pub fn push(&self, p: &Poly) -> Poly {
        self.target_ideal.reduce(&p.substitute(self.dst, &self.forward))
    }

    pub fn pull_vec(&self, v: &ModVec) -> ModVec {
        v.map_polys(|p| self.pull(p))
    }

    /// `kernel · e_j` for every basis vector of a free module of rank `rank`.
    pub fn kernel_relations(&self, rank: usize) -> Vec<ModVec> {
        let mut out = Vec::new();
        for j in 0..rank {
            for k in &self.kernel {
                let mut v = ModVec::zero(self.src, rank);
                v.0[j] = k.clone();
                out.push(v);
            }
        }
        out
    }

    pub fn injective_modulo(&self, src_ideal: &GroebnerBasis) -> bool {
        self.kernel.iter().all(|k| src_ideal.contains(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo_free::{Generator, Section};
    use crate::space::FiniteSpace;

    fn koszul_x() -> Arc<DgRing> {
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
        DgRing::from_parts(
            &a,
            vec![Generator { name: "y".into(), degree: -1, support: w }],
            vec![Section::uniform(w, GcPoly::var(f, 0, 0))],
            Vec::new(),
        )
        .unwrap()
    }

    #[test]
    fn components_and_differential() {
        let b = koszul_x();
        let s = b.stalk(0);
        assert_eq!(s.rank(0), 1);
        assert_eq!(s.rank(-1), 1);
        assert_eq!(s.rank(-2), 0);
        let d = s.d_matrix(-1);
        assert_eq!(d[0].0[0], s.pring.var(0));
        assert_eq!(s.h0_ideal().gens(), &[s.pring.var(0)]);
    }

    #[test]
    fn pullback_of_identity_and_projection() {
        let f = Field::Rationals;
        let p2 = PolyRing::new(f, 2);
        let p1 = PolyRing::new(f, 1);
        // k[u, v] → k[t], u ↦ t, v ↦ t^2 : surjective with kernel (v - u^2)
        let zero = GroebnerBasis::new(p1, &[]);
        let pb = RingPullback::new(p2, p1, vec![p1.var(0), p1.var(0).pow(2)], &zero);
        assert!(pb.surjective());
        assert_eq!(pb.kernel.len(), 1);
        assert!(GroebnerBasis::new(p2, &pb.kernel).contains(&p2.var(1).sub(&p2.var(0).pow(2))));
        // k[u] → k[t], u ↦ t^2 is not surjective
        let pb = RingPullback::new(p1, p1, vec![p1.var(0).pow(2)], &zero);
        assert!(!pb.surjective());
    }
}
