//! Truncated pseudo-semi-free resolutions with certified degree conditions, factorization of
//! quasi-isomorphisms through split acyclic extensions, Ore squares and homotopy witnesses.
//!
//! Stage `q` of a resolution `φ_q : F_q → B` satisfies
//! (i) `φ_q`, `B(φ_q)`, `H(φ_q)` surjective in degrees `≥ -q`, and
//! (ii) `H(φ_q)` bijective in degrees `≥ -q + 1`,
//! at every stalk. All module computations at a point happen over the degree-0 polynomial ring
//! `P_F` of the resolution, the target being pulled back along `P_F → B^0`.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dg::{tensor_over_a, DgRing, FiberProduct, SheafHom};
use crate::error::{Error, Result};
use crate::graded::GcPoly;
use crate::homology::{chain_checks, chain_pullback, cycles_of, h0_pullback, h_comparison, is_quasi_iso, QisoVerdict, Window};
use crate::module::{combine, syzygies, Lifter, ModVec, ModuleGb};
use crate::poly::PolyRing;
use crate::pseudo_free::{Generator, Section};
use crate::stalk::{RingPullback, StalkAlgebra};

const MAX_GENERATORS: usize = 600;

/// Why a generator was adjoined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// Degree-0 generator hitting a ring generator of the target.
    Ring,
    /// Hits a generator whose coboundary must be reached.
    Coboundary,
    /// Cycle paired with a coboundary generator.
    CoboundaryPartner,
    /// Cycle correcting a surjectivity defect.
    Surjectivity,
    /// Cycle hitting a cohomology class.
    Cycle,
    /// Kills a cycle mapping to a boundary.
    Killer,
    /// Degree-0 generator of a fiber product.
    Family,
}

#[derive(Clone, Debug)]
pub enum Target {
    Single(Arc<DgRing>),
    Fiber(FiberProduct),
}

impl Target {
    pub fn base(&self) -> Result<Arc<DgRing>> {
        match self {
            Target::Single(b) => Ok(b.base_ring()),
            Target::Fiber(fp) => {
                let a0 = fp.phi0.source.base_ring();
                let a1 = fp.phi1.source.base_ring();
                if !a0.same_structure(&a1) || !fp.target().extends(&a0) {
                    return Err(Error::Mismatch("fiber product legs over different bases".into()));
                }
                Ok(a0)
            }
        }
    }

    pub fn factors(&self) -> Vec<Arc<DgRing>> {
        match self {
            Target::Single(b) => vec![b.clone()],
            Target::Fiber(fp) => vec![fp.phi0.source.clone(), fp.phi1.source.clone()],
        }
    }

    fn fiber(&self) -> Option<&FiberProduct> {
        match self {
            Target::Single(_) => None,
            Target::Fiber(fp) => Some(fp),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertEntry {
    pub point: String,
    pub degree: i32,
    pub condition: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub q: usize,
    pub entries: Vec<CertEntry>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn first_failure(&self) -> Option<&CertEntry> {
        self.entries.iter().find(|e| !e.pass)
    }
}

/// Stage `q` of a resolution: the ring `F_q`, its maps to the target factors and the certificate.
#[derive(Clone, Debug)]
pub struct ResolutionStage {
    pub q: usize,
    pub target: Target,
    pub ring: Arc<DgRing>,
    pub legs: Vec<SheafHom>,
    pub kinds: Vec<GenKind>,
    pub stage_of: Vec<usize>,
    pub certificate: Certificate,
}

impl ResolutionStage {
    pub fn phi(&self) -> &SheafHom {
        &self.legs[0]
    }

    /// The generator specification `F_q(I)` (new generators only).
    pub fn spec(&self) -> crate::pseudo_free::GeneratorSpec {
        self.ring.own_spec()
    }

    /// The sub-resolution `F_p ⊆ F_q` for `p ≤ q`.
    pub fn truncated(&self, p: usize) -> Result<ResolutionStage> {
        let drop: Vec<usize> = (0..self.stage_of.len()).filter(|&i| self.stage_of[i] > p).collect();
        let mut s = remove_generators(self, &drop)?;
        s.q = p;
        s.certificate = Certificate::default();
        Ok(s)
    }
}

fn mix(seed: u64, q: usize, x: usize, step: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (q as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ (x as u64).wrapping_mul(0x1656_67B1_9E37_79F9)
        ^ step
}

struct Constraint {
    phi: [SheafHom; 2],
    sb: Arc<StalkAlgebra>,
    pb: RingPullback,
}

/// Target stalk data at one point, pulled back to `P_F`.
struct Local {
    x: usize,
    sf: Arc<StalkAlgebra>,
    pf: PolyRing,
    legs: Vec<SheafHom>,
    fs: Vec<Arc<StalkAlgebra>>,
    pbs: Vec<RingPullback>,
    cons: Option<Constraint>,
}

impl Local {
    fn new(ring: &Arc<DgRing>, legs: &[SheafHom], fiber: Option<&FiberProduct>, x: usize) -> Local {
        let sf = ring.stalk(x);
        let fs: Vec<Arc<StalkAlgebra>> = legs.iter().map(|l| l.target.stalk(x)).collect();
        let pbs = legs
            .iter()
            .zip(&fs)
            .map(|(l, s)| {
                let fwd = sf.pvars.iter().map(|&v| s.poly_of(&l.image_at(v as usize, x))).collect();
                RingPullback::new(sf.pring, s.pring, fwd, s.ideal0())
            })
            .collect();
        let cons = fiber.map(|fp| {
            let sb = fp.target().stalk(x);
            let fwd = sf
                .pvars
                .iter()
                .map(|&v| sb.poly_of(&fp.phi0.eval_at(x, &legs[0].image_at(v as usize, x))))
                .collect();
            let pb = RingPullback::new(sf.pring, sb.pring, fwd, sb.ideal0());
            Constraint {
                phi: [fp.phi0.clone(), fp.phi1.clone()],
                sb,
                pb,
            }
        });
        Local {
            x,
            pf: sf.pring,
            sf,
            legs: legs.to_vec(),
            fs,
            pbs,
            cons,
        }
    }

    fn surjective(&self) -> bool {
        self.pbs.iter().all(RingPullback::surjective) && self.cons.as_ref().is_none_or(|c| c.pb.surjective())
    }

    fn amb(&self, m: i32) -> usize {
        self.fs.iter().map(|s| s.rank(m)).sum()
    }

    fn offsets(&self, m: i32) -> Vec<usize> {
        let mut off = 0;
        self.fs
            .iter()
            .map(|s| {
                let o = off;
                off += s.rank(m);
                o
            })
            .collect()
    }

    fn place(&self, amb: usize, off: usize, v: &ModVec) -> ModVec {
        let mut out = ModVec::zero(self.pf, amb);
        for (i, p) in v.0.iter().enumerate() {
            out.0[off + i] = p.clone();
        }
        out
    }

    fn coords(&self, m: i32, e: &[GcPoly]) -> ModVec {
        let mut out = Vec::with_capacity(self.amb(m));
        for (k, s) in self.fs.iter().enumerate() {
            if s.rank(m) > 0 {
                out.extend(self.pbs[k].pull_vec(&s.coords(&e[k], m)).0);
            }
        }
        ModVec(out)
    }

    fn element(&self, m: i32, v: &ModVec) -> Vec<GcPoly> {
        let offs = self.offsets(m);
        self.fs
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let r = s.rank(m);
                let slice = v.slice(offs[k], offs[k] + r).map_polys(|p| self.pbs[k].push(p));
                s.element(m, &slice)
            })
            .collect()
    }

    fn rels(&self, m: i32) -> Vec<ModVec> {
        if m > 0 {
            return Vec::new();
        }
        let amb = self.amb(m);
        let offs = self.offsets(m);
        let mut out = Vec::new();
        for (k, s) in self.fs.iter().enumerate() {
            for v in &s.component(m).relations {
                out.push(self.place(amb, offs[k], &self.pbs[k].pull_vec(v)));
            }
            for v in self.pbs[k].kernel_relations(s.rank(m)) {
                out.push(self.place(amb, offs[k], &v));
            }
        }
        out
    }

    fn dcols(&self, m: i32) -> Vec<ModVec> {
        let amb1 = self.amb(m + 1);
        let offs1 = self.offsets(m + 1);
        let mut out = Vec::new();
        for (k, s) in self.fs.iter().enumerate() {
            if m + 1 > 0 {
                out.extend((0..s.rank(m)).map(|_| ModVec::zero(self.pf, amb1)));
                continue;
            }
            for col in s.d_matrix(m) {
                out.push(self.place(amb1, offs1[k], &self.pbs[k].pull_vec(&col)));
            }
        }
        out
    }

    fn apply_d(&self, m: i32, v: &ModVec) -> ModVec {
        combine(self.pf, self.amb(m + 1), &v.0, &self.dcols(m))
    }

    /// Generators of the target component `T^m` inside the ambient module.
    fn tgens(&self, m: i32) -> Vec<ModVec> {
        let amb = self.amb(m);
        let units: Vec<ModVec> = (0..amb).map(|j| ModVec::unit(self.pf, amb, j)).collect();
        let Some(c) = &self.cons else { return units };
        let rb = c.sb.rank(m);
        if rb == 0 || amb == 0 {
            return units;
        }
        let mut gens = Vec::new();
        for (k, s) in self.fs.iter().enumerate() {
            for mono in &s.component(m).basis {
                let e = GcPoly::term(s.field, mono.clone(), s.field.one());
                let img = c.phi[k].eval_at(self.x, &e);
                let v = c.pb.pull_vec(&c.sb.coords(&img, m));
                gens.push(if k == 1 { v.neg() } else { v });
            }
        }
        gens.extend(c.sb.component(m).relations.iter().map(|v| c.pb.pull_vec(v)));
        gens.extend(c.pb.kernel_relations(rb));
        let mut out: Vec<ModVec> = Vec::new();
        for s in syzygies(self.pf, rb, &gens) {
            let v = s.slice(0, amb);
            if !v.is_zero() && !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    fn phi_elem(&self, f: &GcPoly) -> Vec<GcPoly> {
        self.legs.iter().map(|l| l.eval_at(self.x, f)).collect()
    }

    fn phi(&self, m: i32, f: &GcPoly) -> ModVec {
        self.coords(m, &self.phi_elem(f))
    }

    fn f_basis(&self, m: i32) -> Vec<GcPoly> {
        if m > 0 {
            return Vec::new();
        }
        self.sf
            .component(m)
            .basis
            .iter()
            .map(|mono| GcPoly::term(self.sf.field, mono.clone(), self.sf.field.one()))
            .collect()
    }
}

struct Builder {
    target: Target,
    base: Arc<DgRing>,
    factors: Vec<Arc<DgRing>>,
    gens: Vec<Generator>,
    diffs: Vec<Section>,
    images: Vec<Vec<Section>>,
    kinds: Vec<GenKind>,
    stage_of: Vec<usize>,
    names: HashSet<String>,
    counter: usize,
    seed: u64,
    ring: Arc<DgRing>,
    legs: Vec<SheafHom>,
}

impl Builder {
    fn new(target: Target, seed: u64) -> Result<Self> {
        let base = target.base()?;
        let factors = target.factors();
        for f in &factors {
            if !f.extends(&base) {
                return Err(Error::Mismatch("target is not a ring over the base".into()));
            }
        }
        let mut names: HashSet<String> = base.gens().iter().map(|g| g.name.clone()).collect();
        for f in &factors {
            names.extend(f.gens().iter().map(|g| g.name.clone()));
        }
        let ring = DgRing::from_parts_unchecked(&base, Vec::new(), Vec::new(), Vec::new())?;
        let mut b = Builder {
            images: vec![Vec::new(); factors.len()],
            target,
            base,
            factors,
            gens: Vec::new(),
            diffs: Vec::new(),
            kinds: Vec::new(),
            stage_of: Vec::new(),
            names,
            counter: 0,
            seed,
            ring,
            legs: Vec::new(),
        };
        b.rebuild()?;
        Ok(b)
    }

    fn rebuild(&mut self) -> Result<()> {
        self.ring = DgRing::from_parts_unchecked(&self.base, self.gens.clone(), self.diffs.clone(), Vec::new())?;
        self.legs = self
            .factors
            .iter()
            .zip(&self.images)
            .map(|(f, imgs)| SheafHom::relative_unchecked(self.ring.clone(), f.clone(), imgs.clone()))
            .collect::<Result<_>>()?;
        Ok(())
    }

    fn local(&self, x: usize) -> Local {
        Local::new(&self.ring, &self.legs, self.target.fiber(), x)
    }

    fn fresh_name(&mut self) -> String {
        loop {
            let n = format!("t{}", self.counter);
            self.counter += 1;
            if self.names.insert(n.clone()) {
                return n;
            }
        }
    }

    /// Adjoins a generator supported on the minimal open of `x`; returns its variable index.
    fn adjoin(&mut self, x: usize, degree: i32, d: GcPoly, imgs: Vec<GcPoly>, kind: GenKind, q: usize) -> Result<u32> {
        if self.gens.len() >= MAX_GENERATORS {
            return Err(Error::pre(format!("resolution exceeded {MAX_GENERATORS} generators")));
        }
        let support = self.base.space().minimal_open(x);
        let name = self.fresh_name();
        let idx = (self.base.num_gens() + self.gens.len()) as u32;
        self.gens.push(Generator { name, degree, support });
        self.diffs.push(Section::uniform(support, d));
        for (k, img) in imgs.into_iter().enumerate() {
            self.images[k].push(Section::uniform(support, img));
        }
        self.kinds.push(kind);
        self.stage_of.push(q);
        Ok(idx)
    }

    fn shuffled<T>(&self, mut v: Vec<T>, q: usize, x: usize, step: u64) -> Vec<T> {
        if self.seed != 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, q, x, step));
            v.shuffle(&mut rng);
        }
        v
    }

    fn var(&self, idx: u32, degree: i32) -> GcPoly {
        GcPoly::var(self.base.field(), idx, degree)
    }

    fn ring_generators(&mut self, x: usize) -> Result<()> {
        if let Some(fp) = self.target.fiber().cloned() {
            return self.fiber_families(x, &fp);
        }
        let b = self.factors[0].clone();
        let sb = b.stalk(x);
        let cands = self.shuffled(sb.pvars.clone(), 0, x, 1);
        for v in cands {
            let local = self.local(x);
            let j = sb.pvars.iter().position(|&w| w == v).expect("local variable");
            if local.pbs[0].preimages[j].is_some() {
                continue;
            }
            let img = b.var(v as usize);
            let zero = GcPoly::zero(b.field());
            self.adjoin(x, 0, zero, vec![img], GenKind::Ring, 0)?;
            self.rebuild()?;
        }
        Ok(())
    }

    fn fiber_families(&mut self, x: usize, fp: &FiberProduct) -> Result<()> {
        let field = self.base.field();
        let s0 = fp.phi0.source.stalk(x);
        let s1 = fp.phi1.source.stalk(x);
        let sb = fp.target().stalk(x);
        let fwd = |h: &SheafHom, s: &StalkAlgebra| -> Vec<crate::poly::Poly> {
            s.pvars.iter().map(|&v| sb.poly_of(&h.image_at(v as usize, x))).collect()
        };
        let pb0 = RingPullback::new(s0.pring, sb.pring, fwd(&fp.phi0, &s0), sb.ideal0());
        let pb1 = RingPullback::new(s1.pring, sb.pring, fwd(&fp.phi1, &s1), sb.ideal0());
        if !pb0.surjective() || !pb1.surjective() {
            return Err(Error::pre(format!(
                "fiber product leg is not surjective in degree 0 at {}",
                self.base.space().name(x)
            )));
        }
        let k = self.base.num_gens() as u32;
        let mut fams: Vec<(GcPoly, GcPoly)> = Vec::new();
        for &v in s0.pvars.iter().filter(|&&v| v >= k) {
            let b0 = GcPoly::var(field, v, 0);
            let img = sb.poly_of(&fp.phi0.eval_at(x, &b0));
            fams.push((b0, s1.gc_of(&pb1.pull(&img))));
        }
        for &w in s1.pvars.iter().filter(|&&w| w >= k) {
            let b1 = GcPoly::var(field, w, 0);
            let img = sb.poly_of(&fp.phi1.eval_at(x, &b1));
            fams.push((s0.gc_of(&pb0.pull(&img)), b1));
        }
        for kp in &pb1.kernel {
            if !s1.ideal0().contains(kp) {
                fams.push((GcPoly::zero(field), s1.gc_of(kp)));
            }
        }
        let mut seen: Vec<(GcPoly, GcPoly)> = Vec::new();
        for f in self.shuffled(fams, 0, x, 1) {
            if seen.contains(&f) {
                continue;
            }
            seen.push(f.clone());
            self.adjoin(x, 0, GcPoly::zero(field), vec![f.0, f.1], GenKind::Family, 0)?;
        }
        self.rebuild()
    }

    fn bug(&self, x: usize, degree: i32, condition: &str, detail: &str) -> Error {
        Error::Certification {
            point: self.base.space().name(x).to_string(),
            degree,
            condition: condition.into(),
            detail: detail.into(),
        }
    }

    /// Makes `d(T^{n-1})` reachable from `φ(d F^{n-1})`.
    fn coboundaries(&mut self, x: usize, q: usize) -> Result<()> {
        let n = -(q as i32);
        let local = self.local(x);
        if !local.surjective() {
            return Err(self.bug(x, 0, "i", "degree-0 map not surjective after ring generators"));
        }
        let prev = local.tgens(n - 1);
        if prev.is_empty() {
            return Ok(());
        }
        let amb = local.amb(n);
        let mut span: Vec<ModVec> = local
            .f_basis(n - 1)
            .iter()
            .map(|f| local.phi(n, &self.ring.d_at(x, f)))
            .collect();
        span.extend(local.rels(n));
        let mut gb = ModuleGb::new(local.pf, amb, &span);
        let lifter0 = (q == 0).then(|| {
            let mut gens: Vec<ModVec> = local.f_basis(0).iter().map(|f| local.phi(0, f)).collect();
            gens.extend(local.rels(0));
            Lifter::new(local.pf, amb, &gens)
        });
        for g in self.shuffled(prev, q, x, 2) {
            let dg = local.apply_d(n - 1, &g);
            if gb.contains(&dg) {
                continue;
            }
            let gel = local.element(n - 1, &g);
            let dgel: Vec<GcPoly> = gel.iter().zip(&local.fs).map(|(e, s)| s.d(e)).collect();
            if let Some(l) = &lifter0 {
                let c = l
                    .lift(&dg)
                    .ok_or_else(|| self.bug(x, 0, "i", "coboundary outside the image of the degree-0 ring"))?;
                let a = local.sf.element(0, &c.slice(0, local.sf.rank(0)));
                self.adjoin(x, -1, a, gel, GenKind::Coboundary, q)?;
            } else {
                let t1 = self.adjoin(x, n, GcPoly::zero(self.base.field()), dgel, GenKind::CoboundaryPartner, q)?;
                let d = self.var(t1, n);
                self.adjoin(x, n - 1, d, gel, GenKind::Coboundary, q)?;
            }
            span.push(dg);
            gb = ModuleGb::new(local.pf, amb, &span);
        }
        self.rebuild()
    }

    /// Makes `φ` surjective onto `T^n` by cycles `g - φ(f)`.
    fn surjectivity(&mut self, x: usize, q: usize) -> Result<()> {
        let n = -(q as i32);
        let local = self.local(x);
        let tg = local.tgens(n);
        if tg.is_empty() {
            return Ok(());
        }
        let amb = local.amb(n);
        let basis = local.f_basis(n);
        let mut span: Vec<ModVec> = basis.iter().map(|f| local.phi(n, f)).collect();
        span.extend(local.rels(n));
        let mut gb = ModuleGb::new(local.pf, amb, &span);
        let mut dgens: Vec<ModVec> = basis
            .iter()
            .map(|f| local.phi(n + 1, &self.ring.d_at(x, f)))
            .collect();
        dgens.extend(local.rels(n + 1));
        let lifter = Lifter::new(local.pf, local.amb(n + 1), &dgens);
        for g in self.shuffled(tg, q, x, 3) {
            if gb.contains(&g) {
                continue;
            }
            let dg = local.apply_d(n, &g);
            let c = lifter
                .lift(&dg)
                .ok_or_else(|| self.bug(x, n + 1, "i", "coboundary not reached by the previous stage"))?;
            let f: GcPoly = basis
                .iter()
                .zip(&c.0)
                .fold(GcPoly::zero(self.base.field()), |acc, (b, p)| acc.add(&local.sf.gc_of(p).mul(b)));
            let gel = local.element(n, &g);
            let z: Vec<GcPoly> = gel.iter().zip(local.phi_elem(&f)).map(|(a, b)| a.sub(&b)).collect();
            self.adjoin(x, n, GcPoly::zero(self.base.field()), z, GenKind::Surjectivity, q)?;
            span.push(g);
            gb = ModuleGb::new(local.pf, amb, &span);
        }
        self.rebuild()
    }

    /// Makes `H^n(φ)` surjective.
    fn cycles(&mut self, x: usize, q: usize) -> Result<()> {
        let n = -(q as i32);
        let local = self.local(x);
        let tg = local.tgens(n);
        if tg.is_empty() {
            return Ok(());
        }
        let amb = local.amb(n);
        let amb1 = local.amb(n + 1);
        let tcycles: Vec<ModVec> = if amb1 == 0 {
            tg.clone()
        } else {
            let mut gens: Vec<ModVec> = tg.iter().map(|g| local.apply_d(n, g)).collect();
            gens.extend(local.rels(n + 1));
            let mut out: Vec<ModVec> = Vec::new();
            for s in syzygies(local.pf, amb1, &gens) {
                let z = combine(local.pf, amb, &s.0[..tg.len()], &tg);
                if !z.is_zero() && !out.contains(&z) {
                    out.push(z);
                }
            }
            out
        };
        let mut span: Vec<ModVec> = cycles_of(&*local.sf, n)
            .iter()
            .map(|v| local.phi(n, &local.sf.element(n, v)))
            .collect();
        span.extend(local.tgens(n - 1).iter().map(|g| local.apply_d(n - 1, g)));
        span.extend(local.rels(n));
        let mut gb = ModuleGb::new(local.pf, amb, &span);
        for z in self.shuffled(tcycles, q, x, 4) {
            if gb.contains(&z) {
                continue;
            }
            let zel = local.element(n, &z);
            self.adjoin(x, n, GcPoly::zero(self.base.field()), zel, GenKind::Cycle, q)?;
            span.push(z);
            gb = ModuleGb::new(local.pf, amb, &span);
        }
        self.rebuild()
    }

    /// Makes `H^{n+1}(φ)` injective.
    fn killers(&mut self, x: usize, q: usize) -> Result<()> {
        let n = -(q as i32);
        let local = self.local(x);
        let sf = local.sf.clone();
        let rf1 = sf.rank(n + 1);
        let zf = cycles_of(&*sf, n + 1);
        if zf.is_empty() {
            return Ok(());
        }
        let amb1 = local.amb(n + 1);
        let tg = local.tgens(n);
        let mut gens: Vec<ModVec> = zf.iter().map(|z| local.phi(n + 1, &sf.element(n + 1, z))).collect();
        gens.extend(tg.iter().map(|g| local.apply_d(n, g).neg()));
        gens.extend(local.rels(n + 1));
        let syz = if amb1 == 0 {
            (0..gens.len()).map(|j| ModVec::unit(local.pf, gens.len(), j)).collect()
        } else {
            syzygies(local.pf, amb1, &gens)
        };
        let mut fb: Vec<ModVec> = sf.d_matrix(n);
        let mut gb = ModuleGb::new(local.pf, rf1, &fb);
        let amb = local.amb(n);
        for s in self.shuffled(syz, q, x, 5) {
            let a = combine(local.pf, rf1, &s.0[..zf.len()], &zf);
            if a.is_zero() || gb.contains(&a) {
                continue;
            }
            let b = combine(local.pf, amb, &s.0[zf.len()..zf.len() + tg.len()], &tg);
            let bel = local.element(n, &b);
            self.adjoin(x, n, sf.element(n + 1, &a), bel, GenKind::Killer, q)?;
            fb.push(a);
            gb = ModuleGb::new(local.pf, rf1, &fb);
        }
        self.rebuild()
    }

    fn finish(self, q: usize) -> Result<ResolutionStage> {
        let ring = DgRing::from_parts(&self.base, self.gens.clone(), self.diffs.clone(), Vec::new())?;
        let legs = self
            .factors
            .iter()
            .zip(&self.images)
            .map(|(f, imgs)| SheafHom::relative(ring.clone(), f.clone(), imgs.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolutionStage {
            q,
            target: self.target,
            ring,
            legs,
            kinds: self.kinds,
            stage_of: self.stage_of,
            certificate: Certificate::default(),
        })
    }
}

fn build(target: Target, q_max: usize, seed: u64) -> Result<ResolutionStage> {
    let mut b = Builder::new(target, seed)?;
    let points = b.base.space().descending_points();
    for q in 0..=q_max {
        for &x in &points {
            if q == 0 {
                b.ring_generators(x)?;
            }
            b.coboundaries(x, q)?;
            if q > 0 {
                b.surjectivity(x, q)?;
            }
            b.cycles(x, q)?;
            if q > 0 {
                b.killers(x, q)?;
            }
        }
    }
    b.finish(q_max)
}

/// Resolution of `b` over its base through stage `q_max`; `seed = 0` keeps input order.
pub fn resolve(b: &Arc<DgRing>, q_max: usize, seed: u64) -> Result<ResolutionStage> {
    let mut stage = build(Target::Single(b.clone()), q_max, seed)?;
    let cert = certify(&stage)?;
    if let Some(f) = cert.first_failure() {
        return Err(Error::Certification {
            point: f.point.clone(),
            degree: f.degree,
            condition: f.condition.clone(),
            detail: "resolution failed its own certificate".into(),
        });
    }
    stage.certificate = cert;
    Ok(stage)
}

/// Recomputes conditions (i) and (ii) from scratch through the homology module.
pub fn certify(stage: &ResolutionStage) -> Result<Certificate> {
    let q = stage.q as i32;
    if let Target::Fiber(_) = stage.target {
        let window = Window::new(-q + 1, 0)?;
        let mut entries = Vec::new();
        for (k, leg) in stage.legs.iter().enumerate() {
            let v = is_quasi_iso(leg, window)?;
            let (point, degree) = v.witness.clone().unwrap_or_else(|| ("*".into(), 0));
            entries.push(CertEntry {
                point,
                degree,
                condition: format!("ii.leg{k}"),
                pass: v.holds,
            });
        }
        return Ok(Certificate { q: stage.q, entries });
    }
    let phi = stage.phi();
    let space = stage.ring.space().clone();
    let per_point: Vec<Vec<CertEntry>> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let name = space.name(x).to_string();
            let entry = |degree: i32, condition: &str, pass: bool| CertEntry {
                point: name.clone(),
                degree,
                condition: condition.into(),
                pass,
            };
            let mut out = Vec::new();
            let cpb = chain_pullback(phi, x);
            if !cpb.surjective() {
                out.push(entry(0, "i.map", false));
                return out;
            }
            for n in (-q..=0).rev() {
                let c = chain_checks(phi, x, n, &cpb);
                out.push(entry(n, "i.map", c.map_surjective));
                out.push(entry(n, "i.boundary", c.boundaries_surjective));
                out.push(entry(n, "i.cohomology", c.cohomology_surjective));
            }
            let h0 = h0_pullback(phi, x);
            for n in (-q + 1..=0).rev() {
                let (s, i) = h_comparison(phi, x, n, &h0);
                out.push(entry(n, "ii.bijective", s && i));
            }
            out
        })
        .collect();
    Ok(Certificate {
        q: stage.q,
        entries: per_point.into_iter().flatten().collect(),
    })
}

/// Removes the listed own generators together with everything whose differential depends on them.
pub fn remove_generators(stage: &ResolutionStage, drop: &[usize]) -> Result<ResolutionStage> {
    let ring = &stage.ring;
    let k = ring.num_base_gens();
    let own = ring.own_gens().len();
    let mut dead = vec![false; own];
    for &i in drop {
        dead[i] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..own {
            if dead[i] {
                continue;
            }
            let d = ring.differential(k + i);
            let uses_dead = d
                .values
                .values()
                .any(|v| v.vars().iter().any(|&u| u as usize >= k && dead[u as usize - k]));
            if uses_dead {
                dead[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut newidx = vec![0u32; k + own];
    for (i, slot) in newidx.iter_mut().enumerate().take(k) {
        *slot = i as u32;
    }
    let mut next = k as u32;
    for i in 0..own {
        if !dead[i] {
            newidx[k + i] = next;
            next += 1;
        }
    }
    let field = ring.field();
    let remap = |s: &Section| {
        s.map_values(|_, v| {
            v.substitute(&|u| GcPoly::var(field, newidx[u as usize], ring.gens()[u as usize].degree))
        })
    };
    let keep: Vec<usize> = (0..own).filter(|&i| !dead[i]).collect();
    let gens = keep.iter().map(|&i| ring.own_gens()[i].clone()).collect();
    let diffs = keep.iter().map(|&i| remap(ring.differential(k + i))).collect();
    let base = ring.base_ring();
    let new_ring = DgRing::from_parts_unchecked(&base, gens, diffs, Vec::new())?;
    let legs = stage
        .legs
        .iter()
        .map(|l| {
            let imgs = keep.iter().map(|&i| l.images[k + i].clone()).collect();
            SheafHom::relative_unchecked(new_ring.clone(), l.target.clone(), imgs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResolutionStage {
        q: stage.q,
        target: stage.target.clone(),
        ring: new_ring,
        legs,
        kinds: keep.iter().map(|&i| stage.kinds[i]).collect(),
        stage_of: keep.iter().map(|&i| stage.stage_of[i]).collect(),
        certificate: Certificate::default(),
    })
}

/// The stage with its last adjoined generator deleted.
pub fn mutant_drop_last(stage: &ResolutionStage) -> Result<Option<ResolutionStage>> {
    let own = stage.ring.own_gens().len();
    if own == 0 {
        return Ok(None);
    }
    remove_generators(stage, &[own - 1]).map(Some)
}

/// The stage with its last degree-0 ring generator (and dependents) deleted.
pub fn mutant_drop_ring_generator(stage: &ResolutionStage) -> Result<Option<ResolutionStage>> {
    match stage.kinds.iter().rposition(|k| *k == GenKind::Ring) {
        Some(i) => remove_generators(stage, &[i]).map(Some),
        None => Ok(None),
    }
}

/// `φ = φ⁺ ∘ η` with `A⁺ = A ⊗ C`, `C` a split contractible ring of pairs `(z, w; dw = z)`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub plus: Arc<DgRing>,
    pub eta: SheafHom,
    pub eps: SheafHom,
    pub phi_plus: SheafHom,
    pub contractible: Arc<DgRing>,
}

pub fn factorize(phi: &SheafHom, window: Window) -> Result<Factorization> {
    let verdict = is_quasi_iso(phi, window)?;
    if !verdict.holds {
        let (p, n) = verdict.witness.unwrap_or_default();
        return Err(Error::pre(format!("not a quasi-isomorphism: {} at ({p}, {n})", verdict.detail)));
    }
    let a = phi.source.clone();
    let b = phi.target.clone();
    let space = a.space().clone();
    let field = a.field();
    let mut names: HashSet<String> = a.gens().iter().map(|g| g.name.clone()).collect();
    let mut counter = 0usize;
    let mut fresh = |prefix: &str| loop {
        let n = format!("{prefix}{counter}");
        counter += 1;
        if names.insert(n.clone()) {
            return n;
        }
    };
    let mut gens: Vec<Generator> = Vec::new();
    let mut diffs: Vec<Section> = Vec::new();
    let mut images: Vec<Section> = Vec::new();
    let a_len = a.num_gens() as u32;
    for (i, g) in b.gens().iter().enumerate().skip(b.num_base_gens()) {
        if g.degree < window.min {
            continue;
        }
        let maximal: Vec<usize> = g
            .support
            .points()
            .filter(|&y| !g.support.points().any(|z| z != y && space.leq(y, z)))
            .collect();
        for y in maximal {
            let u = space.minimal_open(y);
            let sb = b.stalk(y);
            let bv = b.var(i);
            let zi = a_len + gens.len() as u32;
            if g.degree == 0 {
                let sa = a.stalk(y);
                let h0 = h0_pullback(phi, y);
                if !h0.surjective() {
                    return Err(Error::pre("H^0 of the morphism is not surjective"));
                }
                let pa = h0.pull(&sb.poly_of(&bv));
                let av = sa.gc_of(&pa);
                let r = bv.sub(&phi.eval_at(y, &av));
                let mut lg = sb.d_matrix(-1);
                let nc = lg.len();
                lg.extend(sb.component(0).relations.iter().cloned());
                let c = Lifter::new(sb.pring, 1, &lg)
                    .lift(&sb.coords(&r, 0))
                    .ok_or_else(|| Error::pre("degree-0 generator not reached up to coboundaries"))?;
                let cel = sb.element(-1, &c.slice(0, nc));
                gens.push(Generator { name: fresh("z"), degree: 0, support: u });
                diffs.push(Section::zero(u, field));
                images.push(Section::uniform(u, sb.d(&cel)));
                gens.push(Generator { name: fresh("w"), degree: -1, support: u });
                diffs.push(Section::uniform(u, GcPoly::var(field, zi, 0)));
                images.push(Section::uniform(u, cel));
            } else {
                let n = g.degree;
                gens.push(Generator { name: fresh("z"), degree: n + 1, support: u });
                diffs.push(Section::zero(u, field));
                images.push(Section::uniform(u, sb.d(&bv)));
                gens.push(Generator { name: fresh("w"), degree: n, support: u });
                diffs.push(Section::uniform(u, GcPoly::var(field, zi, n + 1)));
                images.push(Section::uniform(u, bv));
            }
        }
    }
    let plus = DgRing::from_parts(&a, gens.clone(), diffs.clone(), Vec::new())?.over_base(&a.base_ring())?;
    let ident: Vec<Section> = (a.num_base_gens()..a.num_gens())
        .map(|i| Section::uniform(a.gens()[i].support, plus.var(i)))
        .collect();
    let eta = SheafHom::relative(a.clone(), plus.clone(), ident.clone())?;
    let mut own = ident;
    own.extend(gens.iter().map(|g| Section::zero(g.support, field)));
    let eps = SheafHom::relative(plus.clone(), a.clone(), own)?;
    let mut all_images = phi.images.clone();
    all_images.extend(images);
    let phi_plus = SheafHom::new(plus.clone(), b.clone(), all_images)?;
    let k = DgRing::constant(space.clone(), field);
    let shifted: Vec<Section> = diffs
        .iter()
        .map(|s| s.map_values(|_, v| v.substitute(&|u| GcPoly::var(field, u - a_len, gens[(u - a_len) as usize].degree))))
        .collect();
    let contractible = DgRing::from_parts(&k, gens, shifted, Vec::new())?;
    Ok(Factorization {
        plus,
        eta,
        eps,
        phi_plus,
        contractible,
    })
}

/// Whether `φ` is surjective on chains in every degree of the window at every point.
pub fn surjective_in(phi: &SheafHom, window: Window) -> bool {
    (0..phi.source.space().len()).all(|x| {
        let cpb = chain_pullback(phi, x);
        cpb.surjective() && window.degrees().all(|n| chain_checks(phi, x, n, &cpb).map_surjective)
    })
}

#[derive(Clone, Debug)]
pub struct OreSquare {
    pub stage: ResolutionStage,
    pub psi0: SheafHom,
    pub psi1: SheafHom,
    /// Legs replaced by their factorization (then `ψ_i` lands in `A_i⁺`).
    pub factorized: [bool; 2],
    pub closes: bool,
    pub psi_qiso: [QisoVerdict; 2],
}

pub fn ore_square(phi0: &SheafHom, phi1: &SheafHom, q_max: usize, seed: u64) -> Result<OreSquare> {
    let q = q_max as i32;
    let check = Window::new(-q + 1, 0).or_else(|_| Window::new(0, 0))?;
    for (i, p) in [phi0, phi1].iter().enumerate() {
        let v = is_quasi_iso(p, check)?;
        if !v.holds {
            return Err(Error::pre(format!("leg {i} is not a quasi-isomorphism: {}", v.detail)));
        }
    }
    let deep = Window::new(-q - 1, 0)?;
    let mut legs = [phi0.clone(), phi1.clone()];
    let mut factorized = [false; 2];
    for i in 0..2 {
        if !surjective_in(&legs[i], deep) {
            legs[i] = factorize(&legs[i], deep)?.phi_plus;
            factorized[i] = true;
        }
    }
    let fp = FiberProduct::new(legs[0].clone(), legs[1].clone())?;
    let stage = build(Target::Fiber(fp), q_max, seed)?;
    let psi0 = stage.legs[0].clone();
    let psi1 = stage.legs[1].clone();
    let c0 = legs[0].compose(&psi0)?;
    let c1 = legs[1].compose(&psi1)?;
    let closes = c0.agrees_with(&c1).is_ok();
    let psi_qiso = [is_quasi_iso(&psi0, check)?, is_quasi_iso(&psi1, check)?];
    let mut stage = stage;
    stage.certificate = certify(&stage)?;
    Ok(OreSquare {
        stage,
        psi0,
        psi1,
        factorized,
        closes,
        psi_qiso,
    })
}

/// Cylinder data `B ⊗_A B → B⁺ → B` with `φ : B⁺ → C`.
#[derive(Clone, Debug)]
pub struct HomotopyWitness {
    pub bplus: Arc<DgRing>,
    pub eta: SheafHom,
    pub eps: SheafHom,
    pub phi: SheafHom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub valid: bool,
    pub diagnostics: Vec<String>,
}

/// The multiplication `μ : B ⊗ B → B` and `φ0 ⊗ φ1 : B ⊗ B → C`.
pub fn tensor_maps(b: &Arc<DgRing>, phi0: &SheafHom, phi1: &SheafHom) -> Result<(Arc<DgRing>, SheafHom, SheafHom)> {
    let bb = tensor_over_a(b, b)?;
    let k = b.num_base_gens();
    let own = b.num_gens() - k;
    let mut mu = Vec::new();
    let mut pp = Vec::new();
    for j in 0..own {
        mu.push(Section::uniform(b.gens()[k + j].support, b.var(k + j)));
        pp.push(phi0.images[k + j].clone());
    }
    for j in 0..own {
        mu.push(Section::uniform(b.gens()[k + j].support, b.var(k + j)));
        pp.push(phi1.images[k + j].clone());
    }
    let mu = SheafHom::relative(bb.clone(), b.clone(), mu)?;
    let pp = SheafHom::relative(bb.clone(), phi0.target.clone(), pp)?;
    Ok((bb, mu, pp))
}

pub fn check_homotopy_witness(w: &HomotopyWitness, phi0: &SheafHom, phi1: &SheafHom, window: Window) -> Result<WitnessReport> {
    let b = &phi0.source;
    if !phi1.source.same_structure(b) || !phi1.target.same_structure(&phi0.target) {
        return Err(Error::Mismatch("φ0 and φ1 have different sources or targets".into()));
    }
    if !w.eps.target.same_structure(b) || !w.phi.target.same_structure(&phi0.target) {
        return Err(Error::Mismatch("witness maps have the wrong targets".into()));
    }
    if !w.eta.target.same_structure(&w.bplus) || !w.eps.source.same_structure(&w.bplus) || !w.phi.source.same_structure(&w.bplus) {
        return Err(Error::Mismatch("witness maps do not start or end at B⁺".into()));
    }
    let (bb, mu, pp) = tensor_maps(b, phi0, phi1)?;
    if !w.eta.source.same_structure(&bb) {
        return Err(Error::Mismatch("η does not start at B ⊗ B".into()));
    }
    let mut diagnostics = Vec::new();
    if let Err((g, p)) = w.eps.compose(&w.eta)?.agrees_with(&mu) {
        diagnostics.push(format!("ε∘η ≠ μ on {g} at {p}"));
    }
    if let Err((g, p)) = w.phi.compose(&w.eta)?.agrees_with(&pp) {
        diagnostics.push(format!("φ∘η ≠ φ0⊗φ1 on {g} at {p}"));
    }
    let v = is_quasi_iso(&w.eps, window)?;
    if !v.holds {
        let (p, n) = v.witness.unwrap_or_default();
        diagnostics.push(format!("ε is not a quasi-isomorphism: {} at ({p}, {n})", v.detail));
    }
    Ok(WitnessReport {
        valid: diagnostics.is_empty(),
        diagnostics,
    })
}

/// Quasi-homotopy: `φ0∘ψ` and `φ1∘ψ` homotopic via `w`, with `ψ` a quasi-isomorphism.
pub fn check_quasi_homotopy_witness(
    psi: &SheafHom,
    w: &HomotopyWitness,
    phi0: &SheafHom,
    phi1: &SheafHom,
    window: Window,
) -> Result<WitnessReport> {
    let c0 = phi0.compose(psi)?;
    let c1 = phi1.compose(psi)?;
    let mut r = check_homotopy_witness(w, &c0, &c1, window)?;
    let v = is_quasi_iso(psi, window)?;
    if !v.holds {
        r.valid = false;
        r.diagnostics.push(format!("ψ is not a quasi-isomorphism: {}", v.detail));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::space::FiniteSpace;

    fn line_quotient() -> Arc<DgRing> {
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
        DgRing::from_parts(&a, Vec::new(), Vec::new(), vec![Section::uniform(w, GcPoly::var(f, 0, 0))]).unwrap()
    }

    #[test]
    fn quotient_by_x_resolves_to_koszul() {
        let b = line_quotient();
        let s = resolve(&b, 1, 0).unwrap();
        assert!(s.certificate.passed());
        assert!(s.ring.is_pseudo_semi_free());
        assert!(s.ring.own_gens().iter().any(|g| g.degree == -1));
        let v = is_quasi_iso(s.phi(), Window::new(-2, 0).unwrap()).unwrap();
        assert!(v.holds || v.witness.as_ref().is_some_and(|w| w.1 < 0));
    }

    #[test]
    fn dropping_last_generator_breaks_certificate() {
        let b = line_quotient();
        let s = resolve(&b, 1, 0).unwrap();
        let m = mutant_drop_last(&s).unwrap().unwrap();
        assert!(!certify(&m).unwrap().passed());
    }
}
