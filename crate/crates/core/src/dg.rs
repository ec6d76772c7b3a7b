//! Sheaves of strictly commutative nonpositively graded DG rings presented by generators,
//! differentials and relations; morphisms given by generator images.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::graded::GcPoly;
use crate::parse;
use crate::pseudo_free::{Generator, GeneratorSpec, PsfRing, Section};
use crate::space::{FiniteSpace, OpenSet};
use crate::stalk::StalkAlgebra;

/// DG ring sheaf. Generators and relations of the base ring form a prefix of this ring's lists.
pub struct DgRing {
    space: Arc<FiniteSpace>,
    field: Field,
    gens: Vec<Generator>,
    diff: Vec<Section>,
    relations: Vec<Section>,
    base: Option<Arc<DgRing>>,
    n_base_gens: usize,
    n_base_rels: usize,
    stalks: Vec<OnceLock<Arc<StalkAlgebra>>>,
}

impl fmt::Debug for DgRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DgRing")
            .field("points", &self.space.points())
            .field("field", &self.field)
            .field("gens", &self.gens.iter().map(|g| (&g.name, g.degree)).collect::<Vec<_>>())
            .field("relations", &self.relations.len())
            .field("base_gens", &self.n_base_gens)
            .finish()
    }
}

impl DgRing {
    /// The constant sheaf of the coefficient field.
    pub fn constant(space: Arc<FiniteSpace>, field: Field) -> Arc<DgRing> {
        let n = space.len();
        Arc::new(DgRing {
            space,
            field,
            gens: Vec::new(),
            diff: Vec::new(),
            relations: Vec::new(),
            base: None,
            n_base_gens: 0,
            n_base_rels: 0,
            stalks: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Extends `base` by new generators, their differentials and new relations; fully validated.
    pub fn from_parts(
        base: &Arc<DgRing>,
        gens: Vec<Generator>,
        diff: Vec<Section>,
        relations: Vec<Section>,
    ) -> Result<Arc<DgRing>> {
        let r = Self::from_parts_unchecked(base, gens, diff, relations)?;
        r.validate_structure()?;
        if let Err(g) = r.check_d_squared() {
            return Err(Error::pre(format!("d∘d ≠ 0 on generator {g}")));
        }
        r.check_relations_closed()?;
        Ok(r)
    }

    /// Assembles without the algebraic checks (lengths and name uniqueness only).
    pub fn from_parts_unchecked(
        base: &Arc<DgRing>,
        gens: Vec<Generator>,
        diff: Vec<Section>,
        relations: Vec<Section>,
    ) -> Result<Arc<DgRing>> {
        if gens.len() != diff.len() {
            return Err(Error::pre("one differential value per generator is required"));
        }
        let mut names: HashSet<&str> = base.gens.iter().map(|g| g.name.as_str()).collect();
        for g in &gens {
            if !names.insert(&g.name) {
                return Err(Error::pre(format!("duplicate generator id {}", g.name)));
            }
            if g.degree > 0 {
                return Err(Error::pre(format!("generator {} has positive degree", g.name)));
            }
            if g.support.space_id() != base.space.id() {
                return Err(Error::Mismatch(format!("support of {} is not open in the space", g.name)));
            }
        }
        let n = base.space.len();
        let mut all_gens = base.gens.clone();
        all_gens.extend(gens);
        let mut all_diff = base.diff.clone();
        all_diff.extend(diff);
        let mut all_rels = base.relations.clone();
        all_rels.extend(relations);
        Ok(Arc::new(DgRing {
            space: base.space.clone(),
            field: base.field,
            n_base_gens: base.gens.len(),
            n_base_rels: base.relations.len(),
            gens: all_gens,
            diff: all_diff,
            relations: all_rels,
            base: Some(base.clone()),
            stalks: (0..n).map(|_| OnceLock::new()).collect(),
        }))
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn num_base_gens(&self) -> usize {
        self.n_base_gens
    }

    pub fn own_gens(&self) -> &[Generator] {
        &self.gens[self.n_base_gens..]
    }

    pub fn differential(&self, i: usize) -> &Section {
        &self.diff[i]
    }

    pub fn relations(&self) -> &[Section] {
        &self.relations
    }

    pub fn own_relations(&self) -> &[Section] {
        &self.relations[self.n_base_rels..]
    }

    pub fn base(&self) -> Option<&Arc<DgRing>> {
        self.base.as_ref()
    }

    /// The base ring, or the constant sheaf when there is none.
    pub fn base_ring(&self) -> Arc<DgRing> {
        self.base
            .clone()
            .unwrap_or_else(|| DgRing::constant(self.space.clone(), self.field))
    }

    pub fn spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            entries: self.gens.clone(),
        }
    }

    pub fn own_spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            entries: self.own_gens().to_vec(),
        }
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn gen_name(&self, i: u32) -> String {
        self.gens
            .get(i as usize)
            .map(|g| g.name.clone())
            .unwrap_or_else(|| format!("?{i}"))
    }

    pub fn is_local(&self, var: u32, x: usize) -> bool {
        self.gens.get(var as usize).is_some_and(|g| g.support.contains(x))
    }

    pub fn local_vars(&self, x: usize) -> Vec<(u32, i32)> {
        self.gens
            .iter()
            .enumerate()
            .filter(|(_, g)| g.support.contains(x))
            .map(|(i, g)| (i as u32, g.degree))
            .collect()
    }

    /// True when this ring has no relations beyond those of its base.
    pub fn is_pseudo_semi_free(&self) -> bool {
        self.relations.len() == self.n_base_rels
    }

    /// Structural equality of presentations.
    /// The same ring viewed over an earlier prefix `base`: everything past `base` becomes new data.
    pub fn over_base(&self, base: &Arc<DgRing>) -> Result<Arc<DgRing>> {
        if !self.extends(base) {
            return Err(Error::Mismatch("ring does not extend the requested base".into()));
        }
        let (k, r) = (base.gens.len(), base.relations.len());
        Self::from_parts_unchecked(base, self.gens[k..].to_vec(), self.diff[k..].to_vec(), self.relations[r..].to_vec())
    }

    pub fn same_structure(&self, other: &DgRing) -> bool {
        self.space.id() == other.space.id()
            && self.field == other.field
            && self.gens == other.gens
            && self.diff == other.diff
            && self.relations == other.relations
    }

    /// Whether the first generators and relations of `self` are exactly those of `prefix`.
    pub fn extends(&self, prefix: &DgRing) -> bool {
        self.space.id() == prefix.space.id()
            && self.field == prefix.field
            && self.gens.len() >= prefix.gens.len()
            && self.relations.len() >= prefix.relations.len()
            && self.gens[..prefix.gens.len()] == prefix.gens[..]
            && self.diff[..prefix.diff.len()] == prefix.diff[..]
            && self.relations[..prefix.relations.len()] == prefix.relations[..]
    }

    pub fn stalk(&self, x: usize) -> Arc<StalkAlgebra> {
        self.stalks[x]
            .get_or_init(|| Arc::new(StalkAlgebra::new(self, x)))
            .clone()
    }

    /// Differential of a stalk element at `x`.
    pub fn d_at(&self, x: usize, a: &GcPoly) -> GcPoly {
        a.derivation(&|v| {
            self.diff[v as usize]
                .at(x)
                .cloned()
                .unwrap_or_else(|| GcPoly::zero(self.field))
        })
    }

    pub fn var(&self, i: usize) -> GcPoly {
        GcPoly::var(self.field, i as u32, self.gens[i].degree)
    }

    pub fn format_value(&self, a: &GcPoly) -> String {
        a.format(&|v| self.gen_name(v))
    }

    /// Parses an expression in this ring's generator names.
    pub fn parse_expr(&self, text: &str) -> Result<GcPoly> {
        let lookup = |name: &str| self.gen_index(name).map(|i| (i as u32, self.gens[i].degree));
        parse::parse_gc(text, self.field, &lookup)
    }

    /// Same value at every point of `open`.
    pub fn uniform(&self, open: OpenSet, value: GcPoly) -> Section {
        Section::uniform(open, value)
    }

    fn check_section(&self, what: &str, s: &Section, degree: Option<i32>) -> Result<()> {
        if s.open.space_id() != self.space.id() {
            return Err(Error::Mismatch(format!("{what}: open set of another space")));
        }
        for x in s.open.points() {
            let Some(v) = s.values.get(&x) else {
                return Err(Error::pre(format!("{what}: no value at point {}", self.space.name(x))));
            };
            for var in v.vars() {
                if !self.is_local(var, x) {
                    return Err(Error::pre(format!(
                        "{what}: variable {} is not defined at point {}",
                        self.gen_name(var),
                        self.space.name(x)
                    )));
                }
            }
            if let Some(d) = degree {
                if !v.is_homogeneous_of(d) {
                    return Err(Error::pre(format!(
                        "{what}: value at {} is not homogeneous of degree {d}",
                        self.space.name(x)
                    )));
                }
            } else if v.homogeneous_parts().len() > 1 {
                return Err(Error::pre(format!("{what}: value at {} is not homogeneous", self.space.name(x))));
            }
        }
        if s.values.keys().any(|x| !s.open.contains(*x)) {
            return Err(Error::pre(format!("{what}: value outside its open set")));
        }
        Ok(())
    }

    /// Restriction compatibility: for `x ≤ y` in the open set, the two values agree at `x`.
    pub fn check_compatible(&self, what: &str, s: &Section) -> Result<()> {
        for y in s.open.points() {
            for x in s.open.points() {
                if x != y && self.space.leq(x, y) {
                    let diff = s.values[&y].sub(&s.values[&x]);
                    if !self.stalk(x).is_zero(&diff) {
                        return Err(Error::pre(format!(
                            "{what}: values at {} and {} are not compatible",
                            self.space.name(y),
                            self.space.name(x)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Degrees, supports, locality, homogeneity and restriction compatibility of the new data.
    pub fn validate_structure(&self) -> Result<()> {
        for i in self.n_base_gens..self.gens.len() {
            let g = &self.gens[i];
            let s = &self.diff[i];
            if s.open != g.support {
                return Err(Error::pre(format!("d({}) must be defined exactly over its support", g.name)));
            }
            self.check_section(&format!("d({})", g.name), s, Some(g.degree + 1))?;
        }
        for (k, r) in self.own_relations().iter().enumerate() {
            self.check_section(&format!("relation {k}"), r, None)?;
        }
        for i in self.n_base_gens..self.gens.len() {
            self.check_compatible(&format!("d({})", self.gens[i].name), &self.diff[i])?;
        }
        for (k, r) in self.own_relations().iter().enumerate() {
            self.check_compatible(&format!("relation {k}"), r)?;
        }
        Ok(())
    }

    /// `d(d(t_i)) = 0` at every point of every support; reports the first offending generator.
    pub fn check_d_squared(&self) -> std::result::Result<(), String> {
        for (i, g) in self.gens.iter().enumerate() {
            for x in g.support.points() {
                let dd = self.d_at(x, &self.diff[i].values[&x]);
                if !self.stalk(x).is_zero(&dd) {
                    return Err(g.name.clone());
                }
            }
        }
        Ok(())
    }

    /// The differential maps each relation into the relation ideal.
    pub fn check_relations_closed(&self) -> Result<()> {
        for (k, r) in self.relations.iter().enumerate() {
            for (x, v) in &r.values {
                if !self.stalk(*x).is_zero(&self.d_at(*x, v)) {
                    return Err(Error::pre(format!(
                        "d(relation {k}) is not in the relation ideal at {}",
                        self.space.name(*x)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Restriction to a subset of points with the induced order (open or closed subsets).
    pub fn restrict_to_subset(&self, mask: u64) -> (Arc<DgRing>, Vec<usize>) {
        let (sub, keep) = self.space.subspace(mask);
        let sub = Arc::new(sub);
        (self.restrict_into(&sub, &keep), keep)
    }

    fn restrict_into(&self, sub: &Arc<FiniteSpace>, keep: &[usize]) -> Arc<DgRing> {
        let base = match &self.base {
            Some(b) => b.restrict_into(sub, keep),
            None => DgRing::constant(sub.clone(), self.field),
        };
        let mut newidx: BTreeMap<u32, u32> = BTreeMap::new();
        for (i, v) in (0..self.n_base_gens).filter(|&i| base_keeps(self, i, keep)).enumerate() {
            newidx.insert(v as u32, i as u32);
        }
        let mut next = base.gens.len() as u32;
        let mut gens = Vec::new();
        let mut kept_own = Vec::new();
        for i in self.n_base_gens..self.gens.len() {
            let g = &self.gens[i];
            let support = g.support.restrict_to(sub, keep);
            if support.is_empty() {
                continue;
            }
            newidx.insert(i as u32, next);
            next += 1;
            gens.push(Generator {
                name: g.name.clone(),
                degree: g.degree,
                support,
            });
            kept_own.push(i);
        }
        let field = self.field;
        let remap = |s: &Section| -> Section {
            let open = s.open.restrict_to(sub, keep);
            let values = keep
                .iter()
                .enumerate()
                .filter(|(_, &old)| s.open.contains(old))
                .map(|(new, &old)| {
                    let v = s.values[&old].substitute(&|var| {
                        let d = self.gens[var as usize].degree;
                        GcPoly::var(field, newidx[&var], d)
                    });
                    (new, v)
                })
                .collect();
            Section { open, values }
        };
        let diff = kept_own.iter().map(|&i| remap(&self.diff[i])).collect();
        let rels = self
            .own_relations()
            .iter()
            .map(remap)
            .filter(|s| !s.open.is_empty())
            .collect();
        DgRing::from_parts_unchecked(&base, gens, diff, rels).expect("restriction preserves structure")
    }

    /// Restriction to an open subset.
    pub fn restrict_to_open(&self, v: &OpenSet) -> Result<Arc<DgRing>> {
        if v.space_id() != self.space.id() || !self.space.is_down_closed(v.members()) {
            return Err(Error::pre("restriction target is not an open set"));
        }
        Ok(self.restrict_to_subset(v.members()).0)
    }

    /// Renames generators by applying `rename` to every name (base untouched).
    pub fn with_renamed_own(&self, rename: &dyn Fn(&str) -> String) -> Result<Arc<DgRing>> {
        let base = self.base_ring();
        let gens = self
            .own_gens()
            .iter()
            .map(|g| Generator {
                name: rename(&g.name),
                ..g.clone()
            })
            .collect();
        DgRing::from_parts_unchecked(
            &base,
            gens,
            self.diff[self.n_base_gens..].to_vec(),
            self.own_relations().to_vec(),
        )
    }
}

fn base_keeps(ring: &DgRing, i: usize, keep: &[usize]) -> bool {
    keep.iter().any(|&x| ring.gens[i].support.contains(x))
}

/// Tensor product over the common base: disjoint union of generators, union of relations.
pub fn tensor_over_a(b: &Arc<DgRing>, c: &Arc<DgRing>) -> Result<Arc<DgRing>> {
    let base_b = b.base_ring();
    if c.same_structure(&base_b) {
        return Ok(b.clone());
    }
    let base_c = c.base_ring();
    if b.same_structure(&base_c) {
        return Ok(c.clone());
    }
    if !base_b.same_structure(&base_c) {
        return Err(Error::Mismatch("tensor factors have different bases".into()));
    }
    let k = base_b.num_gens();
    let shift = b.num_gens() - k;
    let mut names: HashSet<String> = b.gens.iter().map(|g| g.name.clone()).collect();
    let mut gens: Vec<Generator> = b.own_gens().to_vec();
    for g in c.own_gens() {
        let mut name = g.name.clone();
        while names.contains(&name) {
            name.push('\'');
        }
        names.insert(name.clone());
        gens.push(Generator { name, ..g.clone() });
    }
    let field = b.field;
    let map_c = |s: &Section| {
        s.map_values(|_, v| {
            v.substitute(&|var| {
                let d = c.gens[var as usize].degree;
                let nv = if (var as usize) < k { var } else { var + shift as u32 };
                GcPoly::var(field, nv, d)
            })
        })
    };
    let mut diff: Vec<Section> = b.diff[k..].to_vec();
    diff.extend(c.diff[k..].iter().map(map_c));
    let mut rels: Vec<Section> = b.own_relations().to_vec();
    rels.extend(c.own_relations().iter().map(map_c));
    DgRing::from_parts_unchecked(&base_b, gens, diff, rels)
}

/// Morphism of DG ring sheaves given by the images of all source generators.
#[derive(Clone, Debug)]
pub struct SheafHom {
    pub source: Arc<DgRing>,
    pub target: Arc<DgRing>,
    pub images: Vec<Section>,
}

impl SheafHom {
    pub fn new(source: Arc<DgRing>, target: Arc<DgRing>, images: Vec<Section>) -> Result<Self> {
        let h = Self::new_unchecked(source, target, images)?;
        h.validate()?;
        Ok(h)
    }

    pub fn new_unchecked(source: Arc<DgRing>, target: Arc<DgRing>, images: Vec<Section>) -> Result<Self> {
        if source.space.id() != target.space.id() || source.field != target.field {
            return Err(Error::Mismatch("source and target live on different spaces".into()));
        }
        if images.len() != source.gens.len() {
            return Err(Error::pre("one image per source generator is required"));
        }
        Ok(SheafHom { source, target, images })
    }

    /// Morphism fixing the source's base generators; `own` gives images of the new generators.
    pub fn relative(source: Arc<DgRing>, target: Arc<DgRing>, own: Vec<Section>) -> Result<Self> {
        let images = Self::relative_images(&source, &target, own)?;
        Self::new(source, target, images)
    }

    pub fn relative_unchecked(source: Arc<DgRing>, target: Arc<DgRing>, own: Vec<Section>) -> Result<Self> {
        let images = Self::relative_images(&source, &target, own)?;
        Self::new_unchecked(source, target, images)
    }

    fn relative_images(source: &Arc<DgRing>, target: &Arc<DgRing>, own: Vec<Section>) -> Result<Vec<Section>> {
        let base = source.base_ring();
        if !target.extends(&base) {
            return Err(Error::Mismatch("target is not a ring over the source's base".into()));
        }
        if own.len() != source.own_gens().len() {
            return Err(Error::pre("one image per new generator is required"));
        }
        let mut images: Vec<Section> = (0..base.num_gens())
            .map(|i| Section::uniform(source.gens[i].support, source.var(i)))
            .collect();
        images.extend(own);
        Ok(images)
    }

    pub fn identity(r: &Arc<DgRing>) -> SheafHom {
        let images = (0..r.num_gens())
            .map(|i| Section::uniform(r.gens[i].support, r.var(i)))
            .collect();
        SheafHom {
            source: r.clone(),
            target: r.clone(),
            images,
        }
    }

    pub fn image_at(&self, i: usize, x: usize) -> GcPoly {
        self.images[i]
            .at(x)
            .cloned()
            .unwrap_or_else(|| GcPoly::zero(self.source.field))
    }

    pub fn eval_at(&self, x: usize, a: &GcPoly) -> GcPoly {
        a.substitute(&|v| self.image_at(v as usize, x))
    }

    pub fn validate(&self) -> Result<()> {
        let (s, t) = (&self.source, &self.target);
        for (i, g) in s.gens.iter().enumerate() {
            let img = &self.images[i];
            if !g.support.is_subset(&img.open) {
                return Err(Error::pre(format!("image of {} is not defined over its support", g.name)));
            }
            let img = img.restrict(g.support);
            t.check_section(&format!("image of {}", g.name), &img, Some(g.degree))?;
            t.check_compatible(&format!("image of {}", g.name), &img)?;
            for x in g.support.points() {
                let lhs = t.d_at(x, &img.values[&x]);
                let rhs = self.eval_at(x, &s.diff[i].values[&x]);
                if !t.stalk(x).is_zero(&lhs.sub(&rhs)) {
                    return Err(Error::pre(format!(
                        "morphism does not commute with d on {} at {}",
                        g.name,
                        s.space.name(x)
                    )));
                }
            }
        }
        for (k, r) in s.relations.iter().enumerate() {
            for (x, v) in &r.values {
                if !t.stalk(*x).is_zero(&self.eval_at(*x, v)) {
                    return Err(Error::pre(format!(
                        "relation {k} does not map to zero at {}",
                        s.space.name(*x)
                    )));
                }
            }
        }
        Ok(())
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &SheafHom) -> Result<SheafHom> {
        if !first.target.same_structure(&self.source) {
            return Err(Error::Mismatch("composition of non-composable morphisms".into()));
        }
        let images = first
            .images
            .iter()
            .map(|s| s.map_values(|x, v| self.eval_at(x, v)))
            .collect();
        SheafHom::new_unchecked(first.source.clone(), self.target.clone(), images)
    }

    /// Exact agreement on every generator at every point of its support, as target normal forms.
    pub fn agrees_with(&self, other: &SheafHom) -> std::result::Result<(), (String, String)> {
        for (i, g) in self.source.gens.iter().enumerate() {
            for x in g.support.points() {
                let d = self.image_at(i, x).sub(&other.image_at(i, x));
                if !self.target.stalk(x).is_zero(&d) {
                    return Err((g.name.clone(), self.source.space.name(x).to_string()));
                }
            }
        }
        Ok(())
    }
}

/// The unique morphism over the base with the given images of the new generators.
pub fn extend_hom(source: &Arc<DgRing>, target: &Arc<DgRing>, images: &[(&str, Section)]) -> Result<SheafHom> {
    let k = source.num_base_gens();
    let mut own: Vec<Option<Section>> = vec![None; source.num_gens() - k];
    for (name, s) in images {
        let i = source
            .gen_index(name)
            .filter(|&i| i >= k)
            .ok_or_else(|| Error::pre(format!("unknown generator {name}")))?;
        if s.values.values().any(|v| !v.is_homogeneous_of(source.gens[i].degree)) {
            return Err(Error::pre(format!("image of {name} has the wrong degree")));
        }
        own[i - k] = Some(s.clone());
    }
    let own: Vec<Section> = own
        .into_iter()
        .enumerate()
        .map(|(j, s)| s.ok_or_else(|| Error::pre(format!("missing image for {}", source.gens[k + j].name))))
        .collect::<Result<_>>()?;
    SheafHom::relative(source.clone(), target.clone(), own)
}

/// Installs `d(t_i) = values[i]` on a pseudo-free ring; checks degrees and supports only.
pub fn extend_derivation(ring: &PsfRing, values: Vec<Section>) -> Result<Arc<DgRing>> {
    let base = ring
        .base
        .clone()
        .unwrap_or_else(|| DgRing::constant(ring.space.clone(), ring.field));
    if values.len() != ring.spec.len() {
        return Err(Error::pre("one differential value per generator is required"));
    }
    for (g, v) in ring.spec.entries.iter().zip(&values) {
        if v.open != g.support {
            return Err(Error::pre(format!("d({}) must be defined exactly over its support", g.name)));
        }
        if v.values.values().any(|p| !p.is_homogeneous_of(g.degree + 1)) {
            return Err(Error::pre(format!("d({}) has the wrong degree", g.name)));
        }
    }
    let r = DgRing::from_parts_unchecked(&base, ring.spec.entries.clone(), values, Vec::new())?;
    r.validate_structure()?;
    Ok(r)
}

/// Pair of morphisms into a common target; the fiber product is `{(b0, b1) : φ0 b0 = φ1 b1}`.
#[derive(Clone, Debug)]
pub struct FiberProduct {
    pub phi0: SheafHom,
    pub phi1: SheafHom,
}

impl FiberProduct {
    pub fn new(phi0: SheafHom, phi1: SheafHom) -> Result<Self> {
        if !phi0.target.same_structure(&phi1.target) {
            return Err(Error::Mismatch("fiber product legs have different targets".into()));
        }
        Ok(FiberProduct { phi0, phi1 })
    }

    pub fn target(&self) -> &Arc<DgRing> {
        &self.phi0.target
    }

    /// Whether `(b0, b1)` lies in the stalk of the fiber product at `x`.
    pub fn contains(&self, x: usize, b0: &GcPoly, b1: &GcPoly) -> bool {
        let d = self.phi0.eval_at(x, b0).sub(&self.phi1.eval_at(x, b1));
        self.target().stalk(x).is_zero(&d)
    }
}

/// Commutative DG ringed space.
#[derive(Clone, Debug)]
pub struct RingedSpace {
    pub space: Arc<FiniteSpace>,
    pub structure: Arc<DgRing>,
}

impl RingedSpace {
    pub fn new(structure: Arc<DgRing>) -> Result<Self> {
        Ok(RingedSpace {
            space: structure.space().clone(),
            structure,
        })
    }
}

/// DG module sheaf over a ring `A`, free on generators `e_j` with `d(e_j) = Σ_k s_jk e_k`.
#[derive(Clone, Debug)]
pub struct DgModuleSheaf {
    pub ring: Arc<DgRing>,
    pub gens: Vec<Generator>,
    pub diff: Vec<Vec<(usize, Section)>>,
}

impl DgModuleSheaf {
    pub fn new(ring: Arc<DgRing>, gens: Vec<Generator>, diff: Vec<Vec<(usize, Section)>>) -> Result<Self> {
        if gens.len() != diff.len() {
            return Err(Error::pre("one differential per module generator is required"));
        }
        let m = DgModuleSheaf { ring, gens, diff };
        m.validate()?;
        Ok(m)
    }

    fn d_coeffs_at(&self, j: usize, x: usize) -> Vec<(usize, GcPoly)> {
        self.diff[j]
            .iter()
            .filter(|(k, _)| self.gens[*k].support.contains(x))
            .map(|(k, s)| (*k, s.at(x).cloned().unwrap_or_else(|| GcPoly::zero(self.ring.field()))))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.ring;
        for (j, g) in self.gens.iter().enumerate() {
            for (k, s) in &self.diff[j] {
                let want = g.degree + 1 - self.gens[*k].degree;
                if !g.support.is_subset(&s.open) {
                    return Err(Error::pre(format!("d({}) coefficient not defined over its support", g.name)));
                }
                r.check_section(&format!("d({}) coefficient", g.name), &s.restrict(g.support), Some(want))?;
            }
            for x in g.support.points() {
                // d(d e_j) = Σ_k d(s_jk) e_k + (-1)^{|s_jk|} s_jk Σ_l s_kl e_l
                let mut acc: BTreeMap<usize, GcPoly> = BTreeMap::new();
                for (k, s) in self.d_coeffs_at(j, x) {
                    let e = acc.entry(k).or_insert_with(|| GcPoly::zero(r.field()));
                    *e = e.add(&r.d_at(x, &s));
                    let sign_odd = s.homogeneous_degree().is_some_and(|d| d % 2 != 0);
                    for (l, t) in self.d_coeffs_at(k, x) {
                        let mut p = s.mul(&t);
                        if sign_odd {
                            p = p.neg();
                        }
                        let e = acc.entry(l).or_insert_with(|| GcPoly::zero(r.field()));
                        *e = e.add(&p);
                    }
                }
                if acc.values().any(|v| !r.stalk(x).is_zero(v)) {
                    return Err(Error::pre(format!("d∘d ≠ 0 on module generator {}", g.name)));
                }
            }
        }
        Ok(())
    }

    pub fn coefficients_at(&self, j: usize, x: usize) -> Vec<(usize, GcPoly)> {
        self.d_coeffs_at(j, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_ring_on_point(vars: &[&str]) -> Arc<DgRing> {
        let space = Arc::new(FiniteSpace::point());
        let k = DgRing::constant(space.clone(), Field::Rationals);
        let w = space.whole();
        let gens = vars
            .iter()
            .map(|v| Generator {
                name: v.to_string(),
                degree: 0,
                support: w,
            })
            .collect::<Vec<_>>();
        let diff = gens.iter().map(|_| Section::zero(w, Field::Rationals)).collect();
        DgRing::from_parts(&k, gens, diff, Vec::new()).unwrap()
    }

    fn koszul(a: &Arc<DgRing>, var: &str) -> Arc<DgRing> {
        let w = a.space().whole();
        let dy = Section::uniform(w, a.parse_expr(var).unwrap());
        DgRing::from_parts(
            a,
            vec![Generator {
                name: "y".into(),
                degree: -1,
                support: w,
            }],
            vec![dy],
            Vec::new(),
        )
        .unwrap()
    }

    #[test]
    fn koszul_datum_is_valid() {
        let a = poly_ring_on_point(&["x"]);
        let b = koszul(&a, "x");
        assert!(b.check_d_squared().is_ok());
        assert!(b.is_pseudo_semi_free());
    }

    #[test]
    fn bad_differential_is_reported() {
        let a = poly_ring_on_point(&["x"]);
        let w = a.space().whole();
        let f = Field::Rationals;
        let gens = vec![
            Generator { name: "z".into(), degree: -2, support: w },
            Generator { name: "y".into(), degree: -1, support: w },
        ];
        // d(z) = y, d(y) = x: d(d(z)) = x ≠ 0
        let diff = vec![
            Section::uniform(w, GcPoly::var(f, 2, -1)),
            Section::uniform(w, GcPoly::var(f, 0, 0)),
        ];
        let r = DgRing::from_parts_unchecked(&a, gens.clone(), diff.clone(), Vec::new()).unwrap();
        assert_eq!(r.check_d_squared(), Err("z".to_string()));
        assert!(DgRing::from_parts(&a, gens, diff, Vec::new()).is_err());
    }

    #[test]
    fn identity_and_composition() {
        let a = poly_ring_on_point(&["x"]);
        let b = koszul(&a, "x");
        let id = SheafHom::identity(&b);
        assert!(id.validate().is_ok());
        let c = id.compose(&id).unwrap();
        assert!(c.agrees_with(&id).is_ok());
    }

    #[test]
    fn tensor_of_koszul_algebras() {
        let a = poly_ring_on_point(&["x"]);
        let b = koszul(&a, "x");
        let t = tensor_over_a(&b, &b).unwrap();
        assert_eq!(t.num_gens(), 3);
        assert_eq!(t.gens()[2].name, "y'");
        assert!(t.check_d_squared().is_ok());
        let unit = tensor_over_a(&b, &a).unwrap();
        assert!(unit.same_structure(&b));
    }

    #[test]
    fn restriction_to_whole_and_empty() {
        let a = poly_ring_on_point(&["x"]);
        let b = koszul(&a, "x");
        let whole = b.restrict_to_open(&b.space().whole()).unwrap();
        assert_eq!(whole.num_gens(), b.num_gens());
        let empty = b.restrict_to_open(&b.space().empty_open()).unwrap();
        assert_eq!(empty.space().len(), 0);
        assert_eq!(empty.num_gens(), 0);
    }
}
