//! JSON problem files.
//!
//! ```json
//! {
//!   "field": "QQ",
//!   "space": {"points": ["o", "c"], "covers": [["o", "c"]]},
//!   "rings": [
//!     {"name": "R", "generators": [{"name": "x", "degree": 0}]},
//!     {"name": "B", "base": "R", "relations": [{"value": "x"}]},
//!     {"name": "BB", "tensor": ["B", "B"]}
//!   ],
//!   "morphisms": [{"name": "phi", "source": "R", "target": "B", "images": {"x": "x"}}],
//!   "command": {"name": "resolve", "ring": "B", "q_max": 2, "window": "-2:0", "seed": 0}
//! }
//! ```
//!
//! `space` takes either `order` (the full relation, checked against the poset axioms) or
//! `covers` (closed reflexively and transitively). A `support` or `open` is a list of point
//! names forming an open set and defaults to the whole space. A section is either one
//! expression used at every point of its open set or an object mapping point names to
//! expressions. Morphism images are keyed by generator name; when the target is a ring over
//! the source's base only the source's own generators need images.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use crate::dg::{tensor_over_a, DgRing, SheafHom};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::homology::Window;
use crate::pseudo_free::{Generator, Section};
use crate::space::{FiniteSpace, OpenSet};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default = "default_field")]
    pub field: String,
    pub space: SpaceDesc,
    #[serde(default)]
    pub rings: Vec<RingDesc>,
    #[serde(default)]
    pub morphisms: Vec<MorphismDesc>,
    #[serde(default)]
    pub command: CommandDesc,
}

fn default_field() -> String {
    "QQ".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDesc {
    pub points: Vec<String>,
    #[serde(default)]
    pub order: Option<Vec<(String, String)>>,
    #[serde(default)]
    pub covers: Option<Vec<(String, String)>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDesc {
    pub name: String,
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub tensor: Option<(String, String)>,
    #[serde(default)]
    pub generators: Vec<GenDesc>,
    #[serde(default)]
    pub relations: Vec<RelDesc>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDesc {
    pub name: String,
    pub degree: i32,
    #[serde(default)]
    pub support: Option<Vec<String>>,
    #[serde(default)]
    pub d: Option<SectionDesc>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelDesc {
    pub value: SectionDesc,
    #[serde(default)]
    pub open: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SectionDesc {
    Uniform(String),
    PerPoint(BTreeMap<String, String>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDesc {
    pub name: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub images: BTreeMap<String, SectionDesc>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandDesc {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub q_max: Option<usize>,
    #[serde(default)]
    pub window: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Ring operated on (`stalk`, `cohomology`, `resolve`, `certify`, `cotangent`).
    #[serde(default)]
    pub ring: Option<String>,
    #[serde(default)]
    pub point: Option<String>,
    #[serde(default)]
    pub morphism: Option<String>,
    #[serde(default)]
    pub phi0: Option<String>,
    #[serde(default)]
    pub phi1: Option<String>,
    /// Factors of `dtensor`.
    #[serde(default)]
    pub factors: Option<(String, String)>,
    /// `two-sided` (default) or `one-sided`.
    #[serde(default)]
    pub mode: Option<String>,
    /// Ideal generators of the two closed subspaces of `intersect` and `oracle-compare`.
    #[serde(default)]
    pub ideals: Option<(Vec<String>, Vec<String>)>,
    #[serde(default)]
    pub witness: Option<WitnessDesc>,
    /// `drop-last` or `drop-ring-generator` for `certify`.
    #[serde(default)]
    pub mutant: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDesc {
    pub bplus: String,
    pub eta: String,
    pub eps: String,
    pub phi: String,
    #[serde(default)]
    pub psi: Option<String>,
}

/// A parsed and validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub field: Field,
    pub space: Arc<FiniteSpace>,
    pub rings: BTreeMap<String, Arc<DgRing>>,
    pub ring_order: Vec<String>,
    pub morphisms: BTreeMap<String, SheafHom>,
    pub morphism_order: Vec<String>,
    pub command: CommandDesc,
}

impl Problem {
    pub fn ring(&self, name: &str) -> Result<&Arc<DgRing>> {
        self.rings
            .get(name)
            .ok_or_else(|| Error::parse("command", format!("unknown ring '{name}'")))
    }

    pub fn morphism(&self, name: &str) -> Result<&SheafHom> {
        self.morphisms
            .get(name)
            .ok_or_else(|| Error::parse("command", format!("unknown morphism '{name}'")))
    }

    pub fn window(&self) -> Result<Option<Window>> {
        self.command.window.as_deref().map(str::parse).transpose()
    }
}

pub fn parse_field(s: &str) -> Result<Field> {
    let t = s.trim();
    if matches!(t, "QQ" | "Q" | "rationals") {
        return Ok(Field::Rationals);
    }
    let inner = t
        .strip_prefix("GF(")
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| t.strip_prefix("F_"))
        .ok_or_else(|| Error::parse("field", format!("unknown field '{s}' (expected QQ or GF(p))")))?;
    let p: u64 = inner
        .parse()
        .map_err(|_| Error::parse("field", format!("bad characteristic '{inner}'")))?;
    Field::prime(p).map_err(|e| Error::parse("field", e.to_string()))
}

/// Parses JSON text; syntax errors carry line and column.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let file: ProblemFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    build_problem(&file)
}

pub fn build_space(desc: &SpaceDesc) -> Result<FiniteSpace> {
    match (&desc.order, &desc.covers) {
        (Some(order), None) => FiniteSpace::from_relation(desc.points.clone(), order),
        (None, Some(covers)) => FiniteSpace::from_covers(desc.points.clone(), covers),
        (None, None) => FiniteSpace::from_covers(desc.points.clone(), &[]),
        (Some(_), Some(_)) => Err(Error::parse("space", "give either 'order' or 'covers', not both")),
    }
}

fn open_of(space: &FiniteSpace, names: &Option<Vec<String>>, at: &str) -> Result<OpenSet> {
    match names {
        None => Ok(space.whole()),
        Some(ns) => space.open_from_names(ns).map_err(|e| Error::parse(at, e.to_string())),
    }
}

fn section_of(ring: &DgRing, open: OpenSet, desc: &SectionDesc, at: &str) -> Result<Section> {
    let parse = |text: &str| ring.parse_expr(text).map_err(|e| relocate(e, at));
    match desc {
        SectionDesc::Uniform(text) => Ok(Section::uniform(open, parse(text)?)),
        SectionDesc::PerPoint(map) => {
            let space = ring.space();
            let mut values = BTreeMap::new();
            for (pt, text) in map {
                let x = space.index(pt).map_err(|e| Error::parse(at, e.to_string()))?;
                if !open.contains(x) {
                    return Err(Error::parse(at, format!("point {pt} is outside the open set")));
                }
                values.insert(x, parse(text)?);
            }
            if let Some(x) = open.points().find(|x| !values.contains_key(x)) {
                return Err(Error::parse(at, format!("no value at point {}", space.name(x))));
            }
            Ok(Section { open, values })
        }
    }
}

fn relocate(e: Error, at: &str) -> Error {
    match e {
        Error::Parse { location, message } => Error::parse(format!("{at}: {location}"), message),
        other => other,
    }
}

fn build_ring(space: &Arc<FiniteSpace>, field: Field, rings: &BTreeMap<String, Arc<DgRing>>, desc: &RingDesc, at: &str) -> Result<Arc<DgRing>> {
    let lookup = |n: &str| {
        rings
            .get(n)
            .cloned()
            .ok_or_else(|| Error::parse(at, format!("ring '{n}' is not defined before use")))
    };
    if let Some((b, c)) = &desc.tensor {
        if !desc.generators.is_empty() || !desc.relations.is_empty() || desc.base.is_some() {
            return Err(Error::parse(at, "a tensor ring takes no base, generators or relations"));
        }
        return tensor_over_a(&lookup(b)?, &lookup(c)?);
    }
    let base = match &desc.base {
        Some(b) => lookup(b)?,
        None => DgRing::constant(space.clone(), field),
    };
    let mut gens = Vec::new();
    for (j, g) in desc.generators.iter().enumerate() {
        let support = open_of(space, &g.support, &format!("{at}.generators[{j}].support"))?;
        gens.push(Generator {
            name: g.name.clone(),
            degree: g.degree,
            support,
        });
    }
    // differentials may mention every generator of the ring, so parse them against a skeleton
    let zeros: Vec<Section> = gens.iter().map(|g| Section::zero(g.support, field)).collect();
    let skeleton = DgRing::from_parts_unchecked(&base, gens.clone(), zeros, Vec::new())?;
    let mut diffs = Vec::new();
    for (j, g) in desc.generators.iter().enumerate() {
        let s = match &g.d {
            Some(d) => section_of(&skeleton, gens[j].support, d, &format!("{at}.generators[{j}].d"))?,
            None => Section::zero(gens[j].support, field),
        };
        diffs.push(s);
    }
    let mut rels = Vec::new();
    for (j, r) in desc.relations.iter().enumerate() {
        let loc = format!("{at}.relations[{j}]");
        let open = open_of(space, &r.open, &loc)?;
        rels.push(section_of(&skeleton, open, &r.value, &loc)?);
    }
    DgRing::from_parts(&base, gens, diffs, rels)
}

fn build_morphism(rings: &BTreeMap<String, Arc<DgRing>>, desc: &MorphismDesc, at: &str) -> Result<SheafHom> {
    let get = |n: &str| {
        rings
            .get(n)
            .cloned()
            .ok_or_else(|| Error::parse(at, format!("unknown ring '{n}'")))
    };
    let source = get(&desc.source)?;
    let target = get(&desc.target)?;
    for name in desc.images.keys() {
        if source.gen_index(name).is_none() {
            return Err(Error::parse(at, format!("'{name}' is not a generator of {}", desc.source)));
        }
    }
    let relative = target.extends(&source.base_ring());
    let first = if relative { source.num_base_gens() } else { 0 };
    let mut images = Vec::new();
    for (i, g) in source.gens().iter().enumerate() {
        let img = match desc.images.get(&g.name) {
            Some(s) => section_of(&target, g.support, s, &format!("{at}.images.{}", g.name))?,
            None if i < first => Section::uniform(g.support, source.var(i)),
            None => return Err(Error::parse(at, format!("missing image for generator {}", g.name))),
        };
        images.push(img);
    }
    SheafHom::new(source, target, images)
}

pub fn build_problem(file: &ProblemFile) -> Result<Problem> {
    let field = parse_field(&file.field)?;
    let space = Arc::new(build_space(&file.space)?);
    let mut rings = BTreeMap::new();
    let mut ring_order = Vec::new();
    for (j, r) in file.rings.iter().enumerate() {
        let at = format!("rings[{j}]");
        if rings.contains_key(&r.name) {
            return Err(Error::parse(at, format!("duplicate ring name '{}'", r.name)));
        }
        let ring = build_ring(&space, field, &rings, r, &at)?;
        rings.insert(r.name.clone(), ring);
        ring_order.push(r.name.clone());
    }
    let mut morphisms = BTreeMap::new();
    let mut morphism_order = Vec::new();
    for (j, m) in file.morphisms.iter().enumerate() {
        let at = format!("morphisms[{j}]");
        if morphisms.contains_key(&m.name) {
            return Err(Error::parse(at, format!("duplicate morphism name '{}'", m.name)));
        }
        morphisms.insert(m.name.clone(), build_morphism(&rings, m, &at)?);
        morphism_order.push(m.name.clone());
    }
    Ok(Problem {
        field,
        space,
        rings,
        ring_order,
        morphisms,
        morphism_order,
        command: file.command.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIERPINSKI: &str = r#"{
        "field": "QQ",
        "space": {"points": ["o", "c"], "covers": [["o", "c"]]},
        "rings": [
            {"name": "R", "generators": [{"name": "x", "degree": 0}]},
            {"name": "B", "base": "R", "relations": [{"value": "x"}, {"value": "1", "open": ["o"]}]},
            {"name": "K", "base": "R", "generators": [{"name": "y", "degree": -1, "d": "x"}]}
        ],
        "morphisms": [{"name": "phi", "source": "K", "target": "B", "images": {"y": "0"}}]
    }"#;

    #[test]
    fn parses_rings_and_morphisms() {
        let p = parse_problem(SIERPINSKI).unwrap();
        assert_eq!(p.space.len(), 2);
        let b = p.ring("B").unwrap();
        assert_eq!(b.relations().len(), 2);
        assert!(b.stalk(0).is_zero(&crate::graded::GcPoly::one(p.field)));
        assert!(!b.stalk(1).is_zero(&crate::graded::GcPoly::one(p.field)));
        assert!(p.morphism("phi").is_ok());
    }

    #[test]
    fn positioned_errors() {
        let e = parse_problem("{ \"space\": ").unwrap_err();
        assert!(matches!(e, Error::Parse { ref location, .. } if location.starts_with("line 1")), "{e}");
        let bad = SIERPINSKI.replace("\"d\": \"x\"", "\"d\": \"x + z\"");
        let e = parse_problem(&bad).unwrap_err();
        assert!(e.to_string().contains("rings[2].generators[0].d: column 5"), "{e}");
        let cyc = r#"{"space": {"points": ["a", "b"], "order": [["a","a"],["b","b"],["a","b"],["b","a"]]}}"#;
        let e = parse_problem(cyc).unwrap_err();
        assert!(e.to_string().contains("antisymmetry violated at (a,b)"), "{e}");
        let refl = r#"{"space": {"points": ["a"], "order": []}}"#;
        assert!(parse_problem(refl).unwrap_err().to_string().contains("missing (a,a)"));
    }

    #[test]
    fn fields() {
        assert_eq!(parse_field("GF(5)").unwrap(), Field::Prime(5));
        assert!(parse_field("GF(6)").is_err());
        assert!(parse_field("ZZ").is_err());
    }
}
