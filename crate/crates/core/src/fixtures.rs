//! Curated example problems shared by the test suites, the benches and the CLI tests.

use std::sync::Arc;

use crate::dg::{DgModuleSheaf, DgRing, SheafHom};
use crate::error::Result;
use crate::field::Field;
use crate::graded::GcPoly;
use crate::problem::{parse_problem, Problem};
use crate::pseudo_free::{Generator, Section};
use crate::space::FiniteSpace;

/// A named problem text.
#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub json: &'static str,
}

impl Fixture {
    pub fn problem(&self) -> Problem {
        parse_problem(self.json).unwrap_or_else(|e| panic!("fixture {}: {e}", self.name))
    }
}

/// Targets `B` (ring named `B` over `R`) for resolution tests.
pub const RESOLUTION_TARGETS: &[Fixture] = &[
    Fixture {
        name: "line-origin",
        json: r#"{"space": {"points": ["pt"]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x"}]}]}"#,
    },
    Fixture {
        name: "double-point",
        json: r#"{"space": {"points": ["pt"]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x^2"}]}]}"#,
    },
    Fixture {
        name: "plane-origin",
        json: r#"{"space": {"points": ["pt"]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}, {"name": "y", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x"}, {"value": "y"}]}]}"#,
    },
    Fixture {
        name: "fat-origin",
        json: r#"{"space": {"points": ["pt"]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}, {"name": "y", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x^2"}, {"value": "x y"}, {"value": "y^2"}]}]}"#,
    },
    Fixture {
        name: "sierpinski-closed-point",
        json: r#"{"space": {"points": ["o", "c"], "covers": [["o", "c"]]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x"}, {"value": "1", "open": ["o"]}]}]}"#,
    },
    Fixture {
        name: "sierpinski-open-variable",
        json: r#"{"space": {"points": ["o", "c"], "covers": [["o", "c"]]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}, {"name": "u", "degree": 0, "support": ["o"]}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x^2"}, {"value": "u", "open": ["o"]}]}]}"#,
    },
    Fixture {
        name: "two-points-two-roots",
        json: r#"{"space": {"points": ["a", "b"]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": {"a": "x", "b": "x - 1"}}]}]}"#,
    },
    Fixture {
        name: "vee-axes",
        json: r#"{"space": {"points": ["a", "b", "c"], "covers": [["a", "c"], ["b", "c"]]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}, {"name": "y", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x y"}]}]}"#,
    },
    Fixture {
        name: "chain-triple-point",
        json: r#"{"space": {"points": ["a", "b", "c"], "covers": [["a", "b"], ["b", "c"]]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x^3"}]}]}"#,
    },
    Fixture {
        name: "gf5-embedded-point",
        json: r#"{"field": "GF(5)", "space": {"points": ["pt"]},
            "rings": [{"name": "R", "generators": [{"name": "x", "degree": 0}, {"name": "y", "degree": 0}]},
                      {"name": "B", "base": "R", "relations": [{"value": "x^2"}, {"value": "x y"}]}]}"#,
    },
];

/// An intersection problem with the expected classical answer.
#[derive(Clone, Copy, Debug)]
pub struct IntersectionFixture {
    pub fixture: Fixture,
    pub ideals: (&'static [&'static str], &'static [&'static str]),
    /// Dimension over the field of `H^{-p}` for `p = 0, 1, 2, 3` at the point `pt`.
    pub dims: [usize; 4],
}

const PLANE: &str = r#"{"space": {"points": ["pt"]},
    "rings": [{"name": "O", "generators": [{"name": "x", "degree": 0}, {"name": "y", "degree": 0}]}]}"#;
const LINE: &str = r#"{"space": {"points": ["pt"]},
    "rings": [{"name": "O", "generators": [{"name": "x", "degree": 0}]}]}"#;

pub const INTERSECTIONS: &[IntersectionFixture] = &[
    IntersectionFixture {
        fixture: Fixture { name: "transverse-lines", json: PLANE },
        ideals: (&["x"], &["y"]),
        dims: [1, 0, 0, 0],
    },
    IntersectionFixture {
        fixture: Fixture { name: "origin-self-intersection", json: PLANE },
        ideals: (&["x", "y"], &["x", "y"]),
        dims: [1, 2, 1, 0],
    },
    IntersectionFixture {
        fixture: Fixture { name: "tangent-parabola", json: PLANE },
        ideals: (&["y"], &["y - x^2"]),
        dims: [2, 0, 0, 0],
    },
    IntersectionFixture {
        fixture: Fixture { name: "comaximal", json: LINE },
        ideals: (&["x"], &["x - 1"]),
        dims: [0, 0, 0, 0],
    },
    IntersectionFixture {
        fixture: Fixture { name: "line-self-intersection", json: LINE },
        ideals: (&["x"], &["x"]),
        dims: [1, 1, 0, 0],
    },
];

/// The affine line with the open point `o` where `x` is inverted; the origin lives only over `c`.
pub const PUNCTURED_LINE: Fixture = Fixture {
    name: "punctured-line",
    json: r#"{"space": {"points": ["o", "c"], "covers": [["o", "c"]]},
        "rings": [{"name": "O", "generators": [{"name": "x", "degree": 0}, {"name": "u", "degree": 0, "support": ["o"]}],
                   "relations": [{"value": "u x - 1", "open": ["o"]}]}]}"#,
};

/// Koszul algebra over the affine line and its two classical endomorphisms (identity and the
/// map killing both generators), used by the homotopy-witness tests.
pub const KOSZUL_ENDOMORPHISMS: Fixture = Fixture {
    name: "koszul-endomorphisms",
    json: r#"{"space": {"points": ["pt"]},
        "rings": [
            {"name": "B", "generators": [{"name": "x", "degree": 0}, {"name": "y", "degree": -1, "d": "x"}]},
            {"name": "BB", "tensor": ["B", "B"]},
            {"name": "Bplus", "base": "BB", "generators": [{"name": "z", "degree": 0}, {"name": "w", "degree": -1, "d": "z"}]},
            {"name": "Bbad", "base": "BB", "generators": [{"name": "s", "degree": 0}]}
        ],
        "morphisms": [
            {"name": "phi0", "source": "B", "target": "B", "images": {"x": "x", "y": "y"}},
            {"name": "phi1", "source": "B", "target": "B", "images": {"x": "0", "y": "0"}},
            {"name": "eta", "source": "BB", "target": "Bplus", "images": {"x": "x", "y": "y", "x'": "x'", "y'": "y'"}},
            {"name": "eps", "source": "Bplus", "target": "B", "images": {"x": "x", "y": "y", "x'": "x", "y'": "y", "z": "0", "w": "0"}},
            {"name": "phi", "source": "Bplus", "target": "B", "images": {"x": "x", "y": "y", "x'": "0", "y'": "0", "z": "0", "w": "0"}},
            {"name": "eta_bad", "source": "BB", "target": "Bbad", "images": {"x": "x", "y": "y", "x'": "x'", "y'": "y'"}},
            {"name": "eps_bad", "source": "Bbad", "target": "B", "images": {"x": "x", "y": "y", "x'": "x", "y'": "y", "s": "0"}},
            {"name": "phi_bad", "source": "Bbad", "target": "B", "images": {"x": "x", "y": "y", "x'": "0", "y'": "0", "s": "0"}}
        ],
        "command": {"name": "homotopy-check", "phi0": "phi0", "phi1": "phi1", "window": "-2:0",
                    "witness": {"bplus": "Bplus", "eta": "eta", "eps": "eps", "phi": "phi"}}}"#,
};

fn gen(name: &str, degree: i32, support: crate::space::OpenSet) -> Generator {
    Generator {
        name: name.into(),
        degree,
        support,
    }
}

/// A DG module fixture together with a pseudo-semi-free ring over the same base.
pub struct ModuleFixture {
    pub name: &'static str,
    pub module: DgModuleSheaf,
    pub ring: Arc<DgRing>,
}

fn line_over(space: Arc<FiniteSpace>, field: Field) -> Arc<DgRing> {
    let k = DgRing::constant(space.clone(), field);
    let w = space.whole();
    DgRing::from_parts(&k, vec![gen("x", 0, w)], vec![Section::zero(w, field)], Vec::new()).expect("line")
}

fn koszul_over(a: &Arc<DgRing>) -> Arc<DgRing> {
    let w = a.space().whole();
    DgRing::from_parts(a, vec![gen("y", -1, w)], vec![Section::uniform(w, a.var(0))], Vec::new()).expect("koszul")
}

fn cone(a: &Arc<DgRing>, support: crate::space::OpenSet, coeff: GcPoly) -> DgModuleSheaf {
    DgModuleSheaf::new(
        a.clone(),
        vec![gen("e0", 0, support), gen("e1", -1, support)],
        vec![Vec::new(), vec![(0, Section::uniform(support, coeff))]],
    )
    .expect("cone")
}

/// Five acyclic DG module sheaves and pseudo-semi-free rings to tensor them with.
pub fn acyclic_modules() -> Result<Vec<ModuleFixture>> {
    let f = Field::Rationals;
    let pt = Arc::new(FiniteSpace::point());
    let sier = Arc::new(FiniteSpace::sierpinski());
    let mut out = Vec::new();

    let a = line_over(pt.clone(), f);
    out.push(ModuleFixture {
        name: "cone-of-identity",
        module: cone(&a, pt.whole(), GcPoly::one(f)),
        ring: koszul_over(&a),
    });

    let g5 = Field::prime(5)?;
    let a5 = line_over(pt.clone(), g5);
    out.push(ModuleFixture {
        name: "cone-of-two-mod-5",
        module: cone(&a5, pt.whole(), GcPoly::constant(g5, g5.from_i64(2))),
        ring: koszul_over(&a5),
    });

    let a_s = line_over(sier.clone(), f);
    let o = sier.minimal_open_named("o")?;
    out.push(ModuleFixture {
        name: "cone-on-open-point",
        module: cone(&a_s, o, GcPoly::one(f)),
        ring: koszul_over(&a_s),
    });

    out.push(ModuleFixture {
        name: "cone-on-whole-sierpinski",
        module: cone(&a_s, sier.whole(), GcPoly::constant(f, f.from_i64(-3))),
        ring: DgRing::from_parts(
            &a_s,
            vec![gen("t", 0, o), gen("v", -2, sier.whole())],
            vec![Section::zero(o, f), Section::zero(sier.whole(), f)],
            Vec::new(),
        )?,
    });

    // x is invertible over the open point, so the cone of x is acyclic there
    let k = DgRing::constant(sier.clone(), f);
    let w = sier.whole();
    let loc = DgRing::from_parts(
        &k,
        vec![gen("x", 0, w), gen("u", 0, o)],
        vec![Section::zero(w, f), Section::zero(o, f)],
        vec![Section::uniform(o, GcPoly::var(f, 0, 0).mul(&GcPoly::var(f, 1, 0)).sub(&GcPoly::one(f)))],
    )?;
    let x = GcPoly::var(f, 0, 0);
    out.push(ModuleFixture {
        name: "cone-of-invertible-x",
        module: cone(&loc, o, x.clone()),
        ring: DgRing::from_parts(&loc, vec![gen("y", -1, w)], vec![Section::uniform(w, x)], Vec::new())?,
    });
    Ok(out)
}

/// Named morphism of a fixture problem.
pub fn morphism(p: &Problem, name: &str) -> SheafHom {
    p.morphism(name).unwrap_or_else(|e| panic!("{e}")).clone()
}
