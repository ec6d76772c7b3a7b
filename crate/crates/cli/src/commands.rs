use std::sync::Arc;

use clap::ValueEnum;
use serde_json::{json, Value};
use sheafdg::derived::{
    compare_with_oracle, cotangent_complex, derived_intersection, derived_tensor, hypersurface_cotangent_oracle,
    tor_oracle_at, ClosedSubspace, TensorMode,
};
use sheafdg::homology::{format_presentation, iso_over, reports_isomorphic};
use sheafdg::resolution::{
    certify, check_homotopy_witness, check_quasi_homotopy_witness, mutant_drop_last, mutant_drop_ring_generator,
    ore_square, resolve, HomotopyWitness, ResolutionStage,
};
use sheafdg::{cohomology, is_quasi_iso, CohomologyReport, DgRing, Error, ModulePresentation, Problem, Result, Window};

use crate::report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Stalk,
    Cohomology,
    Resolve,
    Certify,
    Qiso,
    Dtensor,
    Intersect,
    OreSquare,
    HomotopyCheck,
    Cotangent,
    OracleCompare,
}

/// Command-line values take precedence over the problem file's `command` block.
#[derive(Clone, Debug)]
pub struct Settings {
    pub command: Command,
    pub q_max: Option<usize>,
    pub window: Option<Window>,
    pub seed: u64,
    pub recheck: bool,
}

impl Settings {
    fn window(&self) -> Result<Window> {
        self.window
            .ok_or_else(|| Error::pre("this command needs a window (--window MIN:MAX)"))
    }

    fn q_max(&self) -> Result<usize> {
        self.q_max.ok_or_else(|| Error::pre("this command needs q_max (--qmax N)"))
    }

    /// The window, defaulting to the certified range `[1 - q_max, 0]`.
    fn window_or_certified(&self, q: usize) -> Result<Window> {
        match self.window {
            Some(w) => Ok(w),
            None => Window::new(1 - q as i32, 0),
        }
    }
}

fn field<'a>(value: &'a Option<String>, what: &str) -> Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| Error::pre(format!("the problem's command block needs '{what}'")))
}

fn ring<'a>(p: &'a Problem, what: &str) -> Result<&'a Arc<DgRing>> {
    p.ring(field(&p.command.ring, what)?)
}

pub fn run(p: &Problem, s: &Settings) -> Result<Report> {
    let mut report = match s.command {
        Command::Validate => validate(p),
        Command::Stalk => stalk(p, s),
        Command::Cohomology => cohomology_cmd(p, s),
        Command::Resolve => resolve_cmd(p, s),
        Command::Certify => certify_cmd(p, s),
        Command::Qiso => qiso(p, s),
        Command::Dtensor => dtensor(p, s),
        Command::Intersect => intersect(p, s),
        Command::OreSquare => ore(p, s),
        Command::HomotopyCheck => homotopy(p, s),
        Command::Cotangent => cotangent(p, s),
        Command::OracleCompare => oracle_compare(p, s),
    }?;
    if s.recheck && !report.checks.keys().any(|k| k.starts_with("recheck:")) {
        let again = run(p, &Settings { recheck: false, ..s.clone() })?;
        let mut plain = report.clone();
        plain.checks.retain(|k, _| !k.starts_with("recheck:"));
        report.check("recheck:rerun", again.render_json() == plain.render_json());
    }
    Ok(report)
}

fn validate(p: &Problem) -> Result<Report> {
    let mut r = Report::new("validate", None, None);
    r.check("space", true);
    let mut rings = serde_json::Map::new();
    for name in &p.ring_order {
        let ring = &p.rings[name];
        r.check(&format!("ring:{name}:d-squared"), ring.check_d_squared().is_ok());
        r.check(&format!("ring:{name}:relations-closed"), ring.check_relations_closed().is_ok());
        rings.insert(
            name.clone(),
            json!({
                "generators": ring.gens().iter().map(|g| json!({
                    "name": g.name, "degree": g.degree, "support": p.space.format_set(g.support.members()),
                })).collect::<Vec<_>>(),
                "relations": ring.relations().len(),
                "pseudo_semi_free": ring.is_pseudo_semi_free(),
            }),
        );
    }
    for name in &p.morphism_order {
        r.check(&format!("morphism:{name}"), p.morphisms[name].validate().is_ok());
    }
    r.detail("points", json!(p.space.points()));
    r.detail("field", json!(p.field.to_string()));
    r.detail("rings", Value::Object(rings));
    Ok(r)
}

fn points(p: &Problem) -> Result<Vec<usize>> {
    match &p.command.point {
        Some(name) => Ok(vec![p.space.index(name)?]),
        None => Ok((0..p.space.len()).collect()),
    }
}

fn stalk(p: &Problem, s: &Settings) -> Result<Report> {
    let b = ring(p, "ring")?;
    let w = s.window()?;
    let mut r = Report::new("stalk", Some(w), None);
    let mut vars = serde_json::Map::new();
    for x in points(p)? {
        let st = b.stalk(x);
        let name = p.space.name(x).to_string();
        let slot = r.per_point.entry(name.clone()).or_default();
        for n in w.degrees() {
            let c = st.component(n);
            let m = ModulePresentation::new(st.pring, st.pnames.clone(), c.basis.len(), c.relations.clone());
            slot.insert(n, (&m).into());
        }
        let odd: Vec<Value> = st
            .neg_vars
            .iter()
            .map(|&(v, d)| json!({"name": b.gen_name(v), "degree": d}))
            .collect();
        let ideal: Vec<String> = st.ideal0().gens().iter().map(|g| g.to_string_with(&st.pnames)).collect();
        vars.insert(name, json!({"degree_zero": st.pnames, "negative": odd, "ideal": ideal}));
    }
    r.detail("variables", Value::Object(vars));
    r.check("d-squared", b.check_d_squared().is_ok());
    Ok(r)
}

fn cohomology_cmd(p: &Problem, s: &Settings) -> Result<Report> {
    let b = ring(p, "ring")?;
    let w = s.window()?;
    let mut r = Report::new("cohomology", Some(w), None);
    let h = cohomology(b, w)?;
    r.cohomology(&h);
    if s.recheck {
        r.check("recheck:restriction", restriction_agrees(b, &h, w)?);
    }
    Ok(r)
}

/// Recomputes each stalk on its minimal open.
fn restriction_agrees(b: &Arc<DgRing>, h: &CohomologyReport, w: Window) -> Result<bool> {
    for x in 0..b.space().len() {
        let part = cohomology(&*b.restrict_to_open(&b.space().minimal_open(x))?, w)?;
        let name = b.space().name(x);
        for n in w.degrees() {
            let (Some(a), Some(c)) = (part.get(name, n), h.get(name, n)) else {
                return Ok(false);
            };
            if a.presentation() != c.presentation() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn stage_details(r: &mut Report, p: &Problem, st: &ResolutionStage) {
    let ring = &st.ring;
    let k = ring.num_base_gens();
    let gens: Vec<Value> = ring
        .own_gens()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let d = ring.differential(k + i);
            let dv: serde_json::Map<String, Value> = d
                .values
                .iter()
                .map(|(x, v)| (p.space.name(*x).to_string(), Value::from(ring.format_value(v))))
                .collect();
            json!({
                "name": g.name,
                "degree": g.degree,
                "support": p.space.format_set(g.support.members()),
                "kind": st.kinds[i],
                "stage": st.stage_of[i],
                "d": dv,
            })
        })
        .collect();
    r.detail("generators", Value::Array(gens));
}

fn certificate_details(r: &mut Report, c: &sheafdg::Certificate) {
    r.detail("certificate", serde_json::to_value(&c.entries).expect("entries serialize"));
    r.check("certificate", c.passed());
}

fn resolve_cmd(p: &Problem, s: &Settings) -> Result<Report> {
    let b = ring(p, "ring")?;
    let q = s.q_max()?;
    let st = resolve(b, q, s.seed)?;
    let mut r = Report::new("resolve", s.window, Some(q));
    stage_details(&mut r, p, &st);
    certificate_details(&mut r, &st.certificate);
    if let Some(w) = s.window {
        r.cohomology(&cohomology(&st.ring, w)?);
    }
    if s.recheck {
        r.check("recheck:certify", certify(&st)?.passed());
        let v = is_quasi_iso(st.phi(), Window::new(1 - q as i32, 0)?)?;
        r.check("recheck:quasi-isomorphism", v.holds);
    }
    Ok(r)
}

fn certify_cmd(p: &Problem, s: &Settings) -> Result<Report> {
    let b = ring(p, "ring")?;
    let q = s.q_max()?;
    let st = resolve(b, q, s.seed)?;
    let mutant = p.command.mutant.as_deref();
    let st = match mutant {
        None => st,
        Some("drop-last") => mutant_drop_last(&st)?.ok_or_else(|| Error::pre("the resolution has no generator to drop"))?,
        Some("drop-ring-generator") => {
            mutant_drop_ring_generator(&st)?.ok_or_else(|| Error::pre("the resolution has no ring generator"))?
        }
        Some(other) => return Err(Error::parse("command.mutant", format!("unknown mutant '{other}'"))),
    };
    let c = certify(&st)?;
    let mut r = Report::new("certify", None, Some(q));
    stage_details(&mut r, p, &st);
    certificate_details(&mut r, &c);
    r.detail("mutant", json!(mutant));
    Ok(r)
}

fn verdict_json(v: &sheafdg::homology::QisoVerdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

fn qiso(p: &Problem, s: &Settings) -> Result<Report> {
    let phi = p.morphism(field(&p.command.morphism, "morphism")?)?;
    let w = s.window()?;
    let v = is_quasi_iso(phi, w)?;
    let mut r = Report::new("qiso", Some(w), None);
    r.check("quasi-isomorphism", v.holds);
    r.detail("verdict", verdict_json(&v));
    if s.recheck {
        let a = cohomology(&phi.source, w)?;
        let b = cohomology(&phi.target, w)?;
        r.check("recheck:dimensions", dims_agree(&a, &b) || !v.holds);
    }
    Ok(r)
}

/// Dimensions agree wherever both sides are finite-dimensional.
fn dims_agree(a: &CohomologyReport, b: &CohomologyReport) -> bool {
    a.per_point.iter().all(|(pt, degs)| {
        degs.iter().all(|(n, d)| match (d.dim(), b.get(pt, *n).and_then(|e| e.dim())) {
            (Some(x), Some(y)) => x == y,
            _ => true,
        })
    })
}

fn act_vars(r: &DgRing) -> Vec<String> {
    r.gens().iter().map(|g| g.name.clone()).collect()
}

fn reports_agree(a: &CohomologyReport, b: &CohomologyReport, act: &[String]) -> Result<bool> {
    match reports_isomorphic(a, b, act) {
        Ok(diff) => Ok(diff.is_none()),
        Err(Error::InfiniteDimensional(_)) => Ok(a
            .per_point
            .iter()
            .all(|(pt, degs)| degs.iter().all(|(n, d)| b.get(pt, *n).is_some_and(|e| e.presentation() == d.presentation())))),
        Err(e) => Err(e),
    }
}

fn dtensor(p: &Problem, s: &Settings) -> Result<Report> {
    let (bn, cn) = p
        .command
        .factors
        .as_ref()
        .ok_or_else(|| Error::pre("the problem's command block needs 'factors'"))?;
    let (b, c) = (p.ring(bn)?, p.ring(cn)?);
    let q = s.q_max()?;
    let w = s.window_or_certified(q)?;
    let mode: TensorMode = p.command.mode.as_deref().unwrap_or("two-sided").parse()?;
    let t = derived_tensor(b, c, q, w, mode, (s.seed, s.seed))?;
    let mut r = Report::new("dtensor", Some(w), Some(q));
    r.cohomology(&t.report);
    r.detail("mode", json!(mode));
    r.detail(
        "resolution_generators",
        json!(t.resolutions.iter().map(|st| st.ring.own_gens().len()).collect::<Vec<_>>()),
    );
    r.detail("underived_comparison", verdict_json(&t.xi_verdict));
    if s.recheck {
        let other = match mode {
            TensorMode::TwoSided => TensorMode::OneSided,
            TensorMode::OneSided => TensorMode::TwoSided,
        };
        let u = derived_tensor(b, c, q, w, other, (s.seed.wrapping_add(1), s.seed.wrapping_add(1)))?;
        r.check("recheck:other-resolution", reports_agree(&t.report, &u.report, &act_vars(&b.base_ring()))?);
    }
    Ok(r)
}

fn subspaces(p: &Problem, o: &Arc<DgRing>) -> Result<(ClosedSubspace, ClosedSubspace)> {
    let (i1, i2) = p
        .command
        .ideals
        .as_ref()
        .ok_or_else(|| Error::pre("the problem's command block needs 'ideals'"))?;
    Ok((ClosedSubspace::from_exprs(o, i1)?, ClosedSubspace::from_exprs(o, i2)?))
}

fn intersect(p: &Problem, s: &Settings) -> Result<Report> {
    let o = ring(p, "ring")?;
    let (y1, y2) = subspaces(p, o)?;
    let q = s.q_max()?;
    let w = s.window_or_certified(q)?;
    let d = derived_intersection(o, &y1, &y2, q, w, (s.seed, s.seed))?;
    let mism = compare_with_oracle(o, &y1, &y2, &d.full_report, w)?;
    let mut r = Report::new("intersect", Some(w), Some(q));
    r.cohomology(&d.full_report);
    r.check("oracle-match", mism.is_empty());
    r.check("comparison-quasi-isomorphism", d.comparison.holds);
    r.check("vanishes-off-support", d.vanishes_off_support);
    r.detail("support", json!(p.space.format_set(d.support)));
    r.detail("oracle_mismatches", serde_json::to_value(&mism).expect("mismatches serialize"));
    if s.recheck {
        let e = derived_intersection(o, &y2, &y1, q, w, (s.seed, s.seed))?;
        r.check("recheck:symmetric", reports_agree(&d.full_report, &e.full_report, &act_vars(o))?);
    }
    Ok(r)
}

fn ore(p: &Problem, s: &Settings) -> Result<Report> {
    let phi0 = p.morphism(field(&p.command.phi0, "phi0")?)?;
    let phi1 = p.morphism(field(&p.command.phi1, "phi1")?)?;
    let q = s.q_max()?;
    let sq = ore_square(phi0, phi1, q, s.seed)?;
    let w = Window::new(1 - q as i32, 0)?;
    let mut r = Report::new("ore-square", Some(w), Some(q));
    r.check("closes", sq.closes);
    r.check("psi0-quasi-isomorphism", sq.psi_qiso[0].holds);
    r.check("psi1-quasi-isomorphism", sq.psi_qiso[1].holds);
    certificate_details(&mut r, &sq.stage.certificate);
    r.detail("generators", json!(sq.stage.ring.own_gens().len()));
    r.detail("factorized", json!(sq.factorized));
    if s.recheck {
        let h = cohomology(&sq.stage.ring, w)?;
        let h0 = cohomology(&sq.psi0.target, w)?;
        let h1 = cohomology(&sq.psi1.target, w)?;
        r.check("recheck:dimensions", dims_agree(&h, &h0) && dims_agree(&h, &h1));
    }
    Ok(r)
}

fn homotopy(p: &Problem, s: &Settings) -> Result<Report> {
    let wd = p
        .command
        .witness
        .as_ref()
        .ok_or_else(|| Error::pre("the problem's command block needs 'witness'"))?;
    let phi0 = p.morphism(field(&p.command.phi0, "phi0")?)?;
    let phi1 = p.morphism(field(&p.command.phi1, "phi1")?)?;
    let w = s.window()?;
    let witness = HomotopyWitness {
        bplus: p.ring(&wd.bplus)?.clone(),
        eta: p.morphism(&wd.eta)?.clone(),
        eps: p.morphism(&wd.eps)?.clone(),
        phi: p.morphism(&wd.phi)?.clone(),
    };
    let rep = match &wd.psi {
        Some(psi) => check_quasi_homotopy_witness(p.morphism(psi)?, &witness, phi0, phi1, w)?,
        None => check_homotopy_witness(&witness, phi0, phi1, w)?,
    };
    let mut r = Report::new("homotopy-check", Some(w), None);
    r.check("witness", rep.valid);
    r.detail("diagnostics", json!(rep.diagnostics));
    r.detail("quasi", json!(wd.psi.is_some()));
    Ok(r)
}

fn cotangent(p: &Problem, s: &Settings) -> Result<Report> {
    let o = ring(p, "ring")?;
    let q = s.q_max()?;
    let w = s.window_or_certified(q)?;
    let rep = cotangent_complex(o, q, w, s.seed)?;
    let mut r = Report::new("cotangent", Some(w), Some(q));
    r.cohomology(&rep.report);
    r.detail("experimental", json!(rep.experimental));
    r.detail(
        "module_generators",
        json!(rep.module.gens.iter().map(|g| json!({"name": g.name, "degree": g.degree})).collect::<Vec<_>>()),
    );
    if let Some(ok) = hypersurface_check(o, &rep.report)? {
        r.check("hypersurface-oracle", ok);
    }
    Ok(r)
}

/// On a one-point space with a single degree-0 variable and one relation, compares against
/// the two-term complex `R --f'--> R`.
fn hypersurface_check(o: &Arc<DgRing>, h: &CohomologyReport) -> Result<Option<bool>> {
    if o.space().len() != 1 || o.gens().len() != 1 || o.relations().len() != 1 {
        return Ok(None);
    }
    let st = o.stalk(0);
    let f = st.poly_of(o.relations()[0].at(0).expect("relation at the point"));
    let oracle = hypersurface_cotangent_oracle(st.pring, &st.pnames, &f, 0);
    let name = o.space().name(0);
    for n in h.window.degrees() {
        let Some(got) = h.get(name, n).map(|d| &d.module) else {
            return Ok(Some(false));
        };
        let ok = match oracle.get(&n) {
            Some(want) if !want.is_zero() => !got.is_zero() && iso_over(got, want, &st.pnames)?,
            _ => got.is_zero(),
        };
        if !ok {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

fn oracle_compare(p: &Problem, s: &Settings) -> Result<Report> {
    let o = ring(p, "ring")?;
    let (y1, y2) = subspaces(p, o)?;
    let q = s.q_max()?;
    let w = s.window_or_certified(q)?;
    let d = derived_intersection(o, &y1, &y2, q, w, (s.seed, s.seed))?;
    let mism = compare_with_oracle(o, &y1, &y2, &d.full_report, w)?;
    let mut r = Report::new("oracle-compare", Some(w), Some(q));
    r.cohomology(&d.full_report);
    let mut oracles = serde_json::Map::new();
    for x in 0..p.space.len() {
        let t = tor_oracle_at(o, &y1, &y2, x, w)?;
        let degs: serde_json::Map<String, Value> = t
            .degrees
            .iter()
            .map(|(n, m)| (n.to_string(), json!({"rank": m.ngens, "presentation": format_presentation(m)})))
            .collect();
        oracles.insert(p.space.name(x).to_string(), json!({"method": t.method, "degrees": degs}));
    }
    r.check("oracle-match", mism.is_empty());
    r.detail("oracle", Value::Object(oracles));
    r.detail("mismatches", serde_json::to_value(&mism).expect("mismatches serialize"));
    Ok(r)
}
