//! Acceptance criteria 1-9. Each criterion prints one line; the test fails if any criterion fails.

mod common;

use std::io::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use sheafdg::derived::{
    compare_with_oracle, cotangent_complex, derived_intersection, derived_tensor, hypersurface_cotangent_oracle,
    module_cohomology, ClosedSubspace, TensorMode,
};
use sheafdg::fixtures::{acyclic_modules, INTERSECTIONS, RESOLUTION_TARGETS};
use sheafdg::homology::{iso_over, reports_isomorphic};
use sheafdg::resolution::{certify, factorize, ore_square, remove_generators, resolve, surjective_in, ResolutionStage};
use sheafdg::{cohomology, is_quasi_iso, parse_problem, DgRing, Field, PolyRing, PsfRing, SheafHom, Window};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn window(min: i32) -> Window {
    Window::new(min, 0).unwrap()
}

fn criterion_1() -> Outcome {
    let mut points = 0;
    for seed in 0..50u64 {
        let mut rng = common::rng(seed);
        let space = Arc::new(common::random_space(&mut rng, 8));
        let spec = common::random_spec(&mut rng, &space, 6);
        let ring = PsfRing::new(space.clone(), Field::Rationals, None, spec.clone()).map_err(e2s)?;
        for x in 0..space.len() {
            let degrees: Vec<i32> = spec.entries.iter().filter(|g| g.support.contains(x)).map(|g| g.degree).collect();
            let got = ring.monomial_counts(x, -4, 3);
            let want = common::hilbert_counts(&degrees, -4, 3);
            ensure(got == want, || format!("spec {seed}, point {}: {got:?} vs {want:?}", space.name(x)))?;
            points += 1;
        }
    }
    Ok(format!("50 specs, {points} stalks"))
}

fn criterion_2() -> Outcome {
    let mut nontrivial = 0;
    let mut checked = 0;
    for seed in 0..50u64 {
        let mut rng = common::rng(1000 + seed);
        let inst = common::random_derivation(&mut rng);
        let r = inst.build();
        r.check_d_squared().map_err(|g| format!("instance {seed}: d² ≠ 0 on {g}"))?;
        for _ in 0..100 {
            let x = rng.gen_range(0..inst.space.len());
            let vars = r.local_vars(x);
            let (da, db) = (-rng.gen_range(0..=3), -rng.gen_range(0..=3));
            let a = common::random_homogeneous(&mut rng, inst.field, &vars, da);
            let b = common::random_homogeneous(&mut rng, inst.field, &vars, db);
            let lhs = r.d_at(x, &a.mul(&b));
            let mut rhs_a = r.d_at(x, &a).mul(&b);
            let a_db = a.mul(&r.d_at(x, &b));
            rhs_a = if da % 2 == 0 { rhs_a.add(&a_db) } else { rhs_a.sub(&a_db) };
            ensure(r.stalk(x).is_zero(&lhs.sub(&rhs_a)), || format!("instance {seed}: Leibniz fails at {}", inst.space.name(x)))?;
            if !lhs.is_zero() {
                nontrivial += 1;
            }
            checked += 1;
        }
    }
    ensure(nontrivial > 0, || "every Leibniz pair was trivial".into())?;
    Ok(format!("50 derivations, {checked} pairs ({nontrivial} with d(ab) ≠ 0)"))
}

fn criterion_3() -> Outcome {
    let mut stages = 0;
    let mut mutants = 0;
    for fx in RESOLUTION_TARGETS {
        let p = fx.problem();
        let b = p.ring("B").map_err(e2s)?;
        for q in 0..=3 {
            let s = resolve(b, q, 0).map_err(|e| format!("{} q={q}: {e}", fx.name))?;
            ensure(s.ring.relations().is_empty(), || format!("{} q={q}: relations remain", fx.name))?;
            let c = certify(&s).map_err(e2s)?;
            ensure(c.passed(), || format!("{} q={q}: certificate fails at {:?}", fx.name, c.first_failure()))?;
            stages += 1;
            for i in 0..s.ring.own_gens().len() {
                let m = remove_generators(&s, &[i]).map_err(e2s)?;
                let c = certify(&m).map_err(e2s)?;
                ensure(!c.passed(), || format!("{} q={q}: deleting {} still certifies", fx.name, s.ring.own_gens()[i].name))?;
                mutants += 1;
            }
        }
    }
    Ok(format!("{stages} stages certified, {mutants} mutants rejected"))
}

fn criterion_4() -> Outcome {
    let w = window(-3);
    for ix in INTERSECTIONS {
        let p = ix.fixture.problem();
        let o = p.ring("O").map_err(e2s)?;
        let (y1, y2) = subspaces(o, ix.ideals)?;
        let d = derived_intersection(o, &y1, &y2, 4, w, (0, 0)).map_err(e2s)?;
        let mism = compare_with_oracle(o, &y1, &y2, &d.full_report, w).map_err(e2s)?;
        ensure(mism.is_empty(), || format!("{}: oracle mismatch at {mism:?}", ix.fixture.name))?;
        for (k, want) in ix.dims.iter().enumerate() {
            let got = d.full_report.get("pt", -(k as i32)).and_then(|r| r.module.k_dim());
            ensure(got == Some(*want), || format!("{}: dim H^-{k} = {got:?}, expected {want}", ix.fixture.name))?;
        }
        ensure(d.comparison.holds, || format!("{}: comparison map fails: {}", ix.fixture.name, d.comparison.detail))?;
        ensure(d.vanishes_off_support, || format!("{}: cohomology off the support", ix.fixture.name))?;
    }
    Ok(format!("{} fixtures in window [-3, 0]", INTERSECTIONS.len()))
}

fn subspaces(o: &Arc<DgRing>, ideals: (&[&str], &[&str])) -> Result<(ClosedSubspace, ClosedSubspace), String> {
    let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Ok((
        ClosedSubspace::from_exprs(o, &own(ideals.0)).map_err(e2s)?,
        ClosedSubspace::from_exprs(o, &own(ideals.1)).map_err(e2s)?,
    ))
}

fn criterion_5() -> Outcome {
    let w = window(-3);
    let mut compared = 0;
    for ix in INTERSECTIONS {
        let p = ix.fixture.problem();
        let o = p.ring("O").map_err(e2s)?;
        let (y1, y2) = subspaces(o, ix.ideals)?;
        let act: Vec<String> = o.gens().iter().map(|g| g.name.clone()).collect();
        let run = |mode, seeds| derived_tensor(&y1.quotient, &y2.quotient, 4, w, mode, seeds).map_err(e2s);
        let base = run(TensorMode::TwoSided, (0, 0))?;
        for (mode, seeds) in [(TensorMode::TwoSided, (11, 23)), (TensorMode::TwoSided, (5, 0)), (TensorMode::OneSided, (0, 0)), (TensorMode::OneSided, (7, 0))] {
            let other = run(mode, seeds)?;
            let diff = reports_isomorphic(&base.report, &other.report, &act).map_err(e2s)?;
            ensure(diff.is_none(), || format!("{}: {mode:?} {seeds:?} differs at {diff:?}", ix.fixture.name))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} report pairs isomorphic"))
}

/// A second resolution `F ⊗ C → F → B` with a split contractible `C` on the generators of `F`.
fn padded(stage: &ResolutionStage, w: Window) -> Result<SheafHom, String> {
    let f = factorize(&SheafHom::identity(&stage.ring), w).map_err(e2s)?;
    stage.phi().compose(&f.eps).map_err(e2s)
}

const ORE_Q: usize = 2;

fn ore_pairs() -> Result<Vec<(&'static str, SheafHom, SheafHom)>, String> {
    let w = window(1 - ORE_Q as i32);
    RESOLUTION_TARGETS
        .iter()
        .map(|fx| {
            let p = fx.problem();
            let b = p.ring("B").map_err(e2s)?;
            let first = resolve(b, ORE_Q, 1).map_err(e2s)?;
            let second = resolve(b, ORE_Q, 2).map_err(e2s)?;
            Ok((fx.name, first.phi().clone(), padded(&second, w)?))
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let w = window(1 - ORE_Q as i32);
    let mut n = 0;
    for (name, phi0, phi1) in ore_pairs()? {
        ensure(phi0.source.num_gens() != phi1.source.num_gens(), || format!("{name}: resolutions coincide"))?;
        let sq = ore_square(&phi0, &phi1, ORE_Q, 0).map_err(|e| format!("{name}: {e}"))?;
        ensure(sq.closes, || format!("{name}: composites differ"))?;
        let c0 = phi_after(&phi0, &sq.psi0, sq.factorized[0]);
        let c1 = phi_after(&phi1, &sq.psi1, sq.factorized[1]);
        if let (Some(c0), Some(c1)) = (c0, c1) {
            ensure(c0.agrees_with(&c1).is_ok(), || format!("{name}: composites differ on generators"))?;
        }
        for (i, v) in sq.psi_qiso.iter().enumerate() {
            ensure(v.holds, || format!("{name}: ψ{i} fails: {}", v.detail))?;
            let again = is_quasi_iso(if i == 0 { &sq.psi0 } else { &sq.psi1 }, w).map_err(e2s)?;
            ensure(again.holds, || format!("{name}: ψ{i} fails on recheck"))?;
        }
        n += 1;
    }
    Ok(format!("{n} Ore squares closed, window [{}, 0]", 1 - ORE_Q as i32))
}

fn phi_after(phi: &SheafHom, psi: &SheafHom, factorized: bool) -> Option<SheafHom> {
    if factorized {
        None
    } else {
        phi.compose(psi).ok()
    }
}

fn criterion_7() -> Outcome {
    let w = window(1 - ORE_Q as i32);
    let mut n = 0;
    let mut fields = std::collections::BTreeSet::new();
    let mut pairs = 0;
    for (name, phi0, phi1) in ore_pairs()? {
        let sq = ore_square(&phi0, &phi1, ORE_Q, 0).map_err(e2s)?;
        for map in [&sq.psi0, &sq.psi1, &phi1] {
            let f = factorize(map, w).map_err(|e| format!("{name}: {e}"))?;
            let a = &map.source;
            ensure(f.eps.compose(&f.eta).map_err(e2s)?.agrees_with(&SheafHom::identity(a)).is_ok(), || format!("{name}: ε∘η ≠ id"))?;
            ensure(f.phi_plus.compose(&f.eta).map_err(e2s)?.agrees_with(map).is_ok(), || format!("{name}: φ⁺∘η ≠ φ"))?;
            ensure(surjective_in(&f.phi_plus, w), || format!("{name}: φ⁺ not surjective in window"))?;
            let v = is_quasi_iso(&f.eta, w).map_err(e2s)?;
            ensure(v.holds, || format!("{name}: η fails: {}", v.detail))?;
            let h = cohomology(&f.contractible, w).map_err(e2s)?;
            for (pt, degs) in &h.per_point {
                for (deg, r) in degs {
                    let want = usize::from(*deg == 0);
                    ensure(r.module.k_dim() == Some(want), || format!("{name}: H^{deg}(C) at {pt} is not K^{want}"))?;
                }
            }
            pairs += f.contractible.own_gens().len() / 2;
            fields.insert(a.field().characteristic());
            n += 1;
        }
    }
    ensure(fields.contains(&0) && fields.contains(&5), || format!("fields covered: {fields:?}"))?;
    ensure(pairs > 0, || "no contractible pairs adjoined".into())?;
    Ok(format!("{n} factorizations over Q and F_5, {pairs} contractible pairs"))
}

fn criterion_8() -> Outcome {
    let mut rings = 0;
    for fx in RESOLUTION_TARGETS {
        let p = fx.problem();
        let b = p.ring("B").map_err(e2s)?;
        let s = resolve(b, 3, 0).map_err(e2s)?;
        let base = s.ring.base_ring();
        let psf = PsfRing::new(base.space().clone(), base.field(), Some(base.clone()), s.spec()).map_err(e2s)?;
        for n in -3..=0 {
            let rep = psf.flatness_check(n, 3);
            for x in 0..base.space().len() {
                let degrees: Vec<i32> = s.spec().entries.iter().filter(|g| g.support.contains(x)).map(|g| g.degree).collect();
                let oracle = common::hilbert_counts(&degrees, n, 3);
                let want: Vec<usize> = (0..=3).map(|w| oracle.get(&(n, w)).copied().unwrap_or(0)).collect();
                let got = &rep.ranks[base.space().name(x)];
                ensure(*got == want, || format!("{}: rank at {} in degree {n}: {got:?} vs {want:?}", fx.name, base.space().name(x)))?;
            }
        }
        rings += 1;
    }
    let w = window(-3);
    let fixtures = acyclic_modules().map_err(e2s)?;
    for m in &fixtures {
        let own = module_cohomology(&m.module.ring, &m.module, w).map_err(e2s)?;
        ensure(own.is_acyclic(), || format!("{}: module is not acyclic", m.name))?;
        ensure(m.ring.is_pseudo_semi_free(), || format!("{}: ring is not pseudo-semi-free", m.name))?;
        let t = module_cohomology(&m.ring, &m.module, w).map_err(e2s)?;
        ensure(t.is_acyclic(), || format!("{}: tensor product is not acyclic", m.name))?;
    }
    Ok(format!("{rings} pseudo-free rings stalkwise free, {} modules stay acyclic", fixtures.len()))
}

const DUAL_NUMBERS: &str = r#"{"space": {"points": ["pt"]},
    "rings": [{"name": "O", "generators": [{"name": "x", "degree": 0}], "relations": [{"value": "x^2"}]}],
    "command": {"name": "cotangent", "ring": "O", "q_max": 3, "window": "-2:0"}}"#;

fn criterion_9() -> Outcome {
    let p = parse_problem(DUAL_NUMBERS).map_err(e2s)?;
    let o = p.ring("O").map_err(e2s)?;
    let rep = cotangent_complex(o, 3, window(-2), 0).map_err(e2s)?;
    ensure(rep.experimental, || "report is not flagged experimental".into())?;
    let r = PolyRing::new(Field::Rationals, 1);
    let names = vec!["x".to_string()];
    let oracle = hypersurface_cotangent_oracle(r, &names, &r.var(0).mul(&r.var(0)), 0);
    let mut summary = Vec::new();
    for n in [-2, -1, 0] {
        let got = &rep.report.get("pt", n).ok_or("missing degree")?.module;
        let ok = match oracle.get(&n) {
            Some(want) if !want.is_zero() => !got.is_zero() && iso_over(got, want, &names).map_err(e2s)?,
            _ => got.is_zero(),
        };
        ensure(ok, || format!("H^{n} differs from the hypersurface oracle"))?;
        summary.push(format!("H^{n}: {}", sheafdg::homology::format_presentation(got)));
    }
    let h0 = rep.report.get("pt", 0).unwrap();
    let hm1 = rep.report.get("pt", -1).unwrap();
    ensure(h0.rank() == 1 && hm1.rank() == 1, || format!("ranks {} and {}", h0.rank(), hm1.rank()))?;
    Ok(format!("experimental; {}", summary.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("stalk isomorphism", criterion_1),
        ("d² = 0 and Leibniz", criterion_2),
        ("resolution certificate", criterion_3),
        ("derived intersection vs Koszul Tor", criterion_4),
        ("resolution independence", criterion_5),
        ("Ore square", criterion_6),
        ("factorization", criterion_7),
        ("flatness and K-flatness", criterion_8),
        ("cotangent complex (experimental)", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        let line = match out {
            Ok(detail) => format!("criterion {}: PASS  {name} ({detail}) [{secs:.2}s]\n", i + 1),
            Err(why) => {
                failed.push(i + 1);
                format!("criterion {}: FAIL  {name}: {why} [{secs:.2}s]\n", i + 1)
            }
        };
        // Written past the test harness's capture so the lines show on passing runs too.
        let _ = std::io::stderr().write_all(line.as_bytes());
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
