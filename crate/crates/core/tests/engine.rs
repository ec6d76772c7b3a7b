use std::time::Instant;

use sheafdg::derived::{compare_with_oracle, derived_intersection, one_point_affine_comparison, ClosedSubspace};
use sheafdg::fixtures::{morphism, INTERSECTIONS, KOSZUL_ENDOMORPHISMS, PUNCTURED_LINE, RESOLUTION_TARGETS};
use sheafdg::homology::reports_isomorphic;
use sheafdg::resolution::{
    certify, check_homotopy_witness, check_quasi_homotopy_witness, mutant_drop_last, resolve, HomotopyWitness,
};
use sheafdg::{cohomology, SheafHom, Window};

#[test]
fn every_target_resolves_and_certifies() {
    for fx in RESOLUTION_TARGETS {
        let p = fx.problem();
        let b = p.ring("B").unwrap();
        for q in 0..=3 {
            let t = Instant::now();
            let s = resolve(b, q, 0).unwrap_or_else(|e| panic!("{} q={q}: {e}", fx.name));
            assert!(s.ring.relations().is_empty());
            assert!(certify(&s).unwrap().passed(), "{} q={q}", fx.name);
            if let Some(m) = mutant_drop_last(&s).unwrap() {
                let c = certify(&m).unwrap();
                assert!(!c.passed(), "{} q={q}: mutant passed", fx.name);
            }
            eprintln!("{} q={q}: {} generators, {:?}", fx.name, s.ring.own_gens().len(), t.elapsed());
        }
    }
}

#[test]
fn intersections_match_the_tor_oracle() {
    let w = Window::new(-3, 0).unwrap();
    for ix in INTERSECTIONS {
        let t = Instant::now();
        let p = ix.fixture.problem();
        let o = p.ring("O").unwrap();
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let y1 = ClosedSubspace::from_exprs(o, &own(ix.ideals.0)).unwrap();
        let y2 = ClosedSubspace::from_exprs(o, &own(ix.ideals.1)).unwrap();
        let d = derived_intersection(o, &y1, &y2, 4, w, (0, 0)).unwrap();
        let mism = compare_with_oracle(o, &y1, &y2, &d.full_report, w).unwrap();
        assert!(mism.is_empty(), "{}: {mism:?}", ix.fixture.name);
        for (p, want) in ix.dims.iter().enumerate() {
            let got = d.full_report.get("pt", -(p as i32)).unwrap().module.k_dim().unwrap();
            assert_eq!(got, *want, "{} H^-{p}", ix.fixture.name);
        }
        assert!(d.comparison.holds, "{}", ix.fixture.name);
        eprintln!("{}: {:?}", ix.fixture.name, t.elapsed());
    }
}

#[test]
fn punctured_line_intersection_lives_on_the_closed_point() {
    let w = Window::new(-2, 0).unwrap();
    let p = PUNCTURED_LINE.problem();
    let o = p.ring("O").unwrap();
    let y = ClosedSubspace::from_exprs(o, &["x".into()]).unwrap();
    assert_eq!(y.support, 0b10);
    let d = derived_intersection(o, &y, &y, 3, w, (0, 0)).unwrap();
    assert!(d.vanishes_off_support);
    assert_eq!(d.ring.space().points(), &["c".to_string()]);
    assert_eq!(d.report.get("c", -1).unwrap().module.k_dim(), Some(1));
    assert!(compare_with_oracle(o, &y, &y, &d.full_report, w).unwrap().is_empty());
}

#[test]
fn derived_intersection_is_symmetric() {
    let w = Window::new(-2, 0).unwrap();
    for ix in INTERSECTIONS {
        let p = ix.fixture.problem();
        let o = p.ring("O").unwrap();
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let y1 = ClosedSubspace::from_exprs(o, &own(ix.ideals.0)).unwrap();
        let y2 = ClosedSubspace::from_exprs(o, &own(ix.ideals.1)).unwrap();
        let a = derived_intersection(o, &y1, &y2, 3, w, (0, 0)).unwrap();
        let b = derived_intersection(o, &y2, &y1, 3, w, (0, 0)).unwrap();
        let act: Vec<String> = o.gens().iter().map(|g| g.name.clone()).collect();
        assert_eq!(reports_isomorphic(&a.full_report, &b.full_report, &act).unwrap(), None, "{}", ix.fixture.name);
    }
}

#[test]
fn cohomology_commutes_with_restriction() {
    let w = Window::new(-2, 0).unwrap();
    for fx in RESOLUTION_TARGETS {
        let p = fx.problem();
        let b = p.ring("B").unwrap();
        let full = cohomology(b, w).unwrap();
        for x in 0..b.space().len() {
            let u = b.space().minimal_open(x);
            let r = b.restrict_to_open(&u).unwrap();
            let part = cohomology(&r, w).unwrap();
            assert_eq!(part.per_point.len(), u.points().count());
            for (pt, degs) in &part.per_point {
                for (n, d) in degs {
                    let whole = full.get(pt, *n).unwrap();
                    assert_eq!(d.presentation(), whole.presentation(), "{} on U_{x} at ({pt}, {n})", fx.name);
                }
            }
        }
    }
}

#[test]
fn one_point_targets_compare_with_registered_koszul() {
    for name in ["line-origin", "double-point", "plane-origin"] {
        let fx = RESOLUTION_TARGETS.iter().find(|f| f.name == name).unwrap();
        let p = fx.problem();
        let sq = one_point_affine_comparison(p.ring("B").unwrap(), 2, 0).unwrap();
        assert!(sq.closes, "{name}");
        assert!(sq.psi_qiso.iter().all(|v| v.holds), "{name}");
        assert!(sq.stage.certificate.passed(), "{name}");
    }
}

#[test]
fn homotopy_witnesses() {
    let p = KOSZUL_ENDOMORPHISMS.problem();
    let w = Window::new(-2, 0).unwrap();
    let phi0 = morphism(&p, "phi0");
    let phi1 = morphism(&p, "phi1");
    let good = HomotopyWitness {
        bplus: p.ring("Bplus").unwrap().clone(),
        eta: morphism(&p, "eta"),
        eps: morphism(&p, "eps"),
        phi: morphism(&p, "phi"),
    };
    let r = check_homotopy_witness(&good, &phi0, &phi1, w).unwrap();
    assert!(r.valid, "{:?}", r.diagnostics);

    let wrong_pair = check_homotopy_witness(&good, &phi0, &phi0, w).unwrap();
    assert!(!wrong_pair.valid);
    assert!(wrong_pair.diagnostics.iter().any(|d| d.contains("φ∘η")));

    let bad = HomotopyWitness {
        bplus: p.ring("Bbad").unwrap().clone(),
        eta: morphism(&p, "eta_bad"),
        eps: morphism(&p, "eps_bad"),
        phi: morphism(&p, "phi_bad"),
    };
    let r = check_homotopy_witness(&bad, &phi0, &phi1, w).unwrap();
    assert!(!r.valid);
    assert!(r.diagnostics.iter().any(|d| d.contains("ε is not a quasi-isomorphism")));

    let b = p.ring("B").unwrap();
    let id = SheafHom::identity(b);
    assert!(check_quasi_homotopy_witness(&id, &good, &phi0, &phi1, w).unwrap().valid);
    let to_zero = morphism(&p, "phi1");
    let q = check_quasi_homotopy_witness(&to_zero, &good, &phi0, &phi1, w);
    assert!(q.map(|r| !r.valid).unwrap_or(true));
}
