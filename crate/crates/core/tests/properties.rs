mod common;

use proptest::prelude::*;
use rand::Rng;
use sheafdg::fixtures::RESOLUTION_TARGETS;
use sheafdg::groebner::{buchberger, normal_form};
use sheafdg::poly::{Exps, MonomialOrder};
use sheafdg::resolution::{certify, resolve};
use sheafdg::{Field, Poly, PolyRing, PsfRing, Section};

fn ring3() -> PolyRing {
    PolyRing::new(Field::Rationals, 3)
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((0u32..3, 0u32..3, 0u32..2, -3i64..=3), 1..4).prop_map(|terms| {
        let r = ring3();
        Poly::from_terms(
            r,
            terms
                .into_iter()
                .map(|(a, b, c, k)| (Exps::from_slice(&[a, b, c]), r.field.from_i64(k))),
        )
    })
}

fn nonzero_poly() -> impl Strategy<Value = Poly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_form_is_linear(gens in prop::collection::vec(nonzero_poly(), 1..3), f in poly(), g in poly()) {
        let gb = buchberger(&gens, MonomialOrder::GrevLex).unwrap();
        let lhs = normal_form(&f.add(&g), &gb).unwrap();
        let rhs = normal_form(&f, &gb).unwrap().add(&normal_form(&g, &gb).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ideal_combinations_reduce_to_zero(gens in prop::collection::vec(nonzero_poly(), 1..3), hs in prop::collection::vec(poly(), 2)) {
        let gb = buchberger(&gens, MonomialOrder::GrevLex).unwrap();
        let comb = gens.iter().zip(&hs).fold(ring3().zero(), |acc, (g, h)| acc.add(&g.mul(h)));
        prop_assert!(normal_form(&comb, &gb).unwrap().is_zero());
        prop_assert!(gb.contains(&comb));
    }

    #[test]
    fn buchberger_ignores_input_order(gens in prop::collection::vec(nonzero_poly(), 2..4)) {
        let a = buchberger(&gens, MonomialOrder::GrevLex).unwrap();
        let rev: Vec<Poly> = gens.iter().rev().cloned().collect();
        let b = buchberger(&rev, MonomialOrder::GrevLex).unwrap();
        prop_assert_eq!(a.gens().len(), b.gens().len());
        for g in a.gens() {
            prop_assert!(b.gens().contains(g));
        }
    }

    #[test]
    fn opens_form_a_lattice(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let space = common::random_space(&mut rng, 8);
        let u = common::random_open(&mut rng, &space);
        let v = common::random_open(&mut rng, &space);
        prop_assert!(space.is_down_closed(u.intersect(&v).unwrap().members()));
        prop_assert!(space.is_down_closed(u.union(&v).unwrap().members()));
        for x in u.points() {
            prop_assert!(space.minimal_open(x).is_subset(&u));
        }
    }

    #[test]
    fn products_are_associative_and_graded_commutative(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_derivation(&mut rng);
        let r = inst.build();
        let w = inst.space.whole();
        let vars: Vec<(u32, i32)> = r.gens().iter().enumerate()
            .filter(|(_, g)| g.support == w)
            .map(|(i, g)| (i as u32, g.degree))
            .collect();
        let degs: Vec<i32> = (0..3).map(|_| -rng.gen_range(0..=3)).collect();
        let [a, b, c] = [0, 1, 2].map(|i| common::random_homogeneous(&mut rng, inst.field, &vars, degs[i]));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        let swapped = b.mul(&a);
        let sign_flip = (degs[0] * degs[1]) % 2 != 0;
        prop_assert_eq!(a.mul(&b), if sign_flip { swapped.neg() } else { swapped });
        let psf = PsfRing::new(inst.space.clone(), inst.field, None, inst.ring.spec.clone()).unwrap();
        let ab = psf.multiply(&Section::uniform(w, a.clone()), &Section::uniform(w, b.clone())).unwrap();
        prop_assert!(ab.values.values().all(|v| *v == a.mul(&b)));
    }

    #[test]
    fn random_derivations_square_to_zero(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_derivation(&mut rng);
        let r = inst.build();
        prop_assert!(r.check_d_squared().is_ok());
        for x in 0..inst.space.len() {
            let vars = r.local_vars(x);
            let deg = -rng.gen_range(0..=3);
            let a = common::random_homogeneous(&mut rng, inst.field, &vars, deg);
            prop_assert!(r.stalk(x).is_zero(&r.d_at(x, &r.d_at(x, &a))));
        }
    }

    #[test]
    fn expressions_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_derivation(&mut rng);
        let r = inst.build();
        let vars = r.local_vars(0);
        let deg = -rng.gen_range(0..=2);
        let a = common::random_homogeneous(&mut rng, inst.field, &vars, deg);
        let text = r.format_value(&a);
        prop_assert_eq!(r.parse_expr(&text).unwrap(), a, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_seed_certifies(idx in 0..RESOLUTION_TARGETS.len(), seed in any::<u64>(), q in 1usize..=3) {
        let p = RESOLUTION_TARGETS[idx].problem();
        let b = p.ring("B").unwrap();
        let s = resolve(b, q, seed).unwrap();
        prop_assert!(s.ring.relations().is_empty());
        prop_assert!(certify(&s).unwrap().passed());
        let again = resolve(b, q, seed).unwrap();
        prop_assert!(again.ring.same_structure(&s.ring));
        for k in 0..q {
            let t = s.truncated(k).unwrap();
            prop_assert!(certify(&t).unwrap().passed(), "stage {} of {}", k, q);
        }
    }
}
