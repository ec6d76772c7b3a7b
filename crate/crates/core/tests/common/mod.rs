//! Random instances and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sheafdg::dg::extend_derivation;
use sheafdg::{DgRing, Field, FiniteSpace, GcPoly, Generator, GeneratorSpec, OpenSet, PsfRing, Section};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random poset on `1..=max_points` points: covers `i < j` drawn independently.
pub fn random_space(rng: &mut impl Rng, max_points: usize) -> FiniteSpace {
    let n = rng.gen_range(1..=max_points);
    let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut covers = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if rng.gen_bool(0.3) {
                covers.push((points[i].clone(), points[j].clone()));
            }
        }
    }
    FiniteSpace::from_covers(points, &covers).expect("covers of a DAG form a poset")
}

/// Nonempty union of minimal opens.
pub fn random_open(rng: &mut impl Rng, space: &FiniteSpace) -> OpenSet {
    let mut mask = space.minimal_open(rng.gen_range(0..space.len())).members();
    for x in 0..space.len() {
        if rng.gen_bool(0.2) {
            mask |= space.minimal_open(x).members();
        }
    }
    space.open_set(mask).expect("union of minimal opens is open")
}

pub fn random_spec(rng: &mut impl Rng, space: &FiniteSpace, max_gens: usize) -> GeneratorSpec {
    let n = rng.gen_range(1..=max_gens);
    GeneratorSpec::new(
        (0..n)
            .map(|i| Generator {
                name: format!("t{i}"),
                degree: -rng.gen_range(0..=3),
                support: random_open(rng, space),
            })
            .collect(),
    )
    .unwrap()
}

/// Coefficients of `Π 1/(1-t) · Π 1/(1-s^{-d}) · Π (1+s^{-d})` over the given degrees, keyed by
/// (degree, degree-0 weight), truncated to degree ≥ `n_min` and weight ≤ `w_max`; zero entries omitted.
pub fn hilbert_counts(degrees: &[i32], n_min: i32, w_max: u32) -> BTreeMap<(i32, u32), usize> {
    let a_max = (-n_min) as usize;
    let w_max = w_max as usize;
    let mut c = vec![vec![0usize; w_max + 1]; a_max + 1];
    c[0][0] = 1;
    for &d in degrees {
        let s = (-d) as usize;
        let mut next = vec![vec![0usize; w_max + 1]; a_max + 1];
        for a in 0..=a_max {
            for w in 0..=w_max {
                next[a][w] = if d == 0 {
                    (0..=w).map(|k| c[a][w - k]).sum()
                } else if d % 2 == 0 {
                    (0..=a / s).map(|k| c[a - k * s][w]).sum()
                } else {
                    c[a][w] + if a >= s { c[a - s][w] } else { 0 }
                };
            }
        }
        c = next;
    }
    let mut out = BTreeMap::new();
    for (a, row) in c.iter().enumerate() {
        for (w, &v) in row.iter().enumerate() {
            if v > 0 {
                out.insert((-(a as i32), w as u32), v);
            }
        }
    }
    out
}

fn random_coeff(rng: &mut impl Rng, field: Field) -> sheafdg::Coeff {
    loop {
        let c = field.from_i64(rng.gen_range(-4..=4));
        if c != field.zero() {
            return c;
        }
    }
}

/// Random nonzero monomial of degree exactly `degree` in the given (index, degree) variables.
pub fn random_monomial(rng: &mut impl Rng, field: Field, vars: &[(u32, i32)], degree: i32) -> Option<GcPoly> {
    let even0: Vec<_> = vars.iter().filter(|v| v.1 == 0).collect();
    let neg: Vec<_> = vars.iter().filter(|v| v.1 < 0).collect();
    for _ in 0..20 {
        let mut m = GcPoly::one(field);
        let mut deg = 0;
        while deg > degree {
            let Some(&&(v, d)) = neg.choose(rng) else { break };
            if deg + d < degree {
                break;
            }
            m = m.mul(&GcPoly::var(field, v, d));
            deg += d;
        }
        if deg != degree || m.is_zero() {
            continue;
        }
        for _ in 0..rng.gen_range(0..=2) {
            if let Some(&&(v, d)) = even0.choose(rng) {
                m = m.mul(&GcPoly::var(field, v, d));
            }
        }
        return Some(m);
    }
    None
}

/// Random homogeneous element of the given degree (possibly zero).
pub fn random_homogeneous(rng: &mut impl Rng, field: Field, vars: &[(u32, i32)], degree: i32) -> GcPoly {
    let mut p = GcPoly::zero(field);
    for _ in 0..rng.gen_range(1..=3) {
        if let Some(m) = random_monomial(rng, field, vars, degree) {
            p = p.add(&m.scale(&random_coeff(rng, field)));
        }
    }
    p
}

/// A random derivation instance: generators in order, each `d(t_i)` a closed element built
/// from earlier generators whose support contains `U_i`.
pub struct DerivationInstance {
    pub space: Arc<FiniteSpace>,
    pub field: Field,
    pub ring: PsfRing,
    pub values: Vec<Section>,
}

pub fn random_derivation(rng: &mut impl Rng) -> DerivationInstance {
    let space = Arc::new(random_space(rng, 3));
    let field = if rng.gen_bool(0.7) { Field::Rationals } else { Field::prime(5).unwrap() };
    let n = rng.gen_range(2..=5);
    let mut gens: Vec<Generator> = Vec::new();
    let mut d: Vec<GcPoly> = Vec::new();
    for i in 0..n {
        let degree = if i == 0 { 0 } else { -rng.gen_range(0..=3) };
        let support = if i == 0 || rng.gen_bool(0.5) { space.whole() } else { random_open(rng, &space) };
        let eligible: Vec<(u32, i32)> = gens
            .iter()
            .enumerate()
            .filter(|(_, g)| support.is_subset(&g.support))
            .map(|(j, g)| (j as u32, g.degree))
            .collect();
        let mut value = GcPoly::zero(field);
        if degree < 0 {
            let dv = |v: u32| d[v as usize].clone();
            for _ in 0..rng.gen_range(1..=2) {
                if let Some(b) = random_monomial(rng, field, &eligible, degree) {
                    value = value.add(&b.derivation(&dv).scale(&random_coeff(rng, field)));
                }
            }
            if degree == -1 {
                value = value.add(&random_homogeneous(rng, field, &eligible, 0));
            }
            if degree <= -3 {
                let a = random_homogeneous(rng, field, &eligible, -2).derivation(&dv);
                let b = random_homogeneous(rng, field, &eligible, degree + 1).derivation(&dv);
                value = value.add(&a.mul(&b));
            }
        }
        gens.push(Generator {
            name: format!("t{i}"),
            degree,
            support,
        });
        d.push(value);
    }
    let values = gens.iter().zip(&d).map(|(g, v)| Section::uniform(g.support, v.clone())).collect();
    let ring = PsfRing::new(space.clone(), field, None, GeneratorSpec::new(gens).unwrap()).unwrap();
    DerivationInstance { space, field, ring, values }
}

impl DerivationInstance {
    pub fn build(&self) -> Arc<DgRing> {
        extend_derivation(&self.ring, self.values.clone()).expect("closed values install")
    }
}
