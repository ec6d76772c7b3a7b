use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sheafdg::derived::derived_intersection;
use sheafdg::groebner::buchberger;
use sheafdg::poly::MonomialOrder;
use sheafdg::resolution::{certify, resolve};
use sheafdg::{cohomology, Field, PolyRing, Window};
use sheafdg_bench::{intersections, targets};

fn groebner(c: &mut Criterion) {
    let r = PolyRing::new(Field::Rationals, 3);
    let [x, y, z] = [0, 1, 2].map(|i| r.var(i));
    let cyclic = vec![
        x.add(&y).add(&z),
        x.mul(&y).add(&y.mul(&z)).add(&z.mul(&x)),
        x.mul(&y).mul(&z).sub(&r.one()),
    ];
    c.bench_function("buchberger/cyclic3", |b| b.iter(|| buchberger(&cyclic, MonomialOrder::GrevLex).unwrap()));
}

fn resolutions(c: &mut Criterion) {
    let mut g = c.benchmark_group("resolve_q2");
    for (name, b) in targets() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &b, |bch, b| bch.iter(|| resolve(b, 2, 0).unwrap()));
    }
    g.finish();
    let mut g = c.benchmark_group("certify_q2");
    for (name, b) in targets() {
        let st = resolve(&b, 2, 0).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &st, |bch, st| bch.iter(|| certify(st).unwrap()));
    }
    g.finish();
}

fn intersection(c: &mut Criterion) {
    let w = Window::new(-2, 0).unwrap();
    let mut g = c.benchmark_group("derived_intersection_q3");
    g.sample_size(20);
    for (name, o, y1, y2) in intersections() {
        g.bench_function(name, |b| b.iter(|| derived_intersection(&o, &y1, &y2, 3, w, (0, 0)).unwrap()));
    }
    g.finish();
    let mut g = c.benchmark_group("cohomology");
    for (name, o, ..) in intersections() {
        g.bench_function(name, |b| b.iter(|| cohomology(&o, w).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, groebner, resolutions, intersection);
criterion_main!(benches);
