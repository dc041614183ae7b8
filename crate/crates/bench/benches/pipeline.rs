use std::hint::black_box;

use arclosure::frames::{ARChart, Window};
use arclosure::invert::{affine_reduce, decide_abelian, decide_affine, fourier_symbol};
use arclosure::limits::{frame_operator, limit_at};
use arclosure::pipeline::{run_closure, ClosureConfig};
use arclosure::specfun::{bessel_i, bessel_k};
use arclosure::symexpr::poly::{int, rat};
use arclosure::symexpr::{parse, Expr};
use criterion::{criterion_group, criterion_main, Criterion};

fn symbolic(c: &mut Criterion) {
    let chart = ARChart::interval(
        parse("x*(1 - x)").unwrap(),
        parse("3/4 + alpha").unwrap(),
        Window::interval(int(0), int(1)),
    )
    .unwrap();
    c.bench_function("frame_operator_symbolic_gamma", |b| {
        b.iter(|| frame_operator(black_box(&chart), &Expr::sym("g")).unwrap())
    });
    let planar = ARChart::planar(parse("y - x^2").unwrap(), Window::square(1)).unwrap();
    c.bench_function("limit_operator_tangency", |b| {
        b.iter(|| {
            let p = frame_operator(&planar, &Expr::one()).unwrap();
            limit_at(&planar, &p, &[int(0), int(0)]).unwrap()
        })
    });
}

fn deciders(c: &mut Criterion) {
    let chart = ARChart::interval(
        parse("x*(1 - x)").unwrap(),
        parse("3/4 - 3").unwrap(),
        Window::interval(int(0), int(1)),
    )
    .unwrap();
    let p = frame_operator(&chart, &Expr::constant(rat(3, 2))).unwrap();
    let op = limit_at(&chart, &p, &[int(0)]).unwrap();
    let sym = fourier_symbol(&op).unwrap();
    c.bench_function("decide_abelian_1d", |b| b.iter(|| decide_abelian(black_box(&sym))));
    let grushin = ARChart::planar(parse("x").unwrap(), Window::square(1))
        .unwrap()
        .with_h(Expr::int(3));
    let gp = frame_operator(&grushin, &Expr::one()).unwrap();
    let rop = affine_reduce(&limit_at(&grushin, &gp, &[int(0), int(0)]).unwrap()).unwrap();
    c.bench_function("decide_affine_with_probes", |b| {
        b.iter(|| decide_affine(black_box(&rop)))
    });
}

fn special(c: &mut Criterion) {
    c.bench_function("bessel_i_series_and_asymptotic", |b| {
        b.iter(|| {
            (1..=30)
                .map(|x| bessel_i(1.5, black_box(x as f64)).unwrap().value)
                .sum::<f64>()
        })
    });
    c.bench_function("bessel_k_integral", |b| {
        b.iter(|| {
            (1..=30)
                .map(|x| bessel_k(1.5, black_box(x as f64)).unwrap().value)
                .sum::<f64>()
        })
    });
}

fn closure(c: &mut Criterion) {
    let cfg = ClosureConfig::from_toml(
        r#"
[chart]
dim = 2
f = "x"
h = "1"
window = ["-1", "1", "-1", "1"]

[solver]
samples = 5
"#,
    )
    .unwrap();
    let mut g = c.benchmark_group("closure");
    g.sample_size(10);
    g.bench_function("grushin_5_points", |b| b.iter(|| run_closure(black_box(&cfg)).unwrap()));
    g.finish();
}

criterion_group!(benches, symbolic, deciders, special, closure);
criterion_main!(benches);
