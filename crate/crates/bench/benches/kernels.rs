use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gkdv::classify::classify;
use gkdv::pde::{Field, Stepper};
use gkdv::reduce::{integrate, reduce_power};
use gkdv::soliton::{eval_soliton, residual_closed_form, solve_params};
use gkdv::travelwave::homoclinic_profile;
use gkdv::{parse, DomainInterval};

fn bench_classify(c: &mut Criterion) {
    let unit = DomainInterval::new(-1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("classify");
    for text in ["u", "2 + u^3", "1 + exp(2*u)", "sin(u)"] {
        let f = parse(text).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(text), &f, |b, f| {
            b.iter(|| classify(black_box(f), &unit).unwrap())
        });
    }
    group.finish();
}

fn bench_pde_step(c: &mut Criterion) {
    let f = parse("u^2").unwrap();
    let p = solve_params(2.0, 0.5, 0.0, 0.0, -10.0).unwrap();
    let mut group = c.benchmark_group("pde_step");
    for n in [256usize, 512, 1024] {
        let field = Field::from_fn(40.0, n, 0.0, |x| eval_soliton(&p, x, 0.0)).unwrap();
        let stepper = Stepper::new(n, 40.0, &f, 1e-3).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &field, |b, field| {
            b.iter(|| stepper.step(black_box(field)).unwrap())
        });
    }
    group.finish();
}

fn bench_homoclinic(c: &mut Criterion) {
    let f = parse("u").unwrap();
    c.bench_function("homoclinic_profile/kdv", |b| {
        b.iter(|| homoclinic_profile(black_box(&f), 3.0, 30.0, 601).unwrap())
    });
}

fn bench_reduction(c: &mut Criterion) {
    let ode = reduce_power(2.0, 0.0).unwrap();
    c.bench_function("integrate/power_alpha2_span10", |b| {
        b.iter(|| integrate(black_box(&ode), 0.0, &[0.3, -0.1, 0.2], 10.0).unwrap())
    });
}

fn bench_soliton_residual(c: &mut Criterion) {
    let p = solve_params(std::f64::consts::SQRT_2, 0.5, 1.0, 0.0, 0.0).unwrap();
    c.bench_function("soliton/residual_closed_form", |b| {
        b.iter(|| residual_closed_form(black_box(&p)))
    });
}

criterion_group!(
    kernels,
    bench_classify,
    bench_pde_step,
    bench_homoclinic,
    bench_reduction,
    bench_soliton_residual
);
criterion_main!(kernels);
