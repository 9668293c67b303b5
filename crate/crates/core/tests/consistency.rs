//! Cross-module agreement: closed-form solitons against the travelling-wave
//! integrator and the spectral solver.

use std::f64::consts::SQRT_2;

use gkdv::classify::{classify, generators};
use gkdv::pde::{evolve, flow_transform_with_rate, residual, step, suggest_dt, Field};
use gkdv::soliton::{eval_soliton, solve_params, SolitonParams};
use gkdv::travelwave::{homoclinic_profile, wave_speed};
use gkdv::{parse, DomainInterval};

const LEN: f64 = 80.0;

fn centred(alpha: f64) -> SolitonParams {
    solve_params(alpha, 0.5, 0.0, 0.0, -0.5 * LEN / 2.0).unwrap()
}

fn sampled(p: &SolitonParams, n: usize, t: f64) -> Field {
    Field::from_fn(LEN, n, t, |x| eval_soliton(p, x, t)).unwrap()
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn homoclinic_profile_reproduces_closed_form() {
    for (alpha, f) in [(1.0, "u"), (2.0, "u^2")] {
        let f = parse(f).unwrap();
        let p = solve_params(alpha, 0.5, 0.0, 0.0, 0.0).unwrap();
        let profile = homoclinic_profile(&f, p.a, 30.0, 601).unwrap();
        let exact: Vec<f64> = profile.z.iter().map(|&z| eval_soliton(&p, z, 0.0)).collect();
        assert!(sup(&profile.w, &exact) <= 1e-6, "alpha {alpha}");
        assert!((wave_speed(&f, p.a).unwrap() + p.c3).abs() <= 1e-10);
    }
}

#[test]
fn spectral_runs_track_the_exact_solitons() {
    let cases = [(1.0, "u"), (2.0, "u^2"), (SQRT_2, "abs(u)^1.4142135623730951")];
    for (alpha, f) in cases {
        let f = parse(f).unwrap();
        let p = centred(alpha);
        let r = evolve(&sampled(&p, 512, 0.0), &f, 4.0, 1e-3, 200).unwrap();
        let exact = sampled(&p, 512, r.final_field.t);
        let shape = sup(&r.final_field.values, &exact.values) / p.a;
        assert!(shape <= 1e-3, "alpha {alpha}: shape error {shape}");
        assert!(
            (r.speed_fit + p.c3).abs() <= 5e-3 * p.c3.abs(),
            "alpha {alpha}: {}",
            r.speed_fit
        );
        assert!(r.mass_drift() <= 1e-10 * (1.0 + r.mass[0].abs()));
        assert!(r.momentum_drift() <= 1e-8 * r.momentum[0]);
    }
}

#[test]
fn suggested_step_is_stable_for_long_runs() {
    let f = parse("u").unwrap();
    let p = centred(1.0);
    let field = sampled(&p, 256, 0.0);
    let dt = suggest_dt(&field, &f).unwrap();
    let r = evolve(&field, &f, 10.0, dt, 100).unwrap();
    let exact = sampled(&p, 256, r.final_field.t);
    assert!(sup(&r.final_field.values, &exact.values) / p.a < 1e-2);
}

#[test]
fn symmetry_flow_of_numerical_solution_stays_a_solution() {
    // transformed residual is at most 10x the residual before the transform
    for (f_text, which) in [("u^2", 2usize), ("u", 3)] {
        let f = parse(f_text).unwrap();
        let cls = classify(&f, &DomainInterval::new(-1.0, 1.0).unwrap()).unwrap();
        let g = generators(&cls)[which];
        let alpha = if f_text == "u" { 1.0 } else { 2.0 };
        let p = centred(alpha);
        let dt = 1e-3;
        let start = evolve(&sampled(&p, 512, 0.0), &f, 0.5, dt, 100).unwrap().final_field;
        let before_step = step(&start, &f, dt).unwrap();
        let mid = step(&before_step, &f, dt).unwrap();
        // u_t at `before_step` from its neighbours
        let ut = Field::new(
            LEN,
            mid.values
                .iter()
                .zip(&start.values)
                .map(|(a, b)| (a - b) / (2.0 * dt))
                .collect(),
            before_step.t,
        )
        .unwrap();
        let pre = residual(&before_step, &ut, &f).unwrap();
        let (img, rate, _) = flow_transform_with_rate(&before_step, &ut, &g, &cls, 0.1).unwrap();
        let post = residual(&img, &rate, &f).unwrap();
        assert!(post <= 10.0 * pre, "{f_text}: {pre} -> {post}");
    }
}

#[test]
fn peak_moves_left_by_the_soliton_speed() {
    let f = parse("u").unwrap();
    let p = centred(1.0);
    let field = sampled(&p, 512, 0.0);
    let r = evolve(&field, &f, 4.0, 1e-3, 500).unwrap();
    let moved = r.peak_x.last().unwrap() - r.peak_x[0];
    // crest at A(x - c3 t) + b = 0 moves by c3 T
    assert!((moved - p.c3 * 4.0).abs() <= 5e-3 * 4.0);
    assert!((r.peak_u.last().unwrap() - r.peak_u[0]).abs() <= 1e-3);
}
