//! Named verification scenarios behind `gkdv repro`.
//!
//! Each scenario is deterministic given the seed. `all` runs them on
//! separate threads and reports in a fixed order.

use clap::ValueEnum;
use gkdv::classify::{
    classify, defect_scale, generators, symmetry_condition_expr, verify_generator, CaseTag, SymmetryCondition,
};
use gkdv::pde::{evolve, fit_sech, flow_transform_with_rate, residual, Field};
use gkdv::reduce::{integrate, lift, painleve_first_integral, reduce_exp, reduce_log, reduce_power, ReducedOde};
use gkdv::soliton::{
    eval_soliton, perturbed_residual, residual_closed_form, soliton_derivatives, solve_params, Condition,
};
use gkdv::travelwave::{decay_rate, homoclinic_profile, wave_speed};
use gkdv::{parse, DomainInterval, Expr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::format::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    ClassifyTable,
    GeneratorDefects,
    ConditionEquivalence,
    SolitonResiduals,
    Homoclinic,
    ReductionLifts,
    FirstIntegral,
    PdePropagation,
    SymmetryFlow,
    All,
}

impl ScenarioName {
    /// Every concrete scenario, in report order.
    pub const EACH: [ScenarioName; 9] = [
        ScenarioName::ClassifyTable,
        ScenarioName::GeneratorDefects,
        ScenarioName::ConditionEquivalence,
        ScenarioName::SolitonResiduals,
        ScenarioName::Homoclinic,
        ScenarioName::ReductionLifts,
        ScenarioName::FirstIntegral,
        ScenarioName::PdePropagation,
        ScenarioName::SymmetryFlow,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::ClassifyTable => "classify-table",
            ScenarioName::GeneratorDefects => "generator-defects",
            ScenarioName::ConditionEquivalence => "condition-equivalence",
            ScenarioName::SolitonResiduals => "soliton-residuals",
            ScenarioName::Homoclinic => "homoclinic",
            ScenarioName::ReductionLifts => "reduction-lifts",
            ScenarioName::FirstIntegral => "first-integral",
            ScenarioName::PdePropagation => "pde-propagation",
            ScenarioName::SymmetryFlow => "symmetry-flow",
            ScenarioName::All => "all",
        }
    }
}

/// One verified quantity.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    /// `<=`, `>` or `==`.
    pub relation: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub found: Option<String>,
    pub pass: bool,
}

impl Check {
    fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            label: label.into(),
            value: Some(value),
            limit: Some(limit),
            relation: "<=",
            expected: None,
            found: None,
            pass: value <= limit,
        }
    }

    fn above(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            pass: value > limit,
            relation: ">",
            ..Check::at_most(label, value, limit)
        }
    }

    fn equal(label: impl Into<String>, found: &str, expected: &str) -> Self {
        Check {
            label: label.into(),
            value: None,
            limit: None,
            relation: "==",
            expected: Some(expected.into()),
            found: Some(found.into()),
            pass: found == expected,
        }
    }

    fn failed(label: impl Into<String>, err: &gkdv::Error) -> Self {
        Check::equal(label, &format!("error {}: {err}", err.kind()), "success")
    }

    pub fn render(&self) -> String {
        match (&self.value, &self.limit, &self.found, &self.expected) {
            (Some(v), Some(l), _, _) => format!("{}: {} {} {}", self.label, num(*v), self.relation, num(*l)),
            (_, _, Some(f), Some(e)) => format!("{}: {} (expected {})", self.label, f, e),
            _ => self.label.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub name: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl ScenarioResult {
    fn new(name: ScenarioName, checks: Vec<Check>) -> Self {
        ScenarioResult {
            name: name.as_str(),
            pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub scenarios: &'a [ScenarioResult],
}

impl<'a> Summary<'a> {
    pub fn new(seed: u64, scenarios: &'a [ScenarioResult]) -> Self {
        let passed = scenarios.iter().filter(|s| s.pass).count();
        Summary {
            seed,
            passed,
            failed: scenarios.len() - passed,
            scenarios,
        }
    }
}

/// Runs one scenario, or all of them concurrently for [`ScenarioName::All`].
pub fn run(name: ScenarioName, seed: u64) -> Vec<ScenarioResult> {
    if name != ScenarioName::All {
        return vec![run_one(name, seed)];
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = ScenarioName::EACH
            .iter()
            .map(|&n| s.spawn(move || run_one(n, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}

fn run_one(name: ScenarioName, seed: u64) -> ScenarioResult {
    // every scenario gets its own stream so results do not depend on order
    let rng = ChaCha8Rng::seed_from_u64(seed ^ (name as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let checks = match name {
        ScenarioName::ClassifyTable => classify_table(),
        ScenarioName::GeneratorDefects => generator_defects(),
        ScenarioName::ConditionEquivalence => condition_equivalence(),
        ScenarioName::SolitonResiduals => soliton_residuals(),
        ScenarioName::Homoclinic => homoclinic(),
        ScenarioName::ReductionLifts => reduction_lifts(rng),
        ScenarioName::FirstIntegral => first_integral(rng),
        ScenarioName::PdePropagation => pde_propagation(),
        ScenarioName::SymmetryFlow => symmetry_flow(),
        ScenarioName::All => unreachable!("expanded by run"),
    };
    ScenarioResult::new(name, checks)
}

/// Canonical nonlinearities with the interval each is sampled on.
pub const CORPUS: [(&str, f64, f64); 6] = [
    ("1", -1.0, 1.0),
    ("u", -1.0, 1.0),
    ("2 + u^3", -1.0, 1.0),
    ("1 + exp(2*u)", -1.0, 1.0),
    ("3*log(u-1)", 1.5, 3.5),
    ("sin(u)", -1.0, 1.0),
];

/// Sample count for defect and condition checks.
const SAMPLES: usize = 100;
const PARAM_TOL: f64 = 1e-8;

fn corpus_entry(text: &str, lo: f64, hi: f64) -> (Expr, DomainInterval) {
    let f = parse(text).expect("corpus expressions parse");
    let dom = DomainInterval::new(lo, hi).expect("corpus domains are valid");
    (f, dom)
}

fn classify_table() -> Vec<Check> {
    let expected = [
        (CaseTag::B1, None, None),
        (CaseTag::B2, None, None),
        (CaseTag::B3Power, Some(3.0), Some(0.0)),
        (CaseTag::B3Exp, Some(2.0), None),
        (CaseTag::B3Log, Some(3.0), Some(1.0)),
        (CaseTag::A, None, None),
    ];
    let mut checks = Vec::new();
    for ((text, lo, hi), (case, alpha, u0)) in CORPUS.iter().zip(expected) {
        let (f, dom) = corpus_entry(text, *lo, *hi);
        let r = match classify(&f, &dom) {
            Ok(r) => r,
            Err(e) => {
                checks.push(Check::failed(format!("classify {text}"), &e));
                continue;
            }
        };
        checks.push(Check::equal(format!("case of {text}"), r.case.as_str(), case.as_str()));
        if let Some(alpha) = alpha {
            let got = r.params.alpha.unwrap_or(f64::NAN);
            checks.push(Check::at_most(
                format!("|alpha - {alpha}| for {text}"),
                (got - alpha).abs(),
                PARAM_TOL,
            ));
        }
        if let Some(u0) = u0 {
            let got = r.params.u0.unwrap_or(f64::NAN);
            checks.push(Check::at_most(
                format!("|u0 - {u0}| for {text}"),
                (got - u0).abs(),
                PARAM_TOL,
            ));
        }
    }
    checks
}

fn generator_defects() -> Vec<Check> {
    let mut checks = Vec::new();
    for (text, lo, hi) in CORPUS.iter().filter(|c| c.0 != "sin(u)") {
        let (f, dom) = corpus_entry(text, *lo, *hi);
        let result = classify(&f, &dom).and_then(|r| {
            let scale = defect_scale(&f, &dom, SAMPLES)?;
            let mut worst = 0.0f64;
            for g in generators(&r) {
                worst = worst.max(verify_generator(&f, &g, &dom, SAMPLES)?);
            }
            Ok(worst / scale)
        });
        checks.push(match result {
            Ok(d) => Check::at_most(format!("scaled defect for {text}"), d, 1e-9),
            Err(e) => Check::failed(format!("defects for {text}"), &e),
        });
    }
    checks
}

fn condition_equivalence() -> Vec<Check> {
    let mut checks = Vec::new();
    for (text, lo, hi) in CORPUS {
        let (f, dom) = corpus_entry(text, lo, hi);
        let cond = SymmetryCondition::new(&f);
        let expr = symmetry_condition_expr(&f);
        let eval = || -> gkdv::Result<(f64, f64, usize)> {
            let nullity = classify(&f, &dom)?.nullity;
            let (mut rel, mut abs) = (0.0f64, 0.0f64);
            for u in dom.uniform_interior(SAMPLES) {
                let (v, s) = cond.eval(u)?;
                let direct = expr.eval(u)?;
                abs = abs.max(v.abs()).max(direct.abs());
                if s > 0.0 {
                    rel = rel.max(v.abs() / s);
                }
            }
            Ok((rel, abs, nullity))
        };
        match eval() {
            Ok((rel, _, nullity)) if nullity >= 1 => {
                checks.push(Check::at_most(
                    format!("relative condition value for {text}"),
                    rel,
                    1e-12,
                ));
            }
            Ok((_, abs, _)) => {
                checks.push(Check::above(format!("max |condition| for {text}"), abs, 0.1));
            }
            Err(e) => checks.push(Check::failed(format!("condition for {text}"), &e)),
        }
    }
    checks
}

fn soliton_residuals() -> Vec<Check> {
    let mut checks = Vec::new();
    for alpha in [1.0, 2.0, std::f64::consts::SQRT_2] {
        for f0 in [0.0, 1.0] {
            let tag = format!("alpha={alpha}, f0={f0}");
            let p = match solve_params(alpha, 0.5, f0, 0.0, 0.0) {
                Ok(p) => p,
                Err(e) => {
                    checks.push(Check::failed(tag, &e));
                    continue;
                }
            };
            checks.push(Check::at_most(
                format!("residual, {tag}"),
                residual_closed_form(&p),
                1e-9,
            ));
            for c in Condition::ALL {
                checks.push(Check::above(
                    format!("1% {} perturbation, {tag}", c.name()),
                    perturbed_residual(&p, c, 0.01),
                    1e-3,
                ));
            }
        }
    }
    // alpha = 1 amplitude is 12 A^2 = 3 for A = 1/2
    if let Ok(p) = solve_params(1.0, 0.5, 0.0, 0.0, 0.0) {
        checks.push(Check::at_most("|a - 12 A^2| for alpha=1", (p.a - 3.0).abs(), 1e-12));
    }
    checks
}

fn homoclinic() -> Vec<Check> {
    let f = parse("u").expect("valid");
    let mut checks = Vec::new();
    match homoclinic_profile(&f, 3.0, 30.0, 601) {
        Ok(profile) => {
            let err = profile
                .z
                .iter()
                .zip(&profile.w)
                .map(|(&z, &w)| (w - 3.0 / (z / 2.0).cosh().powi(2)).abs())
                .fold(0.0, f64::max);
            checks.push(Check::at_most("sup |w - 3 sech^2(z/2)|", err, 1e-6));
            match decay_rate(&profile) {
                Ok(k) => checks.push(Check::at_most("|decay rate - 1|", (k - 1.0).abs(), 0.02)),
                Err(e) => checks.push(Check::failed("decay rate", &e)),
            }
        }
        Err(e) => checks.push(Check::failed("homoclinic profile", &e)),
    }
    match wave_speed(&f, 3.0) {
        Ok(c) => checks.push(Check::at_most("|c - 4 A^2|", (c - 1.0).abs(), 1e-10)),
        Err(e) => checks.push(Check::failed("wave speed", &e)),
    }
    checks
}

fn lift_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Case name, ODE, initial data at the start of the span, and the `t` grid.
type LiftCase = (&'static str, ReducedOde, [f64; 3], Vec<f64>);

/// Random data for the reductions, one draw per case.
fn lift_cases(rng: &mut ChaCha8Rng) -> gkdv::Result<Vec<LiftCase>> {
    let small = |r: &mut ChaCha8Rng| [r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5)];
    let power_ic = small(rng);
    let exp_ic = small(rng);
    // keep w well away from zero for the logarithm
    let log_ic = [
        rng.gen_range(1.0..2.0),
        rng.gen_range(-0.2..0.2),
        rng.gen_range(-0.2..0.2),
    ];
    Ok(vec![
        (
            "POWER alpha=2",
            reduce_power(2.0, 0.0)?,
            power_ic,
            lift_grid(1.0, 2.0, 11),
        ),
        (
            "EXP alpha=1 lambda=1",
            reduce_exp(1.0, 1.0)?,
            exp_ic,
            lift_grid(1.0, 2.0, 11),
        ),
        (
            "LOG alpha=1 c1=1",
            reduce_log(1.0, 0.0, 1.0)?,
            log_ic,
            lift_grid(0.0, 1.0, 11),
        ),
    ])
}

fn reduction_lifts(mut rng: ChaCha8Rng) -> Vec<Check> {
    let cases = match lift_cases(&mut rng) {
        Ok(c) => c,
        Err(e) => return vec![Check::failed("reduced equations", &e)],
    };
    let xs = lift_grid(-1.0, 1.0, 41);
    cases
        .into_iter()
        .map(|(tag, ode, ic, ts)| {
            // z = x t^{-1/3} or x + t^2/2 stays inside [-2, 2] on this patch
            let patch = integrate(&ode, -2.0, &ic, 2.0).and_then(|traj| lift(&traj, 0.0, &ts, &xs));
            match patch {
                Ok(p) => Check::at_most(format!("lifted residual, {tag}"), p.residual_max, 1e-6),
                Err(e) => Check::failed(format!("lift {tag}"), &e),
            }
        })
        .collect()
}

fn first_integral(mut rng: ChaCha8Rng) -> Vec<Check> {
    let ode = match reduce_power(2.0, 0.0) {
        Ok(o) => o,
        Err(e) => return vec![Check::failed("POWER alpha=2", &e)],
    };
    (0..5)
        .map(|k| {
            let ic = [
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            ];
            match integrate(&ode, 0.0, &ic, 10.0).and_then(|t| painleve_first_integral(&t)) {
                Ok((_, drift)) => Check::at_most(format!("drift of 3w'' + zw + w^3, start {k}"), drift, 1e-7),
                Err(e) => Check::failed(format!("trajectory {k}"), &e),
            }
        })
        .collect()
}

/// Cell and run length shared by the propagation and flow scenarios.
const CELL: f64 = 80.0;
const GRID: usize = 512;

fn pde_propagation() -> Vec<Check> {
    let mut checks = Vec::new();
    for (alpha, f_text) in [(1.0, "u"), (2.0, "u^2")] {
        let tag = format!("alpha={alpha}");
        let run = || -> gkdv::Result<Vec<Check>> {
            let f = parse(f_text)?;
            let p = solve_params(alpha, 0.5, 0.0, 0.0, -0.5 * CELL / 2.0)?;
            let field = Field::from_fn(CELL, GRID, 0.0, |x| eval_soliton(&p, x, 0.0))?;
            let r = evolve(&field, &f, 4.0, 1e-3, 100)?;
            let speed = -p.c3;
            let first = r.peak_u[0];
            let amp = r.peak_u.iter().fold(0.0f64, |m, v| m.max((v - first).abs()));
            Ok(vec![
                Check::at_most(
                    format!("relative speed error, {tag}"),
                    (r.speed_fit - speed).abs() / speed,
                    5e-3,
                ),
                Check::at_most(format!("amplitude drift, {tag}"), amp, 1e-3),
                Check::at_most(format!("mass drift, {tag}"), r.mass_drift(), 1e-10),
                Check::at_most(
                    format!("relative momentum drift, {tag}"),
                    r.momentum_drift() / r.momentum[0].abs(),
                    1e-8,
                ),
            ])
        };
        match run() {
            Ok(c) => checks.extend(c),
            Err(e) => checks.push(Check::failed(format!("run {tag}"), &e)),
        }
    }
    checks
}

fn symmetry_flow() -> Vec<Check> {
    let eps: f64 = 0.1;
    let run = || -> gkdv::Result<Vec<Check>> {
        let f = parse("u^2")?;
        let cls = classify(&f, &DomainInterval::new(-1.0, 1.0)?)?;
        // the scaling generator follows the two translations
        let g = generators(&cls)[2];
        let p = solve_params(2.0, 0.5, 0.0, 0.0, -0.5 * CELL / 2.0)?;
        let mut checks = Vec::new();
        let mut slices = Vec::new();
        for t in [0.0, 1.0] {
            let field = Field::from_fn(CELL, GRID, t, |x| eval_soliton(&p, x, t))?;
            let ut = Field::from_fn(CELL, GRID, t, |x| soliton_derivatives(&p, x, t).0)?;
            let (img, rate, t_img) = flow_transform_with_rate(&field, &ut, &g, &cls, eps)?;
            let res = residual(&img, &rate, &f)?;
            checks.push(Check::at_most(format!("image residual at t={t}"), res, 1e-5));
            slices.push((t_img, fit_sech(&img, 0.0, None)?));
        }
        let (t0, s0) = slices[0];
        let (t1, s1) = slices[1];
        let big_a = s0.big_a;
        let want = eps.exp() * p.big_a;
        let c3 = (s1.center - s0.center) / (t1 - t0);
        let beta = s0.beta;
        let amp_scale = s0.a.abs().powf(2.0 / beta);
        checks.push(Check::at_most("|A - e^eps A| / A", (big_a - want).abs() / want, 1e-8));
        checks.push(Check::at_most("|beta - 2/alpha|", (beta - 1.0).abs(), 1e-8));
        checks.push(Check::at_most(
            "amplitude condition, relative",
            (big_a * big_a * (beta + 1.0) * (beta + 2.0) - amp_scale).abs() / amp_scale,
            1e-8,
        ));
        checks.push(Check::at_most(
            "speed condition, relative",
            (c3 + big_a * big_a * beta * beta).abs() / c3.abs(),
            1e-8,
        ));
        Ok(checks)
    };
    run().unwrap_or_else(|e| vec![Check::failed("scaling flow", &e)])
}
