use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use gkdv::classify::{
    classify as classify_f, defect_scale, verify_generator, CanonicalParams, CaseTag, SymmetryGenerator,
};
use gkdv::pde::{evolve_with, suggest_dt, EvolveOptions, Field, RunReport};
use gkdv::reduce::{self, integrate, lift, painleve_first_integral, verify_y_and_p_chain, ChainReport, ReducedCase};
use gkdv::soliton::{
    eval_soliton, perturbed_residual, residual_closed_form, residual_scale, solve_params, Condition, SolitonParams,
};
use gkdv::travelwave::homoclinic_profile;
use gkdv::{parse, DomainInterval};
use serde::Serialize;

use crate::format::{num, to_json, write_csv};
use crate::repro;
use crate::{ClassifyArgs, CliError, ReduceArgs, ReduceCase, ReproArgs, SimulateArgs, SolitonArgs, TravelwaveArgs};

pub struct Global {
    pub json: bool,
    pub quiet: bool,
    pub seed: u64,
}

/// Perturbation applied by `soliton --check`.
const CHECK_PERTURBATION: f64 = 0.01;
/// Lift patch resolution.
const LIFT_NT: usize = 11;
const LIFT_NX: usize = 41;
/// Target number of report samples in a simulation.
const SIM_SAMPLES: usize = 100;

fn put(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::io("stdout", e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display(), e))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "none".into())
}

#[derive(Serialize)]
struct ClassifyOut<'a> {
    f: String,
    case: CaseTag,
    params: CanonicalParams,
    nullity: usize,
    generators: &'a [SymmetryGenerator],
    defects: Vec<f64>,
    defect_scale: f64,
    notes: &'a [String],
}

pub fn classify(a: &ClassifyArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let f = parse(&a.f)?;
    let dom = DomainInterval::new(a.domain[0], a.domain[1])?;
    let m = a.samples as usize;
    let res = classify_f(&f, &dom)?;
    let defects = res
        .generators
        .iter()
        .map(|gen| verify_generator(&f, gen, &dom, m))
        .collect::<Result<Vec<_>, _>>()?;
    let report = ClassifyOut {
        f: f.to_string(),
        case: res.case,
        params: res.params,
        nullity: res.nullity,
        generators: &res.generators,
        defects,
        defect_scale: defect_scale(&f, &dom, m)?,
        notes: &res.notes,
    };
    if g.json {
        return put(out, &to_json(&report));
    }
    if g.quiet {
        return put(out, res.case.as_str());
    }
    put(out, &format!("f(u) = {}", report.f))?;
    put(out, &format!("case: {}", res.case))?;
    let p = &res.params;
    put(
        out,
        &format!(
            "params: f0 = {}, f1 = {}, lambda = {}, alpha = {}, u0 = {}",
            opt(p.f0),
            opt(p.f1),
            opt(p.lambda),
            opt(p.alpha),
            opt(p.u0)
        ),
    )?;
    put(out, &format!("nullity: {}", res.nullity))?;
    put(out, "generators (tau0, a0, a1, b, c, d), defect:")?;
    for (gen, d) in res.generators.iter().zip(&report.defects) {
        put(
            out,
            &format!(
                "  ({}, {}, {}, {}, {}, {})  {}  {}",
                num(gen.tau0),
                num(gen.a0),
                num(gen.a1),
                num(gen.b),
                num(gen.c),
                num(gen.d),
                num(*d),
                gen.describe()
            ),
        )?;
    }
    put(out, &format!("defect scale: {}", num(report.defect_scale)))?;
    for n in &res.notes {
        put(out, &format!("note: {n}"))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TravelwaveOut {
    c: f64,
    w0: f64,
    decay_rate: Option<f64>,
    validation_error: f64,
    /// Largest |w'^2/2 + V(w)| over the samples.
    energy_max: f64,
    n: usize,
    z_max: f64,
}

pub fn travelwave(a: &TravelwaveArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let f = parse(&a.f)?;
    let profile = homoclinic_profile(&f, a.w0, a.zmax, a.n)?;
    let energy_max = profile.energies(&f)?.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        let rows = (0..profile.z.len()).map(|i| vec![profile.z[i], profile.w[i], profile.dw[i]]);
        write_csv(&mut w, &["z", "w", "dw"], rows)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(path.display(), e))?;
    }
    let report = TravelwaveOut {
        c: profile.c,
        w0: profile.w0,
        decay_rate: profile.decay_rate,
        validation_error: profile.validation_error,
        energy_max,
        n: profile.z.len(),
        z_max: a.zmax,
    };
    if g.json {
        return put(out, &to_json(&report));
    }
    if g.quiet {
        return Ok(());
    }
    put(out, &format!("speed c: {}", num(report.c)))?;
    put(out, &format!("crest w0: {}", num(report.w0)))?;
    put(out, &format!("decay rate: {}", opt(report.decay_rate)))?;
    put(out, &format!("quadrature check: {}", num(report.validation_error)))?;
    put(out, &format!("max |H|: {}", num(report.energy_max)))?;
    put(
        out,
        &format!("samples: {} on [-{}, {}]", report.n, num(a.zmax), num(a.zmax)),
    )
}

#[derive(Serialize)]
struct PerturbedOut {
    condition: &'static str,
    residual: f64,
}

#[derive(Serialize)]
struct SolitonCheck {
    residual: f64,
    scale: f64,
    condition_defects: [f64; 3],
    perturbation: f64,
    perturbed: Vec<PerturbedOut>,
}

#[derive(Serialize)]
struct SolitonOut {
    params: SolitonParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<SolitonCheck>,
}

pub fn soliton(a: &SolitonArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let p = solve_params(a.alpha, a.big_a, a.f0, a.u0, a.phase)?;
    let check = a.check.then(|| SolitonCheck {
        residual: residual_closed_form(&p),
        scale: residual_scale(&p),
        condition_defects: p.condition_defects(),
        perturbation: CHECK_PERTURBATION,
        perturbed: Condition::ALL
            .iter()
            .map(|&c| PerturbedOut {
                condition: c.name(),
                residual: perturbed_residual(&p, c, CHECK_PERTURBATION),
            })
            .collect(),
    });
    let report = SolitonOut { params: p, check };
    if g.json {
        return put(out, &to_json(&report));
    }
    if g.quiet {
        return Ok(());
    }
    put(out, "u = u0 + a sech^beta(A (x - c3 t) + b)")?;
    for (k, v) in [
        ("alpha", p.alpha),
        ("beta", p.beta),
        ("a", p.a),
        ("A", p.big_a),
        ("b", p.b_phase),
        ("c3", p.c3),
        ("u0", p.u0),
        ("f0", p.f0),
    ] {
        put(out, &format!("{k} = {}", num(v)))?;
    }
    if let Some(c) = &report.check {
        put(out, &format!("residual (scaled): {}", num(c.residual)))?;
        put(out, &format!("residual scale: {}", num(c.scale)))?;
        for q in &c.perturbed {
            put(
                out,
                &format!(
                    "{} perturbed by {}: {}",
                    q.condition,
                    num(c.perturbation),
                    num(q.residual)
                ),
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FirstIntegral {
    mean: f64,
    drift: f64,
}

#[derive(Serialize)]
struct LiftOut {
    nt: usize,
    nx: usize,
    residual_max: f64,
    fd_ut_max: f64,
}

#[derive(Serialize)]
struct ReduceOut {
    case: ReducedCase,
    alpha: f64,
    lambda: f64,
    f0: f64,
    c1: f64,
    z0: f64,
    z1: f64,
    samples: usize,
    endpoint: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_integral: Option<FirstIntegral>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain: Option<ChainReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lift: Option<LiftOut>,
}

pub fn reduce(a: &ReduceArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let ode = match a.case {
        ReduceCase::Power => reduce::reduce_power(a.alpha, a.f0)?,
        ReduceCase::Exp => reduce::reduce_exp(a.alpha, a.lambda)?.with_f0(a.f0),
        ReduceCase::Log => reduce::reduce_log(a.alpha, a.f0, a.c1)?,
    };
    let [z0, z1] = a.span;
    let traj = integrate(&ode, z0, &a.ic, z1)?;
    let first_integral = (a.case == ReduceCase::Power && a.alpha == 2.0)
        .then(|| painleve_first_integral(&traj))
        .transpose()?
        .map(|(mean, drift)| FirstIntegral { mean, drift });
    let chain = if a.case == ReduceCase::Log {
        Some(verify_y_and_p_chain(a.alpha, a.f0, a.c1, &traj)?)
    } else {
        None
    };
    let lift_out = match a.lift {
        Some([t0, t1, x0, x1]) => {
            let patch = lift(&traj, 0.0, &linspace(t0, t1, LIFT_NT), &linspace(x0, x1, LIFT_NX))?;
            Some(LiftOut {
                nt: LIFT_NT,
                nx: LIFT_NX,
                residual_max: patch.residual_max,
                fd_ut_max: patch.fd_ut_max,
            })
        }
        None => None,
    };
    if let Some(path) = &a.csv {
        let mut w = create(path)?;
        let rows = (0..traj.z.len()).map(|i| {
            let mut row = vec![traj.z[i]];
            row.extend_from_slice(&traj.states[i]);
            row.push(traj.highest[i]);
            row
        });
        write_csv(&mut w, &["z", "w", "dw", "ddw", "dddw"], rows)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(path.display(), e))?;
    }
    let report = ReduceOut {
        case: traj.case,
        alpha: ode.alpha,
        lambda: ode.lambda,
        f0: ode.f0,
        c1: ode.c1,
        z0,
        z1,
        samples: traj.z.len(),
        endpoint: traj.endpoint().map(<[f64]>::to_vec).unwrap_or_default(),
        first_integral,
        chain,
        lift: lift_out,
    };
    if g.json {
        return put(out, &to_json(&report));
    }
    if g.quiet {
        return Ok(());
    }
    put(out, &format!("case: {}", report.case.as_str()))?;
    put(
        out,
        &format!("span: [{}, {}] with {} samples", num(z0), num(z1), report.samples),
    )?;
    let end: Vec<String> = report.endpoint.iter().map(|v| num(*v)).collect();
    put(out, &format!("endpoint (w, w', w''): {}", end.join(", ")))?;
    if let Some(fi) = &report.first_integral {
        put(
            out,
            &format!("3w'' + z w + w^3: mean {}, drift {}", num(fi.mean), num(fi.drift)),
        )?;
    }
    if let Some(c) = &report.chain {
        put(out, &format!("y-form residual: {}", num(c.y_residual)))?;
        put(out, &format!("p-form residual: {}", opt(c.p_residual)))?;
    }
    if let Some(l) = &report.lift {
        put(
            out,
            &format!("lift residual: {} on {}x{} patch", num(l.residual_max), l.nt, l.nx),
        )?;
    }
    Ok(())
}

/// Initial condition for `simulate`.
#[derive(Debug, Clone, PartialEq)]
enum InitialData {
    Soliton { alpha: f64, big_a: f64, f0: f64, u0: f64 },
    File(String),
}

fn parse_ic(text: &str) -> Result<InitialData, CliError> {
    if let Some(path) = text.strip_prefix("file:") {
        return Ok(InitialData::File(path.to_string()));
    }
    let body = text
        .strip_prefix("soliton:")
        .ok_or_else(|| CliError::Usage(format!("--ic must start with `soliton:` or `file:`, got `{text}`")))?;
    let (mut alpha, mut big_a, mut f0, mut u0) = (None, None, 0.0, 0.0);
    for item in body.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("`{v}` is not a number")))?;
        match k.trim() {
            "alpha" => alpha = Some(v),
            "A" => big_a = Some(v),
            "f0" => f0 = v,
            "u0" => u0 = v,
            other => return Err(CliError::Usage(format!("unknown soliton key `{other}`"))),
        }
    }
    match (alpha, big_a) {
        (Some(alpha), Some(big_a)) => Ok(InitialData::Soliton { alpha, big_a, f0, u0 }),
        _ => Err(CliError::Usage("soliton initial data need alpha= and A=".into())),
    }
}

/// Reads `u` values from the last column of a CSV, skipping a header line.
fn read_profile(path: &str) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cell = line.rsplit(',').next().unwrap_or("").trim();
        match cell.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(CliError::Usage(format!("{path}:{}: `{cell}` is not a number", i + 1))),
        }
    }
    Ok(values)
}

#[derive(Serialize)]
struct SimulateOut<'a> {
    dt: f64,
    steps: usize,
    t_final: f64,
    mass_drift: f64,
    momentum_drift: f64,
    amplitude_drift: f64,
    #[serde(flatten)]
    report: &'a RunReport,
}

fn amplitude_drift(r: &RunReport) -> f64 {
    let first = r.peak_u.first().copied().unwrap_or(0.0);
    r.peak_u.iter().fold(0.0f64, |m, v| m.max((v - first).abs()))
}

pub fn simulate(a: &SimulateArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let f = parse(&a.f)?;
    let field = match parse_ic(&a.ic)? {
        InitialData::Soliton { alpha, big_a, f0, u0 } => {
            // crest at the middle of the cell at t = 0
            let p = solve_params(alpha, big_a, f0, u0, -big_a * a.len / 2.0)?;
            Field::from_fn(a.len, a.n.unwrap_or(512), 0.0, |x| eval_soliton(&p, x, 0.0))?
        }
        InitialData::File(path) => {
            let values = read_profile(&path)?;
            if let Some(n) = a.n {
                if n != values.len() {
                    return Err(CliError::Usage(format!(
                        "--N {n} but {path} has {} samples",
                        values.len()
                    )));
                }
            }
            Field::new(a.len, values, 0.0)?
        }
    };
    let dt = match a.dt {
        Some(dt) => dt,
        // shrink the suggested step so that it divides T
        None => {
            let dt = suggest_dt(&field, &f)?;
            if a.t_end > 0.0 {
                a.t_end / (a.t_end / dt).ceil()
            } else {
                dt
            }
        }
    };
    if !dt.is_finite() || dt <= 0.0 {
        return Err(CliError::Usage(format!("--dt must be positive, got {dt}")));
    }
    let steps = (a.t_end / dt).round() as usize;
    let opts = EvolveOptions {
        sample_every: (steps / SIM_SAMPLES).max(1),
        keep_snapshots: a.snapshots.is_some(),
    };
    let (report, err) = evolve_with(&field, &f, a.t_end, dt, opts);
    if let Some(e) = err {
        return Err(e.into());
    }
    if let Some(path) = &a.report {
        let mut w = create(path)?;
        writeln!(w, "{}", to_json(&report))
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(path.display(), e))?;
    }
    if let Some(path) = &a.snapshots {
        let mut w = create(path)?;
        let rows = report
            .snapshots
            .iter()
            .flat_map(|s| (0..s.n()).map(move |j| vec![s.t, s.x(j), s.values[j]]));
        write_csv(&mut w, &["t", "x", "u"], rows)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(path.display(), e))?;
    }
    let summary = SimulateOut {
        dt,
        steps,
        t_final: report.final_field.t,
        mass_drift: report.mass_drift(),
        momentum_drift: report.momentum_drift(),
        amplitude_drift: amplitude_drift(&report),
        report: &report,
    };
    if g.json {
        return put(out, &to_json(&summary));
    }
    if g.quiet {
        return Ok(());
    }
    put(out, &format!("steps: {} of dt = {}", steps, num(dt)))?;
    put(out, &format!("final time: {}", num(summary.t_final)))?;
    put(out, &format!("speed fit: {}", num(report.speed_fit)))?;
    put(out, &format!("amplitude drift: {}", num(summary.amplitude_drift)))?;
    put(out, &format!("mass drift: {}", num(summary.mass_drift)))?;
    put(out, &format!("momentum drift: {}", num(summary.momentum_drift)))?;
    put(out, &format!("residual max: {}", num(report.residual_max)))
}

pub fn repro(a: &ReproArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let results = repro::run(a.name, g.seed);
    let failed = results.iter().filter(|s| !s.pass).count();
    if g.json {
        put(out, &to_json(&repro::Summary::new(g.seed, &results)))?;
    } else {
        put(out, &format!("seed {}", g.seed))?;
        for s in &results {
            put(out, &format!("{} {}", if s.pass { "PASS" } else { "FAIL" }, s.name))?;
            if !g.quiet {
                for c in &s.checks {
                    put(
                        out,
                        &format!("    {} {}", if c.pass { "ok  " } else { "FAIL" }, c.render()),
                    )?;
                }
            }
        }
        put(out, &format!("{} passed, {} failed", results.len() - failed, failed))?;
    }
    if failed > 0 {
        return Err(CliError::ReproFailed {
            failed,
            total: results.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ic_strings() {
        assert_eq!(
            parse_ic("soliton:alpha=1,A=0.5").unwrap(),
            InitialData::Soliton {
                alpha: 1.0,
                big_a: 0.5,
                f0: 0.0,
                u0: 0.0
            }
        );
        assert_eq!(
            parse_ic("soliton:alpha=2,A=0.25,u0=-1").unwrap(),
            InitialData::Soliton {
                alpha: 2.0,
                big_a: 0.25,
                f0: 0.0,
                u0: -1.0
            }
        );
        assert_eq!(parse_ic("file:a.csv").unwrap(), InitialData::File("a.csv".into()));
        assert!(parse_ic("soliton:alpha=1").is_err());
        assert!(parse_ic("soliton:alpha=1,A=x").is_err());
        assert!(parse_ic("gauss:1").is_err());
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(0.3, 1.7, 5);
        assert_eq!(v[0], 0.3);
        assert_eq!(v[4], 1.7);
    }
}
