//! Lie point symmetry classification of `u_t = f(u) u_x + u_xxx`.
//!
//! Every symmetry has the form
//!
//! ```text
//! xi  = a0 + a1 t + b x
//! tau = tau0 + 3 b t
//! eta = c + d u
//! ```
//!
//! subject to the single constraint `(c + d u) f'(u) + 2 b f(u) + a1 = 0`.
//! The constraint is linear in `(c, d, 2b, a1)`, so sampling it at `m` points
//! gives an `m x 4` matrix whose nullspace counts the symmetries beyond the
//! two translations. The nullspace direction also identifies which of the
//! power / exponential / logarithmic families `f` belongs to.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{DomainInterval, Expr};

/// Relative singular-value cutoff for the numerical rank.
pub const RANK_TOL: f64 = 1e-9;
/// A nullspace component is treated as zero below this fraction of the norm.
pub const ZERO_COMPONENT_TOL: f64 = 1e-8;
/// Sup-norm threshold for deciding `f' = 0` or `f'' = 0` from samples.
pub const VANISHING_TOL: f64 = 1e-10;
/// Default number of Chebyshev samples.
pub const DEFAULT_SAMPLES: usize = 12;

/// Infinitesimal generator `xi d/dx + tau d/dt + eta d/du`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryGenerator {
    pub tau0: f64,
    pub a0: f64,
    pub a1: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SymmetryGenerator {
    pub const TIME_TRANSLATION: SymmetryGenerator = SymmetryGenerator {
        tau0: 1.0,
        a0: 0.0,
        a1: 0.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
    };

    pub const SPACE_TRANSLATION: SymmetryGenerator = SymmetryGenerator {
        tau0: 0.0,
        a0: 1.0,
        a1: 0.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
    };

    pub fn new(tau0: f64, a0: f64, a1: f64, b: f64, c: f64, d: f64) -> Self {
        SymmetryGenerator { tau0, a0, a1, b, c, d }
    }

    /// Generator with zero translation part from a constraint vector
    /// `(c, d, 2b, a1)`.
    pub fn from_constraint_vector(v: [f64; 4]) -> Self {
        SymmetryGenerator::new(0.0, 0.0, v[3], 0.5 * v[2], v[0], v[1])
    }

    pub fn constraint_vector(&self) -> [f64; 4] {
        [self.c, self.d, 2.0 * self.b, self.a1]
    }

    pub fn xi(&self, x: f64, t: f64) -> f64 {
        self.a0 + self.a1 * t + self.b * x
    }

    pub fn tau(&self, t: f64) -> f64 {
        self.tau0 + 3.0 * self.b * t
    }

    pub fn eta(&self, u: f64) -> f64 {
        self.c + self.d * u
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymmetryGenerator::new(
            s * self.tau0,
            s * self.a0,
            s * self.a1,
            s * self.b,
            s * self.c,
            s * self.d,
        )
    }

    /// Human-readable vector field, e.g. `(2 t - x) d/dx - 3 t d/dt + u d/du`.
    pub fn describe(&self) -> String {
        let poly = |terms: &[(f64, &str)]| -> Option<String> {
            let parts: Vec<String> = terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .map(|(c, s)| {
                    if s.is_empty() {
                        format!("{c}")
                    } else {
                        format!("{c}{s}")
                    }
                })
                .collect();
            (!parts.is_empty()).then(|| parts.join(" + "))
        };
        let mut out = Vec::new();
        if let Some(p) = poly(&[(self.a0, ""), (self.a1, "*t"), (self.b, "*x")]) {
            out.push(format!("({p}) d/dx"));
        }
        if let Some(p) = poly(&[(self.tau0, ""), (3.0 * self.b, "*t")]) {
            out.push(format!("({p}) d/dt"));
        }
        if let Some(p) = poly(&[(self.c, ""), (self.d, "*u")]) {
            out.push(format!("({p}) d/du"));
        }
        if out.is_empty() {
            "0".into()
        } else {
            out.join(" + ")
        }
    }
}

/// The six mutually exclusive classification cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseTag {
    /// Generic: only the two translations.
    #[serde(rename = "A")]
    A,
    /// `f` constant; linear equation.
    #[serde(rename = "B1")]
    B1,
    /// `f` affine; KdV.
    #[serde(rename = "B2")]
    B2,
    /// `f = f0 + lambda (u - u0)^alpha`.
    #[serde(rename = "B3_POWER")]
    B3Power,
    /// `f = f0 + lambda exp(alpha u)`.
    #[serde(rename = "B3_EXP")]
    B3Exp,
    /// `f = f0 + alpha log|u - u0|`.
    #[serde(rename = "B3_LOG")]
    B3Log,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::A => "A",
            CaseTag::B1 => "B1",
            CaseTag::B2 => "B2",
            CaseTag::B3Power => "B3_POWER",
            CaseTag::B3Exp => "B3_EXP",
            CaseTag::B3Log => "B3_LOG",
        }
    }
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of the recognised family. Which fields are set depends on the
/// case; for `B3_EXP`, `alpha` is the exponential rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CanonicalParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub case: CaseTag,
    pub params: CanonicalParams,
    /// Number of symmetries beyond the two translations (finite part).
    pub nullity: usize,
    pub generators: Vec<SymmetryGenerator>,
    /// Normalised constraint vectors `(c, d, 2b, a1)` spanning the nullspace.
    pub nullspace: Vec<[f64; 4]>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullspaceReport {
    pub samples: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub nullity: usize,
    /// Orthonormal basis in `(c, d, 2b, a1)` coordinates.
    pub basis: Vec<[f64; 4]>,
    /// `max_i |M v|` for each basis vector.
    pub residuals: Vec<f64>,
}

/// `f'''' f''^2 f' + f''' f''^3 - 2 f'''^2 f'' f'`, which vanishes
/// identically exactly when the symmetry algebra is larger than the
/// translations.
pub fn symmetry_condition_expr(f: &Expr) -> Expr {
    let [f1, f2, f3, f4] = derivatives(f);
    Expr::Add(vec![
        Expr::Mul(vec![f4, f2.clone(), f2.clone(), f1.clone()]),
        Expr::Mul(vec![f3.clone(), f2.clone(), f2.clone(), f2.clone()]),
        Expr::Mul(vec![Expr::Constant(-2.0), f3.clone(), f3, f2, f1]),
    ])
    .simplify()
}

fn derivatives(f: &Expr) -> [Expr; 4] {
    let f1 = f.diff();
    let f2 = f1.diff();
    let f3 = f2.diff();
    let f4 = f3.diff();
    [f1, f2, f3, f4]
}

/// Precomputed derivatives for evaluating the condition term by term.
pub struct SymmetryCondition {
    d: [Expr; 4],
}

impl SymmetryCondition {
    pub fn new(f: &Expr) -> Self {
        SymmetryCondition { d: derivatives(f) }
    }

    /// Returns `(value, scale)` where `scale` is the sum of the absolute
    /// values of the three terms, so `|value| / scale` is a relative defect.
    pub fn eval(&self, u: f64) -> Result<(f64, f64)> {
        let [f1, f2, f3, f4] = [
            self.d[0].eval(u)?,
            self.d[1].eval(u)?,
            self.d[2].eval(u)?,
            self.d[3].eval(u)?,
        ];
        let t1 = f4 * f2 * f2 * f1;
        let t2 = f3 * f2 * f2 * f2;
        let t3 = -2.0 * f3 * f3 * f2 * f1;
        Ok((t1 + t2 + t3, t1.abs() + t2.abs() + t3.abs()))
    }

    /// True when the condition holds at every sample to relative accuracy
    /// `rel_tol`.
    pub fn holds_on(&self, samples: &[f64], rel_tol: f64) -> Result<bool> {
        for &u in samples {
            let (v, s) = self.eval(u)?;
            if v.abs() > rel_tol * s {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Nullspace of the sampled constraint `(c + d u) f' + 2b f + a1 = 0`
/// at `m` Chebyshev points of `domain`.
pub fn eqf3_nullspace(f: &Expr, domain: &DomainInterval, m: usize) -> Result<NullspaceReport> {
    if m < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 samples, got {m}")));
    }
    eqf3_nullspace_at(f, &f.diff(), &domain.chebyshev_points(m, 0.0))
}

/// Nullspace of the constraint matrix at explicit sample points.
pub fn eqf3_nullspace_at(f: &Expr, df: &Expr, samples: &[f64]) -> Result<NullspaceReport> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() < 4 || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateSampling);
    }
    let m = samples.len();
    let mut mat = DMatrix::<f64>::zeros(m, 4);
    for (i, &u) in samples.iter().enumerate() {
        let fu = f.eval(u)?;
        let dfu = df.eval(u)?;
        mat[(i, 0)] = dfu;
        mat[(i, 1)] = u * dfu;
        mat[(i, 2)] = fu;
        mat[(i, 3)] = 1.0;
    }
    let svd = mat.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = singular_values[0];
    let rank = singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count();
    let basis: Vec<[f64; 4]> = order[rank..]
        .iter()
        .map(|&i| [v_t[(i, 0)], v_t[(i, 1)], v_t[(i, 2)], v_t[(i, 3)]])
        .collect();
    let residuals = basis
        .iter()
        .map(|v| {
            (0..m)
                .map(|r| (0..4).map(|c| mat[(r, c)] * v[c]).sum::<f64>().abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(NullspaceReport {
        samples: samples.to_vec(),
        singular_values,
        rank,
        nullity: 4 - rank,
        basis,
        residuals,
    })
}

/// Decides the classification case of `f` on `domain` and extracts the
/// family parameters together with an explicit generator basis.
pub fn classify(f: &Expr, domain: &DomainInterval) -> Result<ClassificationResult> {
    let df = f.diff();
    let ddf = df.diff();
    let samples = domain.chebyshev_points(DEFAULT_SAMPLES, 0.0);
    let shifted = domain.chebyshev_points(DEFAULT_SAMPLES, 0.5);

    let fv = eval_all(f, &samples)?;
    let dfv = eval_all(&df, &samples)?;
    let ddfv = eval_all(&ddf, &samples)?;
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut notes = Vec::new();
    if !domain.contains(0.0) {
        notes.push(format!(
            "domain [{}, {}] excludes the origin; classified on the given interval",
            domain.lo, domain.hi
        ));
    }

    let mut result = if sup(&dfv) <= VANISHING_TOL * (1.0 + sup(&fv)) {
        let f0 = mean(&fv);
        notes.push("infinite-dimensional family v(x,t) d/du exists for every solution v of the linear equation".into());
        ClassificationResult {
            case: CaseTag::B1,
            params: CanonicalParams {
                f0: Some(f0),
                ..Default::default()
            },
            nullity: 3,
            generators: Vec::new(),
            nullspace: Vec::new(),
            notes,
        }
    } else if sup(&ddfv) <= VANISHING_TOL * (1.0 + sup(&dfv)) {
        let f1 = mean(&dfv);
        let f0 = mean(&fv.iter().zip(&samples).map(|(fu, u)| fu - f1 * u).collect::<Vec<_>>());
        ClassificationResult {
            case: CaseTag::B2,
            params: CanonicalParams {
                f0: Some(f0),
                f1: Some(f1),
                ..Default::default()
            },
            nullity: 2,
            generators: Vec::new(),
            nullspace: Vec::new(),
            notes,
        }
    } else {
        let first = eqf3_nullspace_at(f, &df, &samples)?;
        let second = eqf3_nullspace_at(f, &df, &shifted)?;
        if first.nullity != second.nullity {
            return Err(Error::InconsistentNullity(format!(
                "sample sets disagree: nullity {} vs {}",
                first.nullity, second.nullity
            )));
        }
        match first.nullity {
            0 => ClassificationResult {
                case: CaseTag::A,
                params: CanonicalParams::default(),
                nullity: 0,
                generators: Vec::new(),
                nullspace: Vec::new(),
                notes,
            },
            1 => classify_exceptional(f, &samples, first.basis[0], notes)?,
            n => {
                return Err(Error::InconsistentNullity(format!(
                    "nullity {n} with f'' not identically zero"
                )))
            }
        }
    };
    result.generators = generators(&result);
    Ok(result)
}

fn classify_exceptional(f: &Expr, samples: &[f64], v: [f64; 4], notes: Vec<String>) -> Result<ClassificationResult> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let is_zero = |x: f64| x.abs() <= ZERO_COMPONENT_TOL * norm;
    let [c, d, two_b, a1] = v;
    let fv = eval_all(f, samples)?;

    let (case, normalised, params) = if !is_zero(two_b) && !is_zero(d) {
        // f = -a1/2b + K (c + d u)^(-2b/d)
        let s = -2.0 / two_b;
        let w = v.map(|x| x * s);
        let alpha = -two_b / d;
        let u0 = -c / d;
        let f0 = -a1 / two_b;
        let lambda = fit_power(samples, &fv, f0, u0, alpha);
        let params = CanonicalParams {
            f0: Some(f0),
            lambda,
            alpha: Some(alpha),
            u0: Some(u0),
            ..Default::default()
        };
        (CaseTag::B3Power, w, params)
    } else if is_zero(d) && !is_zero(two_b) {
        if is_zero(c) {
            return Err(Error::InconsistentNullity(
                "nullspace vector with c = d = 0 forces constant f".into(),
            ));
        }
        // f = -a1/2b + K exp(-2b u / c)
        let s = -2.0 / two_b;
        let mut w = v.map(|x| x * s);
        w[1] = 0.0;
        let rate = -two_b / c;
        let f0 = -a1 / two_b;
        let lambda = fit_linear(samples, &fv, f0, |u| Some((rate * u).exp()));
        let params = CanonicalParams {
            f0: Some(f0),
            lambda,
            alpha: Some(rate),
            ..Default::default()
        };
        (CaseTag::B3Exp, w, params)
    } else if is_zero(two_b) && !is_zero(d) {
        // f = -a1/d log|c + d u| + K
        let s = 1.0 / d;
        let mut w = v.map(|x| x * s);
        w[2] = 0.0;
        let alpha = -a1 / d;
        let u0 = -c / d;
        let resid: Vec<f64> = samples
            .iter()
            .zip(&fv)
            .map(|(u, fu)| fu - alpha * (u - u0).abs().ln())
            .collect();
        let params = CanonicalParams {
            f0: Some(mean(&resid)),
            alpha: Some(alpha),
            u0: Some(u0),
            ..Default::default()
        };
        (CaseTag::B3Log, w, params)
    } else {
        return Err(Error::InconsistentNullity(
            "nullspace vector with b = d = 0 forces affine f".into(),
        ));
    };

    Ok(ClassificationResult {
        case,
        params,
        nullity: 1,
        generators: Vec::new(),
        nullspace: vec![normalised],
        notes,
    })
}

fn fit_power(samples: &[f64], fv: &[f64], f0: f64, u0: f64, alpha: f64) -> Option<f64> {
    let nearest = alpha.round();
    let integral = (alpha - nearest).abs() <= 1e-6;
    fit_linear(samples, fv, f0, |u| {
        let s = u - u0;
        if s > 0.0 {
            Some(s.powf(alpha))
        } else if integral {
            Some(s.powi(nearest as i32))
        } else {
            None
        }
    })
}

/// Least-squares `lambda` in `f(u) - f0 = lambda * phi(u)`.
fn fit_linear(samples: &[f64], fv: &[f64], f0: f64, phi: impl Fn(f64) -> Option<f64>) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (&u, &fu) in samples.iter().zip(fv) {
        if let Some(p) = phi(u).filter(|p| p.is_finite()) {
            num += p * (fu - f0);
            den += p * p;
        }
    }
    (den > 0.0).then(|| num / den)
}

fn eval_all(e: &Expr, samples: &[f64]) -> Result<Vec<f64>> {
    samples.iter().map(|&u| e.eval(u)).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Explicit generator basis: the two translations followed by the
/// case-specific extra symmetries.
pub fn generators(result: &ClassificationResult) -> Vec<SymmetryGenerator> {
    let mut out = vec![
        SymmetryGenerator::TIME_TRANSLATION,
        SymmetryGenerator::SPACE_TRANSLATION,
    ];
    let f0 = result.params.f0.unwrap_or(0.0);
    match result.case {
        CaseTag::A => {}
        CaseTag::B1 => {
            // (x - 2 f0 t) d/dx + 3t d/dt,  u d/du,  d/du
            out.push(SymmetryGenerator::new(0.0, 0.0, -2.0 * f0, 1.0, 0.0, 0.0));
            out.push(SymmetryGenerator::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0));
            out.push(SymmetryGenerator::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0));
        }
        CaseTag::B2 => {
            let f1 = result.params.f1.unwrap_or(0.0);
            // (2 f0 t - x) d/dx - 3t d/dt + 2u d/du
            out.push(SymmetryGenerator::new(0.0, 0.0, 2.0 * f0, -1.0, 0.0, 2.0));
            // Galilean boost: -f1 t d/dx + d/du
            out.push(SymmetryGenerator::new(0.0, 0.0, -f1, 0.0, 1.0, 0.0));
        }
        CaseTag::B3Power | CaseTag::B3Exp | CaseTag::B3Log => {
            out.extend(
                result
                    .nullspace
                    .iter()
                    .map(|v| SymmetryGenerator::from_constraint_vector(*v)),
            );
        }
    }
    out
}

/// `max |(c + d u) f'(u) + 2 b f(u) + a1|` over `m` uniform interior samples.
pub fn verify_generator(f: &Expr, g: &SymmetryGenerator, domain: &DomainInterval, m: usize) -> Result<f64> {
    let df = f.diff();
    let mut worst = 0.0f64;
    for u in domain.uniform_interior(m) {
        let defect = (g.c + g.d * u) * df.eval(u)? + 2.0 * g.b * f.eval(u)? + g.a1;
        worst = worst.max(defect.abs());
    }
    Ok(worst)
}

/// `1 + max|f| + max|f'|` over the same samples as [`verify_generator`];
/// the natural scale for its defect.
pub fn defect_scale(f: &Expr, domain: &DomainInterval, m: usize) -> Result<f64> {
    let df = f.diff();
    let (mut mf, mut mdf) = (0.0f64, 0.0f64);
    for u in domain.uniform_interior(m) {
        mf = mf.max(f.eval(u)?.abs());
        mdf = mdf.max(df.eval(u)?.abs());
    }
    Ok(1.0 + mf + mdf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn unit() -> DomainInterval {
        DomainInterval::new(-1.0, 1.0).unwrap()
    }

    /// Rank by Gaussian elimination with complete pivoting, independent of
    /// the SVD route.
    #[allow(clippy::needless_range_loop)]
    fn elimination_rank(rows: &[[f64; 4]]) -> usize {
        let mut a: Vec<[f64; 4]> = rows.to_vec();
        let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut rank = 0;
        let mut cols: Vec<usize> = (0..4).collect();
        while rank < 4 && rank < a.len() {
            let (mut pr, mut pc, mut best) = (rank, rank, 0.0);
            for r in rank..a.len() {
                for c in rank..4 {
                    if a[r][cols[c]].abs() > best {
                        (pr, pc, best) = (r, c, a[r][cols[c]].abs());
                    }
                }
            }
            if best <= 1e-9 * scale {
                break;
            }
            a.swap(rank, pr);
            cols.swap(rank, pc);
            let piv = a[rank][cols[rank]];
            for r in rank + 1..a.len() {
                let m = a[r][cols[rank]] / piv;
                for c in rank..4 {
                    a[r][cols[c]] -= m * a[rank][cols[c]];
                }
            }
            rank += 1;
        }
        rank
    }

    fn constraint_rows(f: &str, samples: &[f64]) -> Vec<[f64; 4]> {
        let f = parse(f).unwrap();
        let df = f.diff();
        samples
            .iter()
            .map(|&u| {
                let d = df.eval(u).unwrap();
                [d, u * d, f.eval(u).unwrap(), 1.0]
            })
            .collect()
    }

    #[test]
    fn nullity_matches_elimination_rank() {
        let pts = [-0.9, -0.5, -0.1, 0.2, 0.6, 0.85];
        for (f, nullity) in [("1", 3), ("u", 2), ("sin(u)", 0), ("1 + u^2", 1)] {
            let brute = 4 - elimination_rank(&constraint_rows(f, &pts));
            let report = eqf3_nullspace(&parse(f).unwrap(), &unit(), 12).unwrap();
            assert_eq!(brute, nullity, "brute force for {f}");
            assert_eq!(report.nullity, nullity, "svd for {f}");
            assert_eq!(report.rank + report.nullity, 4);
        }
    }

    #[test]
    fn quadratic_nullspace_direction() {
        let report = eqf3_nullspace(&parse("1 + u^2").unwrap(), &unit(), 12).unwrap();
        let v = report.basis[0];
        // proportional to (0, 1, -2, 2)
        let s = v[1];
        let expected = [0.0, 1.0, -2.0, 2.0];
        for i in 0..4 {
            assert!((v[i] / s - expected[i]).abs() < 1e-10, "{v:?}");
        }
        assert!(report.residuals[0] < 1e-12);
    }

    #[test]
    fn too_few_or_repeated_samples() {
        let f = parse("u^3").unwrap();
        assert!(matches!(eqf3_nullspace(&f, &unit(), 4), Err(Error::InvalidArgument(_))));
        let r = eqf3_nullspace_at(&f, &f.diff(), &[0.1, 0.2, 0.2, 0.3, 0.4]);
        assert_eq!(r.unwrap_err(), Error::DegenerateSampling);
    }

    #[test]
    fn condition_expression_examples() {
        let affine = symmetry_condition_expr(&parse("3 + 2*u").unwrap());
        assert_eq!(affine, Expr::Constant(0.0));
        let e = symmetry_condition_expr(&parse("exp(u)").unwrap());
        for i in 0..10 {
            let u = -2.0 + 0.4 * i as f64;
            assert!(e.eval(u).unwrap().abs() < 1e-12 * (4.0 * u).exp().max(1.0));
        }
        let s = symmetry_condition_expr(&parse("sin(u)").unwrap());
        for u in [0.3, 1.0, std::f64::consts::FRAC_PI_4, 2.5] {
            assert!((s.eval(u).unwrap() - (2.0 * u).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_cases() {
        let r = classify(&parse("1").unwrap(), &unit()).unwrap();
        assert_eq!(r.case, CaseTag::B1);
        assert_eq!(r.params.f0, Some(1.0));
        assert_eq!(r.generators.len(), 5);

        let r = classify(&parse("u").unwrap(), &unit()).unwrap();
        assert_eq!(r.case, CaseTag::B2);
        assert_eq!((r.params.f0, r.params.f1), (Some(0.0), Some(1.0)));

        let r = classify(&parse("2 + u^3").unwrap(), &unit()).unwrap();
        assert_eq!(r.case, CaseTag::B3Power);
        assert!((r.params.alpha.unwrap() - 3.0).abs() < 1e-8);
        assert!(r.params.u0.unwrap().abs() < 1e-8);
        assert!((r.params.f0.unwrap() - 2.0).abs() < 1e-8);
        assert!((r.params.lambda.unwrap() - 1.0).abs() < 1e-8);

        let log_dom = DomainInterval::new(1.5, 3.5).unwrap();
        let r = classify(&parse("3*log(u-1)").unwrap(), &log_dom).unwrap();
        assert_eq!(r.case, CaseTag::B3Log);
        assert!((r.params.alpha.unwrap() - 3.0).abs() < 1e-8);
        assert!((r.params.u0.unwrap() - 1.0).abs() < 1e-8);
        assert!(r.params.f0.unwrap().abs() < 1e-8);
        assert!(!r.notes.is_empty());

        let r = classify(&parse("sin(u)").unwrap(), &unit()).unwrap();
        assert_eq!(r.case, CaseTag::A);
        assert_eq!(r.generators.len(), 2);
    }

    #[test]
    fn generator_examples() {
        let r = classify(&parse("u^2").unwrap(), &unit()).unwrap();
        let g = r.generators[2];
        let expected = SymmetryGenerator::new(0.0, 0.0, 0.0, -1.0, 0.0, 1.0);
        for (a, b) in g.constraint_vector().iter().zip(expected.constraint_vector()) {
            assert!((a - b).abs() < 1e-10, "{g:?}");
        }

        let r = classify(&parse("log(u-1)").unwrap(), &DomainInterval::new(1.5, 4.0).unwrap()).unwrap();
        let g = r.generators[2];
        let expected = [-1.0, 1.0, 0.0, -1.0]; // c = -1, d = 1, 2b = 0, a1 = -1
        for (a, b) in g.constraint_vector().iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{g:?}");
        }
        assert_eq!(g.tau(5.0), 0.0);

        let r = classify(&parse("u").unwrap(), &unit()).unwrap();
        assert_eq!(r.generators[2], SymmetryGenerator::new(0.0, 0.0, 0.0, -1.0, 0.0, 2.0));
        assert_eq!(r.generators[3], SymmetryGenerator::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn verify_generator_examples() {
        let dom = unit();
        let kdv = parse("u").unwrap();
        let galilean = SymmetryGenerator::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert_eq!(verify_generator(&kdv, &galilean, &dom, 50).unwrap(), 0.0);
        let wrong_sign = SymmetryGenerator::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0);
        assert!((verify_generator(&kdv, &wrong_sign, &dom, 50).unwrap() - 2.0).abs() < 1e-15);

        let sin = parse("sin(u)").unwrap();
        assert_eq!(
            verify_generator(&sin, &SymmetryGenerator::TIME_TRANSLATION, &dom, 50).unwrap(),
            0.0
        );
        let exp = parse("exp(u)").unwrap();
        let g = SymmetryGenerator::new(0.0, 0.0, 0.0, -1.0, 2.0, 0.0);
        assert!(verify_generator(&exp, &g, &dom, 50).unwrap() < 1e-14);
    }

    #[test]
    fn exponential_family() {
        let r = classify(&parse("1 + exp(2*u)").unwrap(), &unit()).unwrap();
        assert_eq!(r.case, CaseTag::B3Exp);
        assert!((r.params.alpha.unwrap() - 2.0).abs() < 1e-8);
        assert!((r.params.f0.unwrap() - 1.0).abs() < 1e-8);
        assert!((r.params.lambda.unwrap() - 1.0).abs() < 1e-8);
        let g = r.generators[2];
        assert!((g.b + 1.0).abs() < 1e-12 && (g.c - 1.0).abs() < 1e-8 && g.d == 0.0);
    }

    #[test]
    fn describe_is_readable() {
        let g = SymmetryGenerator::new(0.0, 0.0, 2.0, -1.0, 0.0, 1.0);
        assert_eq!(g.describe(), "(2*t + -1*x) d/dx + (-3*t) d/dt + (1*u) d/du");
    }
}
