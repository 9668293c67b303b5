//! Finite group action of an affine generator on a sampled field.
//!
//! For `X = (a0 + a1 t + b x) d/dx + (tau0 + 3b t) d/dt + (c + d u) d/du`
//! the flow is linear in `(x, t, u)` and integrates in closed form:
//!
//! ```text
//! t~ = e^{3bε} t + T0
//! x~ = e^{bε} x + G0 + G1 t
//! u~ = e^{dε} u + C
//! ```

use nalgebra::{DMatrix, DVector};

use super::{Field, Spectral};
use crate::classify::{generators, ClassificationResult, SymmetryGenerator};
use crate::error::{Error, Result};

/// Support threshold for the window check, relative to `max |u - background|`.
pub const SUPPORT_TOL: f64 = 1e-8;
const SPAN_TOL: f64 = 1e-8;
const SMALL_B: f64 = 1e-12;

/// Closed-form flow of a generator for a fixed `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMap {
    /// `e^{bε}`
    pub sx: f64,
    /// `e^{3bε}`
    pub st: f64,
    /// `e^{dε}`
    pub su: f64,
    pub t_shift: f64,
    pub g0: f64,
    pub g1: f64,
    pub u_shift: f64,
}

/// `(e^{kε} - 1)/k`, with the `k → 0` limit.
fn expm1_over(k: f64, eps: f64) -> f64 {
    if k.abs() <= SMALL_B {
        eps
    } else {
        (k * eps).exp_m1() / k
    }
}

impl FlowMap {
    pub fn new(g: &SymmetryGenerator, eps: f64) -> FlowMap {
        let b = g.b;
        let sx = (b * eps).exp();
        let st = (3.0 * b * eps).exp();
        let su = (g.d * eps).exp();
        let t_shift = g.tau0 * expm1_over(3.0 * b, eps);
        // dx/ds = b x + a0 + a1 t(s), t(s) = e^{3bs} t + tau0 (e^{3bs} - 1)/(3b)
        let g1 = g.a1 * sx * expm1_over(2.0 * b, eps);
        let e1 = expm1_over(b, eps);
        let g0 = if b.abs() <= SMALL_B {
            g.a0 * eps + g.a1 * g.tau0 * eps * eps / 2.0
        } else {
            g.a0 * e1 + g.a1 * g.tau0 / (3.0 * b) * (sx * expm1_over(2.0 * b, eps) - e1)
        };
        FlowMap {
            sx,
            st,
            su,
            t_shift,
            g0,
            g1,
            u_shift: g.c * expm1_over(g.d, eps),
        }
    }

    pub fn apply(&self, x: f64, t: f64, u: f64) -> (f64, f64, f64) {
        (
            self.sx * x + self.g0 + self.g1 * t,
            self.st * t + self.t_shift,
            self.su * u + self.u_shift,
        )
    }

    /// Preimage `x` of `x~` at source time `t`.
    pub fn source_x(&self, x_new: f64, t: f64) -> f64 {
        (x_new - self.g0 - self.g1 * t) / self.sx
    }

    fn is_translation(&self) -> bool {
        self.sx == 1.0
    }
}

fn ensure_in_algebra(g: &SymmetryGenerator, f_params: &ClassificationResult) -> Result<()> {
    let basis = generators(f_params);
    let coords = |g: &SymmetryGenerator| [g.tau0, g.a0, g.a1, g.b, g.c, g.d];
    let m = DMatrix::from_fn(6, basis.len(), |i, j| coords(&basis[j])[i]);
    let rhs = DVector::from_row_slice(&coords(g));
    let norm = rhs.norm();
    if norm == 0.0 {
        return Ok(());
    }
    let svd = m.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::InvalidArgument(format!("generator span check failed: {e}")))?;
    let gap = (&m * sol - &rhs).norm();
    if gap > SPAN_TOL * norm {
        return Err(Error::InvalidArgument(format!(
            "generator {} is not in the symmetry algebra of the {} case",
            g.describe(),
            f_params.case.as_str()
        )));
    }
    Ok(())
}

/// Field values at arbitrary points by direct summation of the Fourier series.
struct Interpolant {
    hat: Vec<num_complex::Complex64>,
    k: Vec<f64>,
    n: usize,
}

impl Interpolant {
    fn new(field: &Field) -> Interpolant {
        let sp = Spectral::new(field.n(), field.len);
        Interpolant {
            hat: sp.forward(&field.values),
            k: sp.k.clone(),
            n: field.n(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.n;
        let mut s = self.hat[0].re;
        for j in 1..n / 2 {
            let (sin, cos) = (self.k[j] * x).sin_cos();
            s += 2.0 * (self.hat[j].re * cos - self.hat[j].im * sin);
        }
        s += self.hat[n / 2].re * (self.k[n / 2] * x).cos();
        s / n as f64
    }
}

/// Applies the one-parameter group of `g` (which must lie in the symmetry
/// algebra of `f_params`) and resamples onto the original grid. Returns the
/// image and its time.
pub fn flow_transform(
    field: &Field,
    g: &SymmetryGenerator,
    f_params: &ClassificationResult,
    eps: f64,
) -> Result<(Field, f64)> {
    let (image, _, t) = transform(field, None, g, f_params, eps)?;
    Ok((image, t))
}

/// [`flow_transform`] that also maps a time derivative:
/// `u~_t~ = e^{dε} (u_t - u_x G1 e^{-bε}) e^{-3bε}`.
pub fn flow_transform_with_rate(
    field: &Field,
    u_t: &Field,
    g: &SymmetryGenerator,
    f_params: &ClassificationResult,
    eps: f64,
) -> Result<(Field, Field, f64)> {
    let (image, rate, t) = transform(field, Some(u_t), g, f_params, eps)?;
    Ok((image, rate.expect("rate requested"), t))
}

fn transform(
    field: &Field,
    u_t: Option<&Field>,
    g: &SymmetryGenerator,
    f_params: &ClassificationResult,
    eps: f64,
) -> Result<(Field, Option<Field>, f64)> {
    ensure_in_algebra(g, f_params)?;
    let map = FlowMap::new(g, eps);
    let len = field.len;
    let n = field.n();
    let t_new = map.st * field.t + map.t_shift;
    let background = field.values[0];

    if !map.is_translation() {
        // support of u - background must fit in the preimage of the cell
        let amp = field.values.iter().map(|v| (v - background).abs()).fold(0.0, f64::max);
        let lo_src = map.source_x(0.0, field.t);
        let hi_src = map.source_x(len, field.t);
        let (lo_src, hi_src) = (lo_src.min(hi_src), lo_src.max(hi_src));
        for j in 0..n {
            let x = field.x(j);
            if (field.values[j] - background).abs() > SUPPORT_TOL * amp && (x < lo_src || x > hi_src) {
                return Err(Error::WindowExceeded {
                    lo: map.sx * lo_src + map.g0 + map.g1 * field.t,
                    hi: map.sx * hi_src + map.g0 + map.g1 * field.t,
                    len,
                });
            }
        }
    }

    let u_interp = Interpolant::new(field);
    let rate_parts = match u_t {
        Some(ut) => {
            if ut.n() != n || ut.len != len {
                return Err(Error::InvalidArgument("u_t is on a different grid".into()));
            }
            let ux = super::spectral_dx(field, 1)?;
            Some((Interpolant::new(ut), Interpolant::new(&ux)))
        }
        None => None,
    };
    let rate_bg = u_t.map(|ut| ut.values[0]).unwrap_or(0.0);

    let mut values = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    for j in 0..n {
        let mut x = map.source_x(field.x(j), field.t);
        let inside = if map.is_translation() {
            x = x.rem_euclid(len);
            true
        } else {
            (0.0..=len).contains(&x)
        };
        let (u, r) = if inside {
            let u = u_interp.eval(x);
            let r = rate_parts
                .as_ref()
                .map(|(it, ix)| it.eval(x) - ix.eval(x) * map.g1 / map.sx)
                .unwrap_or(0.0);
            (u, r)
        } else {
            (background, rate_bg)
        };
        values.push(map.su * u + map.u_shift);
        rates.push(map.su * r / map.st);
    }
    let image = Field::new(len, values, t_new)?;
    let rate = match u_t {
        Some(_) => Some(Field::new(len, rates, t_new)?),
        None => None,
    };
    Ok((image, rate, t_new))
}
