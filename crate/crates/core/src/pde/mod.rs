//! Pseudospectral integration of `u_t = f(u) u_x + u_xxx` on a periodic cell.
//!
//! Fields are expanded as `u = Σ û_k e^{ikx}`. The dispersive term is
//! advanced exactly (`û_k ← e^{-ik³dt} û_k`) and the advection term by
//! classical RK4 in the interaction picture, with 2/3-rule dealiasing.

mod fit;
mod flow;

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;

pub use fit::{fit_sech, SechFit};
pub use flow::{flow_transform, flow_transform_with_rate, FlowMap};

/// Courant factor used by [`suggest_dt`].
pub const DT_SAFETY: f64 = 0.5;
/// Largest step accepted by [`step`], in units of `1/(max|f| k_max)`; just
/// inside the RK4 stability interval on the imaginary axis.
pub const STABILITY_FACTOR: f64 = 2.8;
/// Cap on [`suggest_dt`] when the advection speed vanishes.
pub const DT_CAP: f64 = 1.0;

/// Samples `u(x_j, t)` at `x_j = j L / N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub len: f64,
    pub values: Vec<f64>,
    pub t: f64,
}

impl Field {
    pub fn new(len: f64, values: Vec<f64>, t: f64) -> Result<Field> {
        let n = values.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cell length must be positive, got {len}"
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at index {j}")));
        }
        Ok(Field { len, values, t })
    }

    pub fn from_fn(len: f64, n: usize, t: f64, f: impl Fn(f64) -> f64) -> Result<Field> {
        let values = (0..n).map(|j| f(j as f64 * len / n as f64)).collect();
        Field::new(len, values, t)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        self.len / self.n() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.x(j)).collect()
    }

    /// `∫ u dx` over the cell.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx()
    }

    /// `∫ u² dx` over the cell.
    pub fn momentum(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.dx()
    }

    /// Position and value of the maximum, refined by a parabola through the
    /// largest sample and its periodic neighbours.
    pub fn peak(&self) -> (f64, f64) {
        let n = self.n();
        let (j, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let (um, u0, up) = (self.values[(j + n - 1) % n], self.values[j], self.values[(j + 1) % n]);
        let denom = um - 2.0 * u0 + up;
        let shift = if denom < 0.0 { 0.5 * (um - up) / denom } else { 0.0 };
        let x = (self.x(j) + shift * self.dx()).rem_euclid(self.len);
        let u = u0 - 0.25 * (um - up) * shift;
        (x, u)
    }

    fn max_abs_f(&self, f: &Expr) -> Result<f64> {
        let mut m = 0.0f64;
        for &u in &self.values {
            m = m.max(f.eval(u)?.abs());
        }
        Ok(m)
    }

    /// Largest resolved wavenumber `π N / L`.
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI * self.n() as f64 / self.len
    }
}

/// FFT plans and wavenumbers for one grid.
struct Spectral {
    n: usize,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(n: usize, len: f64) -> Spectral {
        let mut planner = FftPlanner::new();
        let scale = 2.0 * std::f64::consts::PI / len;
        let k = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                m * scale
            })
            .collect();
        Spectral {
            n,
            k,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Mode kept by the 2/3 rule.
    fn keep(&self, j: usize) -> bool {
        let m = if j <= self.n / 2 { j } else { self.n - j };
        3 * m < self.n
    }

    fn derivative(&self, hat: &[Complex64], order: u32) -> Vec<f64> {
        let buf = hat
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if order % 2 == 1 && self.is_nyquist(j) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, self.k[j]).powu(order)
                }
            })
            .collect();
        self.inverse(buf)
    }
}

/// `order`-th spatial derivative by Fourier differentiation.
pub fn spectral_dx(field: &Field, order: u32) -> Result<Field> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "derivative order must be 1, 2 or 3, got {order}"
        )));
    }
    let sp = Spectral::new(field.n(), field.len);
    let hat = sp.forward(&field.values);
    Ok(Field {
        len: field.len,
        values: sp.derivative(&hat, order),
        t: field.t,
    })
}

/// `|u_t - f(u) u_x - u_xxx|` at a single point.
pub fn pointwise_residual(f: &Expr, u: f64, ut: f64, ux: f64, uxxx: f64) -> Result<f64> {
    Ok((ut - f.eval(u)? * ux - uxxx).abs())
}

/// Largest grid residual of the equation for `field` with time derivative
/// `u_t`, using spectral space derivatives.
pub fn residual(field: &Field, u_t: &Field, f: &Expr) -> Result<f64> {
    if u_t.n() != field.n() || u_t.len != field.len {
        return Err(Error::InvalidArgument("u_t is on a different grid".into()));
    }
    let sp = Spectral::new(field.n(), field.len);
    let hat = sp.forward(&field.values);
    let ux = sp.derivative(&hat, 1);
    let uxxx = sp.derivative(&hat, 3);
    let mut worst = 0.0f64;
    for j in 0..field.n() {
        worst = worst.max(pointwise_residual(f, field.values[j], u_t.values[j], ux[j], uxxx[j])?);
    }
    Ok(worst)
}

/// `dt = 0.5 / (max|f(u)| k_max)`, capped at 1.
pub fn suggest_dt(field: &Field, f: &Expr) -> Result<f64> {
    let speed = field.max_abs_f(f)? * field.k_max();
    Ok(if speed > 0.0 {
        (DT_SAFETY / speed).min(DT_CAP)
    } else {
        DT_CAP
    })
}

/// Largest `dt` that [`step`] accepts for this field.
pub fn stability_limit(field: &Field, f: &Expr) -> Result<f64> {
    let speed = field.max_abs_f(f)? * field.k_max();
    Ok(if speed > 0.0 {
        STABILITY_FACTOR / speed
    } else {
        f64::INFINITY
    })
}

/// Reusable integrating-factor RK4 stepper for a fixed grid and `dt`.
pub struct Stepper<'a> {
    sp: Spectral,
    f: &'a Expr,
    dt: f64,
    len: f64,
    e_half: Vec<Complex64>,
    e_full: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(n: usize, len: f64, f: &'a Expr, dt: f64) -> Result<Stepper<'a>> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let sp = Spectral::new(n, len);
        // L = (ik)^3 = -i k^3
        let e_half: Vec<Complex64> =
            sp.k.iter()
                .map(|&k| Complex64::from_polar(1.0, -k * k * k * dt / 2.0))
                .collect();
        let e_full = e_half.iter().map(|e| e * e).collect();
        Ok(Stepper {
            sp,
            f,
            dt,
            len,
            e_half,
            e_full,
        })
    }

    /// Dealiased transform of `f(u) u_x`, with zero mean.
    fn nonlinear(&self, hat: &[Complex64]) -> Result<Vec<Complex64>> {
        let u = self.sp.inverse(hat.to_vec());
        let ux = self.sp.derivative(hat, 1);
        let mut prod = Vec::with_capacity(u.len());
        for (&v, &d) in u.iter().zip(&ux) {
            prod.push(self.f.eval(v)? * d);
        }
        let mut out = self.sp.forward(&prod);
        for (j, c) in out.iter_mut().enumerate() {
            if j == 0 || !self.sp.keep(j) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    fn advance(&self, field: &Field) -> Result<Field> {
        let dt = self.dt;
        let v = self.sp.forward(&field.values);
        let e = &self.e_half;
        let e2 = &self.e_full;
        let scale = |xs: Vec<Complex64>| -> Vec<Complex64> { xs.into_iter().map(|c| c * dt).collect() };
        let a = scale(self.nonlinear(&v)?);
        let arg: Vec<Complex64> = (0..v.len()).map(|j| e[j] * (v[j] + a[j] / 2.0)).collect();
        let b = scale(self.nonlinear(&arg)?);
        let arg: Vec<Complex64> = (0..v.len()).map(|j| e[j] * v[j] + b[j] / 2.0).collect();
        let c = scale(self.nonlinear(&arg)?);
        let arg: Vec<Complex64> = (0..v.len()).map(|j| e2[j] * v[j] + e[j] * c[j]).collect();
        let d = scale(self.nonlinear(&arg)?);
        let next: Vec<Complex64> = (0..v.len())
            .map(|j| e2[j] * v[j] + (e2[j] * a[j] + 2.0 * e[j] * (b[j] + c[j]) + d[j]) / 6.0)
            .collect();
        let values = self.sp.inverse(next);
        let t = field.t + dt;
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::UnstableStep {
                t,
                reason: format!("non-finite value at x = {}", j as f64 * self.len / values.len() as f64),
            });
        }
        Ok(Field {
            len: self.len,
            values,
            t,
        })
    }

    pub fn step(&self, field: &Field) -> Result<Field> {
        let limit = stability_limit(field, self.f)?;
        if self.dt > limit {
            return Err(Error::UnstableStep {
                t: field.t,
                reason: format!("dt = {} exceeds the stability limit {limit}", self.dt),
            });
        }
        self.advance(field)
    }
}

/// One integrating-factor RK4 step.
pub fn step(field: &Field, f: &Expr, dt: f64) -> Result<Field> {
    Stepper::new(field.n(), field.len, f, dt)?.step(field)
}

/// Sampled diagnostics of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub momentum: Vec<f64>,
    pub peak_x: Vec<f64>,
    pub peak_u: Vec<f64>,
    /// Leftward crest speed: minus the least-squares slope of the unwrapped
    /// peak position. Positive for waves moving towards decreasing `x`.
    pub speed_fit: f64,
    /// Largest residual at interior samples, with `u_t` from a centred
    /// difference of neighbouring steps.
    pub residual_max: f64,
    #[serde(skip)]
    pub final_field: Field,
    #[serde(skip)]
    pub snapshots: Vec<Field>,
}

impl RunReport {
    fn new(field: &Field) -> RunReport {
        RunReport {
            times: Vec::new(),
            mass: Vec::new(),
            momentum: Vec::new(),
            peak_x: Vec::new(),
            peak_u: Vec::new(),
            speed_fit: 0.0,
            residual_max: 0.0,
            final_field: field.clone(),
            snapshots: Vec::new(),
        }
    }

    fn record(&mut self, field: &Field, keep: bool) {
        let (px, pu) = field.peak();
        self.times.push(field.t);
        self.mass.push(field.mass());
        self.momentum.push(field.momentum());
        self.peak_x.push(px);
        self.peak_u.push(pu);
        if keep {
            self.snapshots.push(field.clone());
        }
    }

    fn finish(&mut self) {
        let len = self.final_field.len;
        let mut unwrapped = Vec::with_capacity(self.peak_x.len());
        let mut offset = 0.0;
        for (i, &x) in self.peak_x.iter().enumerate() {
            if i > 0 {
                let prev = self.peak_x[i - 1];
                if x - prev > len / 2.0 {
                    offset -= len;
                } else if prev - x > len / 2.0 {
                    offset += len;
                }
            }
            unwrapped.push(x + offset);
        }
        self.speed_fit = -slope(&self.times, &unwrapped);
    }

    pub fn mass_drift(&self) -> f64 {
        drift(&self.mass)
    }

    pub fn momentum_drift(&self) -> f64 {
        drift(&self.momentum)
    }
}

fn drift(series: &[f64]) -> f64 {
    match (series.first(), series.last()) {
        (Some(a), Some(b)) => (b - a).abs(),
        _ => 0.0,
    }
}

fn slope(t: &[f64], x: &[f64]) -> f64 {
    let n = t.len() as f64;
    if t.len() < 2 {
        return 0.0;
    }
    let tm = t.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let num: f64 = t.iter().zip(x).map(|(a, b)| (a - tm) * (b - xm)).sum();
    let den: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Options for [`evolve_with`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub sample_every: usize,
    /// Keep a copy of the field at every sample.
    pub keep_snapshots: bool,
}

/// Integrates to time `t_end` (relative to `field.t`) with fixed steps,
/// sampling every `sample_every` steps.
pub fn evolve(field: &Field, f: &Expr, t_end: f64, dt: f64, sample_every: usize) -> Result<RunReport> {
    let opts = EvolveOptions {
        sample_every,
        keep_snapshots: false,
    };
    match evolve_with(field, f, t_end, dt, opts) {
        (report, None) => Ok(report),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`evolve`] but returns the partial report alongside any error.
pub fn evolve_with(field: &Field, f: &Expr, t_end: f64, dt: f64, opts: EvolveOptions) -> (RunReport, Option<Error>) {
    let mut report = RunReport::new(field);
    if !(t_end >= 0.0) || opts.sample_every == 0 {
        let e = Error::InvalidArgument("need T >= 0 and sample_every >= 1".into());
        return (report, Some(e));
    }
    let steps = (t_end / dt).round() as usize;
    let stepper = match Stepper::new(field.n(), field.len, f, dt) {
        Ok(s) => s,
        Err(e) => return (report, Some(e)),
    };
    let t0 = field.t;
    let mut prev: Option<Field> = None;
    let mut cur = field.clone();
    report.record(&cur, opts.keep_snapshots);
    for n in 1..=steps {
        let mut next = match stepper.step(&cur) {
            Ok(v) => v,
            Err(e) => {
                report.final_field = cur;
                report.finish();
                return (report, Some(e));
            }
        };
        // avoid accumulating round-off in t
        next.t = t0 + n as f64 * dt;
        if (n - 1) % opts.sample_every == 0 && n > 1 {
            if let Some(p) = &prev {
                let values = next
                    .values
                    .iter()
                    .zip(&p.values)
                    .map(|(a, b)| (a - b) / (2.0 * dt))
                    .collect();
                let ut = Field {
                    len: cur.len,
                    values,
                    t: cur.t,
                };
                match residual(&cur, &ut, f) {
                    Ok(r) => report.residual_max = report.residual_max.max(r),
                    Err(e) => return (report, Some(e)),
                }
            }
        }
        if n % opts.sample_every == 0 || n == steps {
            report.record(&next, opts.keep_snapshots);
        }
        prev = Some(std::mem::replace(&mut cur, next));
    }
    report.final_field = cur;
    report.finish();
    (report, None)
}
