//! Plane waves `u = w(x + c t)` and their Hamiltonian reduction.
//!
//! Substituting the ansatz and integrating once gives
//! `w'' + F(w) - c w = k` with `F(w) = ∫_0^w f`. This is Newtonian motion
//! with energy `H = w'^2/2 + V(w)`, `V(w) = -c w^2/2 + k w + ∫_0^w F`.
//! Solitary waves are homoclinic orbits of the saddle at the origin
//! (`k = 0`, `E = 0`), where `V(w) = (h(w) - c/2) w^2` with
//! `h(w) = w^-2 ∫_0^w ∫_0^η f(ξ) dξ dη`.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::ode::{self, DenseSolution, Tolerances};
use crate::quad;

const QUAD_TOL: f64 = 1e-14;
const SERIES_EPS: f64 = 1e-6;

/// Constants of the plane-wave reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveContext {
    pub f: Expr,
    /// Wave speed; the profile moves towards negative `x` when `c > 0`.
    pub c: f64,
    /// First integration constant.
    pub k: f64,
    pub energy: f64,
}

impl WaveContext {
    pub fn new(f: Expr, c: f64, k: f64, energy: f64) -> Self {
        WaveContext { f, c, k, energy }
    }
}

/// `F(w) = ∫_0^w f(ξ) dξ`.
pub fn big_f(f: &Expr, w: f64) -> Result<f64> {
    quad::integrate(|xi| f.eval(xi), 0.0, w, 1e-12)
}

/// `h(w) = w^-2 ∫_0^w (w - ξ) f(ξ) dξ`, continued by `f(0)/2 + f'(0) w / 6`
/// for `|w| <= 1e-6`.
pub fn h_fun(f: &Expr, w: f64) -> Result<f64> {
    if w.abs() <= SERIES_EPS {
        let f0 = f.eval(0.0)?;
        let df0 = f.diff().eval(0.0)?;
        return Ok(0.5 * f0 + df0 * w / 6.0);
    }
    // ξ = w s turns the double integral into ∫_0^1 (1 - s) f(w s) ds
    quad::integrate(|s| Ok((1.0 - s) * f.eval(w * s)?), 0.0, 1.0, QUAD_TOL)
}

/// `V(w) = -c w^2 / 2 + k w + ∫_0^w F`.
pub fn potential(ctx: &WaveContext, w: f64) -> Result<f64> {
    Ok((h_fun(&ctx.f, w)? - 0.5 * ctx.c) * w * w + ctx.k * w)
}

/// `(dw/dz)^2 = 2E - 2V(w)` along the orbit of energy `E`. Negative values
/// mark the classically forbidden region.
pub fn first_order_rhs(ctx: &WaveContext, w: f64) -> Result<f64> {
    Ok(2.0 * ctx.energy - 2.0 * potential(ctx, w)?)
}

/// Speed `c = 2 h(w0)` of the solitary wave with turning point `w0`.
pub fn wave_speed(f: &Expr, w0: f64) -> Result<f64> {
    if w0 == 0.0 {
        return Err(Error::InvalidArgument("turning point w0 must be nonzero".into()));
    }
    Ok(2.0 * h_fun(f, w0)?)
}

#[derive(Debug, Clone)]
struct Orbit {
    f: Expr,
    /// `(w, w', F(w))` from the turning point.
    near: DenseSolution,
    /// `w` on the decaying branch.
    tail: DenseSolution,
    z_switch: f64,
}

/// Sampled solitary-wave profile, symmetric about its extremum at `z = 0`.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
    pub c: f64,
    pub w0: f64,
    pub decay_rate: Option<f64>,
    /// Largest `|w'(z) (z_quadrature(w) - z)|` over the validation points.
    pub validation_error: f64,
    orbit: Option<Orbit>,
}

impl WaveProfile {
    /// Profile from externally supplied samples; `eval` then interpolates
    /// linearly.
    pub fn from_samples(z: Vec<f64>, w: Vec<f64>, dw: Vec<f64>, c: f64, w0: f64) -> Self {
        WaveProfile {
            z,
            w,
            dw,
            c,
            w0,
            decay_rate: None,
            validation_error: 0.0,
            orbit: None,
        }
    }

    /// `(w(z), w'(z))` at any `z`.
    pub fn eval(&self, z: f64) -> Result<(f64, f64)> {
        let Some(orbit) = &self.orbit else {
            return self.interpolate(z);
        };
        let side = if z < 0.0 { -1.0 } else { 1.0 };
        let s = z.abs();
        if s <= orbit.z_switch {
            let y = orbit.near.eval(s)?;
            Ok((y[0], side * y[1]))
        } else {
            let (lo, hi) = orbit.tail.span();
            let s = s.min(hi);
            if s < lo {
                return Err(Error::OutOfRange { z, lo, hi });
            }
            let w = orbit.tail.eval(s)?[0];
            let dw = tail_slope(&orbit.f, self.c, w)?;
            Ok((w, side * dw))
        }
    }

    fn interpolate(&self, z: f64) -> Result<(f64, f64)> {
        let n = self.z.len();
        if n < 2 || z < self.z[0] || z > self.z[n - 1] {
            return Err(Error::OutOfRange {
                z,
                lo: self.z.first().copied().unwrap_or(f64::NAN),
                hi: self.z.last().copied().unwrap_or(f64::NAN),
            });
        }
        let i = self.z.partition_point(|&x| x < z).clamp(1, n - 1);
        let t = (z - self.z[i - 1]) / (self.z[i] - self.z[i - 1]);
        let lerp = |v: &[f64]| v[i - 1] + t * (v[i] - v[i - 1]);
        Ok((lerp(&self.w), lerp(&self.dw)))
    }

    /// Hamiltonian `w'^2/2 + V(w)` at every sample (zero on the orbit).
    pub fn energies(&self, f: &Expr) -> Result<Vec<f64>> {
        let ctx = WaveContext::new(f.clone(), self.c, 0.0, 0.0);
        self.w
            .iter()
            .zip(&self.dw)
            .map(|(&w, &dw)| Ok(0.5 * dw * dw + potential(&ctx, w)?))
            .collect()
    }
}

/// `w' = -w sqrt(c - 2 h(w))` on the branch leaving the turning point.
fn tail_slope(f: &Expr, c: f64, w: f64) -> Result<f64> {
    let gap = c - 2.0 * h_fun(f, w)?;
    Ok(-w * gap.max(0.0).sqrt())
}

/// Checks that `w0` lies at the edge of a potential well attached to the
/// saddle at the origin: `h(w) < h(w0)` on `(0, w0)` and `V'(w0) != 0`.
pub fn check_hypothesis(f: &Expr, w0: f64) -> Result<f64> {
    let c = wave_speed(f, w0)?;
    let h0 = 0.5 * c;
    let probes = 256;
    for i in 0..probes {
        // includes w = 0, excludes w0
        let w = w0 * i as f64 / probes as f64;
        let h = h_fun(f, w).map_err(|_| Error::HypothesisViolated {
            w,
            reason: "f is not evaluable on the segment".into(),
        })?;
        if h >= h0 - 1e-12 * (1.0 + h0.abs()) {
            return Err(Error::HypothesisViolated {
                w,
                reason: format!("h(w) = {h} is not below h(w0) = {h0}"),
            });
        }
    }
    // V'(w0) = -c w0 + F(w0) must point away from the well
    let dv = -c * w0 + big_f(f, w0)?;
    if dv * w0.signum() <= 1e-12 * (1.0 + (c * w0).abs()) {
        return Err(Error::HypothesisViolated {
            w: w0,
            reason: format!("w0 is not a simple zero of V (V'(w0) = {dv})"),
        });
    }
    Ok(c)
}

/// Solitary wave with extremum `w0` at `z = 0`, sampled at `n` uniform
/// points of `[-z_max, z_max]`.
///
/// The orbit is integrated from the turning point as the second-order
/// system `w'' = c w - F(w)` (with `F` carried as a state) until `|w|` has
/// halved, then continued on the attracting first-order branch
/// `w' = -w sqrt(c - 2 h(w))`.
pub fn homoclinic_profile(f: &Expr, w0: f64, z_max: f64, n: usize) -> Result<WaveProfile> {
    if !(z_max > 0.0) || n < 16 {
        return Err(Error::InvalidArgument(format!(
            "need z_max > 0 and n >= 16, got z_max = {z_max}, n = {n}"
        )));
    }
    let c = check_hypothesis(f, w0)?;
    let big_f0 = big_f(f, w0)?;
    let tol = Tolerances {
        rtol: 1e-12,
        atol: 1e-14 * w0.abs(),
        ..Default::default()
    };
    let near = ode::solve_until(
        |_, y, dy| {
            dy[0] = y[1];
            dy[1] = c * y[0] - y[2];
            dy[2] = f.eval(y[0])? * y[1];
            Ok(())
        },
        0.0,
        &[w0, 0.0, big_f0],
        z_max,
        tol,
        |_, y| y[0].abs() <= 0.5 * w0.abs(),
    )?;
    let z_switch = near.z_end();
    let w_switch = near.final_state()[0];
    let tail = ode::solve(
        |_, y, dy| {
            dy[0] = tail_slope(f, c, y[0])?;
            Ok(())
        },
        z_switch,
        &[w_switch],
        z_max.max(z_switch),
        Tolerances {
            rtol: 1e-12,
            atol: 1e-20 * w0.abs(),
            ..Default::default()
        },
    )?;

    let mut profile = WaveProfile {
        z: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        dw: Vec::with_capacity(n),
        c,
        w0,
        decay_rate: None,
        validation_error: 0.0,
        orbit: Some(Orbit {
            f: f.clone(),
            near,
            tail,
            z_switch,
        }),
    };
    let dz = 2.0 * z_max / (n - 1) as f64;
    for i in 0..n {
        let z = if i == n - 1 { z_max } else { -z_max + dz * i as f64 };
        let (w, dw) = profile.eval(z)?;
        profile.z.push(z);
        profile.w.push(w);
        profile.dw.push(dw);
    }

    // cross-check against the inverted quadrature on the z > 0 side
    let checks = (n / 8).max(1);
    let mut worst = 0.0f64;
    for j in 1..=checks {
        let z = z_max * j as f64 / (checks + 1) as f64;
        let (w, dw) = profile.eval(z)?;
        if w.abs() < 1e-8 * w0.abs() {
            continue;
        }
        let zq = quadrature_position(f, c, w0, w)?;
        worst = worst.max((dw * (zq - z)).abs());
    }
    profile.validation_error = worst;
    profile.decay_rate = decay_rate(&profile).ok();
    Ok(profile)
}

/// `z(w) = ∫_w^{w0} dv / (v sqrt(c - 2 h(v)))`. Near the turning point
/// `v = w0 (1 - s^2)` removes the inverse square-root singularity; below
/// `w0 / 2` the substitution `v = w0 e^r` removes the `1 / v` growth.
pub fn quadrature_position(f: &Expr, c: f64, w0: f64, w: f64) -> Result<f64> {
    let ratio = w / w0;
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!("w = {w} not in (0, w0] with w0 = {w0}")));
    }
    let h0 = h_fun(f, w0)?;
    let gap = |v: f64| -> Result<f64> { Ok(2.0 * (h0 - h_fun(f, v)?) + (c - 2.0 * h0)) };
    let upper = ratio.max(0.5);
    let s_max = (1.0 - upper).sqrt();
    let near = quad::integrate(
        |s| {
            let v = w0 * (1.0 - s * s);
            Ok(2.0 * s / ((1.0 - s * s) * gap(v)?.sqrt()))
        },
        0.0,
        s_max,
        1e-12,
    )?;
    if ratio >= 0.5 {
        return Ok(near);
    }
    let far = quad::integrate(|r| Ok(1.0 / gap(w0 * r.exp())?.sqrt()), ratio.ln(), 0.5f64.ln(), 1e-12)?;
    Ok(near + far)
}

/// Exponential decay rate from a least-squares fit of `log |w|` against `z`
/// on the tail `1e-12 |w0| < |w| < 1e-3 |w0|`, `z > 0`.
pub fn decay_rate(profile: &WaveProfile) -> Result<f64> {
    let w0 = profile.w0.abs();
    let pts: Vec<(f64, f64)> = profile
        .z
        .iter()
        .zip(&profile.w)
        .filter(|(&z, &w)| z > 0.0 && w.abs() < 1e-3 * w0 && w.abs() > 1e-12 * w0)
        .map(|(&z, &w)| (z, w.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientTail);
    }
    let n = pts.len() as f64;
    let mz = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mz) * (p.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mz).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientTail);
    }
    Ok(-sxy / sxx)
}
