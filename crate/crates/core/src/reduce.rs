//! Similarity reductions of the three exceptional families and their lifts.
//!
//! | case  | f(u)                      | lift                                   |
//! |-------|---------------------------|----------------------------------------|
//! | POWER | f0 + (u - u0)^α           | u = u0 + t^{-2/(3α)} w(z), z = (x + f0 t) t^{-1/3} |
//! | EXP   | f0 + λ e^{αu}             | u = -(2/3) ln(t)/α + w(z), same z      |
//! | LOG   | f0 + α ln(u - u0)         | u = u0 + e^{t/(c1 α)} w(z), z = x + t²/(2 c1) |
//!
//! `LOG_Y` and `LOG_P` are the substitutions `w = e^y` and `y' = p(y)` of the
//! LOG equation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{pow_real, Expr};
use crate::fd;
use crate::ode::{self, DenseSolution, Tolerances};
use crate::pde::pointwise_residual;

/// Default relative tolerance of [`integrate`].
pub const INTEGRATE_TOL: f64 = 1e-10;
/// Minimum number of dense samples stored in a [`Trajectory`].
pub const MIN_SAMPLES: usize = 201;
/// Largest `α w` accepted by the EXP right-hand side.
pub const EXP_GUARD: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReducedCase {
    #[serde(rename = "POWER")]
    Power,
    #[serde(rename = "EXP")]
    Exp,
    #[serde(rename = "LOG")]
    Log,
    #[serde(rename = "LOG_Y")]
    LogY,
    #[serde(rename = "LOG_P")]
    LogP,
}

impl ReducedCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReducedCase::Power => "POWER",
            ReducedCase::Exp => "EXP",
            ReducedCase::Log => "LOG",
            ReducedCase::LogY => "LOG_Y",
            ReducedCase::LogP => "LOG_P",
        }
    }
}

/// Reduced ODE `w^(n) = rhs(z, w, ..., w^(n-1))`.
///
/// `f0` is stored for every case but enters the right-hand side only for
/// LOG, LOG_Y and LOG_P; for POWER and EXP it only affects the lift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedOde {
    pub case: ReducedCase,
    pub alpha: f64,
    pub lambda: f64,
    pub f0: f64,
    pub c1: f64,
    pub order: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be nonzero, got {alpha}")));
    }
    Ok(())
}

pub fn reduce_power(alpha: f64, f0: f64) -> Result<ReducedOde> {
    check_alpha(alpha)?;
    Ok(ReducedOde {
        case: ReducedCase::Power,
        alpha,
        lambda: 1.0,
        f0,
        c1: 0.0,
        order: 3,
    })
}

pub fn reduce_exp(alpha: f64, lambda: f64) -> Result<ReducedOde> {
    check_alpha(alpha)?;
    Ok(ReducedOde {
        case: ReducedCase::Exp,
        alpha,
        lambda,
        f0: 0.0,
        c1: 0.0,
        order: 3,
    })
}

pub fn reduce_log(alpha: f64, f0: f64, c1: f64) -> Result<ReducedOde> {
    check_alpha(alpha)?;
    if c1 == 0.0 || !c1.is_finite() {
        return Err(Error::InvalidArgument(format!("c1 must be nonzero, got {c1}")));
    }
    Ok(ReducedOde {
        case: ReducedCase::Log,
        alpha,
        lambda: 0.0,
        f0,
        c1,
        order: 3,
    })
}

impl ReducedOde {
    /// Lift offset `f0` for the EXP case (the ODE does not depend on it).
    pub fn with_f0(mut self, f0: f64) -> Self {
        self.f0 = f0;
        self
    }

    /// The `y = ln w` form of a LOG equation.
    pub fn log_y(&self) -> Result<ReducedOde> {
        self.log_variant(ReducedCase::LogY, 3)
    }

    /// The `p(θ) = y'` form of a LOG equation.
    pub fn log_p(&self) -> Result<ReducedOde> {
        self.log_variant(ReducedCase::LogP, 2)
    }

    fn log_variant(&self, case: ReducedCase, order: usize) -> Result<ReducedOde> {
        if self.case != ReducedCase::Log {
            return Err(Error::WrongCase);
        }
        Ok(ReducedOde { case, order, ..*self })
    }

    /// Highest derivative as a function of `z` and the lower ones.
    pub fn rhs(&self, z: f64, s: &[f64]) -> Result<f64> {
        let a = self.alpha;
        let v = match self.case {
            ReducedCase::Power => {
                let wa = pow_real(s[0], a).ok_or(Error::Domain {
                    node: format!("w^{a:?}"),
                    at: s[0],
                })?;
                -wa * s[1] - z * s[1] / 3.0 - 2.0 * s[0] / (3.0 * a)
            }
            ReducedCase::Exp => {
                if a * s[0] > EXP_GUARD {
                    return Err(Error::Domain {
                        node: format!("exp({a:?}*w)"),
                        at: s[0],
                    });
                }
                -((3.0 * self.lambda * (a * s[0]).exp() + z) * s[1] + 2.0 / a) / 3.0
            }
            ReducedCase::Log => {
                if !(s[0] > 0.0) {
                    return Err(Error::Domain {
                        node: "log(w)".into(),
                        at: s[0],
                    });
                }
                s[0] / (self.c1 * a) - (a * s[0].ln() + self.f0) * s[1]
            }
            ReducedCase::LogY => {
                let (y, y1, y2) = (s[0], s[1], s[2]);
                1.0 / (self.c1 * a) - y1.powi(3) - (a * y + self.f0) * y1 - 3.0 * y1 * y2
            }
            ReducedCase::LogP => {
                let (p, p1) = (s[0], s[1]);
                if p == 0.0 {
                    return Err(Error::Domain {
                        node: "1/p^2".into(),
                        at: p,
                    });
                }
                let theta = z;
                (1.0 / (self.c1 * a) - p * p1 * p1 - 3.0 * p * p * p1 - p.powi(3) - (a * theta + self.f0) * p) / (p * p)
            }
        };
        if !v.is_finite() {
            return Err(Error::Domain {
                node: format!("{} right-hand side", self.case.as_str()),
                at: s[0],
            });
        }
        Ok(v)
    }

    /// `f(u)` of the equation this reduction came from, with pedestal `u0`.
    pub fn nonlinearity(&self, u0: f64) -> Expr {
        let shifted = Expr::Add(vec![Expr::Variable, Expr::Constant(-u0)]);
        let f0 = Expr::Constant(self.f0);
        match self.case {
            ReducedCase::Power => Expr::Add(vec![
                f0,
                Expr::Pow(Box::new(shifted), Box::new(Expr::Constant(self.alpha))),
            ]),
            ReducedCase::Exp => Expr::Add(vec![
                f0,
                Expr::Mul(vec![
                    Expr::Constant(self.lambda),
                    Expr::Exp(Box::new(Expr::Mul(vec![Expr::Constant(self.alpha), Expr::Variable]))),
                ]),
            ]),
            ReducedCase::Log | ReducedCase::LogY | ReducedCase::LogP => Expr::Add(vec![
                f0,
                Expr::Mul(vec![Expr::Constant(self.alpha), Expr::Log(Box::new(shifted))]),
            ]),
        }
    }
}

/// Solution of a reduced ODE, sampled at increasing `z` and backed by the
/// integrator's dense output when available.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub case: ReducedCase,
    pub ode: ReducedOde,
    pub z: Vec<f64>,
    /// `states[i]` holds `(w, w', ..., w^(n-1))` at `z[i]`.
    pub states: Vec<Vec<f64>>,
    /// `w^(n)` at `z[i]`.
    pub highest: Vec<f64>,
    dense: Option<DenseSolution>,
}

impl Trajectory {
    /// Trajectory from externally supplied samples (no dense output).
    pub fn from_samples(ode: ReducedOde, z: Vec<f64>, states: Vec<Vec<f64>>, highest: Vec<f64>) -> Result<Self> {
        if z.len() != states.len() || z.len() != highest.len() || z.len() < 2 {
            return Err(Error::InvalidArgument("sample arrays differ in length".into()));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("z samples must increase".into()));
        }
        if states.iter().any(|s| s.len() != ode.order) {
            return Err(Error::InvalidArgument("state length differs from ODE order".into()));
        }
        Ok(Trajectory {
            case: ode.case,
            ode,
            z,
            states,
            highest,
            dense: None,
        })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.z[0], self.z[self.z.len() - 1])
    }

    /// `(state, highest derivative)` at `z` from the dense output.
    pub fn eval(&self, z: f64) -> Result<(Vec<f64>, f64)> {
        let dense = self
            .dense
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("sampled trajectory has no dense output".into()))?;
        let s = dense.eval(z)?;
        let top = self.ode.rhs(z, &s)?;
        Ok((s, top))
    }

    /// State at the far end of the integration.
    pub fn endpoint(&self) -> Option<&[f64]> {
        self.dense.as_ref().map(|d| d.final_state())
    }
}

pub fn integrate(ode: &ReducedOde, z0: f64, state0: &[f64], z1: f64) -> Result<Trajectory> {
    integrate_with_tol(ode, z0, state0, z1, INTEGRATE_TOL)
}

/// [`integrate`] with an explicit relative tolerance (absolute tolerance
/// is `tol` as well).
pub fn integrate_with_tol(ode: &ReducedOde, z0: f64, state0: &[f64], z1: f64, tol: f64) -> Result<Trajectory> {
    let n = ode.order;
    if state0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "initial state has length {}, ODE order is {n}",
            state0.len()
        )));
    }
    if z1 == z0 {
        return Err(Error::InvalidArgument("empty integration span".into()));
    }
    ode.rhs(z0, state0)?;
    let dense = ode::solve(
        |z, y, dy| {
            dy[..n - 1].copy_from_slice(&y[1..n]);
            dy[n - 1] = ode.rhs(z, y)?;
            Ok(())
        },
        z0,
        state0,
        z1,
        Tolerances::uniform(tol),
    )?;
    let m = MIN_SAMPLES.max(dense.accepted_steps + 1);
    let (lo, hi) = dense.span();
    let mut traj = Trajectory {
        case: ode.case,
        ode: *ode,
        z: Vec::with_capacity(m),
        states: Vec::with_capacity(m),
        highest: Vec::with_capacity(m),
        dense: None,
    };
    for i in 0..m {
        let z = if i == m - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (m - 1) as f64
        };
        let s = dense.eval(z)?;
        traj.highest.push(ode.rhs(z, &s)?);
        traj.states.push(s);
        traj.z.push(z);
    }
    traj.dense = Some(dense);
    Ok(traj)
}

/// Mean and largest deviation of `3w'' + z w + w^3` along an α = 2 power
/// trajectory.
pub fn painleve_first_integral(traj: &Trajectory) -> Result<(f64, f64)> {
    if traj.case != ReducedCase::Power || traj.ode.alpha != 2.0 {
        return Err(Error::WrongCase);
    }
    let values: Vec<f64> = traj
        .z
        .iter()
        .zip(&traj.states)
        .map(|(&z, s)| 3.0 * s[2] + z * s[0] + s[0].powi(3))
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let drift = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Ok((mean, drift))
}

/// Similarity map `u = U(t) + S(t) w(z)`, `z = P(t) x + Q(t)`.
#[derive(Debug, Clone, Copy)]
struct Similarity {
    u: f64,
    du: f64,
    s: f64,
    ds: f64,
    p: f64,
    dp: f64,
    q: f64,
    dq: f64,
}

fn similarity(ode: &ReducedOde, u0: f64, t: f64) -> Result<Similarity> {
    let a = ode.alpha;
    match ode.case {
        ReducedCase::Power | ReducedCase::Exp => {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{} lift needs t > 0, got {t}",
                    ode.case.as_str()
                )));
            }
            let p = t.cbrt().recip();
            let q = ode.f0 * t.cbrt() * t.cbrt();
            let (u, du, s, ds) = if ode.case == ReducedCase::Power {
                let s = t.powf(-2.0 / (3.0 * a));
                (u0, 0.0, s, -2.0 / (3.0 * a) * s / t)
            } else {
                (-2.0 / 3.0 * t.ln() / a, -2.0 / (3.0 * a * t), 1.0, 0.0)
            };
            Ok(Similarity {
                u,
                du,
                s,
                ds,
                p,
                dp: -p / (3.0 * t),
                q,
                dq: 2.0 / 3.0 * ode.f0 * p,
            })
        }
        ReducedCase::Log => {
            let k = 1.0 / (ode.c1 * a);
            let s = (k * t).exp();
            Ok(Similarity {
                u: u0,
                du: 0.0,
                s,
                ds: k * s,
                p: 1.0,
                dp: 0.0,
                q: t * t / (2.0 * ode.c1),
                dq: t / ode.c1,
            })
        }
        ReducedCase::LogY | ReducedCase::LogP => Err(Error::WrongCase),
    }
}

/// `u(x, t)` on a tensor grid together with residual diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct LiftedPatch {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// `u[i][j] = u(x[j], t[i])`.
    pub u: Vec<Vec<f64>>,
    /// Largest pointwise residual per time slice.
    pub slice_residuals: Vec<f64>,
    pub residual_max: f64,
    /// Largest gap between the analytic `u_t` and a central difference of
    /// the lifted field (limited by dense-output accuracy).
    pub fd_ut_max: f64,
}

/// Maps a trajectory back to `u(x, t)` and evaluates the residual of
/// `u_t = f(u) u_x + u_xxx` with analytic chain-rule derivatives.
pub fn lift(traj: &Trajectory, u0: f64, t_grid: &[f64], x_grid: &[f64]) -> Result<LiftedPatch> {
    let ode = &traj.ode;
    let f = ode.nonlinearity(u0);
    let mut patch = LiftedPatch {
        t: t_grid.to_vec(),
        x: x_grid.to_vec(),
        u: Vec::with_capacity(t_grid.len()),
        slice_residuals: Vec::with_capacity(t_grid.len()),
        residual_max: 0.0,
        fd_ut_max: 0.0,
    };
    let value_at = |x: f64, t: f64| -> Result<f64> {
        let m = similarity(ode, u0, t)?;
        let (s, _) = traj.eval(m.p * x + m.q)?;
        Ok(m.u + m.s * s[0])
    };
    for &t in t_grid {
        let m = similarity(ode, u0, t)?;
        let mut row = Vec::with_capacity(x_grid.len());
        let mut worst = 0.0f64;
        for &x in x_grid {
            let z = m.p * x + m.q;
            let (s, w3) = traj.eval(z)?;
            let u = m.u + m.s * s[0];
            let ux = m.s * m.p * s[1];
            let uxxx = m.s * m.p.powi(3) * w3;
            let ut = m.du + m.ds * s[0] + m.s * (m.dp * x + m.dq) * s[1];
            worst = worst.max(pointwise_residual(&f, u, ut, ux, uxxx)?);
            row.push(u);

            let h = 1e-4 * (1.0 + t.abs()).min(t.abs().max(1e-3));
            if let (Ok(up), Ok(um)) = (value_at(x, t + h), value_at(x, t - h)) {
                let fd = (up - um) / (2.0 * h);
                patch.fd_ut_max = patch.fd_ut_max.max((fd - ut).abs() / (1.0 + ut.abs()));
            }
        }
        patch.residual_max = patch.residual_max.max(worst);
        patch.slice_residuals.push(worst);
        patch.u.push(row);
    }
    Ok(patch)
}

/// Residuals of the `y = ln w` and `p(θ)` forms along a LOG trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub y_residual: f64,
    /// Residual of `p²p'' + p p'² + 3p²p' + p³ + (αθ + f0)p = 1/(c1 α)`;
    /// `None` when `y'` changes sign.
    pub p_residual: Option<f64>,
    /// Same equation without the `p p'²` term.
    pub p_residual_without_pp2: Option<f64>,
    pub monotone: bool,
}

/// Checks the `w = e^y` and `y' = p(y)` forms of the LOG reduction.
///
/// The y-equation is evaluated from `(w, w', w'', w''')` by the chain rule.
/// For the p-equation `θ = y(z)`, `p = y'`, `p' = y''/y'`, and `p''` is a
/// numerical θ-derivative of `p'` on the sample grid.
pub fn verify_y_and_p_chain(alpha: f64, f0: f64, c1: f64, traj_w: &Trajectory) -> Result<ChainReport> {
    let k = 1.0 / (c1 * alpha);
    let n = traj_w.z.len();
    let mut theta = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut dp = Vec::with_capacity(n);
    let mut y_residual = 0.0f64;
    for i in 0..n {
        let s = &traj_w.states[i];
        let w = s[0];
        if !(w > 0.0) {
            return Err(Error::Domain {
                node: "log(w)".into(),
                at: w,
            });
        }
        let y = w.ln();
        let y1 = s[1] / w;
        let y2 = s[2] / w - y1 * y1;
        let y3 = traj_w.highest[i] / w - 3.0 * y1 * y2 - y1.powi(3);
        let r = y3 + y1.powi(3) + (alpha * y + f0) * y1 + 3.0 * y1 * y2 - k;
        y_residual = y_residual.max(r.abs());
        theta.push(y);
        p.push(y1);
        dp.push(if y1 != 0.0 { y2 / y1 } else { f64::NAN });
    }
    let sign = p[0].signum();
    let monotone = sign != 0.0 && p.iter().all(|v| v.signum() == sign);
    let mut report = ChainReport {
        y_residual,
        p_residual: None,
        p_residual_without_pp2: None,
        monotone,
    };
    if !monotone {
        return Ok(report);
    }
    // θ must increase for the stencils
    let mut order: Vec<usize> = (0..n).collect();
    if sign < 0.0 {
        order.reverse();
    }
    let th: Vec<f64> = order.iter().map(|&i| theta[i]).collect();
    let pv: Vec<f64> = order.iter().map(|&i| p[i]).collect();
    let dpv: Vec<f64> = order.iter().map(|&i| dp[i]).collect();
    let (mut full, mut literal) = (0.0f64, 0.0f64);
    for i in 0..n {
        let d2 = fd::derivative_at(&th, &dpv, i, 1, 7);
        let (pp, p1) = (pv[i], dpv[i]);
        let common = pp * pp * d2 + 3.0 * pp * pp * p1 + pp.powi(3) + (alpha * th[i] + f0) * pp - k;
        full = full.max((common + pp * p1 * p1).abs());
        literal = literal.max(common.abs());
    }
    report.p_residual = Some(full);
    report.p_residual_without_pp2 = Some(literal);
    Ok(report)
}

/// Like [`verify_y_and_p_chain`] but fails with `NonMonotone` when the
/// p-form is undefined.
pub fn verify_p_chain_strict(alpha: f64, f0: f64, c1: f64, traj_w: &Trajectory) -> Result<ChainReport> {
    let report = verify_y_and_p_chain(alpha, f0, c1, traj_w)?;
    if !report.monotone {
        let i = traj_w
            .states
            .windows(2)
            .position(|w| w[0][1].signum() != w[1][1].signum())
            .unwrap_or(0);
        return Err(Error::NonMonotone { z: traj_w.z[i] });
    }
    Ok(report)
}
