//! Closed-form `sech^β` solitary waves for `f(u) = f0 + (u - u0)^α`.
//!
//! The wave `u = u0 + a sech^β(A(x - c3 t) + b)` solves the equation exactly
//! when `β = 2/α`, `a^{2/β} = A²(β+1)(β+2)` and `c3 = -f0 - A²β²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::pow_real;

/// Residual grid: 400 points spanning `θ ∈ [-10, 10]`.
pub const RESIDUAL_POINTS: usize = 400;
pub const THETA_SPAN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonParams {
    pub a: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub beta: f64,
    pub b_phase: f64,
    pub c3: f64,
    pub u0: f64,
    pub f0: f64,
    pub alpha: f64,
}

/// One of the four algebraic conditions on the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `A²(β+1)(β+2) = a^{2/β}`
    Amplitude,
    /// `f0 + c3 + A²β² = 0`
    Speed,
    /// `α = 2/β`
    Exponent,
    /// pedestal equals `u0`
    Pedestal,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Amplitude,
        Condition::Speed,
        Condition::Exponent,
        Condition::Pedestal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Condition::Amplitude => "amplitude",
            Condition::Speed => "speed",
            Condition::Exponent => "exponent",
            Condition::Pedestal => "pedestal",
        }
    }
}

pub fn solve_params(alpha: f64, big_a: f64, f0: f64, u0: f64, b_phase: f64) -> Result<SolitonParams> {
    if !alpha.is_finite() || alpha == 0.0 || alpha == -1.0 || alpha == -2.0 {
        return Err(Error::ForbiddenExponent(alpha));
    }
    if !(big_a > 0.0) || !big_a.is_finite() {
        return Err(Error::InvalidArgument(format!("A must be positive, got {big_a}")));
    }
    let beta = 2.0 / alpha;
    let base = big_a * big_a * (beta + 1.0) * (beta + 2.0);
    let a = pow_real(base, beta / 2.0).ok_or(Error::NegativeBase(base))?;
    Ok(SolitonParams {
        a,
        big_a,
        beta,
        b_phase,
        c3: -f0 - big_a * big_a * beta * beta,
        u0,
        f0,
        alpha,
    })
}

impl SolitonParams {
    pub fn phase(&self, x: f64, t: f64) -> f64 {
        self.big_a * (x - self.c3 * t) + self.b_phase
    }

    /// Defects of the three numeric conditions (amplitude, speed, exponent),
    /// each relative to its natural scale.
    pub fn condition_defects(&self) -> [f64; 3] {
        let base = self.big_a * self.big_a * (self.beta + 1.0) * (self.beta + 2.0);
        let amp = (base - self.a.abs().powf(2.0 / self.beta)).abs() / (1.0 + base.abs());
        let s = self.big_a * self.big_a * self.beta * self.beta;
        let speed = (self.f0 + self.c3 + s).abs() / (1.0 + s + self.f0.abs());
        let exponent = (self.alpha - 2.0 / self.beta).abs() / (1.0 + self.alpha.abs());
        [amp, speed, exponent]
    }

    /// Copy with one condition violated by `rel` times that condition's
    /// scale (the sum of the magnitudes of its terms), together with the
    /// pedestal to use. The pedestal condition `c = u0` is scaled by the
    /// amplitude instead, since `u0` may vanish.
    pub fn perturbed(&self, which: Condition, rel: f64) -> (SolitonParams, f64) {
        let mut p = *self;
        let mut pedestal = self.u0;
        match which {
            Condition::Amplitude => {
                let base = self.big_a * self.big_a * (self.beta + 1.0) * (self.beta + 2.0);
                let lhs = self.a.abs().powf(2.0 / self.beta);
                let shifted = lhs + rel * (base.abs() + lhs);
                p.a = self.a.signum() * shifted.powf(self.beta / 2.0);
            }
            Condition::Speed => {
                let s = self.big_a * self.big_a * self.beta * self.beta;
                p.c3 += rel * (self.f0.abs() + self.c3.abs() + s);
            }
            Condition::Exponent => {
                // 2/β moves by rel * (|α| + |2/β|)
                let two_over_beta = 2.0 / self.beta;
                let moved = two_over_beta + rel * (self.alpha.abs() + two_over_beta.abs());
                p.beta = 2.0 / moved;
            }
            Condition::Pedestal => pedestal += rel * self.a.abs(),
        }
        (p, pedestal)
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

pub fn eval_soliton(p: &SolitonParams, x: f64, t: f64) -> f64 {
    p.u0 + p.a * sech(p.phase(x, t)).powf(p.beta)
}

/// `(u_t, u_x, u_xxx)` of the closed form.
pub fn soliton_derivatives(p: &SolitonParams, x: f64, t: f64) -> (f64, f64, f64) {
    let (d1, d3) = shape_derivatives(p.beta, p.phase(x, t));
    let ux = p.a * p.big_a * d1;
    let uxxx = p.a * p.big_a.powi(3) * d3;
    (-p.c3 * ux, ux, uxxx)
}

/// First and third θ-derivatives of `sech^β θ`.
fn shape_derivatives(beta: f64, theta: f64) -> (f64, f64) {
    let g = sech(theta).powf(beta);
    let tn = theta.tanh();
    let d1 = -beta * g * tn;
    let q = beta * (beta + 1.0);
    let d3 = g * tn * (-q * (beta + 2.0) * tn * tn + 3.0 * beta * beta + 2.0 * beta);
    (d1, d3)
}

fn residual_with(p: &SolitonParams, pedestal: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..RESIDUAL_POINTS {
        let theta = -THETA_SPAN + 2.0 * THETA_SPAN * i as f64 / (RESIDUAL_POINTS - 1) as f64;
        let (d1, d3) = shape_derivatives(p.beta, theta);
        let g = sech(theta).powf(p.beta);
        let ux = p.a * p.big_a * d1;
        let uxxx = p.a * p.big_a.powi(3) * d3;
        let ut = -p.c3 * ux;
        let shifted = pedestal - p.u0 + p.a * g;
        let fu = match pow_real(shifted, p.alpha) {
            Some(v) => p.f0 + v,
            None => return f64::INFINITY,
        };
        let r = (ut - fu * ux - uxxx).abs();
        if !r.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(r);
    }
    worst
}

/// Largest pointwise residual of `u_t = f(u) u_x + u_xxx` over the θ grid.
pub fn residual_closed_form(p: &SolitonParams) -> f64 {
    residual_with(p, p.u0)
}

/// Residual after violating `which` by `rel`.
pub fn perturbed_residual(p: &SolitonParams, which: Condition, rel: f64) -> f64 {
    let (q, pedestal) = p.perturbed(which, rel);
    residual_with(&q, pedestal)
}

/// Acceptance scale `1 + |a|^{1+α}` for the closed-form residual.
pub fn residual_scale(p: &SolitonParams) -> f64 {
    1.0 + p.a.abs().powf(1.0 + p.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn documented_parameter_sets() {
        let p = solve_params(1.0, 0.5, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(p.beta, 2.0);
        assert!((p.a - 12.0 * 0.25).abs() < 1e-14);
        assert!((p.c3 + 1.0).abs() < 1e-14);
        assert!((eval_soliton(&p, 0.0, 0.0) - 3.0).abs() < 1e-14);

        let p = solve_params(2.0, 0.5, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(p.beta, 1.0);
        assert!((p.a * p.a - 6.0 * 0.25).abs() < 1e-14);
        assert!((p.c3 + 0.25).abs() < 1e-14);

        let (a, f0) = (0.7, 0.3);
        let p = solve_params(SQRT2, a, f0, 0.0, 0.0).unwrap();
        assert!((p.beta - SQRT2).abs() < 1e-15);
        let lhs = a * a * (4.0 + 3.0 * SQRT2);
        assert!((p.a.powf(SQRT2) - lhs).abs() < 1e-12 * lhs);
        assert!((p.c3 + f0 + 2.0 * a * a).abs() < 1e-12);
    }

    #[test]
    fn forbidden_and_negative_base() {
        for alpha in [0.0, -1.0, -2.0] {
            assert!(matches!(
                solve_params(alpha, 0.5, 0.0, 0.0, 0.0),
                Err(Error::ForbiddenExponent(_))
            ));
        }
        // β = 2/α ∈ (-2, -1) makes A²(β+1)(β+2) negative
        assert!(matches!(
            solve_params(-1.5, 0.5, 0.0, 0.0, 0.0),
            Err(Error::NegativeBase(_))
        ));
        assert!(solve_params(1.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn crest_and_far_field() {
        let p = solve_params(2.0, 0.5, 1.0, 0.4, 0.3).unwrap();
        let x_crest = -p.b_phase / p.big_a;
        assert!((eval_soliton(&p, x_crest, 0.0) - (p.u0 + p.a)).abs() < 1e-14);
        assert!(soliton_derivatives(&p, x_crest, 0.0).1.abs() < 1e-14);
        assert!((eval_soliton(&p, 500.0, 0.0) - p.u0).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for alpha in [1.0, 2.0, SQRT2] {
            let p = solve_params(alpha, 0.5, 0.3, 0.1, 0.2).unwrap();
            for _ in 0..50 {
                let x: f64 = rng.gen_range(-15.0..15.0);
                let t: f64 = rng.gen_range(-2.0..2.0);
                let (ut, ux, uxxx) = soliton_derivatives(&p, x, t);
                let h = 1e-4;
                let u = |x: f64, t: f64| eval_soliton(&p, x, t);
                let fd_x = (u(x - 2.0 * h, t) - 8.0 * u(x - h, t) + 8.0 * u(x + h, t) - u(x + 2.0 * h, t)) / (12.0 * h);
                let fd_t = (u(x, t - 2.0 * h) - 8.0 * u(x, t - h) + 8.0 * u(x, t + h) - u(x, t + 2.0 * h)) / (12.0 * h);
                let k = 1e-2;
                // seven-point stencil for the third derivative, O(k^4)
                let fd_xxx = (u(x - 3.0 * k, t) - 8.0 * u(x - 2.0 * k, t) + 13.0 * u(x - k, t) - 13.0 * u(x + k, t)
                    + 8.0 * u(x + 2.0 * k, t)
                    - u(x + 3.0 * k, t))
                    / (8.0 * k * k * k);
                let scale = p.a * (1.0 + p.big_a.powi(3));
                assert!((ux - fd_x).abs() <= 1e-7 * scale, "u_x at {x}");
                assert!((ut - fd_t).abs() <= 1e-7 * scale, "u_t at {x}");
                assert!((uxxx - fd_xxx).abs() <= 1e-7 * scale, "u_xxx at {x}");
                assert_eq!(ut, -p.c3 * ux);
            }
        }
    }

    #[test]
    fn exact_parameters_give_small_residual() {
        for alpha in [1.0, 2.0, SQRT2, 0.5, 3.0] {
            for f0 in [0.0, 1.0] {
                let p = solve_params(alpha, 0.5, f0, 0.0, 0.0).unwrap();
                assert!(residual_closed_form(&p) <= 1e-9 * residual_scale(&p), "alpha {alpha}");
                assert!(p.condition_defects().iter().all(|d| *d < 1e-12));
            }
        }
    }

    #[test]
    fn literal_mkdv_amplitude_reading_fails() {
        // a² = 6A instead of a² = 6A², with A ≠ 1
        let mut p = solve_params(2.0, 0.5, 0.0, 0.0, 0.0).unwrap();
        p.a = (6.0f64 * 0.5).sqrt();
        assert!(residual_closed_form(&p) > 1e-3);
    }

    #[test]
    fn any_single_perturbation_is_detected() {
        for alpha in [1.0, 2.0, SQRT2] {
            for f0 in [0.0, 1.0] {
                let p = solve_params(alpha, 0.5, f0, 0.0, 0.0).unwrap();
                for which in Condition::ALL {
                    let r = perturbed_residual(&p, which, 0.01);
                    assert!(r > 1e-3, "alpha {alpha} f0 {f0} {}: {r}", which.name());
                }
            }
        }
    }

    #[test]
    fn gauge_shifts_leave_residual_small() {
        for (b, u0) in [(0.0, 0.0), (1.3, 0.0), (0.0, -2.5), (-0.7, 4.0)] {
            let p = solve_params(2.0, 0.5, 0.2, u0, b).unwrap();
            assert!(residual_closed_form(&p) <= 1e-9 * residual_scale(&p));
        }
    }

    #[test]
    fn width_exponent_decreases_with_alpha() {
        let betas: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&a| solve_params(a, 0.5, 0.0, 0.0, 0.0).unwrap().beta)
            .collect();
        assert!(betas.windows(2).all(|w| w[1] < w[0]));
    }
}
