//! Least-squares fit of `u = u_bg + a sech^β(A (x - x_c))` to a field.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::Field;
use crate::error::{Error, Result};

const MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SechFit {
    pub a: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub center: f64,
    pub beta: f64,
    /// Root-mean-square misfit over the grid.
    pub rms: f64,
    pub iterations: usize,
}

/// Gauss–Newton fit with fixed background. `beta = None` fits the exponent
/// as well.
pub fn fit_sech(field: &Field, background: f64, beta: Option<f64>) -> Result<SechFit> {
    let len = field.len;
    let xs = field.grid();
    let ys: Vec<f64> = field.values.iter().map(|v| v - background).collect();
    let (xc0, peak) = field.peak();
    let a0 = peak - background;
    if !(a0.abs() > 0.0) {
        return Err(Error::InvalidArgument("field has no crest above the background".into()));
    }
    let beta0 = beta.unwrap_or(1.0);
    // half width at half maximum: sech^β(A w) = 1/2
    let above = ys.iter().filter(|v| v.abs() >= 0.5 * a0.abs()).count().max(1);
    let half_width = 0.5 * above as f64 * field.dx();
    let a_guess = (2f64.powf(1.0 / beta0)).acosh() / half_width;

    let free_beta = beta.is_none();
    let np = if free_beta { 4 } else { 3 };
    let mut p = vec![a0, a_guess, xc0, beta0];
    let wrap = |d: f64| d - len * (d / len).round();
    let eval = |p: &[f64]| -> (Vec<f64>, DMatrix<f64>) {
        let mut r = Vec::with_capacity(xs.len());
        let mut jac = DMatrix::zeros(xs.len(), np);
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            let dx = wrap(x - p[2]);
            let th = p[1] * dx;
            let s = 1.0 / th.cosh();
            let g = s.powf(p[3]);
            let dg = -p[3] * g * th.tanh();
            r.push(p[0] * g - y);
            jac[(i, 0)] = g;
            jac[(i, 1)] = p[0] * dg * dx;
            jac[(i, 2)] = -p[0] * dg * p[1];
            if free_beta {
                jac[(i, 3)] = if g > 0.0 { p[0] * g * s.ln() } else { 0.0 };
            }
        }
        (r, jac)
    };
    let sq = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut lambda = 1e-6;
    let (mut r, mut jac) = eval(&p);
    let mut cost = sq(&r);
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let rv = DVector::from_vec(r.clone());
        let jt = jac.transpose();
        let mut normal = &jt * &jac;
        let grad = &jt * &rv;
        for k in 0..np {
            normal[(k, k)] *= 1.0 + lambda;
        }
        let delta = match normal.clone().cholesky() {
            Some(ch) => ch.solve(&(-grad)),
            None => {
                lambda *= 10.0;
                continue;
            }
        };
        let mut trial = p.clone();
        for k in 0..np {
            trial[k] += delta[k];
        }
        let (r2, j2) = eval(&trial);
        let c2 = sq(&r2);
        if c2.is_finite() && c2 <= cost {
            let step = delta.norm() / (1.0 + p[..np].iter().map(|v| v * v).sum::<f64>().sqrt());
            p = trial;
            r = r2;
            jac = j2;
            let converged = cost - c2 <= 1e-30 + 1e-15 * cost || step < 1e-15;
            cost = c2;
            lambda = (lambda / 10.0).max(1e-15);
            if converged {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    Ok(SechFit {
        a: p[0],
        big_a: p[1].abs(),
        center: p[2].rem_euclid(len),
        beta: p[3],
        rms: (cost / xs.len() as f64).sqrt(),
        iterations,
    })
}
