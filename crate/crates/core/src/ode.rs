//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with continuous
//! (dense) output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 1_000_000,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
struct Segment {
    z: f64,
    h: f64,
    // y, y1 - y, h k1 - (y1 - y), (y1 - y) - h k7 - bspl, dense correction
    coeffs: [Vec<f64>; 5],
}

/// Piecewise-polynomial solution produced by [`solve`].
#[derive(Debug, Clone)]
pub struct DenseSolution {
    segments: Vec<Segment>,
    z_start: f64,
    z_end: f64,
    y_end: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl DenseSolution {
    pub fn z_start(&self) -> f64 {
        self.z_start
    }

    pub fn z_end(&self) -> f64 {
        self.z_end
    }

    pub fn final_state(&self) -> &[f64] {
        &self.y_end
    }

    pub fn dim(&self) -> usize {
        self.y_end.len()
    }

    /// State at `z` by the continuous extension of the covering step.
    pub fn eval(&self, z: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.span();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if !(z >= lo - slack && z <= hi + slack) {
            return Err(Error::OutOfRange { z, lo, hi });
        }
        if self.segments.is_empty() {
            return Ok(self.y_end.clone());
        }
        let forward = self.z_end >= self.z_start;
        // segments are ordered along the direction of integration
        let idx = self
            .segments
            .partition_point(|s| if forward { s.z + s.h < z } else { s.z + s.h > z })
            .min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        let theta = (z - seg.z) / seg.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &seg.coeffs;
        Ok((0..r1.len())
            .map(|i| r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))))
            .collect())
    }

    /// `(min z, max z)` covered by the solution.
    pub fn span(&self) -> (f64, f64) {
        (self.z_start.min(self.z_end), self.z_start.max(self.z_end))
    }
}

fn weighted_rms(v: &[f64], y0: &[f64], y1: &[f64], tol: &Tolerances) -> f64 {
    let n = v.len() as f64;
    let s: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = tol.atol + tol.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `y' = rhs(z, y)` from `(z0, y0)` to `z1`.
pub fn solve<F>(rhs: F, z0: f64, y0: &[f64], z1: f64, tol: Tolerances) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    solve_until(rhs, z0, y0, z1, tol, |_, _| false)
}

/// Like [`solve`], but stops after the first accepted step whose end state
/// satisfies `stop`.
pub fn solve_until<F, S>(
    mut rhs: F,
    z0: f64,
    y0: &[f64],
    z1: f64,
    tol: Tolerances,
    mut stop: S,
) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    S: FnMut(f64, &[f64]) -> bool,
{
    let n = y0.len();
    let mut sol = DenseSolution {
        segments: Vec::new(),
        z_start: z0,
        z_end: z0,
        y_end: y0.to_vec(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if z1 == z0 {
        return Ok(sol);
    }
    let dir = (z1 - z0).signum();
    let mut z = z0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    rhs(z, &y, &mut k1)?;

    let mut h = initial_step(&mut rhs, z, &y, &k1, dir, &tol)?.min((z1 - z0).abs()) * dir;

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ys = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut last_reject = false;

    loop {
        if sol.accepted_steps + sol.rejected_steps > tol.max_steps {
            return Err(Error::StepSizeUnderflow { z });
        }
        let hmin = 1e-14 * (1.0 + z.abs());
        if h.abs() < hmin {
            return Err(Error::StepSizeUnderflow { z });
        }
        let last = (z + h - z1) * dir >= 0.0;
        if last {
            h = z1 - z;
        }

        let stages = (|| -> Result<()> {
            for i in 0..n {
                ys[i] = y[i] + h * A21 * k1[i];
            }
            rhs(z + C2 * h, &ys, &mut k2)?;
            for i in 0..n {
                ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(z + C3 * h, &ys, &mut k3)?;
            for i in 0..n {
                ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(z + C4 * h, &ys, &mut k4)?;
            for i in 0..n {
                ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(z + C5 * h, &ys, &mut k5)?;
            for i in 0..n {
                ys[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            rhs(z + h, &ys, &mut k6)?;
            for i in 0..n {
                y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            rhs(z + h, &y1, &mut k7)?;
            Ok(())
        })();

        if let Err(e) = stages {
            // the trial step left the admissible region; retreat
            sol.rejected_steps += 1;
            h *= 0.25;
            if h.abs() < hmin {
                return Err(e);
            }
            last_reject = true;
            continue;
        }

        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = weighted_rms(&err, &y, &y1, &tol);
        if !en.is_finite() {
            sol.rejected_steps += 1;
            h *= 0.25;
            last_reject = true;
            continue;
        }

        if en <= 1.0 {
            let mut coeffs: [Vec<f64>; 5] = Default::default();
            coeffs[0] = y.clone();
            coeffs[1] = (0..n).map(|i| y1[i] - y[i]).collect();
            coeffs[2] = (0..n).map(|i| h * k1[i] - coeffs[1][i]).collect();
            coeffs[3] = (0..n).map(|i| coeffs[1][i] - h * k7[i] - coeffs[2][i]).collect();
            coeffs[4] = (0..n)
                .map(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
                .collect();
            sol.segments.push(Segment { z, h, coeffs });
            sol.accepted_steps += 1;

            z = if last { z1 } else { z + h };
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);
            sol.z_end = z;
            sol.y_end.clone_from(&y);

            if last || stop(z, &y) {
                return Ok(sol);
            }
            let mut fac = 0.9 * en.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_reject {
                fac = fac.min(1.0);
            }
            last_reject = false;
            h *= fac;
        } else {
            sol.rejected_steps += 1;
            let fac = (0.9 * en.powf(-0.2)).max(0.2);
            h *= fac;
            last_reject = true;
        }
    }
}

fn initial_step<F>(rhs: &mut F, z: f64, y: &[f64], f0: &[f64], dir: f64, tol: &Tolerances) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let norm = |v: &[f64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(a, yi)| (a / (tol.atol + tol.rtol * yi.abs())).powi(2))
            .sum();
        (s / n as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    if rhs(z + dir * h0, &y1, &mut f1).is_err() {
        return Ok(h0);
    }
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let sol = solve(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            10.0,
            Tolerances::uniform(1e-12),
        )
        .unwrap();
        let y = sol.final_state();
        assert!((y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((y[1] + 10f64.sin()).abs() < 1e-10);
        for z in [0.0, 0.37, 3.3, 7.77, 10.0] {
            let s = sol.eval(z).unwrap();
            assert!((s[0] - z.cos()).abs() < 1e-9, "dense output at {z}");
        }
        assert!(sol.eval(10.5).is_err());
    }

    #[test]
    fn backward_integration() {
        let sol = solve(
            |_, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            1.0,
            &[1.0],
            0.0,
            Tolerances::uniform(1e-12),
        )
        .unwrap();
        assert!((sol.final_state()[0] - (-1f64).exp()).abs() < 1e-11);
        assert!((sol.eval(0.5).unwrap()[0] - (-0.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn self_convergence() {
        let run = |tol| {
            solve(
                |z, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -z * y[0];
                    Ok(())
                },
                0.0,
                &[1.0, 0.0],
                5.0,
                Tolerances::uniform(tol),
            )
            .unwrap()
            .final_state()
            .to_vec()
        };
        let a = run(1e-10);
        let b = run(5e-11);
        assert!((a[0] - b[0]).abs() < 1e-9);
    }

    #[test]
    fn blow_up_reports_underflow() {
        let r = solve(
            |_, y, dy| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            2.0,
            Tolerances::uniform(1e-10),
        );
        assert!(matches!(r, Err(Error::StepSizeUnderflow { z }) if (z - 1.0).abs() < 1e-2));
    }
}
