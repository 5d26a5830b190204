//! Adaptive Dormand–Prince 5(4) integration for complex-valued linear systems.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-12 }
    }
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stateful integrator that remembers its step size across output intervals.
pub struct Dopri5<F> {
    rhs: F,
    tol: OdeTolerances,
    h: Option<f64>,
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    pub fn new(rhs: F, dim: usize, tol: OdeTolerances) -> Self {
        Self {
            rhs,
            tol,
            h: None,
            k: std::array::from_fn(|_| vec![ZERO; dim]),
            tmp: vec![ZERO; dim],
            y_new: vec![ZERO; dim],
        }
    }

    fn stage(&mut self, y: &[C64], h: f64, coeffs: &[f64]) {
        for i in 0..y.len() {
            let mut acc = y[i];
            for (j, c) in coeffs.iter().enumerate() {
                if *c != 0.0 {
                    acc += self.k[j][i] * (h * c);
                }
            }
            self.tmp[i] = acc;
        }
    }

    fn error_norm(&self, y: &[C64], h: f64) -> f64 {
        let mut sum = 0.0;
        for i in 0..y.len() {
            let e = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * h;
            let sc = self.tol.abs + self.tol.rel * y[i].norm().max(self.y_new[i].norm());
            sum += (e.norm() / sc).powi(2);
        }
        (sum / y.len().max(1) as f64).sqrt()
    }

    fn initial_step(&mut self, t: f64, y: &[C64], span: f64) -> f64 {
        (self.rhs)(t, y, &mut self.k[0]);
        let scale = |z: &C64| self.tol.abs + self.tol.rel * z.norm();
        let d0 = (y.iter().map(|z| (z.norm() / scale(z)).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        let d1 = (self.k[0]
            .iter()
            .zip(y)
            .map(|(f, z)| (f.norm() / scale(z)).powi(2))
            .sum::<f64>()
            / y.len() as f64)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(span.abs()).max(1e-12 * span.abs().max(1.0))
    }

    /// Advances `y` from `t0` to exactly `t1`.
    pub fn advance(&mut self, y: &mut Vec<C64>, t0: f64, t1: f64) -> Result<()> {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(());
        }
        let mut t = t0;
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(t0, y, span),
        };
        let hmin = 1e-14 * t0.abs().max(t1.abs()).max(1.0);
        let mut prev_err: f64 = 1e-4;
        let mut fsal_valid = false;
        let mut rejected_last = false;
        loop {
            let remaining = t1 - t;
            if remaining <= hmin * 0.5 {
                break;
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            if !fsal_valid {
                (self.rhs)(t, y, &mut self.k[0]);
            }
            self.stage(y, hs, &[A21]);
            let tmp = std::mem::take(&mut self.tmp);
            (self.rhs)(t + C2 * hs, &tmp, &mut self.k[1]);
            self.tmp = tmp;
            self.stage(y, hs, &[A31, A32]);
            let tmp = std::mem::take(&mut self.tmp);
            (self.rhs)(t + C3 * hs, &tmp, &mut self.k[2]);
            self.tmp = tmp;
            self.stage(y, hs, &[A41, A42, A43]);
            let tmp = std::mem::take(&mut self.tmp);
            (self.rhs)(t + C4 * hs, &tmp, &mut self.k[3]);
            self.tmp = tmp;
            self.stage(y, hs, &[A51, A52, A53, A54]);
            let tmp = std::mem::take(&mut self.tmp);
            (self.rhs)(t + C5 * hs, &tmp, &mut self.k[4]);
            self.tmp = tmp;
            self.stage(y, hs, &[A61, A62, A63, A64, A65]);
            let tmp = std::mem::take(&mut self.tmp);
            (self.rhs)(t + hs, &tmp, &mut self.k[5]);
            self.tmp = tmp;
            self.stage(y, hs, &[B1, 0.0, B3, B4, B5, B6]);
            std::mem::swap(&mut self.tmp, &mut self.y_new);
            let y_new = std::mem::take(&mut self.y_new);
            (self.rhs)(t + hs, &y_new, &mut self.k[6]);
            self.y_new = y_new;

            let err = self.error_norm(y, hs);
            if !err.is_finite() {
                h = hs * 0.1;
                fsal_valid = false;
                if h < hmin {
                    return Err(Error::StepUnderflow { t });
                }
                continue;
            }
            if err <= 1.0 {
                // PI controller (beta = 0.04).
                let fac = 0.9 * err.max(1e-10).powf(-0.2 + 0.75 * 0.04) * prev_err.powf(0.04);
                let fac = if rejected_last { fac.min(1.0) } else { fac };
                prev_err = err.max(1e-4);
                t = if last { t1 } else { t + hs };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                fsal_valid = true;
                rejected_last = false;
                let h_next = hs * fac.clamp(0.2, 10.0);
                if !last {
                    h = h_next;
                } else {
                    // A step clipped to the output time says little about the next one.
                    if hs >= h {
                        h = h_next;
                    }
                    break;
                }
            } else {
                let fac = (0.9 * err.powf(-0.2)).max(0.2);
                h = hs * fac;
                fsal_valid = false;
                rejected_last = true;
                if h < hmin {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }
}

/// Integrates `dy/dt = rhs(t, y)` and returns the state at every grid time.
pub fn integrate<F>(rhs: F, y0: &[C64], t_grid: &[f64], tol: OdeTolerances) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    check_grid(t_grid)?;
    let mut solver = Dopri5::new(rhs, y0.len(), tol);
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut t = t_grid[0];
    for &tk in t_grid {
        solver.advance(&mut y, t, tk)?;
        t = tk;
        out.push(y.clone());
    }
    Ok(out)
}

/// Integrates the linear system `dy/dt = G y`.
pub fn integrate_linear_ode(
    generator: &ComplexMatrix,
    y0: &[C64],
    t_grid: &[f64],
    tol: OdeTolerances,
) -> Result<Vec<Vec<C64>>> {
    if !generator.is_square() || generator.rows() != y0.len() {
        return Err(Error::DimensionMismatch(format!(
            "generator {}x{} with state of length {}",
            generator.rows(),
            generator.cols(),
            y0.len()
        )));
    }
    integrate(
        |_t, y, dy| {
            for (r, d) in dy.iter_mut().enumerate() {
                *d = generator.row(r).iter().zip(y).map(|(a, b)| a * b).sum();
            }
        },
        y0,
        t_grid,
        tol,
    )
}

/// Grids must be non-empty, finite and non-decreasing.
pub fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("non-finite time".into()));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid("time grid must be non-decreasing".into()));
    }
    Ok(())
}
