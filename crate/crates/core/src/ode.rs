//! Dormand-Prince 5(4) with step-size control.

use crate::error::{Error, Result};

/// Tableau of the embedded pair; the 5th-order solution is propagated.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive integrator for autonomous systems `y' = f(y)`.
#[derive(Clone, Copy, Debug)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    h: f64,
}

impl DormandPrince {
    pub fn new(rtol: f64, atol: f64, h_max: f64) -> Self {
        DormandPrince {
            rtol,
            atol,
            h_min: 1e-12 * h_max,
            h_max,
            h: h_max,
        }
    }

    /// Step size proposed for the next call.
    pub fn next_step(&self) -> f64 {
        self.h
    }

    /// One accepted step; returns the new state and the step taken.
    pub fn advance<const N: usize, F>(&mut self, f: &mut F, y: &[f64; N]) -> Result<([f64; N], f64)>
    where
        F: FnMut(&[f64; N]) -> Result<[f64; N]>,
    {
        loop {
            let h = self.h;
            let mut k = [[0.0; N]; 7];
            k[0] = f(y)?;
            for s in 1..7 {
                let mut ys = *y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += h * a * kj[i];
                        }
                    }
                }
                debug_assert!(C[s] > 0.0);
                k[s] = f(&ys)?;
            }
            let mut y5 = *y;
            let mut err = 0.0f64;
            for i in 0..N {
                let (mut d5, mut d4) = (0.0, 0.0);
                for s in 0..7 {
                    d5 += B5[s] * k[s][i];
                    d4 += B4[s] * k[s][i];
                }
                y5[i] += h * d5;
                let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                err = err.max((h * (d5 - d4)).abs() / sc);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                self.h = (h * factor).min(self.h_max);
                return Ok((y5, h));
            }
            self.h = h * factor.min(1.0);
            if self.h < self.h_min {
                return Err(Error::InvalidParameter("integrator step size underflow".into()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_stays_on_circle() {
        let mut ode = DormandPrince::new(1e-10, 1e-12, 0.1);
        let mut f = |y: &[f64; 2]| Ok([-y[1], y[0]]);
        let mut y = [1.0, 0.0];
        let mut t = 0.0;
        while t < 2.0 * std::f64::consts::PI - 0.1 {
            let (yn, h) = ode.advance(&mut f, &y).unwrap();
            y = yn;
            t += h;
        }
        assert!((y[0] - t.cos()).abs() < 1e-8 && (y[1] - t.sin()).abs() < 1e-8);
    }

    #[test]
    fn exponential_growth() {
        let mut ode = DormandPrince::new(1e-11, 1e-14, 0.05);
        let mut f = |y: &[f64; 1]| Ok([y[0]]);
        let (mut y, mut t) = ([1.0], 0.0f64);
        while t < 1.0 - 1e-12 {
            ode.h_max = (1.0 - t).min(0.05);
            ode.h = ode.h.min(ode.h_max);
            let (yn, h) = ode.advance(&mut f, &y).unwrap();
            y = yn;
            t += h;
        }
        assert!((y[0] - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn errors_propagate() {
        let mut ode = DormandPrince::new(1e-9, 1e-12, 0.1);
        let mut f = |_: &[f64; 1]| Err(Error::ZeroForm);
        assert!(ode.advance(&mut f, &[0.0]).is_err());
    }
}
