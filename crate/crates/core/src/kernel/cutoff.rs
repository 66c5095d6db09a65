//! The radial cutoff: mollified piecewise-linear profile, the first-order
//! ODE solution zeta, and the density weight psi.
//!
//! For a constant c with c + ln(1/2) > 2 pi e^{pi/2}, set
//! tau = (c + ln(1/2))/4 and t0 = -c + 2 tau. The piecewise-linear profile
//! drops from 1 to 0 with slope -1/(4 tau) between the corners -c and
//! ln(1/2); both corners are smoothed by an even C-infinity mollifier of
//! half-width w = tau/2, so the smoothed profile alpha is exactly 1 below
//! -c - w, exactly the line on [-c + w, ln(1/2) - w], exactly 0 above
//! ln(1/2) + w, and satisfies alpha(t) = 1 - alpha(2 t0 - t).
//!
//! zeta solves zeta' - zeta = -alpha backward from zeta = 0 on the right
//! support end, via the integrating factor
//! `e^{-t} zeta(t) = int_t^{t_right} e^{-u} alpha(u) du`.
//! Below t_left = -c - w this gives exactly zeta = 1 - lambda e^t; lambda is
//! computed from the cancellation-free form
//! `lambda = 2 e^{-w} + int e^{-u} (1 - alpha(u)) du`.
//! Finally psi = -(1/2) e^{-t} zeta', which equals lambda/2 on the far left
//! and 0 on the far right.

use crate::quad;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CutoffError {
    #[error("cutoff constant too small: c + ln(1/2) = {0:.4} must exceed 2 pi e^(pi/2) = {1:.4}")]
    ConstraintViolated(f64, f64),
}

/// Uniform sample table with 4-point (cubic) Lagrange interpolation.
#[derive(Debug, Clone)]
pub(crate) struct UniformTable {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl UniformTable {
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = (x - self.start) / self.step;
        let i = (s.floor() as isize).clamp(1, n as isize - 3) as usize;
        let f = s - i as f64; // in [-1, 2] near edges, usually [0, 1)
        let (a, b, c, d) =
            (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        // Lagrange cubic through nodes at f = -1, 0, 1, 2
        let fm = f - 1.0;
        let fp = f + 1.0;
        let f2 = f - 2.0;
        -a * f * fm * f2 / 6.0 + b * fp * fm * f2 / 2.0 - c * fp * f * f2 / 2.0
            + d * fp * f * fm / 6.0
    }
}

/// Mollified ramp: the convolution of max(x, 0) with an even compactly
/// supported C-infinity bump of half-width w. Exactly 0 for x <= -w and
/// exactly x for x >= w.
#[derive(Debug, Clone)]
pub(crate) struct MollifiedRamp {
    pub w: f64,
    table: UniformTable,
}

impl MollifiedRamp {
    pub fn build(w: f64, nodes: usize) -> Self {
        let h = 2.0 * w / (nodes - 1) as f64;
        let phi: Vec<f64> = (0..nodes)
            .map(|i| {
                let y = (-w + h * i as f64) / w;
                if y.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - y * y)).exp()
                }
            })
            .collect();
        let cum_phi = quad::cumulative_integral(&phi, h, false);
        let u_phi: Vec<f64> =
            (0..nodes).map(|i| (-w + h * i as f64) * phi[i]).collect();
        let cum_u_phi = quad::cumulative_integral(&u_phi, h, false);
        let total = cum_phi[nodes - 1];
        let values: Vec<f64> = (0..nodes)
            .map(|i| {
                let x = -w + h * i as f64;
                (x * cum_phi[i] - cum_u_phi[i]) / total
            })
            .collect();
        Self { w, table: UniformTable { start: -w, step: h, values } }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= -self.w {
            0.0
        } else if x >= self.w {
            x
        } else {
            // interpolation can undershoot by ~1e-46 near the support edge
            self.table.eval(x).max(0.0)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cutoff {
    pub c: f64,
    pub tau: f64,
    pub t0: f64,
    /// Mollifier half-width (tau / 2).
    pub w: f64,
    /// Far-left asymptote coefficient: zeta = 1 - lambda e^t for t <= t_left.
    pub lambda: f64,
    /// Below this, alpha = 1 and zeta = 1 - lambda e^t exactly.
    pub t_left: f64,
    /// Above this, alpha = zeta = 0 exactly.
    pub t_right: f64,
    ramp: MollifiedRamp,
    zeta_table: UniformTable,
    ln_half: f64,
}

pub const DEFAULT_C: f64 = 31.0;

impl Cutoff {
    pub fn build(c: f64) -> Result<Self, CutoffError> {
        let ln_half = 0.5_f64.ln();
        let bound = std::f64::consts::TAU * std::f64::consts::FRAC_PI_2.exp();
        if c + ln_half <= bound {
            return Err(CutoffError::ConstraintViolated(c + ln_half, bound));
        }
        let tau = 0.25 * (c + ln_half);
        let t0 = -c + 2.0 * tau;
        let w = 0.5 * tau;
        let ramp = MollifiedRamp::build(w, 8193);
        let t_left = -c - w;
        let t_right = ln_half + w;

        let four_tau = 4.0 * tau;
        let alpha_raw = |t: f64| -> f64 {
            if t <= t0 {
                1.0 - ramp.eval(t + c) / four_tau
            } else {
                ramp.eval(ln_half - t) / four_tau
            }
        };

        // cumulative integrals from the right on a dense grid:
        //   I(t) = int_t^{t_right} e^{-u} alpha du   (for zeta on the right half)
        //   K(t) = int_t^{t_right} e^{-u} (1 - alpha) du  (cancellation-free left half)
        let n = 16385usize;
        let h = (t_right - t_left) / (n - 1) as f64;
        // 4-point Gauss-Legendre per panel
        const GX: [f64; 4] = [
            -0.861_136_311_594_052_6,
            -0.339_981_043_584_856_3,
            0.339_981_043_584_856_3,
            0.861_136_311_594_052_6,
        ];
        const GW: [f64; 4] = [
            0.347_854_845_137_453_85,
            0.652_145_154_862_546_1,
            0.652_145_154_862_546_1,
            0.347_854_845_137_453_85,
        ];
        let mut i_cum = vec![0.0f64; n];
        let mut k_cum = vec![0.0f64; n];
        for j in (0..n - 1).rev() {
            let a = t_left + h * j as f64;
            let mut pi = 0.0;
            let mut pk = 0.0;
            for g in 0..4 {
                let u = a + 0.5 * h * (GX[g] + 1.0);
                let al = alpha_raw(u);
                let e = (-u).exp();
                pi += GW[g] * e * al;
                pk += GW[g] * e * (1.0 - al);
            }
            i_cum[j] = i_cum[j + 1] + 0.5 * h * pi;
            k_cum[j] = k_cum[j + 1] + 0.5 * h * pk;
        }
        let lambda = 2.0 * (-w).exp() + k_cum[0];

        let zeta_values: Vec<f64> = (0..n)
            .map(|j| {
                let t = t_left + h * j as f64;
                if t >= t0 {
                    t.exp() * i_cum[j]
                } else {
                    1.0 - t.exp() * (2.0 * (-w).exp() + k_cum[j])
                }
            })
            .collect();
        Ok(Self {
            c,
            tau,
            t0,
            w,
            lambda,
            t_left,
            t_right,
            ramp,
            zeta_table: UniformTable { start: t_left, step: h, values: zeta_values },
            ln_half,
        })
    }

    pub fn alpha(&self, t: f64) -> f64 {
        if t <= self.t_left {
            1.0
        } else if t >= self.t_right {
            0.0
        } else if t <= self.t0 {
            1.0 - self.ramp.eval(t + self.c) / (4.0 * self.tau)
        } else {
            self.ramp.eval(self.ln_half - t) / (4.0 * self.tau)
        }
    }

    pub fn zeta(&self, t: f64) -> f64 {
        if t <= self.t_left {
            1.0 - self.lambda * t.exp()
        } else if t >= self.t_right {
            0.0
        } else {
            self.zeta_table.eval(t)
        }
    }

    /// zeta' = zeta - alpha (the defining ODE).
    pub fn zeta_prime(&self, t: f64) -> f64 {
        if t <= self.t_left {
            -self.lambda * t.exp()
        } else if t >= self.t_right {
            0.0
        } else {
            self.zeta(t) - self.alpha(t)
        }
    }

    /// psi = -(1/2) e^{-t} zeta'; constant lambda/2 on the far left.
    pub fn psi(&self, t: f64) -> f64 {
        if t <= self.t_left {
            0.5 * self.lambda
        } else if t >= self.t_right {
            0.0
        } else {
            -0.5 * (-t).exp() * (self.zeta(t) - self.alpha(t))
        }
    }

    /// int e^t psi dt over the whole line; 1/2 when zeta decays correctly.
    pub fn normalization_integral(&self) -> f64 {
        // analytic tail below t_left plus Simpson over the table range
        let tail = 0.5 * self.lambda * self.t_left.exp();
        let n = 8193;
        let h = (self.t_right - self.t_left) / (n - 1) as f64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let t = self.t_left + h * i as f64;
                -0.5 * (self.zeta(t) - self.alpha(t))
            })
            .collect();
        tail + quad::simpson(&vals, h)
    }
}
