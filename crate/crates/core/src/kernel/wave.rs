//! Riemann-function solution of the damped wave equation
//! `eta_tt - eta_thth - 2 eta_t = 0` with data `eta(t, 0) = 0`,
//! `eta_th(t, 0) = zeta(t)` (theta is the time variable):
//!
//! `eta(t, theta) = (1/2) int_{-theta}^{theta}
//!     J_0(sqrt(theta^2 - mu^2)) e^{-mu} zeta(mu + t) dmu`.
//!
//! The square-root kernel is flattened by mu = theta sin(u), after which the
//! integrand is smooth and adaptive Gauss-Kronrod converges fast.

use super::bessel;
use super::cutoff::Cutoff;
use crate::immersion::GridAxis;
use crate::quad;
use ndarray::Array2;

const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-11;

/// Pointwise wave solution; odd in theta, |theta| <= pi/2.
pub fn eta_at(cutoff: &Cutoff, t: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let th = theta.abs();
    let val = quad::adaptive_gk(
        &|u: f64| {
            let (su, cu) = u.sin_cos();
            let mu = th * su;
            let w = th * cu;
            bessel::j0(w).expect("|w| <= pi/2") * (-mu).exp() * cutoff.zeta(mu + t) * th * cu
        },
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        ABS_TOL,
        REL_TOL,
    )
    .expect("smooth integrand");
    0.5 * val * theta.signum()
}

/// eta sampled on a (t, theta) grid, built in parallel over t-rows.
#[derive(Debug, Clone)]
pub struct WaveTable {
    pub t_axis: GridAxis,
    pub th_axis: GridAxis,
    pub eta: Array2<f64>,
}

impl WaveTable {
    pub fn build(cutoff: &Cutoff, t_axis: GridAxis, th_axis: GridAxis) -> Self {
        let rows = crate::exec::map_indexed(t_axis.len, |i| {
            let t = t_axis.at(i);
            (0..th_axis.len).map(|j| eta_at(cutoff, t, th_axis.at(j))).collect::<Vec<f64>>()
        });
        Self::from_rows(t_axis, th_axis, rows)
    }

    /// Sequential construction; bit-identical to [`WaveTable::build`].
    pub fn build_seq(cutoff: &Cutoff, t_axis: GridAxis, th_axis: GridAxis) -> Self {
        let rows = crate::exec::map_indexed_seq(t_axis.len, |i| {
            let t = t_axis.at(i);
            (0..th_axis.len).map(|j| eta_at(cutoff, t, th_axis.at(j))).collect::<Vec<f64>>()
        });
        Self::from_rows(t_axis, th_axis, rows)
    }

    fn from_rows(t_axis: GridAxis, th_axis: GridAxis, rows: Vec<Vec<f64>>) -> Self {
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let eta = Array2::from_shape_vec((t_axis.len, th_axis.len), flat).unwrap();
        Self { t_axis, th_axis, eta }
    }

    /// Max of |eta_tt - eta_thth - 2 eta_t| over interior nodes, relative to
    /// max |eta|.
    pub fn residual_relative(&self) -> f64 {
        let (n, m) = self.eta.dim();
        let ht = self.t_axis.step;
        let hh = self.th_axis.step;
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 1..n - 1 {
            for j in 1..m - 1 {
                let e = &self.eta;
                let ett = (e[(i + 1, j)] - 2.0 * e[(i, j)] + e[(i - 1, j)]) / (ht * ht);
                let ehh = (e[(i, j + 1)] - 2.0 * e[(i, j)] + e[(i, j - 1)]) / (hh * hh);
                let et = (e[(i + 1, j)] - e[(i - 1, j)]) / (2.0 * ht);
                worst = worst.max((ett - ehh - 2.0 * et).abs());
                scale = scale.max(e[(i, j)].abs());
            }
        }
        worst / scale
    }
}
