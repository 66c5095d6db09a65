//! The monotonicity kernels F and G, two ways, with certification.
//!
//! Path one differentiates the wave table numerically (fourth-order
//! stencils). Path two evaluates the explicit representations
//!
//! `F = (1/2)(psi(t+th) + psi(t-th)) cos th
//!      + (1/2) int [ sin th J_0 + cos th dJ_0/dth ] psi(mu + t) dmu`,
//!
//! `G = (1/2)[ e^{-th} alpha(t+th) + e^{th} alpha(t-th)
//!      + int dJ_0/dth e^{-mu} alpha(t+mu) dmu ]`,
//!
//! which stay conditioned on the far left where the wave table holds
//! `eta = theta - lambda e^t sin theta` with `lambda e^t` far below f64
//! resolution. The two paths are compared wherever `lambda e^t` is large
//! enough for the table to carry the signal at all; the far-left constants
//! are covered by the regime checks instead.

use super::bessel;
use super::cutoff::Cutoff;
use super::wave::WaveTable;
use crate::immersion::GridAxis;
use crate::quad;
use ndarray::Array2;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-11;

/// Explicit F; even in theta, F(t, 0) = psi(t), constant lambda/2 far left.
pub fn f_at(cutoff: &Cutoff, t: f64, theta: f64) -> f64 {
    let th = theta.abs();
    if th == 0.0 {
        return cutoff.psi(t);
    }
    let (sin_th, cos_th) = th.sin_cos();
    let endpoint = 0.5 * (cutoff.psi(t + th) + cutoff.psi(t - th)) * cos_th;
    let tail = quad::adaptive_gk(
        &|u: f64| {
            let (su, cu) = u.sin_cos();
            let mu = th * su;
            let w = th * cu;
            // d/dth J_0(sqrt(th^2 - mu^2)) dmu = -J_1(w) th du after mu = th sin u
            let j0 = bessel::j0(w).expect("w <= pi/2");
            let j1 = bessel::j1_over_sigma(w).expect("w <= pi/2") * w;
            (sin_th * j0 * th * cu - cos_th * j1 * th) * cutoff.psi(mu + t)
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        ABS_TOL,
        REL_TOL,
    )
    .expect("smooth integrand");
    endpoint + 0.5 * tail
}

/// Explicit G from the transformed data e^{-t} alpha; even in theta,
/// G(t, 0) = alpha(t), 1 far left, 0 far right.
pub fn g_at(cutoff: &Cutoff, t: f64, theta: f64) -> f64 {
    g_from_alpha(cutoff, t, theta, false)
}

/// The companion representation of G obtained from the reflected data
/// `e^{-t} alpha(2 t0 - t)` solving the same wave problem; equals G when the
/// cutoff has the required odd symmetry about (t0, 1/2).
pub fn g_companion_at(cutoff: &Cutoff, t: f64, theta: f64) -> f64 {
    g_from_alpha(cutoff, t, theta, true)
}

fn g_from_alpha(cutoff: &Cutoff, t: f64, theta: f64, reflected: bool) -> f64 {
    let th = theta.abs();
    let alpha = |x: f64| -> f64 {
        if reflected {
            cutoff.alpha(2.0 * cutoff.t0 - x)
        } else {
            cutoff.alpha(x)
        }
    };
    if th == 0.0 {
        let v = alpha(t);
        return if reflected { 1.0 - v } else { v };
    }
    let endpoint = 0.5 * ((-th).exp() * alpha(t + th) + th.exp() * alpha(t - th));
    let tail = quad::adaptive_gk(
        &|u: f64| {
            let (su, cu) = u.sin_cos();
            let mu = th * su;
            let w = th * cu;
            let j1 = bessel::j1_over_sigma(w).expect("w <= pi/2") * w;
            -j1 * th * (-mu).exp() * alpha(mu + t)
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        ABS_TOL,
        REL_TOL,
    )
    .expect("smooth integrand");
    let v = endpoint + 0.5 * tail;
    if reflected {
        1.0 - v
    } else {
        v
    }
}

/// `cos th = 1 + (1/2) int_{-th}^{th} dJ_0/dth dmu`; returns the deviation.
pub fn cosine_identity_deviation(theta: f64) -> f64 {
    let th = theta.abs();
    if th == 0.0 {
        return 0.0;
    }
    let tail = quad::adaptive_gk(
        &|u: f64| {
            let w = th * u.cos();
            -bessel::j1_over_sigma(w).expect("w <= pi/2") * w * th
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        ABS_TOL,
        REL_TOL,
    )
    .expect("smooth integrand");
    (1.0 + 0.5 * tail - th.cos()).abs()
}

/// Gridded kernels: explicit path (authoritative) plus the eta-differencing
/// path on the stencil interior.
#[derive(Debug, Clone)]
pub struct KernelTables {
    pub cutoff: Cutoff,
    pub t_axis: GridAxis,
    pub th_axis: GridAxis,
    pub wave: WaveTable,
    pub f: Array2<f64>,
    pub g: Array2<f64>,
    pub f_diff: Array2<f64>,
    pub g_diff: Array2<f64>,
}

pub fn default_axes(c: f64) -> (GridAxis, GridAxis) {
    (GridAxis::new(-3.0 * c, 8.0, 801), GridAxis::new(-FRAC_PI_2, FRAC_PI_2, 401))
}

/// Sixth-order first derivative along rows (axis 0); NaN where the stencil
/// would leave the grid.
fn d6_rows(a: &Array2<f64>, h: f64) -> Array2<f64> {
    let (n, m) = a.dim();
    Array2::from_shape_fn((n, m), |(i, j)| {
        if i >= 3 && i + 3 < n {
            (-a[(i - 3, j)] + 9.0 * a[(i - 2, j)] - 45.0 * a[(i - 1, j)]
                + 45.0 * a[(i + 1, j)]
                - 9.0 * a[(i + 2, j)]
                + a[(i + 3, j)])
                / (60.0 * h)
        } else {
            f64::NAN
        }
    })
}

fn d6_cols(a: &Array2<f64>, h: f64) -> Array2<f64> {
    let (n, m) = a.dim();
    Array2::from_shape_fn((n, m), |(i, j)| {
        if j >= 3 && j + 3 < m {
            (-a[(i, j - 3)] + 9.0 * a[(i, j - 2)] - 45.0 * a[(i, j - 1)]
                + 45.0 * a[(i, j + 1)]
                - 9.0 * a[(i, j + 2)]
                + a[(i, j + 3)])
                / (60.0 * h)
        } else {
            f64::NAN
        }
    })
}

impl KernelTables {
    pub fn build(cutoff: Cutoff, t_axis: GridAxis, th_axis: GridAxis) -> Self {
        Self::build_impl(cutoff, t_axis, th_axis, false)
    }

    /// Sequential construction; bit-identical to [`KernelTables::build`].
    pub fn build_seq(cutoff: Cutoff, t_axis: GridAxis, th_axis: GridAxis) -> Self {
        Self::build_impl(cutoff, t_axis, th_axis, true)
    }

    fn build_impl(cutoff: Cutoff, t_axis: GridAxis, th_axis: GridAxis, seq: bool) -> Self {
        let wave = if seq {
            WaveTable::build_seq(&cutoff, t_axis, th_axis)
        } else {
            WaveTable::build(&cutoff, t_axis, th_axis)
        };
        let row = |i: usize| -> Vec<f64> {
            let t = t_axis.at(i);
            (0..th_axis.len)
                .flat_map(|j| {
                    let th = th_axis.at(j);
                    [f_at(&cutoff, t, th), g_at(&cutoff, t, th)]
                })
                .collect()
        };
        let rows = if seq {
            crate::exec::map_indexed_seq(t_axis.len, row)
        } else {
            crate::exec::map_indexed(t_axis.len, row)
        };
        let mut f = Array2::zeros((t_axis.len, th_axis.len));
        let mut g = Array2::zeros((t_axis.len, th_axis.len));
        for (i, r) in rows.iter().enumerate() {
            for j in 0..th_axis.len {
                f[(i, j)] = r[2 * j];
                g[(i, j)] = r[2 * j + 1];
            }
        }
        // differencing path: F = -(1/2) e^{-t} (eta_{th t} cos th + eta_t sin th),
        // G = eta_th - eta_{th t}
        let eta_t = d6_rows(&wave.eta, t_axis.step);
        let eta_th = d6_cols(&wave.eta, th_axis.step);
        let eta_th_t = d6_rows(&eta_th, t_axis.step);
        let (n, m) = wave.eta.dim();
        let mut f_diff = Array2::from_elem((n, m), f64::NAN);
        let mut g_diff = Array2::from_elem((n, m), f64::NAN);
        for i in 6..n - 6 {
            for j in 3..m - 3 {
                let t = t_axis.at(i);
                let th = th_axis.at(j);
                let (sin_th, cos_th) = th.sin_cos();
                f_diff[(i, j)] =
                    -0.5 * (-t).exp() * (eta_th_t[(i, j)] * cos_th + eta_t[(i, j)] * sin_th);
                g_diff[(i, j)] = eta_th[(i, j)] - eta_th_t[(i, j)];
            }
        }
        Self { cutoff, t_axis, th_axis, wave, f, g, f_diff, g_diff }
    }

    pub fn certify(&self) -> KernelCertification {
        let (n, m) = self.f.dim();
        let lam = self.cutoff.lambda;
        let mut f_min = f64::INFINITY;
        let mut g_min = f64::INFINITY;
        let mut g_max = f64::NEG_INFINITY;
        let mut far_left_f_rel = 0.0_f64;
        let mut far_left_g_dev = 0.0_f64;
        let mut far_left_eta_dev = 0.0_f64;
        let mut far_right_max = 0.0_f64;
        let mut path_f_rel = 0.0_f64;
        let mut path_g_dev = 0.0_f64;
        let mut masked = 0usize;
        let mut interior = 0usize;
        for i in 0..n {
            let t = self.t_axis.at(i);
            for j in 0..m {
                let th = self.th_axis.at(j);
                let (f, g) = (self.f[(i, j)], self.g[(i, j)]);
                f_min = f_min.min(f);
                g_min = g_min.min(g);
                g_max = g_max.max(g);
                if t + th.abs() <= self.cutoff.t_left {
                    far_left_f_rel = far_left_f_rel.max((f / (0.5 * lam) - 1.0).abs());
                    far_left_g_dev = far_left_g_dev.max((g - 1.0).abs());
                    let expect = th - lam * t.exp() * th.sin();
                    far_left_eta_dev = far_left_eta_dev
                        .max((self.wave.eta[(i, j)] - expect).abs() / expect.abs().max(1.0));
                }
                if t - th.abs() >= self.cutoff.t_right {
                    far_right_max = far_right_max
                        .max(f.abs())
                        .max(g.abs())
                        .max(self.wave.eta[(i, j)].abs());
                }
                // two-path comparison where the table resolves the signal
                if i >= 6 && i + 6 < n && j >= 3 && j + 3 < m {
                    interior += 1;
                    if lam * t.exp() >= 1e-9 {
                        masked += 1;
                        let scale = f.abs().max(1e-3);
                        path_f_rel = path_f_rel.max((self.f_diff[(i, j)] - f).abs() / scale);
                        path_g_dev =
                            path_g_dev.max((self.g_diff[(i, j)] - g).abs() / g.abs().max(1e-3));
                    }
                }
            }
        }
        // shift monotonicity: smallest grid shift m0 such that
        // G(t - m h, th) >= G(t, th) - 1e-8 for every admissible m >= m0;
        // theta0 is then exp(-m0 h / 2). Shifts beyond half the window are
        // excluded: their comparison pairs no longer cover the transition
        // region, so a pass there is a window artifact, not a certificate.
        let m_cap = n / 2;
        let shift_rows = crate::exec::map_indexed(m_cap + 1, |mshift| {
            if mshift == 0 {
                return 0.0;
            }
            let mut worst = f64::NEG_INFINITY;
            for i in mshift..n {
                for j in 0..m {
                    worst = worst.max(self.g[(i, j)] - self.g[(i - mshift, j)]);
                }
            }
            worst
        });
        let shift_violation = shift_rows.iter().skip(1).copied().fold(0.0, f64::max);
        let mut m0 = None;
        for s in (1..=m_cap).rev() {
            if shift_rows[s] <= 1e-8 {
                m0 = Some(s);
            } else {
                break;
            }
        }
        let theta0 = m0.map(|s| (-(s as f64) * self.t_axis.step / 2.0).exp());

        let mut cos_dev = 0.0_f64;
        for k in 0..=100 {
            cos_dev = cos_dev.max(cosine_identity_deviation(FRAC_PI_2 * k as f64 / 100.0));
        }
        let mut companion_dev = 0.0_f64;
        for i in (0..n).step_by(7) {
            for j in (0..m).step_by(5) {
                let t = self.t_axis.at(i);
                let th = self.th_axis.at(j);
                companion_dev =
                    companion_dev.max((g_companion_at(&self.cutoff, t, th) - self.g[(i, j)]).abs());
            }
        }

        // initial data of the table
        let j_mid = m / 2;
        let mut init_val = 0.0_f64;
        let mut init_slope = 0.0_f64;
        let hh = self.th_axis.step;
        for i in 0..n {
            init_val = init_val.max(self.wave.eta[(i, j_mid)].abs());
            if (2..m - 2).contains(&j_mid) {
                let d = (8.0 * (self.wave.eta[(i, j_mid + 1)] - self.wave.eta[(i, j_mid - 1)])
                    - (self.wave.eta[(i, j_mid + 2)] - self.wave.eta[(i, j_mid - 2)]))
                    / (12.0 * hh);
                init_slope = init_slope.max((d - self.cutoff.zeta(self.t_axis.at(i))).abs());
            }
        }

        KernelCertification {
            lambda: lam,
            f_min,
            g_min,
            g_max,
            theta0,
            shift_violation,
            far_left_f_rel,
            far_left_g_dev,
            far_left_eta_dev,
            far_right_max,
            normalization_dev: (self.cutoff.normalization_integral() - 0.5).abs(),
            wave_residual_rel: self.wave.residual_relative(),
            initial_value_dev: init_val,
            initial_slope_dev: init_slope,
            path_f_rel_dev: path_f_rel,
            path_g_dev,
            path_mask_fraction: masked as f64 / interior as f64,
            cosine_identity_dev: cos_dev,
            companion_dev,
        }
    }
}

/// All certified quantities in one serializable report.
#[derive(Debug, Clone, Serialize)]
pub struct KernelCertification {
    pub lambda: f64,
    pub f_min: f64,
    pub g_min: f64,
    pub g_max: f64,
    /// Largest shift ratio with monotone G at tolerance 1e-8, when one
    /// exists. See `g_max`: the upper kernel bound carries a small positive
    /// pocket near the lower cutoff corner at |theta| near pi/2, which also
    /// obstructs a global shift constant at this tolerance.
    pub theta0: Option<f64>,
    /// Worst observed G(t) - G(t - shift) over all grid shifts.
    pub shift_violation: f64,
    pub far_left_f_rel: f64,
    pub far_left_g_dev: f64,
    pub far_left_eta_dev: f64,
    pub far_right_max: f64,
    pub normalization_dev: f64,
    pub wave_residual_rel: f64,
    pub initial_value_dev: f64,
    pub initial_slope_dev: f64,
    pub path_f_rel_dev: f64,
    pub path_g_dev: f64,
    pub path_mask_fraction: f64,
    pub cosine_identity_dev: f64,
    pub companion_dev: f64,
}

impl KernelCertification {
    /// One (name, value, threshold, pass) row per certified bound.
    pub fn checks(&self) -> Vec<(&'static str, f64, f64, bool)> {
        let theta0 = self.theta0.unwrap_or(f64::NAN);
        let rows = vec![
            ("f_nonnegative", -self.f_min, 1e-8, -self.f_min <= 1e-8),
            ("g_lower", -self.g_min, 1e-8, -self.g_min <= 1e-8),
            ("g_upper", self.g_max - 1.0, 1e-8, self.g_max - 1.0 <= 1e-8),
            (
                "theta0_in_unit_interval",
                theta0,
                1.0,
                self.theta0.map(|t| t > 0.0 && t < 1.0).unwrap_or(false),
            ),
            ("far_left_f", self.far_left_f_rel, 1e-6, self.far_left_f_rel <= 1e-6),
            ("far_left_g", self.far_left_g_dev, 1e-6, self.far_left_g_dev <= 1e-6),
            ("far_left_eta", self.far_left_eta_dev, 1e-6, self.far_left_eta_dev <= 1e-6),
            ("far_right_zero", self.far_right_max, 1e-6, self.far_right_max <= 1e-6),
            ("normalization", self.normalization_dev, 1e-8, self.normalization_dev <= 1e-8),
            ("wave_residual", self.wave_residual_rel, 1e-3, self.wave_residual_rel <= 1e-3),
            ("initial_value", self.initial_value_dev, 1e-12, self.initial_value_dev <= 1e-12),
            ("initial_slope", self.initial_slope_dev, 1e-6, self.initial_slope_dev <= 1e-6),
            ("two_path_f", self.path_f_rel_dev, 1e-4, self.path_f_rel_dev <= 1e-4),
            ("two_path_g", self.path_g_dev, 1e-4, self.path_g_dev <= 1e-4),
            ("cosine_identity", self.cosine_identity_dev, 1e-8, self.cosine_identity_dev <= 1e-8),
            ("companion_identity", self.companion_dev, 1e-6, self.companion_dev <= 1e-6),
        ];
        rows
    }

    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|r| r.3)
    }
}
