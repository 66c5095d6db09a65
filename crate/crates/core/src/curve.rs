//! Sampled curves in R^4: Legendrian lifts, periods, Lagrangian angle, and
//! Maslov winding.

use crate::ambient::{self, V4};
use crate::quad;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("period is only defined for closed curves")]
    NotClosed,
    #[error("closed curve does not close: endpoint gap {0:.3e}")]
    ClosureDefect(f64),
    #[error("columns (gamma, gamma') are not unitary within tolerance: defect {0:.3e}")]
    NonUnitaryFrame(f64),
    #[error("angle branch jump {jump:.3} rad > pi/2 between samples {at} and {}; refine the sampling", at + 1)]
    BranchTracking { at: usize, jump: f64 },
}

/// A curve sampled on a uniform arclength grid.
///
/// Closed curves store the duplicated endpoint (`points[n-1] == points[0]`
/// within tolerance). When `derivatives` is present it is used everywhere a
/// velocity is needed; otherwise velocities come from fourth-order central
/// differences (periodic for closed curves).
#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub s: Vec<f64>,
    pub points: Vec<V4>,
    pub derivatives: Option<Vec<V4>>,
    pub closed: bool,
}

pub const CLOSURE_TOL: f64 = 1e-9;

impl SampledCurve {
    pub fn new(
        s: Vec<f64>,
        points: Vec<V4>,
        derivatives: Option<Vec<V4>>,
        closed: bool,
    ) -> Result<Self, CurveError> {
        if points.len() < 8 {
            return Err(CurveError::TooFewSamples { min: 8, got: points.len() });
        }
        if closed {
            let gap = (points[points.len() - 1] - points[0]).norm();
            if gap > CLOSURE_TOL {
                return Err(CurveError::ClosureDefect(gap));
            }
        }
        Ok(Self { s, points, derivatives, closed })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.s[1] - self.s[0]
    }

    /// Velocity at sample `i`: analytic if available, else finite differences.
    pub fn velocity(&self, i: usize) -> V4 {
        if let Some(d) = &self.derivatives {
            return d[i];
        }
        let n = self.len();
        let h = self.step();
        let at = |j: isize| -> V4 {
            if self.closed {
                let m = (n - 1) as isize;
                self.points[j.rem_euclid(m) as usize]
            } else {
                self.points[j.clamp(0, (n - 1) as isize) as usize]
            }
        };
        let i = i as isize;
        if self.closed || (i >= 2 && i <= (n as isize) - 3) {
            (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h)
        } else if i < 2 {
            // one-sided, second order
            (-3.0 * at(i) + 4.0 * at(i + 1) - at(i + 2)) / (2.0 * h)
        } else {
            (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h)
        }
    }

    /// Integrates the pullback of the primitive `eta` along the curve.
    ///
    /// Returns the lift samples `phi` (with `phi[0] = 0`); for closed curves
    /// the last entry is the period.
    pub fn lift(&self) -> Vec<f64> {
        let integrand: Vec<f64> = (0..self.len())
            .map(|i| ambient::eta(self.points[i], self.velocity(i)))
            .collect();
        quad::cumulative_integral(&integrand, self.step(), self.closed)
    }

    /// Period of a closed curve: the total change of the lift over one loop.
    /// Also reports whether the curve is exact (period below `tol`).
    pub fn period(&self, tol: f64) -> Result<(f64, bool), CurveError> {
        if !self.closed {
            return Err(CurveError::NotClosed);
        }
        let phi = self.lift();
        let period = phi[phi.len() - 1] - phi[0];
        Ok((period, period.abs() <= tol))
    }

    /// Continuous branch of the Lagrangian angle along the curve.
    ///
    /// At each sample the 2x2 complex matrix with columns `(gamma, gamma')`
    /// must be unitary within `frame_tol`; `beta` is the argument of its
    /// determinant, continued across branch cuts by nearest-branch tracking.
    pub fn lagrangian_angle(&self, frame_tol: f64) -> Result<Vec<f64>, CurveError> {
        let mut beta = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let g = ambient::to_c2(self.points[i]);
            let gd = ambient::to_c2(self.velocity(i));
            let defect = ambient::unitary_defect(g, gd);
            if defect > frame_tol {
                return Err(CurveError::NonUnitaryFrame(defect));
            }
            let det = ambient::complex_det(g, gd);
            let raw = det.im.atan2(det.re);
            if let Some(&prev) = beta.last() {
                let adjusted = continue_branch(prev, raw);
                let jump = (adjusted - prev).abs();
                if jump > std::f64::consts::FRAC_PI_2 {
                    return Err(CurveError::BranchTracking { at: i - 1, jump });
                }
                beta.push(adjusted);
            } else {
                beta.push(raw);
            }
        }
        Ok(beta)
    }
}

/// Shift `raw` by the multiple of 2*pi closest to `prev`.
pub fn continue_branch(prev: f64, raw: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    raw + tau * ((prev - raw) / tau).round()
}

#[derive(Debug, Clone, Copy)]
pub struct Winding {
    pub index: i64,
    /// Distance of the raw winding from the reported integer.
    pub rounding_gap: f64,
}

/// Winding of a continuous angle branch over one loop.
pub fn maslov_winding(beta: &[f64]) -> Winding {
    let raw = (beta[beta.len() - 1] - beta[0]) / std::f64::consts::TAU;
    let index = raw.round() as i64;
    Winding { index, rounding_gap: (raw - index as f64).abs() }
}
