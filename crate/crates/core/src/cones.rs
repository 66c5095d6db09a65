//! The catalog of Hamiltonian-stationary Lagrangian cones in C^2.
//!
//! Each cone is the cone over a closed Legendrian curve in S^3 indexed by a
//! coprime pair of positive integers (p, q) and a cover multiplicity k. In
//! the unitary normal form the link is
//!
//! `gamma(s) = (sqrt(q) e^{i sqrt(p/q) s}, i sqrt(p) e^{-i sqrt(q/p) s}) / sqrt(p+q)`
//!
//! on `0 <= s <= 2 pi k sqrt(pq)`, with Lagrangian angle `beta = 2 a s`,
//! `a = (p - q) / (2 sqrt(pq))`. All closed-form geometry (angle slope,
//! length, winding, mean curvature, second fundamental form, density) is
//! exposed here with analytic derivatives.

use crate::ambient::{self, V4};
use crate::curve::SampledCurve;
use crate::immersion::{GridAxis, SampledImmersion};
use crate::quad;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("(p, q) = ({0}, {1}) rejected: the cone family is parameterized by relatively prime positive integers")]
    NotCoprime(u32, u32),
    #[error("p, q, k must be positive")]
    NonPositive,
    #[error("need at least 16 samples, got {0}")]
    TooFewSamples(usize),
    #[error("radius must be positive (the cone vertex is singular), got {0}")]
    BadRadius(f64),
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A (possibly multiply covered) cone in the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConeSpec {
    pub p: u32,
    pub q: u32,
    pub k: u32,
}

impl ConeSpec {
    pub fn new(p: u32, q: u32, k: u32) -> Result<Self, ConeError> {
        if p == 0 || q == 0 || k == 0 {
            return Err(ConeError::NonPositive);
        }
        if gcd(p, q) != 1 {
            return Err(ConeError::NotCoprime(p, q));
        }
        Ok(Self { p, q, k })
    }

    /// Angle slope: beta(s) = 2 a s.
    pub fn angle_slope(&self) -> f64 {
        (self.p as f64 - self.q as f64) / (2.0 * self.pq_sqrt())
    }

    pub fn pq(&self) -> f64 {
        self.p as f64 * self.q as f64
    }

    pub fn pq_sqrt(&self) -> f64 {
        self.pq().sqrt()
    }

    /// Length of the (k-covered) link curve.
    pub fn length(&self) -> f64 {
        TAU * self.k as f64 * self.pq_sqrt()
    }

    pub fn maslov(&self) -> i64 {
        self.p as i64 - self.q as i64
    }

    /// Area density at the vertex.
    pub fn vertex_density(&self) -> f64 {
        self.k as f64 * self.pq_sqrt()
    }

    /// Flagged when the link is a candidate for being knotted; no knot
    /// detection is performed.
    pub fn knotted_candidate(&self) -> bool {
        self.p > 1 && self.q > 1
    }

    pub fn descriptor(&self) -> ConeDescriptor {
        ConeDescriptor {
            schema_version: 1,
            p: self.p,
            q: self.q,
            k: self.k,
            a: self.angle_slope(),
            length: self.length(),
            maslov: self.maslov(),
            density: self.vertex_density(),
            knotted_candidate: self.knotted_candidate(),
        }
    }

    /// Link position at arclength s (unit sphere).
    pub fn gamma(&self, s: f64) -> V4 {
        let (p, q) = (self.p as f64, self.q as f64);
        let scale = 1.0 / (p + q).sqrt();
        let z1 = Complex64::from_polar(q.sqrt() * scale, (p / q).sqrt() * s);
        let z2 = Complex64::i() * Complex64::from_polar(p.sqrt() * scale, -(q / p).sqrt() * s);
        V4::new(z1.re, z1.im, z2.re, z2.im)
    }

    pub fn gamma_dot(&self, s: f64) -> V4 {
        let (p, q) = (self.p as f64, self.q as f64);
        let wp = (p / q).sqrt();
        let wq = (q / p).sqrt();
        let scale = 1.0 / (p + q).sqrt();
        let z1 = Complex64::new(0.0, wp) * Complex64::from_polar(q.sqrt() * scale, wp * s);
        let z2 = Complex64::new(0.0, -wq)
            * Complex64::i()
            * Complex64::from_polar(p.sqrt() * scale, -wq * s);
        V4::new(z1.re, z1.im, z2.re, z2.im)
    }

    pub fn gamma_ddot(&self, s: f64) -> V4 {
        let (p, q) = (self.p as f64, self.q as f64);
        let wp2 = p / q;
        let wq2 = q / p;
        let g = self.gamma(s);
        let z1 = Complex64::new(g[0], g[1]) * (-wp2);
        let z2 = Complex64::new(g[2], g[3]) * (-wq2);
        V4::new(z1.re, z1.im, z2.re, z2.im)
    }

    /// Sample the link over its full (k-covered) length with analytic
    /// derivatives; `n_samples` counts distinct nodes plus the closure node.
    pub fn link(&self, n_samples: usize) -> Result<ConeLink, ConeError> {
        if n_samples < 16 {
            return Err(ConeError::TooFewSamples(n_samples));
        }
        let length = self.length();
        let n = n_samples + 1;
        let h = length / n_samples as f64;
        let s: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let points: Vec<V4> = s.iter().map(|&t| self.gamma(t)).collect();
        let derivs: Vec<V4> = s.iter().map(|&t| self.gamma_dot(t)).collect();
        let slope = 2.0 * self.angle_slope();
        let beta = s.iter().map(|&t| slope * t).collect();
        let curve = SampledCurve::new(s, points, Some(derivs), true)
            .expect("analytic link closes by construction");
        Ok(ConeLink { spec: *self, curve, beta })
    }

    /// Pointwise closed-form shape data of the cone at radius r, arclength s.
    pub fn shape_at(&self, r: f64, s: f64) -> Result<ConeShape, ConeError> {
        if r <= 0.0 {
            return Err(ConeError::BadRadius(r));
        }
        let g = self.gamma(s);
        let gdd = self.gamma_ddot(s);
        let h_vec = (gdd + g) / r;
        let jh = self.gamma_dot(s) * ((self.q as f64 - self.p as f64) / self.pq_sqrt() / r);
        Ok(ConeShape {
            mean_curvature: h_vec,
            j_mean_curvature: jh,
            b11: V4::zeros(),
            b12: V4::zeros(),
            b22: h_vec,
            area_density: r,
        })
    }

    /// Area of the cone inside the ball of the given radius:
    /// half link length times radius squared.
    pub fn ball_area(&self, radius: f64) -> Result<f64, ConeError> {
        if radius <= 0.0 {
            return Err(ConeError::BadRadius(radius));
        }
        Ok(0.5 * self.length() * radius * radius)
    }

    /// Sampled immersion of the annulus r in [r0, r1] with analytic tangents;
    /// the s direction covers one full (k-covered) period, no duplicate node.
    pub fn immersion(&self, r0: f64, r1: f64, nr: usize, ns: usize) -> SampledImmersion {
        let u_axis = GridAxis::new(r0, r1, nr);
        let v_axis = GridAxis::periodic(0.0, self.length(), ns);
        let spec = *self;
        SampledImmersion::from_chart_with_tangents(
            u_axis,
            v_axis,
            true,
            move |r, s| spec.gamma(s) * r,
            move |r, s| (spec.gamma(s), spec.gamma_dot(s) * r),
        )
    }

    /// Same annulus in logarithmic radial coordinate rho = ln r; useful when
    /// integrands live on many radial scales.
    pub fn log_immersion(&self, rho0: f64, rho1: f64, nrho: usize, ns: usize) -> SampledImmersion {
        let u_axis = GridAxis::new(rho0, rho1, nrho);
        let v_axis = GridAxis::periodic(0.0, self.length(), ns);
        let spec = *self;
        SampledImmersion::from_chart_with_tangents(
            u_axis,
            v_axis,
            true,
            move |rho, s| spec.gamma(s) * rho.exp(),
            move |rho, s| (spec.gamma(s) * rho.exp(), spec.gamma_dot(s) * rho.exp()),
        )
    }
}

/// Versioned serializable record for reports.
#[derive(Debug, Clone, Serialize)]
pub struct ConeDescriptor {
    pub schema_version: u32,
    pub p: u32,
    pub q: u32,
    pub k: u32,
    pub a: f64,
    pub length: f64,
    pub maslov: i64,
    pub density: f64,
    pub knotted_candidate: bool,
}

/// Point-wise closed-form shape quantities of a cone.
#[derive(Debug, Clone, Copy)]
pub struct ConeShape {
    pub mean_curvature: V4,
    pub j_mean_curvature: V4,
    pub b11: V4,
    pub b12: V4,
    pub b22: V4,
    pub area_density: f64,
}

/// The sampled link curve with its angle samples.
#[derive(Debug, Clone)]
pub struct ConeLink {
    pub spec: ConeSpec,
    pub curve: SampledCurve,
    /// beta(s) = 2 a s along the samples.
    pub beta: Vec<f64>,
}

/// Max-norm defects of every closed-form identity the link satisfies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeValidation {
    pub unit_norm: f64,
    pub unit_speed: f64,
    pub legendrian: f64,
    pub first_order_system: f64,
    pub angle_identity: f64,
    pub closure: f64,
    pub angle_slope: f64,
}

impl ConeValidation {
    pub fn worst(&self) -> f64 {
        self.unit_norm
            .max(self.unit_speed)
            .max(self.legendrian)
            .max(self.first_order_system)
            .max(self.angle_identity)
            .max(self.closure)
            .max(self.angle_slope)
    }
}

/// Validate a link against the defining identities. Defects are reported,
/// never thrown; callers decide which tolerances matter.
pub fn validate(link: &ConeLink) -> ConeValidation {
    let curve = &link.curve;
    let n = curve.len();
    let slope = 2.0 * link.spec.angle_slope();
    let mut unit_norm = 0.0_f64;
    let mut unit_speed = 0.0_f64;
    let mut legendrian = 0.0_f64;
    let mut system = 0.0_f64;
    let mut angle = 0.0_f64;
    for i in 0..n {
        let g = curve.points[i];
        let gd = curve.velocity(i);
        let s = curve.s[i];
        unit_norm = unit_norm.max((g.norm() - 1.0).abs());
        unit_speed = unit_speed.max((gd.norm() - 1.0).abs());
        legendrian = legendrian.max(ambient::dot(ambient::apply_j(g), gd).abs());
        // first-order system: gamma1' = -e^{2ias} conj(gamma2),
        //                     gamma2' =  e^{2ias} conj(gamma1)
        let zc = ambient::to_c2(g);
        let zd = ambient::to_c2(gd);
        let phase = Complex64::from_polar(1.0, slope * s);
        system = system
            .max((zd[0] + phase * zc[1].conj()).norm())
            .max((zd[1] - phase * zc[0].conj()).norm());
        // angle identity: det(gamma, gamma') = e^{i beta}
        let det = ambient::complex_det(zc, zd);
        angle = angle.max((det - phase).norm());
    }
    let closure = (curve.points[n - 1] - curve.points[0]).norm();
    // least-squares slope of the (analytic) unwrapped angle samples
    let slope_fit = fit_slope(&curve.s, &link.beta);
    ConeValidation {
        unit_norm,
        unit_speed,
        legendrian,
        first_order_system: system,
        angle_identity: angle,
        closure,
        angle_slope: (slope_fit - slope).abs(),
    }
}

fn fit_slope(s: &[f64], beta: &[f64]) -> f64 {
    let n = s.len() as f64;
    let sm = s.iter().sum::<f64>() / n;
    let bm = beta.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (si, bi) in s.iter().zip(beta) {
        num += (si - sm) * (bi - bm);
        den += (si - sm) * (si - sm);
    }
    num / den
}

/// Quadrature oracle for [`ConeSpec::ball_area`]: integrate the induced area
/// element r dr ds over [0, R] x [0, L].
pub fn ball_area_quadrature(spec: &ConeSpec, radius: f64, nr: usize, ns: usize) -> f64 {
    let hr = radius / (nr - 1) as f64;
    let rows: Vec<f64> = (0..nr)
        .map(|i| {
            let r = hr * i as f64;
            let hs = spec.length() / ns as f64;
            let vals: Vec<f64> = (0..ns).map(|_| r).collect();
            quad::trapezoid_periodic(&vals, hs)
        })
        .collect();
    quad::simpson(&rows, hr)
}

/// All coprime pairs with p + q <= bound.
pub fn coprime_pairs(bound: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for p in 1..bound {
        for q in 1..bound {
            if p + q <= bound && gcd(p, q) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::maslov_winding;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_non_coprime() {
        match ConeSpec::new(2, 4, 1) {
            Err(ConeError::NotCoprime(2, 4)) => {}
            other => panic!("expected coprimality rejection, got {other:?}"),
        }
    }

    #[test]
    fn derived_constants() {
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        assert_abs_diff_eq!(spec.angle_slope(), -1.0 / (2.0 * 2.0_f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(spec.length(), TAU * 2.0_f64.sqrt(), epsilon = 1e-12);
        assert_eq!(spec.maslov(), -1);

        let spec = ConeSpec::new(2, 3, 1).unwrap();
        assert_abs_diff_eq!(spec.length(), TAU * 6.0_f64.sqrt(), epsilon = 1e-12);
        assert!(spec.knotted_candidate());
        assert!(!ConeSpec::new(1, 5, 1).unwrap().knotted_candidate());
    }

    #[test]
    fn slope_solves_the_root_system() {
        for (p, q) in coprime_pairs(20) {
            let spec = ConeSpec::new(p, q, 1).unwrap();
            let a = spec.angle_slope();
            let root = (a * a + 1.0).sqrt();
            assert_abs_diff_eq!(a + root, (p as f64 / q as f64).sqrt(), epsilon = 1e-12);
            assert_abs_diff_eq!(a - root, -(q as f64 / p as f64).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn great_circle_and_validation_defects() {
        let link = ConeSpec::new(1, 1, 1).unwrap().link(256).unwrap();
        let v = validate(&link);
        assert!(v.worst() <= 1e-12, "defects {v:?}");
        // beta constant
        let beta = link.curve.lagrangian_angle(1e-9).unwrap();
        let w = maslov_winding(&beta);
        assert_eq!(w.index, 0);
    }

    #[test]
    fn injected_noise_is_detected() {
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        let mut link = spec.link(256).unwrap();
        // perturb one point by 1e-3 and drop analytic derivatives
        let n = link.curve.len();
        link.curve.points[n / 2] += V4::new(1e-3, 0.0, 0.0, 0.0);
        link.curve.derivatives = None;
        let v = validate(&link);
        assert!(v.legendrian > 1e-4 && v.legendrian < 1e-1, "defect {:.3e}", v.legendrian);
    }

    #[test]
    fn winding_matches_gap() {
        let link = ConeSpec::new(2, 3, 1).unwrap().link(8192).unwrap();
        let beta = link.curve.lagrangian_angle(1e-9).unwrap();
        let w = maslov_winding(&beta);
        assert_eq!(w.index, -1);
        assert!(w.rounding_gap < 1e-10);
    }

    #[test]
    fn closure_after_full_length() {
        let spec = ConeSpec::new(2, 3, 1).unwrap();
        assert_abs_diff_eq!(spec.length(), 15.390597961942367, epsilon = 1e-12);
        let gap = (spec.gamma(spec.length()) - spec.gamma(0.0)).norm();
        assert!(gap <= 1e-12);
    }

    #[test]
    fn mean_curvature_magnitude() {
        // (1, 1): great circle cone is a plane
        let plane = ConeSpec::new(1, 1, 1).unwrap();
        assert!(plane.shape_at(0.7, 1.3).unwrap().mean_curvature.norm() < 1e-14);

        // (1, 2) at r = 1: |H| = |q - p| / sqrt(pq)
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        let shape = spec.shape_at(1.0, 0.4).unwrap();
        assert_abs_diff_eq!(shape.mean_curvature.norm(), 1.0 / 2.0_f64.sqrt(), epsilon = 1e-12);

        // finite-difference check of gamma'' (fourth-order stencil)
        let s = 0.4;
        let h = 1e-3;
        let fd = (-spec.gamma(s + 2.0 * h) + spec.gamma(s + h) * 16.0 - spec.gamma(s) * 30.0
            + spec.gamma(s - h) * 16.0
            - spec.gamma(s - 2.0 * h))
            / (12.0 * h * h);
        assert!((fd - spec.gamma_ddot(s)).norm() < 1e-8);

        // scaling: r -> 2r halves |H| and |JH|
        let shape2 = spec.shape_at(2.0, 0.4).unwrap();
        assert_abs_diff_eq!(
            2.0 * shape2.mean_curvature.norm(),
            shape.mean_curvature.norm(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            2.0 * shape2.j_mean_curvature.norm(),
            shape.j_mean_curvature.norm(),
            epsilon = 1e-14
        );
        // JH is tangent to the link direction with the stated factor
        let jh = shape.j_mean_curvature;
        let expect = spec.gamma_dot(s) * ((2.0 - 1.0) / 2.0_f64.sqrt());
        assert!((jh - expect).norm() < 1e-13);
    }

    #[test]
    fn vertex_is_rejected() {
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        assert!(matches!(spec.shape_at(0.0, 0.0), Err(ConeError::BadRadius(_))));
        assert!(matches!(spec.ball_area(-1.0), Err(ConeError::BadRadius(_))));
    }

    #[test]
    fn ball_area_closed_form_and_quadrature() {
        let plane = ConeSpec::new(1, 1, 1).unwrap();
        assert_abs_diff_eq!(plane.ball_area(1.0).unwrap(), PI, epsilon = 1e-12);

        let spec = ConeSpec::new(2, 3, 1).unwrap();
        let closed = spec.ball_area(1.0).unwrap();
        assert_abs_diff_eq!(closed, PI * 6.0_f64.sqrt(), epsilon = 1e-12);
        let osc = ball_area_quadrature(&spec, 1.0, 201, 64);
        assert_abs_diff_eq!(closed, osc, epsilon = 1e-6 * closed);

        let cover = ConeSpec::new(1, 2, 2).unwrap();
        assert_abs_diff_eq!(cover.ball_area(1.0).unwrap(), TAU * 2.0_f64.sqrt(), epsilon = 1e-12);
        let osc2 = ball_area_quadrature(&cover, 1.0, 201, 64);
        assert_abs_diff_eq!(cover.ball_area(1.0).unwrap(), osc2, epsilon = 1e-6 * osc2);
    }

    #[test]
    fn period_of_link_boundary_circle_vanishes() {
        // the position vector is tangent to a cone, so the primitive
        // restricts to zero along the r = 1 link
        let link = ConeSpec::new(1, 2, 1).unwrap().link(4096).unwrap();
        let phi = link.curve.lift();
        let max_phi = phi.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
        assert!(max_phi <= 1e-10, "max |phi| = {max_phi:.3e}");
        let (period, exact) = link.curve.period(1e-10).unwrap();
        assert!(period.abs() <= 1e-10);
        assert!(exact);
    }
}
