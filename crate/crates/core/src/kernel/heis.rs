//! Contact geometry of the lifted picture: Heisenberg-type coordinates,
//! contact vector fields on R^5, Legendrian lifts of sampled Lagrangian
//! surfaces, the tangential identities they satisfy, and density ratios.

use super::cutoff::Cutoff;
use super::fg;
use crate::ambient::{self, V4};
use crate::immersion::{d_u, d_v, SampledImmersion, ShapeData};
use crate::quad;
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeisError {
    #[error("surface touches s = 0 at node ({0}, {1})")]
    TouchesOrigin(usize, usize),
    #[error("lift is not Legendrian within tolerance: max defect {0:.3e}")]
    NotLegendrian(f64),
    #[error("surface extends past the kernel support: need t in [{lo:.2}, {hi:.2}], immersion covers [{got_lo:.2}, {got_hi:.2}]")]
    SupportNotCovered { lo: f64, hi: f64, got_lo: f64, got_hi: f64 },
    #[error(transparent)]
    Geometry(#[from] crate::immersion::GeometryError),
}

/// Coordinates derived from (x, y, phi): s = |z|^2/2, s~ = sqrt(s^2 + phi^2),
/// t = ln s~, theta = atan(phi/s), r0 = sqrt(2) (s^2 + phi^2)^{1/4}.
#[derive(Debug, Clone, Copy)]
pub struct HeisPoint {
    pub s: f64,
    pub s_tilde: f64,
    pub t: f64,
    pub theta: f64,
    pub r0: f64,
}

pub fn heis_point(point: V4, phi: f64) -> HeisPoint {
    let s = 0.5 * point.norm_squared();
    let s_tilde = s.hypot(phi);
    HeisPoint {
        s,
        s_tilde,
        t: s_tilde.ln(),
        theta: (phi / s).atan(),
        r0: std::f64::consts::SQRT_2 * s_tilde.sqrt(),
    }
}

/// A Hamiltonian on R^5 with its first derivatives: value, gradient in the
/// (x, y) block, and the phi-derivative.
pub type Hamiltonian<'a> = &'a (dyn Fn(V4, f64) -> (f64, V4, f64) + Sync);

/// Contact vector field of h: the (x, y) block and the phi component.
///
/// `X_h = J grad_{xy} h - h_phi * position  (+)  (-2h + <pos, grad_{xy} h>) d/dphi`.
pub fn contact_field(h: Hamiltonian, point: V4, phi: f64) -> (V4, f64) {
    let (value, grad, dphi) = h(point, phi);
    let xy = ambient::apply_j(grad) - point * dphi;
    let phi_dot = -2.0 * value + point.dot(&grad);
    (xy, phi_dot)
}

/// Contact form alpha = dphi - eta at (point, phi) on the tangent (w, w_phi).
pub fn contact_form(point: V4, w: V4, w_phi: f64) -> f64 {
    w_phi - ambient::eta(point, w)
}

/// The flow of X_h scales alpha pointwise: along the flow,
/// `(flow_T^* alpha)(v) = exp(-2 int h_phi dt) alpha(v)`.
/// Returns (transported, predicted) for one test covector.
pub fn lie_scaling_check(
    h: Hamiltonian,
    point: V4,
    phi: f64,
    v: V4,
    v_phi: f64,
    horizon: f64,
) -> (f64, f64) {
    let steps = 400usize;
    let dt = horizon / steps as f64;
    let rhs = |p: V4, f: f64| contact_field(h, p, f);
    let flow = |mut p: V4, mut f: f64| -> (V4, f64) {
        for _ in 0..steps {
            let (k1, k1p) = rhs(p, f);
            let (k2, k2p) = rhs(p + k1 * (0.5 * dt), f + 0.5 * dt * k1p);
            let (k3, k3p) = rhs(p + k2 * (0.5 * dt), f + 0.5 * dt * k2p);
            let (k4, k4p) = rhs(p + k3 * dt, f + dt * k3p);
            p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            f += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        (p, f)
    };
    // accumulate the scaling exponent along the trajectory (RK4 on the same grid)
    let mut expo = 0.0;
    {
        let mut p = point;
        let mut f = phi;
        for _ in 0..steps {
            let hp = |q: V4, g: f64| h(q, g).2;
            let (k1, k1p) = rhs(p, f);
            let (k2, k2p) = rhs(p + k1 * (0.5 * dt), f + 0.5 * dt * k1p);
            let (k3, k3p) = rhs(p + k2 * (0.5 * dt), f + 0.5 * dt * k2p);
            let (k4, k4p) = rhs(p + k3 * dt, f + dt * k3p);
            let s1 = hp(p, f);
            let s2 = hp(p + k1 * (0.5 * dt), f + 0.5 * dt * k1p);
            let s3 = hp(p + k2 * (0.5 * dt), f + 0.5 * dt * k2p);
            let s4 = hp(p + k3 * dt, f + dt * k3p);
            expo += dt / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
            p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            f += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
    }
    // transported covector value via a finite-difference Jacobian of the flow
    let eps = 1e-6;
    let (pp, fp) = flow(point + v * eps, phi + eps * v_phi);
    let (pm, fm) = flow(point - v * eps, phi - eps * v_phi);
    let dv = (pp - pm) / (2.0 * eps);
    let dv_phi = (fp - fm) / (2.0 * eps);
    let (p_end, _) = flow(point, phi);
    let transported = contact_form(p_end, dv, dv_phi);
    let predicted = (-2.0 * expo).exp() * contact_form(point, v, v_phi);
    (transported, predicted)
}

/// A sampled immersion together with its Legendrian lift values.
#[derive(Debug, Clone)]
pub struct LiftedImmersion {
    pub imm: SampledImmersion,
    pub phi: Array2<f64>,
}

impl LiftedImmersion {
    pub fn new(imm: SampledImmersion, phi: Array2<f64>) -> Self {
        Self { imm, phi }
    }

    /// A cone through the origin lifts with phi identically zero.
    pub fn conical(imm: SampledImmersion) -> Self {
        let phi = Array2::zeros(imm.dims());
        Self { imm, phi }
    }

    /// Max defect of d phi = pullback of eta over the grid.
    pub fn legendrian_defect(&self) -> f64 {
        let (n, m) = self.imm.dims();
        let (tu, tv) = self.imm.tangent_fields();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..m {
                let p = self.imm.points[(i, j)];
                let du = d_u(&self.phi, i, j, self.imm.u_axis.step);
                let dv = d_v(&self.phi, i, j, self.imm.v_axis.step, self.imm.v_periodic);
                worst = worst
                    .max((du - ambient::eta(p, tu[(i, j)])).abs())
                    .max((dv - ambient::eta(p, tv[(i, j)])).abs());
            }
        }
        worst
    }

    fn heis_fields(&self) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>), HeisError> {
        let (n, m) = self.imm.dims();
        let mut t = Array2::zeros((n, m));
        let mut theta = Array2::zeros((n, m));
        let mut s_tilde = Array2::zeros((n, m));
        for i in 0..n {
            for j in 0..m {
                let hp = heis_point(self.imm.points[(i, j)], self.phi[(i, j)]);
                if hp.s == 0.0 {
                    return Err(HeisError::TouchesOrigin(i, j));
                }
                t[(i, j)] = hp.t;
                theta[(i, j)] = hp.theta;
                s_tilde[(i, j)] = hp.s_tilde;
            }
        }
        Ok((t, theta, s_tilde))
    }
}

/// Max residuals of the three tangential identities on the deep interior:
///
/// * `|grad t|^2 + |grad theta|^2 = 2 cos(theta) / s~`
/// * `div0(X_theta) = -2 |grad theta|^2`
/// * `div0(X_t) = -2 sin(theta)/s~ - 2 grad theta . grad t`
#[derive(Debug, Clone, Copy)]
pub struct TangentialResiduals {
    pub gradient_identity: f64,
    pub div_x_theta: f64,
    pub div_x_t: f64,
}

impl TangentialResiduals {
    pub fn worst(&self) -> f64 {
        self.gradient_identity.max(self.div_x_theta).max(self.div_x_t)
    }
}

pub fn tangential_residuals(
    lifted: &LiftedImmersion,
    shape: &ShapeData,
) -> Result<TangentialResiduals, HeisError> {
    let defect = lifted.legendrian_defect();
    if defect > 1e-4 {
        return Err(HeisError::NotLegendrian(defect));
    }
    let (t_field, th_field, s_tilde) = lifted.heis_fields()?;
    let imm = &lifted.imm;
    let (n, m) = imm.dims();
    let hu = imm.u_axis.step;
    let hv = imm.v_axis.step;

    // contact fields of t and theta along the surface (xy block only)
    let mut x_t = Array2::from_elem((n, m), V4::zeros());
    let mut x_th = Array2::from_elem((n, m), V4::zeros());
    for i in 0..n {
        for j in 0..m {
            let p = imm.points[(i, j)];
            let phi = lifted.phi[(i, j)];
            let s = 0.5 * p.norm_squared();
            let st2 = s * s + phi * phi;
            // grad_{xy} t = (s/st^2) p, t_phi = phi/st^2
            // grad_{xy} theta = (-phi/st^2) p, theta_phi = s/st^2
            let jp = ambient::apply_j(p);
            x_t[(i, j)] = jp * (s / st2) - p * (phi / st2);
            x_th[(i, j)] = jp * (-phi / st2) - p * (s / st2);
        }
    }

    let mut worst = TangentialResiduals { gradient_identity: 0.0, div_x_theta: 0.0, div_x_t: 0.0 };
    for i in 0..n {
        for j in 0..m {
            if !imm.is_deep_interior(i, j) {
                continue;
            }
            let inv = shape.metric[(i, j)].inv;
            let tu = d_u(&t_field, i, j, hu);
            let tv = d_v(&t_field, i, j, hv, imm.v_periodic);
            let thu = d_u(&th_field, i, j, hu);
            let thv = d_v(&th_field, i, j, hv, imm.v_periodic);
            let sq = |au: f64, av: f64, bu: f64, bv: f64| {
                inv[0] * au * bu + inv[1] * (au * bv + av * bu) + inv[2] * av * bv
            };
            let grad_t_sq = sq(tu, tv, tu, tv);
            let grad_th_sq = sq(thu, thv, thu, thv);
            let grad_cross = sq(tu, tv, thu, thv);
            let st = s_tilde[(i, j)];
            let th = th_field[(i, j)];

            worst.gradient_identity = worst
                .gradient_identity
                .max((grad_t_sq + grad_th_sq - 2.0 * th.cos() / st).abs());

            let div = |field: &Array2<V4>| -> f64 {
                let fu = d_u(field, i, j, hu);
                let fv = d_v(field, i, j, hv, imm.v_periodic);
                let mut acc = 0.0;
                for k in 0..2 {
                    let c = shape.frame_coeffs[(i, j)][k];
                    let g = fu * c[0] + fv * c[1];
                    let e = if k == 0 { shape.e1[(i, j)] } else { shape.e2[(i, j)] };
                    acc += g.dot(&e);
                }
                acc
            };
            worst.div_x_theta = worst.div_x_theta.max((div(&x_th) + 2.0 * grad_th_sq).abs());
            worst.div_x_t = worst
                .div_x_t
                .max((div(&x_t) + 2.0 * th.sin() / st + 2.0 * grad_cross).abs());
        }
    }
    Ok(worst)
}

/// Normalized kernel mass of the surface inside scale `a`:
/// `(pi a^2)^{-1} int F(t - 2 ln a, theta) dA`, with F evaluated pointwise
/// through the explicit representation. Equals 1 for a plane through the
/// origin and the vertex density for a cone, independent of `a`.
pub fn density_ratio(
    lifted: &LiftedImmersion,
    cutoff: &Cutoff,
    a: f64,
    shape: &ShapeData,
) -> Result<f64, HeisError> {
    let (t_field, th_field, _) = lifted.heis_fields()?;
    let imm = &lifted.imm;
    let (n, m) = imm.dims();
    let shift = 2.0 * a.ln();
    // the kernel support in the shifted variable must be inside the sampled range
    let t_lo_needed = cutoff.t_left - std::f64::consts::FRAC_PI_2 + shift;
    let t_hi_needed = cutoff.t_right + std::f64::consts::FRAC_PI_2 + shift;
    let (mut t_min, mut t_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in t_field.iter() {
        t_min = t_min.min(*v);
        t_max = t_max.max(*v);
    }
    // left tail below the grid is the constant lambda/2 regime; require it to
    // be negligible instead of covered
    let tail = 0.5 * cutoff.lambda * (t_min - shift).exp();
    if t_max < t_hi_needed || tail > 1e-9 {
        return Err(HeisError::SupportNotCovered {
            lo: t_lo_needed,
            hi: t_hi_needed,
            got_lo: t_min,
            got_hi: t_max,
        });
    }
    let rows: Vec<f64> = crate::exec::map_indexed(n, |i| {
        let vals: Vec<f64> = (0..m)
            .map(|j| {
                fg::f_at(cutoff, t_field[(i, j)] - shift, th_field[(i, j)])
                    * shape.area_element[(i, j)]
            })
            .collect();
        if imm.v_periodic {
            quad::trapezoid_periodic(&vals, imm.v_axis.step)
        } else {
            quad::simpson(&vals, imm.v_axis.step)
        }
    });
    let integral = quad::simpson(&rows, imm.u_axis.step);
    Ok(integral / (std::f64::consts::PI * a * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::ConeSpec;
    use crate::immersion::GridAxis;
    use approx::assert_abs_diff_eq;

    #[test]
    fn heis_point_invariants() {
        let p = V4::new(0.3, -0.2, 0.7, 0.1);
        let hp = heis_point(p, 0.4);
        assert_abs_diff_eq!(hp.s_tilde, 0.5 * hp.r0 * hp.r0, epsilon = 1e-14);
        assert!(hp.theta.abs() <= std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn contact_field_examples() {
        let p = V4::new(0.4, -0.3, 0.2, 0.9);
        // h = s: rotation field, zero phi component
        let h_s = |q: V4, _phi: f64| (0.5 * q.norm_squared(), q, 0.0);
        let (xy, phid) = contact_field(&h_s, p, 0.7);
        assert!((xy - ambient::apply_j(p)).norm() < 1e-14);
        assert_abs_diff_eq!(phid, p.norm_squared() - p.norm_squared(), epsilon = 1e-14);

        // h = phi: radial contraction
        let h_phi = |_q: V4, phi: f64| (phi, V4::zeros(), 1.0);
        let (xy, phid) = contact_field(&h_phi, p, 0.7);
        assert!((xy + p).norm() < 1e-14);
        assert_abs_diff_eq!(phid, -1.4, epsilon = 1e-14);

        // h = 1: pure phi translation
        let h_one = |_q: V4, _phi: f64| (1.0, V4::zeros(), 0.0);
        let (xy, phid) = contact_field(&h_one, p, 0.7);
        assert_eq!(xy, V4::zeros());
        assert_eq!(phid, -2.0);
    }

    #[test]
    fn flow_scales_the_contact_form() {
        let hams: Vec<Box<dyn Fn(V4, f64) -> (f64, V4, f64) + Sync>> = vec![
            Box::new(|q: V4, _| (0.5 * q.norm_squared(), q, 0.0)),
            Box::new(|_, phi| (phi, V4::zeros(), 1.0)),
            // a phi-dependent mixed hamiltonian
            Box::new(|q: V4, phi| {
                (q[0] * phi + q[2], V4::new(phi, 0.0, 1.0, 0.0), q[0])
            }),
        ];
        let p = V4::new(0.4, -0.3, 0.2, 0.9);
        let v = V4::new(0.1, 0.7, -0.5, 0.2);
        for h in &hams {
            let (lhs, rhs) = lie_scaling_check(&**h, p, 0.3, v, 0.8, 0.2);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-6 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn cone_lift_identities() {
        // on the cone: theta = 0, |grad t|^2 = 2/s~, div0(X_t) = 0;
        // a fine patch at step ~1e-3 rather than a coarse full period
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        let imm = SampledImmersion::from_chart_with_tangents(
            GridAxis::new(0.9, 1.1, 201),
            GridAxis::new(0.0, 0.2, 201),
            false,
            move |r, s| spec.gamma(s) * r,
            move |r, s| (spec.gamma(s), spec.gamma_dot(s) * r),
        );
        let lifted = LiftedImmersion::conical(imm);
        assert!(lifted.legendrian_defect() < 1e-10);
        let shape = lifted.imm.shape().unwrap();
        let res = tangential_residuals(&lifted, &shape).unwrap();
        assert!(res.worst() < 1e-5, "{res:?}");
    }

    #[test]
    fn graph_lift_identities_converge() {
        // Lagrangian graph y = grad u, u = 1e-2 x1^3, lifted with
        // phi = <x, grad u> - 2u
        let build = |n: usize| {
            let c = 1e-2;
            let imm = SampledImmersion::from_chart_with_tangents(
                GridAxis::new(0.8, 1.6, n),
                GridAxis::new(0.7, 1.5, n),
                false,
                move |x1, x2| V4::new(x1, 3.0 * c * x1 * x1, x2, 0.0),
                move |x1, _| {
                    (V4::new(1.0, 6.0 * c * x1, 0.0, 0.0), V4::new(0.0, 0.0, 1.0, 0.0))
                },
            );
            let phi = Array2::from_shape_fn((n, n), |(i, j)| {
                let x1 = imm.u_axis.at(i);
                let _x2 = imm.v_axis.at(j);
                let u = c * x1 * x1 * x1;
                x1 * 3.0 * c * x1 * x1 - 2.0 * u
            });
            LiftedImmersion::new(imm, phi)
        };
        let res_at = |n: usize| {
            let lifted = build(n);
            // phi is differenced, so the defect carries the grid error
            assert!(lifted.legendrian_defect() < 1e-5);
            let shape = lifted.imm.shape().unwrap();
            tangential_residuals(&lifted, &shape).unwrap().worst()
        };
        let r1 = res_at(81);
        let r2 = res_at(161);
        assert!(r2 < 1e-4, "residual {r2:.3e}");
        let order = (r1 / r2).log2();
        assert!(order > 1.8, "observed order {order:.2}");
    }

    #[test]
    fn density_of_plane_and_cones() {
        let cutoff = Cutoff::build(31.0).unwrap();
        for (p, q, expect) in [(1u32, 1u32, 1.0), (1, 2, 2.0_f64.sqrt()), (2, 3, 6.0_f64.sqrt())] {
            let spec = ConeSpec::new(p, q, 1).unwrap();
            let mut ratios = Vec::new();
            for a in [0.25_f64, 0.5, 1.0] {
                // cover the kernel support around scale a in log-radius
                let rho_lo = 0.5 * (cutoff.t_left - 2.0) + a.ln() - 8.0;
                let rho_hi = 0.5 * (cutoff.t_right + 2.0) + a.ln() + 1.0;
                let imm = spec.log_immersion(rho_lo, rho_hi, 2049, 32);
                let lifted = LiftedImmersion::conical(imm);
                let shape = lifted.imm.shape().unwrap();
                let ratio = density_ratio(&lifted, &cutoff, a, &shape).unwrap();
                assert_abs_diff_eq!(ratio, expect, epsilon = 1e-3);
                ratios.push(ratio);
            }
            // cone equality case: constant in a within 0.1%
            let spread = (ratios.iter().cloned().fold(f64::MIN, f64::max)
                - ratios.iter().cloned().fold(f64::MAX, f64::min))
                / expect;
            assert!(spread < 1e-3, "spread {spread:.3e}");
        }
    }

    #[test]
    fn density_requires_support_coverage() {
        let cutoff = Cutoff::build(31.0).unwrap();
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        let imm = spec.log_immersion(-1.0, 0.5, 101, 16);
        let lifted = LiftedImmersion::conical(imm);
        let shape = lifted.imm.shape().unwrap();
        assert!(matches!(
            density_ratio(&lifted, &cutoff, 1.0, &shape),
            Err(HeisError::SupportNotCovered { .. })
        ));
    }
}
