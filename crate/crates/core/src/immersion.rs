//! Sampled immersed surfaces in R^4 and their shape caches.
//!
//! A surface is sampled on a uniform parameter grid (u, v). Derivatives are
//! second-order central differences, one-sided at non-periodic boundaries;
//! when the chart supplies analytic tangents those are used for first
//! derivatives and differenced once for second derivatives. The normal frame
//! comes from Gram-Schmidt of {J e1, J e2} against the tangent frame, which
//! for Lagrangian surfaces removes discretization leakage only.

use crate::ambient::{self, V4};
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate induced metric at node ({i}, {j}): det = {det:.3e}")]
    DegenerateMetric { i: usize, j: usize, det: f64 },
    #[error("surface is not Lagrangian within tolerance: max |omega(e1,e2)| = {0:.3e}")]
    NonLagrangian(f64),
    #[error("field does not vanish near the grid boundary (node ({i}, {j}))")]
    SupportViolation { i: usize, j: usize },
    #[error("grid too small: need at least {min} nodes per axis, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("composite quadrature needs odd node counts, got {0}x{1}")]
    EvenGrid(usize, usize),
}

/// Uniform sample axis.
#[derive(Debug, Clone, Copy)]
pub struct GridAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl GridAxis {
    pub fn new(start: f64, end: f64, len: usize) -> Self {
        Self { start, step: (end - start) / (len - 1) as f64, len }
    }

    /// Axis covering `[start, start + period)` with `len` nodes and no
    /// duplicated endpoint.
    pub fn periodic(start: f64, period: f64, len: usize) -> Self {
        Self { start, step: period / len as f64, len }
    }

    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }
}

pub(crate) trait Linear:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<f64, Output = Self>
{
}
impl Linear for f64 {}
impl Linear for V4 {}

#[inline]
fn wrap(idx: isize, n: usize) -> usize {
    idx.rem_euclid(n as isize) as usize
}

/// First derivative along axis 0 (u).
pub(crate) fn d_u<T: Linear>(a: &Array2<T>, i: usize, j: usize, h: f64) -> T {
    let n = a.nrows();
    if i >= 1 && i + 1 < n {
        (a[(i + 1, j)] - a[(i - 1, j)]) * (0.5 / h)
    } else if i == 0 {
        (a[(0, j)] * -3.0 + a[(1, j)] * 4.0 - a[(2, j)]) * (0.5 / h)
    } else {
        (a[(n - 1, j)] * 3.0 - a[(n - 2, j)] * 4.0 + a[(n - 3, j)]) * (0.5 / h)
    }
}

/// First derivative along axis 1 (v), periodic wrap optional.
pub(crate) fn d_v<T: Linear>(a: &Array2<T>, i: usize, j: usize, h: f64, periodic: bool) -> T {
    let n = a.ncols();
    if periodic {
        let jm = wrap(j as isize - 1, n);
        let jp = wrap(j as isize + 1, n);
        (a[(i, jp)] - a[(i, jm)]) * (0.5 / h)
    } else if j >= 1 && j + 1 < n {
        (a[(i, j + 1)] - a[(i, j - 1)]) * (0.5 / h)
    } else if j == 0 {
        (a[(i, 0)] * -3.0 + a[(i, 1)] * 4.0 - a[(i, 2)]) * (0.5 / h)
    } else {
        (a[(i, n - 1)] * 3.0 - a[(i, n - 2)] * 4.0 + a[(i, n - 3)]) * (0.5 / h)
    }
}

#[derive(Debug, Clone)]
pub struct SampledImmersion {
    pub u_axis: GridAxis,
    pub v_axis: GridAxis,
    pub v_periodic: bool,
    pub points: Array2<V4>,
    /// Analytic first derivatives (d/du, d/dv) when the chart provides them.
    pub tangents: Option<(Array2<V4>, Array2<V4>)>,
}

impl SampledImmersion {
    pub fn from_points(
        u_axis: GridAxis,
        v_axis: GridAxis,
        v_periodic: bool,
        points: Array2<V4>,
    ) -> Self {
        Self { u_axis, v_axis, v_periodic, points, tangents: None }
    }

    pub fn from_chart(
        u_axis: GridAxis,
        v_axis: GridAxis,
        v_periodic: bool,
        chart: impl Fn(f64, f64) -> V4,
    ) -> Self {
        let points = Array2::from_shape_fn((u_axis.len, v_axis.len), |(i, j)| {
            chart(u_axis.at(i), v_axis.at(j))
        });
        Self { u_axis, v_axis, v_periodic, points, tangents: None }
    }

    pub fn from_chart_with_tangents(
        u_axis: GridAxis,
        v_axis: GridAxis,
        v_periodic: bool,
        chart: impl Fn(f64, f64) -> V4,
        tangent: impl Fn(f64, f64) -> (V4, V4),
    ) -> Self {
        let points = Array2::from_shape_fn((u_axis.len, v_axis.len), |(i, j)| {
            chart(u_axis.at(i), v_axis.at(j))
        });
        let tu = Array2::from_shape_fn((u_axis.len, v_axis.len), |(i, j)| {
            tangent(u_axis.at(i), v_axis.at(j)).0
        });
        let tv = Array2::from_shape_fn((u_axis.len, v_axis.len), |(i, j)| {
            tangent(u_axis.at(i), v_axis.at(j)).1
        });
        Self { u_axis, v_axis, v_periodic, points, tangents: Some((tu, tv)) }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.u_axis.len, self.v_axis.len)
    }

    /// True where any derivative stencil is one-sided.
    pub fn is_one_sided(&self, i: usize, j: usize) -> bool {
        let (n, m) = self.dims();
        i == 0 || i + 1 == n || (!self.v_periodic && (j == 0 || j + 1 == m))
    }

    /// Interior in the sense of full central stencils for second derivatives
    /// of first derivatives (reach 2).
    pub fn is_deep_interior(&self, i: usize, j: usize) -> bool {
        let (n, m) = self.dims();
        i >= 2 && i + 2 < n && (self.v_periodic || (j >= 2 && j + 2 < m))
    }

    pub fn tangent_fields(&self) -> (Array2<V4>, Array2<V4>) {
        if let Some((tu, tv)) = &self.tangents {
            return (tu.clone(), tv.clone());
        }
        let (n, m) = self.dims();
        let hu = self.u_axis.step;
        let hv = self.v_axis.step;
        let tu = Array2::from_shape_fn((n, m), |(i, j)| d_u(&self.points, i, j, hu));
        let tv =
            Array2::from_shape_fn((n, m), |(i, j)| d_v(&self.points, i, j, hv, self.v_periodic));
        (tu, tv)
    }

    pub fn shape(&self) -> Result<ShapeData, GeometryError> {
        self.shape_with(1e-10)
    }

    pub fn shape_with(&self, degeneracy_threshold: f64) -> Result<ShapeData, GeometryError> {
        build_shape(self, degeneracy_threshold)
    }
}

/// Per-node symmetric metric data.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricEntry {
    pub g: [f64; 3],    // g11, g12, g22 in parameter coordinates
    pub inv: [f64; 3],  // inverse metric
    pub det: f64,
}

/// Shape caches computed once on the grid and then read-only.
#[derive(Debug, Clone)]
pub struct ShapeData {
    pub e1: Array2<V4>,
    pub e2: Array2<V4>,
    pub n1: Array2<V4>,
    pub n2: Array2<V4>,
    /// Coefficients expressing the orthonormal frame in parameter tangents:
    /// `e_k = coeff[k][0] * l_u + coeff[k][1] * l_v`.
    pub frame_coeffs: Array2<[[f64; 2]; 2]>,
    pub metric: Array2<MetricEntry>,
    /// Second fundamental form vectors on the orthonormal frame:
    /// entries (B_{11}, B_{12}, B_{22}).
    pub b: Array2<[V4; 3]>,
    /// Scalar components h[j][kl] = <B_{kl}, n_j> with kl in {11, 12, 22}.
    pub h_components: Array2<[[f64; 3]; 2]>,
    pub mean_curvature: Array2<V4>,
    pub area_element: Array2<f64>,
    pub lagrangian_defect: Array2<f64>,
    pub sigma_h: OneFormField,
    pub d_sigma_h: Array2<f64>,
    pub tangent_u: Array2<V4>,
    pub tangent_v: Array2<V4>,
}

impl ShapeData {
    pub fn max_lagrangian_defect(&self) -> f64 {
        self.lagrangian_defect.iter().copied().fold(0.0, f64::max)
    }
}

fn build_shape(imm: &SampledImmersion, threshold: f64) -> Result<ShapeData, GeometryError> {
    let (n, m) = imm.dims();
    if n < 5 || m < 5 {
        return Err(GeometryError::GridTooSmall { min: 5, got: n.min(m) });
    }
    let hu = imm.u_axis.step;
    let hv = imm.v_axis.step;
    let (tu, tv) = imm.tangent_fields();

    // second derivatives: difference the (possibly analytic) tangent fields
    let luu = Array2::from_shape_fn((n, m), |(i, j)| d_u(&tu, i, j, hu));
    let luv = Array2::from_shape_fn((n, m), |(i, j)| d_v(&tu, i, j, hv, imm.v_periodic));
    let lvv = Array2::from_shape_fn((n, m), |(i, j)| d_v(&tv, i, j, hv, imm.v_periodic));

    let mut e1 = Array2::from_elem((n, m), V4::zeros());
    let mut e2 = e1.clone();
    let mut n1 = e1.clone();
    let mut n2 = e1.clone();
    let mut b = Array2::from_elem((n, m), [V4::zeros(); 3]);
    let mut h_components = Array2::from_elem((n, m), [[0.0; 3]; 2]);
    let mut mean = Array2::from_elem((n, m), V4::zeros());
    let mut metric = Array2::from_elem((n, m), MetricEntry::default());
    let mut area = Array2::zeros((n, m));
    let mut defect = Array2::zeros((n, m));
    let mut coeffs = Array2::from_elem((n, m), [[0.0; 2]; 2]);
    let mut sig_u = Array2::zeros((n, m));
    let mut sig_v = Array2::zeros((n, m));

    for i in 0..n {
        for j in 0..m {
            let lu = tu[(i, j)];
            let lv = tv[(i, j)];
            let g11 = lu.dot(&lu);
            let g12 = lu.dot(&lv);
            let g22 = lv.dot(&lv);
            let det = g11 * g22 - g12 * g12;
            // scale-free test: log-radial charts have tiny but well
            // conditioned metrics
            if det <= threshold * g11 * g22 {
                return Err(GeometryError::DegenerateMetric { i, j, det });
            }
            let inv = [g22 / det, -g12 / det, g11 / det];
            metric[(i, j)] = MetricEntry { g: [g11, g12, g22], inv, det };
            area[(i, j)] = det.sqrt();

            let f1 = lu / g11.sqrt();
            let mut f2 = lv - f1 * lv.dot(&f1);
            f2 /= f2.norm();
            e1[(i, j)] = f1;
            e2[(i, j)] = f2;
            defect[(i, j)] = ambient::omega(f1, f2).abs();

            // e_k in parameter tangents: solve the 2x2 Gram system
            let solve = |e: V4| -> [f64; 2] {
                let r1 = e.dot(&lu);
                let r2 = e.dot(&lv);
                [(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det]
            };
            coeffs[(i, j)] = [solve(f1), solve(f2)];

            // normal frame from J of the tangent frame
            let mut m1 = ambient::apply_j(f1);
            m1 -= f1 * m1.dot(&f1) + f2 * m1.dot(&f2);
            m1 /= m1.norm();
            let mut m2 = ambient::apply_j(f2);
            m2 -= f1 * m2.dot(&f1) + f2 * m2.dot(&f2) + m1 * m2.dot(&m1);
            m2 /= m2.norm();
            n1[(i, j)] = m1;
            n2[(i, j)] = m2;

            let perp = |w: V4| -> V4 { w - f1 * w.dot(&f1) - f2 * w.dot(&f2) };

            // coordinate second fundamental form, then frame components
            let b_uu = perp(luu[(i, j)]);
            let b_uv = perp(luv[(i, j)]);
            let b_vv = perp(lvv[(i, j)]);
            let c = coeffs[(i, j)];
            let frame_b = |k: usize, l: usize| -> V4 {
                b_uu * (c[k][0] * c[l][0])
                    + b_uv * (c[k][0] * c[l][1] + c[k][1] * c[l][0])
                    + b_vv * (c[k][1] * c[l][1])
            };
            let b11 = frame_b(0, 0);
            let b12 = frame_b(0, 1);
            let b22 = frame_b(1, 1);
            b[(i, j)] = [b11, b12, b22];
            h_components[(i, j)] = [
                [b11.dot(&m1), b12.dot(&m1), b22.dot(&m1)],
                [b11.dot(&m2), b12.dot(&m2), b22.dot(&m2)],
            ];
            // trace over the orthonormal frame
            let h_vec = b11 + b22;
            mean[(i, j)] = h_vec;
            sig_u[(i, j)] = ambient::omega(h_vec, lu);
            sig_v[(i, j)] = ambient::omega(h_vec, lv);
        }
    }

    let sigma_h = OneFormField {
        u_axis: imm.u_axis,
        v_axis: imm.v_axis,
        v_periodic: imm.v_periodic,
        comp_u: sig_u,
        comp_v: sig_v,
    };
    let d_sigma_h = sigma_h.exterior_derivative();

    Ok(ShapeData {
        e1,
        e2,
        n1,
        n2,
        frame_coeffs: coeffs,
        metric,
        b,
        h_components,
        mean_curvature: mean,
        area_element: area,
        lagrangian_defect: defect,
        sigma_h,
        d_sigma_h,
        tangent_u: tu,
        tangent_v: tv,
    })
}

/// A 1-form sampled on the parameter grid, components per parameter.
#[derive(Debug, Clone)]
pub struct OneFormField {
    pub u_axis: GridAxis,
    pub v_axis: GridAxis,
    pub v_periodic: bool,
    pub comp_u: Array2<f64>,
    pub comp_v: Array2<f64>,
}

impl OneFormField {
    /// d sigma = d_u sigma_v - d_v sigma_u by central differences.
    pub fn exterior_derivative(&self) -> Array2<f64> {
        let (n, m) = (self.u_axis.len, self.v_axis.len);
        Array2::from_shape_fn((n, m), |(i, j)| {
            d_u(&self.comp_v, i, j, self.u_axis.step)
                - d_v(&self.comp_u, i, j, self.v_axis.step, self.v_periodic)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat_plane(n: usize) -> SampledImmersion {
        // (a, b) -> (a, 0, b, 0): a Lagrangian plane
        SampledImmersion::from_chart_with_tangents(
            GridAxis::new(-1.0, 1.0, n),
            GridAxis::new(-1.0, 1.0, n),
            false,
            |a, b| V4::new(a, 0.0, b, 0.0),
            |_, _| (V4::new(1.0, 0.0, 0.0, 0.0), V4::new(0.0, 0.0, 1.0, 0.0)),
        )
    }

    #[test]
    fn flat_plane_is_totally_geodesic() {
        let imm = flat_plane(17);
        let shape = imm.shape().unwrap();
        for h in shape.mean_curvature.iter() {
            assert!(h.norm() < 1e-12);
        }
        for d in shape.d_sigma_h.iter() {
            assert!(d.abs() < 1e-12);
        }
        assert!(shape.max_lagrangian_defect() < 1e-14);
        for a in shape.area_element.iter() {
            assert_abs_diff_eq!(*a, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn affine_graph_has_zero_second_form() {
        // graph of grad u for u = c/2 (a^2 + b^2): (a, c a, b, c b)
        let c = 0.37;
        let imm = SampledImmersion::from_chart_with_tangents(
            GridAxis::new(-1.0, 1.0, 21),
            GridAxis::new(-1.0, 1.0, 21),
            false,
            |a, b| V4::new(a, c * a, b, c * b),
            |_, _| (V4::new(1.0, c, 0.0, 0.0), V4::new(0.0, 0.0, 1.0, c)),
        );
        let shape = imm.shape().unwrap();
        for bb in shape.b.iter() {
            assert!(bb[0].norm() + bb[1].norm() + bb[2].norm() < 1e-10);
        }
        for h in shape.mean_curvature.iter() {
            assert!(h.norm() < 1e-10);
        }
    }

    #[test]
    fn degenerate_metric_is_reported_with_node() {
        let imm = SampledImmersion::from_chart(
            GridAxis::new(-1.0, 1.0, 9),
            GridAxis::new(-1.0, 1.0, 9),
            false,
            // collapses the v-direction at a = 0 column
            |a, b| V4::new(a, 0.0, a * b, 0.0),
        );
        match imm.shape() {
            Err(GeometryError::DegenerateMetric { .. }) => {}
            other => panic!("expected degenerate metric, got {other:?}"),
        }
    }

    #[test]
    fn exterior_derivative_converges_second_order() {
        // sigma = (sin(u v), u^2 v); d sigma = d_u sigma_v - d_v sigma_u
        let exact = |u: f64, v: f64| 2.0 * u * v - u * (u * v).cos();
        let err = |n: usize| -> f64 {
            let ua = GridAxis::new(0.2, 1.2, n);
            let va = GridAxis::new(-0.3, 0.9, n);
            let f = OneFormField {
                u_axis: ua,
                v_axis: va,
                v_periodic: false,
                comp_u: Array2::from_shape_fn((n, n), |(i, j)| (ua.at(i) * va.at(j)).sin()),
                comp_v: Array2::from_shape_fn((n, n), |(i, j)| ua.at(i) * ua.at(i) * va.at(j)),
            };
            let d = f.exterior_derivative();
            let mut worst = 0.0_f64;
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    worst = worst.max((d[(i, j)] - exact(ua.at(i), va.at(j))).abs());
                }
            }
            worst
        };
        let e1 = err(33);
        let e2 = err(65);
        let order = (e1 / e2).log2();
        assert!(order > 1.9, "observed order {order:.2}");
    }
}
