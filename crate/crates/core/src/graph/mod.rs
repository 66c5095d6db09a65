//! Area minimization over Lagrangian graphs y = grad u on a rectangle.
//!
//! Grid layout: the rectangle is split into cells and u lives at cell
//! midpoints, surrounded by a two-layer band of fixed nodes (the outermost
//! layer lies half a step outside the rectangle). The band encodes both
//! boundary value and normal derivative, matching the fourth-order
//! Euler-Lagrange problem. The discrete area is the midpoint-rule sum of
//! sqrt(det(I + (D^2 u)^2)) over all non-band-exterior nodes with central
//! 9-point Hessian stencils; its exact derivative with respect to the free
//! nodes is the gradient used everywhere (differentiate-the-discretization).
//! Quadratic potentials are exactly stationary for this pairing.

pub mod analysis;
pub mod minimize;

use crate::exec;
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("grid too small: need at least {0} nodes per side")]
    GridTooSmall(usize),
    #[error("line search failed: step underflow at iteration {iter} (gradient norm {grad_norm:.3e})")]
    LineSearch { iter: usize, grad_norm: f64 },
    #[error("induced metric degenerate at node ({0}, {1})")]
    DegenerateMetric(usize, usize),
}

/// Scalar potential on the midpoint grid with a fixed two-layer band.
#[derive(Debug, Clone)]
pub struct GraphField {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub u: Array2<f64>,
}

impl GraphField {
    /// Sample `f` on the grid covering a rectangle of `mx x my` cells of
    /// side `h` anchored at (x0, y0); total nodes (mx + 2) x (my + 2).
    pub fn from_fn(
        x0: f64,
        y0: f64,
        h: f64,
        mx: usize,
        my: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let u = Array2::from_shape_fn((mx + 2, my + 2), |(i, j)| {
            f(x0 + (i as f64 - 0.5) * h, y0 + (j as f64 - 0.5) * h)
        });
        Self { x0, y0, h, u }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + (i as f64 - 0.5) * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + (j as f64 - 0.5) * self.h
    }

    pub fn dims(&self) -> (usize, usize) {
        self.u.dim()
    }

    /// Nodes whose Hessian enters the functional (everything except the
    /// outermost layer).
    pub fn is_eval(&self, i: usize, j: usize) -> bool {
        let (n, m) = self.dims();
        i >= 1 && i + 1 < n && j >= 1 && j + 1 < m
    }

    /// Degrees of freedom: everything except the two outermost layers.
    pub fn is_free(&self, i: usize, j: usize) -> bool {
        let (n, m) = self.dims();
        i >= 2 && i + 2 < n && j >= 2 && j + 2 < m
    }

    /// Area of the covered rectangle.
    pub fn domain_area(&self) -> f64 {
        let (n, m) = self.dims();
        ((n - 2) as f64 * self.h) * ((m - 2) as f64 * self.h)
    }

    /// Central 9-point Hessian at an eval node: (u_xx, u_xy, u_yy).
    #[inline]
    pub fn hessian(&self, i: usize, j: usize) -> (f64, f64, f64) {
        let h2 = self.h * self.h;
        let u = &self.u;
        let uxx = (u[(i + 1, j)] - 2.0 * u[(i, j)] + u[(i - 1, j)]) / h2;
        let uyy = (u[(i, j + 1)] - 2.0 * u[(i, j)] + u[(i, j - 1)]) / h2;
        let uxy = (u[(i + 1, j + 1)] - u[(i + 1, j - 1)] - u[(i - 1, j + 1)]
            + u[(i - 1, j - 1)])
            / (4.0 * h2);
        (uxx, uxy, uyy)
    }
}

#[inline]
fn integrand(hess: (f64, f64, f64)) -> f64 {
    let (a, b, c) = hess;
    // det(I + H^2) for symmetric H = [[a, b], [b, c]]
    let m11 = 1.0 + a * a + b * b;
    let m22 = 1.0 + b * b + c * c;
    let m12 = b * (a + c);
    (m11 * m22 - m12 * m12).sqrt()
}

/// Discrete graph area: midpoint-rule sum over eval nodes.
pub fn area(field: &GraphField) -> f64 {
    let (n, m) = field.dims();
    assert!(n >= 5 && m >= 5, "need at least a 5x5 grid");
    let h2 = field.h * field.h;
    let rows = exec::map_indexed(n - 2, |ii| {
        let i = ii + 1;
        let mut acc = 0.0;
        for j in 1..m - 1 {
            acc += integrand(field.hessian(i, j));
        }
        acc
    });
    rows.iter().sum::<f64>() * h2
}

/// dsqrt(det(I + H^2))/dH = sqrt(det M) M^{-1} H with M = I + H^2
/// (H and M^{-1} commute); returns the symmetric matrix (S_xx, S_xy, S_yy).
#[inline]
fn shape_sensitivity(hess: (f64, f64, f64)) -> (f64, f64, f64) {
    let (a, b, c) = hess;
    let m11 = 1.0 + a * a + b * b;
    let m22 = 1.0 + b * b + c * c;
    let m12 = b * (a + c);
    let det = m11 * m22 - m12 * m12;
    let f = det.sqrt();
    // M^{-1} H
    let inv11 = m22 / det;
    let inv12 = -m12 / det;
    let inv22 = m11 / det;
    let s11 = inv11 * a + inv12 * b;
    let s12 = inv11 * b + inv12 * c; // = (M^{-1} H)_12
    let s22 = inv12 * b + inv22 * c;
    (f * s11, f * s12, f * s22)
}

/// Exact gradient of [`area`] with respect to the free nodes; zero on the
/// band. The adjoint of the Hessian stencils applied to the sensitivity
/// fields (the spacing factors cancel).
pub fn area_gradient(field: &GraphField) -> Array2<f64> {
    let (n, m) = field.dims();
    let mut sxx = Array2::zeros((n, m));
    let mut sxy = Array2::zeros((n, m));
    let mut syy = Array2::zeros((n, m));
    for i in 1..n - 1 {
        for j in 1..m - 1 {
            let s = shape_sensitivity(field.hessian(i, j));
            sxx[(i, j)] = s.0;
            sxy[(i, j)] = s.1;
            syy[(i, j)] = s.2;
        }
    }
    let rows = exec::map_indexed(n, |i| {
        let mut row = vec![0.0; m];
        if i >= 2 && i + 2 < n {
            for (j, slot) in row.iter_mut().enumerate().take(m - 2).skip(2) {
                *slot = (sxx[(i - 1, j)] - 2.0 * sxx[(i, j)] + sxx[(i + 1, j)])
                    + (syy[(i, j - 1)] - 2.0 * syy[(i, j)] + syy[(i, j + 1)])
                    + 0.5
                        * (sxy[(i + 1, j + 1)] - sxy[(i + 1, j - 1)] - sxy[(i - 1, j + 1)]
                            + sxy[(i - 1, j - 1)]);
            }
        }
        row
    });
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, m), flat).unwrap()
}

pub fn sup_norm(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Cancellation-free `area(u + s d) - area(u)`.
///
/// The per-node difference of sqrt(det M) is evaluated through the exact
/// polynomial expansion of det(M + dM) - det(M), so the result keeps full
/// relative precision even when the difference is 1e-16 of the area. The
/// line search relies on this; naive subtraction of two area values floors
/// the reachable gradient norm at the f64 resolution of the total area.
pub fn area_delta(field: &GraphField, dir: &Array2<f64>, s: f64) -> f64 {
    let (n, m) = field.dims();
    let h2 = field.h * field.h;
    let dir_hessian = |i: usize, j: usize| -> (f64, f64, f64) {
        let da = (dir[(i + 1, j)] - 2.0 * dir[(i, j)] + dir[(i - 1, j)]) / h2;
        let dc = (dir[(i, j + 1)] - 2.0 * dir[(i, j)] + dir[(i, j - 1)]) / h2;
        let db = (dir[(i + 1, j + 1)] - dir[(i + 1, j - 1)] - dir[(i - 1, j + 1)]
            + dir[(i - 1, j - 1)])
            / (4.0 * h2);
        (da, db, dc)
    };
    let rows = exec::map_indexed(n - 2, |ii| {
        let i = ii + 1;
        let mut acc = 0.0;
        for j in 1..m - 1 {
            let (a, b, c) = field.hessian(i, j);
            let (da, db, dc) = dir_hessian(i, j);
            let (a1, b1, c1) = (a + s * da, b + s * db, c + s * dc);
            let m11 = 1.0 + a * a + b * b;
            let m12 = b * (a + c);
            let m22 = 1.0 + b * b + c * c;
            let n11 = 1.0 + a1 * a1 + b1 * b1;
            let n12 = b1 * (a1 + c1);
            let n22 = 1.0 + b1 * b1 + c1 * c1;
            // entry differences without cancellation
            let d11 = s * (da * (a1 + a) + db * (b1 + b));
            let d22 = s * (db * (b1 + b) + dc * (c1 + c));
            let d12 = s * (db * (a + c) + b * (da + dc) + s * db * (da + dc));
            let ddet = n11 * d22 + d11 * m22 - d12 * (n12 + m12);
            let f0 = (m11 * m22 - m12 * m12).sqrt();
            let f1 = (n11 * n22 - n12 * n12).sqrt();
            acc += ddet / (f0 + f1);
        }
        acc
    });
    rows.iter().sum::<f64>() * h2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_field_has_unit_density() {
        let f = GraphField::from_fn(0.0, 0.0, 1.0 / 16.0, 16, 16, |_, _| 0.0);
        assert_abs_diff_eq!(area(&f), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn quadratic_area_exact_at_every_resolution() {
        for mx in [8usize, 13, 32] {
            let h = 1.0 / mx as f64;
            let c = 0.4;
            let f = GraphField::from_fn(0.0, 0.0, h, mx, mx, |x, y| 0.5 * c * (x * x + y * y));
            assert_abs_diff_eq!(area(&f), (1.0 + c * c) * f.domain_area(), epsilon = 1e-12);
            let saddle = GraphField::from_fn(0.0, 0.0, h, mx, mx, |x, y| {
                0.15 * (x * x - y * y)
            });
            assert_abs_diff_eq!(area(&saddle), 1.09 * saddle.domain_area(), epsilon = 1e-12);
        }
    }

    #[test]
    fn quadratics_are_exactly_stationary() {
        let f = GraphField::from_fn(-0.3, 0.2, 0.05, 20, 24, |x, y| {
            0.3 * x * x - 0.1 * x * y + 0.2 * y * y + 0.7 * x - 0.2 * y + 1.0
        });
        let g = area_gradient(&f);
        // zero in exact arithmetic; in floats the node samples of the
        // quadratic carry rounding that the stencils amplify by 1/h^4
        assert!(sup_norm(&g) <= 1e-10, "gradient {:.3e}", sup_norm(&g));
    }

    #[test]
    fn gradient_matches_directional_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mx = 24;
        let h = 1.0 / mx as f64;
        let base = GraphField::from_fn(0.0, 0.0, h, mx, mx, |x, y| {
            0.3 * (2.1 * x).sin() * (1.7 * y).cos() + 0.2 * x * x * y
        });
        let g = area_gradient(&base);
        let (n, m) = base.dims();
        for _ in 0..20 {
            // random direction supported on the free nodes
            let dir = Array2::from_shape_fn((n, m), |(i, j)| {
                if base.is_free(i, j) {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                }
            });
            let pair: f64 = g.iter().zip(dir.iter()).map(|(a, b)| a * b).sum();
            // fourth-order differencing: the third area derivative along a
            // rough direction scales like 1/h^4 and would pollute a plain
            // central difference at any usable step
            let t = 1e-4;
            let probe = |s: f64| {
                let mut f = base.clone();
                f.u += &(dir.clone() * s);
                area(&f)
            };
            let fd = (8.0 * (probe(t) - probe(-t)) - (probe(2.0 * t) - probe(-2.0 * t)))
                / (12.0 * t);
            assert_abs_diff_eq!(pair, fd, epsilon = 1e-6 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn linearization_is_the_discrete_bilaplacian() {
        // gradient at eps*v equals eps * B v + O(eps^3) with B the
        // stencil bilaplacian; measure the cubic remainder by halving eps
        let mx = 16;
        let h = 1.0 / mx as f64;
        let v = GraphField::from_fn(0.0, 0.0, h, mx, mx, |x, y| {
            (3.0 * x).sin() * (2.0 * y).cos()
        });
        let rem = |eps: f64| {
            let mut f = v.clone();
            f.u.mapv_inplace(|w| eps * w);
            let g = area_gradient(&f);
            // the gradient is linear to leading order; compare slopes
            // against a tiny-eps reference
            let eps0 = 1e-7;
            let mut f0 = v.clone();
            f0.u.mapv_inplace(|w| eps0 * w);
            let g0 = area_gradient(&f0);
            let mut worst = 0.0_f64;
            for (a, b) in g.iter().zip(g0.iter()) {
                worst = worst.max((a / eps - b / eps0).abs());
            }
            worst
        };
        let r1 = rem(1e-2);
        let r2 = rem(5e-3);
        // cubic remainder: ratio ~ 4 per halving of eps (difference of slopes)
        assert!(r2 < r1 / 3.0, "remainder {r1:.3e} -> {r2:.3e}");
    }
}
