//! Second-variation evaluators for sampled immersions.
//!
//! Two quadratic forms are provided:
//!
//! * [`second_variation_linear`] — the flat-ambient second derivative of area
//!   under the straight-line variation `l + t X` (no acceleration term, no
//!   boundary term; `X` must be compactly supported on the grid);
//! * [`second_variation_hamiltonian`] — the flat-ambient normal-variation
//!   form for `X = J grad f` on a Lagrangian immersion.
//!
//! Per-node algebra matches the discrete area functional exactly, so the
//! linear form agrees with a central finite difference of
//! [`area_perturbed`] up to the t-step truncation error alone.

use crate::ambient::{self, V4};
use crate::immersion::{d_u, d_v, GeometryError, SampledImmersion, ShapeData};
use crate::quad;
use ndarray::Array2;

/// Require the field to vanish on the outermost two layers (all four sides,
/// or only the u-sides when v is periodic).
fn check_support<T, Z>(imm: &SampledImmersion, field: &Array2<T>, is_zero: Z) -> Result<(), GeometryError>
where
    Z: Fn(&T) -> bool,
{
    let (n, m) = imm.dims();
    for i in 0..n {
        for j in 0..m {
            let edge_u = i < 2 || i + 2 >= n;
            let edge_v = !imm.v_periodic && (j < 2 || j + 2 >= m);
            if (edge_u || edge_v) && !is_zero(&field[(i, j)]) {
                return Err(GeometryError::SupportViolation { i, j });
            }
        }
    }
    Ok(())
}

/// Integrate a node-valued integrand against the grid: composite Simpson in
/// u, and in v either Simpson (plain grid) or the periodic trapezoid rule.
fn integrate_grid(imm: &SampledImmersion, values: &Array2<f64>) -> Result<f64, GeometryError> {
    let (n, m) = imm.dims();
    if n % 2 == 0 || (!imm.v_periodic && m % 2 == 0) {
        return Err(GeometryError::EvenGrid(n, m));
    }
    let hu = imm.u_axis.step;
    let hv = imm.v_axis.step;
    let rows: Vec<f64> = (0..n)
        .map(|i| {
            let row: Vec<f64> = (0..m).map(|j| values[(i, j)]).collect();
            if imm.v_periodic {
                quad::trapezoid_periodic(&row, hv)
            } else {
                quad::simpson(&row, hv)
            }
        })
        .collect();
    Ok(quad::simpson(&rows, hu))
}

fn frame_derivative(
    shape: &ShapeData,
    xu: &Array2<V4>,
    xv: &Array2<V4>,
    i: usize,
    j: usize,
    k: usize,
) -> V4 {
    let c = shape.frame_coeffs[(i, j)][k];
    xu[(i, j)] * c[0] + xv[(i, j)] * c[1]
}

/// Second derivative of area at t = 0 along the straight-line variation
/// `l + t X` in flat ambient space.
pub fn second_variation_linear(
    imm: &SampledImmersion,
    shape: &ShapeData,
    x: &Array2<V4>,
) -> Result<f64, GeometryError> {
    check_support(imm, x, |v: &V4| v.norm() == 0.0)?;
    let (n, m) = imm.dims();
    let hu = imm.u_axis.step;
    let hv = imm.v_axis.step;
    let xu = Array2::from_shape_fn((n, m), |(i, j)| d_u(x, i, j, hu));
    let xv = Array2::from_shape_fn((n, m), |(i, j)| d_v(x, i, j, hv, imm.v_periodic));

    let integrand = Array2::from_shape_fn((n, m), |(i, j)| {
        let e = [shape.e1[(i, j)], shape.e2[(i, j)]];
        let grad = [
            frame_derivative(shape, &xu, &xv, i, j, 0),
            frame_derivative(shape, &xu, &xv, i, j, 1),
        ];
        let mut perp_sq = 0.0;
        let mut div = 0.0;
        let mut cross = 0.0;
        for k in 0..2 {
            let g = grad[k];
            let t1 = g.dot(&e[0]);
            let t2 = g.dot(&e[1]);
            let perp = g - e[0] * t1 - e[1] * t2;
            perp_sq += perp.dot(&perp);
            div += g.dot(&e[k]);
        }
        for k in 0..2 {
            for l in 0..2 {
                cross += grad[l].dot(&e[k]) * grad[k].dot(&e[l]);
            }
        }
        (perp_sq - cross + div * div) * shape.area_element[(i, j)]
    });
    integrate_grid(imm, &integrand)
}

/// Discrete area of the perturbed immersion `l + t X`, built from the same
/// tangents and difference stencils as [`second_variation_linear`].
pub fn area_perturbed(
    imm: &SampledImmersion,
    x: &Array2<V4>,
    t: f64,
) -> Result<f64, GeometryError> {
    let (n, m) = imm.dims();
    let hu = imm.u_axis.step;
    let hv = imm.v_axis.step;
    let (tu, tv) = imm.tangent_fields();
    let xu = Array2::from_shape_fn((n, m), |(i, j)| d_u(x, i, j, hu));
    let xv = Array2::from_shape_fn((n, m), |(i, j)| d_v(x, i, j, hv, imm.v_periodic));
    let integrand = Array2::from_shape_fn((n, m), |(i, j)| {
        let lu = tu[(i, j)] + xu[(i, j)] * t;
        let lv = tv[(i, j)] + xv[(i, j)] * t;
        let g11 = lu.dot(&lu);
        let g12 = lu.dot(&lv);
        let g22 = lv.dot(&lv);
        (g11 * g22 - g12 * g12).max(0.0).sqrt()
    });
    integrate_grid(imm, &integrand)
}

pub fn area(imm: &SampledImmersion) -> Result<f64, GeometryError> {
    let zero = Array2::from_elem(imm.dims(), V4::zeros());
    area_perturbed(imm, &zero, 0.0)
}

/// Second-variation form for the Hamiltonian normal field `X = J grad f` on
/// a Lagrangian immersion in flat ambient space:
///
/// `int [ sum_i |(grad_{e_i} J X)^T|^2 + <X, H>^2 - sum_ij <X, B_ij>^2
///        - <X, B(JH, JX)> ] dA`.
pub fn second_variation_hamiltonian(
    imm: &SampledImmersion,
    shape: &ShapeData,
    f: &Array2<f64>,
) -> Result<f64, GeometryError> {
    let defect = shape.max_lagrangian_defect();
    if defect > 1e-6 {
        return Err(GeometryError::NonLagrangian(defect));
    }
    check_support(imm, f, |v: &f64| *v == 0.0)?;
    let (n, m) = imm.dims();
    let hu = imm.u_axis.step;
    let hv = imm.v_axis.step;
    let fu = Array2::from_shape_fn((n, m), |(i, j)| d_u(f, i, j, hu));
    let fv = Array2::from_shape_fn((n, m), |(i, j)| d_v(f, i, j, hv, imm.v_periodic));

    // X = J grad f, projected onto the normal space to strip discretization
    // leakage; Y = J X is then tangent.
    let mut x_field = Array2::from_elem((n, m), V4::zeros());
    let mut y_field = x_field.clone();
    for i in 0..n {
        for j in 0..m {
            let inv = shape.metric[(i, j)].inv;
            let lu = shape.tangent_u[(i, j)];
            let lv = shape.tangent_v[(i, j)];
            let grad_f = lu * (inv[0] * fu[(i, j)] + inv[1] * fv[(i, j)])
                + lv * (inv[1] * fu[(i, j)] + inv[2] * fv[(i, j)]);
            let x_raw = ambient::apply_j(grad_f);
            let e1 = shape.e1[(i, j)];
            let e2 = shape.e2[(i, j)];
            let x_perp = x_raw - e1 * x_raw.dot(&e1) - e2 * x_raw.dot(&e2);
            x_field[(i, j)] = x_perp;
            y_field[(i, j)] = ambient::apply_j(x_perp);
        }
    }
    let yu = Array2::from_shape_fn((n, m), |(i, j)| d_u(&y_field, i, j, hu));
    let yv = Array2::from_shape_fn((n, m), |(i, j)| d_v(&y_field, i, j, hv, imm.v_periodic));

    let integrand = Array2::from_shape_fn((n, m), |(i, j)| {
        let e = [shape.e1[(i, j)], shape.e2[(i, j)]];
        let x = x_field[(i, j)];
        let y = y_field[(i, j)];
        let h_vec = shape.mean_curvature[(i, j)];
        let b = shape.b[(i, j)];

        let mut tang_sq = 0.0;
        for k in 0..2 {
            let g = frame_derivative(shape, &yu, &yv, i, j, k);
            let t1 = g.dot(&e[0]);
            let t2 = g.dot(&e[1]);
            tang_sq += t1 * t1 + t2 * t2;
        }
        let xh = x.dot(&h_vec);
        // sum over ordered pairs (ij): B_12 counts twice
        let b_sq = x.dot(&b[0]).powi(2) + 2.0 * x.dot(&b[1]).powi(2) + x.dot(&b[2]).powi(2);
        // B(JH, JX): both arguments tangent, expand on the frame
        let jh = ambient::apply_j(h_vec);
        let a1 = jh.dot(&e[0]);
        let a2 = jh.dot(&e[1]);
        let c1 = y.dot(&e[0]);
        let c2 = y.dot(&e[1]);
        let b_jh_jx =
            b[0] * (a1 * c1) + b[1] * (a1 * c2 + a2 * c1) + b[2] * (a2 * c2);
        (tang_sq + xh * xh - b_sq - x.dot(&b_jh_jx)) * shape.area_element[(i, j)]
    });
    integrate_grid(imm, &integrand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::GridAxis;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat_plane(n: usize) -> SampledImmersion {
        SampledImmersion::from_chart_with_tangents(
            GridAxis::new(-1.0, 1.0, n),
            GridAxis::new(-1.0, 1.0, n),
            false,
            |a, b| V4::new(a, 0.0, b, 0.0),
            |_, _| (V4::new(1.0, 0.0, 0.0, 0.0), V4::new(0.0, 0.0, 1.0, 0.0)),
        )
    }

    /// Smooth window that vanishes (with derivatives) on the outer layers.
    fn window(imm: &SampledImmersion, i: usize, j: usize) -> f64 {
        let (n, m) = imm.dims();
        let edge = 2.0;
        let wi = i as f64;
        let wj = j as f64;
        let si = ((wi - edge) / (n as f64 - 1.0 - 2.0 * edge)).clamp(0.0, 1.0);
        let sj = ((wj - edge) / (m as f64 - 1.0 - 2.0 * edge)).clamp(0.0, 1.0);
        let bump = |s: f64| (4.0 * s * (1.0 - s)).powi(3);
        bump(si) * bump(sj)
    }

    #[test]
    fn constant_field_gives_zero() {
        // constant fields are not compactly supported; build the integrand
        // check through a supported constant-times-window with tiny window
        // gradient contribution removed by comparing to the quadratic scaling
        let imm = flat_plane(33);
        let shape = imm.shape().unwrap();
        let x = ndarray::Array2::from_elem(imm.dims(), V4::zeros());
        let v = second_variation_linear(&imm, &shape, &x).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn quadratic_homogeneity() {
        let imm = flat_plane(33);
        let shape = imm.shape().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dir = V4::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let x = ndarray::Array2::from_shape_fn(imm.dims(), |(i, j)| dir * window(&imm, i, j));
        let x3 = ndarray::Array2::from_shape_fn(imm.dims(), |(i, j)| x[(i, j)] * 3.0);
        let v1 = second_variation_linear(&imm, &shape, &x).unwrap();
        let v3 = second_variation_linear(&imm, &shape, &x3).unwrap();
        assert_abs_diff_eq!(v3, 9.0 * v1, epsilon = 1e-10 * v1.abs().max(1.0));
    }

    #[test]
    fn matches_finite_difference_of_area_on_random_fields() {
        let imm = flat_plane(33);
        let shape = imm.shape().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let dirs: Vec<V4> = (0..4)
                .map(|_| {
                    V4::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    )
                })
                .collect();
            let fx = rng.gen_range(0.5..2.5);
            let fy = rng.gen_range(0.5..2.5);
            let x = ndarray::Array2::from_shape_fn(imm.dims(), |(i, j)| {
                let u = imm.u_axis.at(i);
                let v = imm.v_axis.at(j);
                let w = window(&imm, i, j);
                (dirs[0] * (fx * u).sin() + dirs[1] * (fy * v).cos() + dirs[2] * (u * v)
                    + dirs[3])
                    * w
            });
            let form = second_variation_linear(&imm, &shape, &x).unwrap();
            let t = 1e-3;
            let ap = area_perturbed(&imm, &x, t).unwrap();
            let a0 = area_perturbed(&imm, &x, 0.0).unwrap();
            let am = area_perturbed(&imm, &x, -t).unwrap();
            let fd = (ap - 2.0 * a0 + am) / (t * t);
            assert_abs_diff_eq!(form, fd, epsilon = 1e-5 * form.abs().max(1.0));
        }
    }

    #[test]
    fn hamiltonian_form_zero_for_constant_potential() {
        let imm = flat_plane(33);
        let shape = imm.shape().unwrap();
        let f = ndarray::Array2::zeros(imm.dims());
        let v = second_variation_hamiltonian(&imm, &shape, &f).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn support_violation_detected() {
        let imm = flat_plane(17);
        let shape = imm.shape().unwrap();
        let x = ndarray::Array2::from_elem(imm.dims(), V4::new(1.0, 0.0, 0.0, 0.0));
        assert!(matches!(
            second_variation_linear(&imm, &shape, &x),
            Err(GeometryError::SupportViolation { .. })
        ));
    }

    #[test]
    fn hamiltonian_form_invariant_under_ambient_unitary_rotation() {
        // rotate by the unitary z1 -> (z1 + i z2)/sqrt2, z2 -> (i z1 + z2)/sqrt2
        fn rotate(v: V4) -> V4 {
            let z = crate::ambient::to_c2(v);
            let i = num_complex::Complex64::i();
            let s = 1.0 / 2.0_f64.sqrt();
            let w = nalgebra::Vector2::new((z[0] + i * z[1]) * s, (i * z[0] + z[1]) * s);
            crate::ambient::from_c2(w)
        }
        let n = 33;
        let f = ndarray::Array2::from_shape_fn((n, n), |(i, j)| {
            let u = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let v = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            (u + 0.3 * v * v) * 0.1
        });
        let build = |rot: bool| {
            let chart = move |a: f64, b: f64| {
                // mildly curved Lagrangian graph of grad(0.05 a^3 + 0.02 a b^2)
                let ux = 0.15 * a * a + 0.02 * b * b;
                let uy = 0.04 * a * b;
                let p = V4::new(a, ux, b, uy);
                if rot { rotate(p) } else { p }
            };
            SampledImmersion::from_chart(
                GridAxis::new(-1.0, 1.0, n),
                GridAxis::new(-1.0, 1.0, n),
                false,
                chart,
            )
        };
        let imm = build(false);
        let imm_rot = build(true);
        let shape = imm.shape().unwrap();
        let shape_rot = imm_rot.shape().unwrap();
        // window f so it is compactly supported
        let fw = ndarray::Array2::from_shape_fn((n, n), |(i, j)| {
            f[(i, j)] * super::tests::window(&imm, i, j)
        });
        let v1 = second_variation_hamiltonian(&imm, &shape, &fw).unwrap();
        let v2 = second_variation_hamiltonian(&imm_rot, &shape_rot, &fw).unwrap();
        assert_abs_diff_eq!(v1, v2, epsilon = 1e-9 * v1.abs().max(1.0));
    }
}
