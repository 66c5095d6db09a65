//! Stationarity diagnostics for graph potentials: the divergence-form
//! Euler-Lagrange residual, the Lagrangian angle and its induced-metric
//! Laplacian, and the discrete biharmonic extension used as the linearized
//! reference.

use super::{sup_norm, GraphError, GraphField};
use ndarray::Array2;

/// Induced metric mu = I + (D^2 u)^2 at an eval node: (m11, m12, m22).
fn metric(field: &GraphField, i: usize, j: usize) -> (f64, f64, f64) {
    let (a, b, c) = field.hessian(i, j);
    (1.0 + a * a + b * b, b * (a + c), 1.0 + b * b + c * c)
}

/// Laplace-Beltrami of `w` in divergence form with half-node coefficient
/// averaging: (1/sqrt(mu)) D_k (sqrt(mu) mu^{kl} D_l w). Valid where the
/// stencil reach stays on eval nodes.
fn laplace_beltrami(
    field: &GraphField,
    w: &Array2<f64>,
    i: usize,
    j: usize,
) -> Result<f64, GraphError> {
    let h = field.h;
    // sqrt(mu) mu^{-1} entries at an eval node
    let coeff = |i: usize, j: usize| -> Result<(f64, f64, f64), GraphError> {
        let (m11, m12, m22) = metric(field, i, j);
        let det = m11 * m22 - m12 * m12;
        if det <= 0.0 {
            return Err(GraphError::DegenerateMetric(i, j));
        }
        let s = det.sqrt();
        Ok((m22 / s, -m12 / s, m11 / s))
    };
    let avg = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0, (a.2 + b.2) / 2.0)
    };
    let c00 = coeff(i, j)?;
    // x-fluxes at (i +- 1/2, j)
    let flux_x = |ip: usize, im: usize, c: (f64, f64, f64)| {
        let dwx = (w[(ip, j)] - w[(im, j)]) / h;
        let dwy = 0.25 * (w[(ip, j + 1)] - w[(ip, j - 1)] + w[(im, j + 1)] - w[(im, j - 1)]) / h;
        c.0 * dwx + c.1 * dwy
    };
    let fxp = flux_x(i + 1, i, avg(c00, coeff(i + 1, j)?));
    let fxm = flux_x(i, i - 1, avg(c00, coeff(i - 1, j)?));
    let flux_y = |jp: usize, jm: usize, c: (f64, f64, f64)| {
        let dwy = (w[(i, jp)] - w[(i, jm)]) / h;
        let dwx = 0.25 * (w[(i + 1, jp)] - w[(i - 1, jp)] + w[(i + 1, jm)] - w[(i - 1, jm)]) / h;
        c.1 * dwx + c.2 * dwy
    };
    let fyp = flux_y(j + 1, j, avg(c00, coeff(i, j + 1)?));
    let fym = flux_y(j, j - 1, avg(c00, coeff(i, j - 1)?));
    let (m11, m12, m22) = metric(field, i, j);
    let s = (m11 * m22 - m12 * m12).sqrt();
    Ok(((fxp - fxm) + (fyp - fym)) / (h * s))
}

/// Divergence-form Euler-Lagrange residual sum_k D_k(Lap_mu(u_k)); NaN where
/// the stencil reach leaves the grid (three layers).
pub fn el_residual(field: &GraphField) -> Result<(Array2<f64>, f64), GraphError> {
    let (n, m) = field.dims();
    if n < 9 || m < 9 {
        return Err(GraphError::GridTooSmall(9));
    }
    let h = field.h;
    // first derivatives of u at eval nodes
    let mut ux = Array2::from_elem((n, m), f64::NAN);
    let mut uy = Array2::from_elem((n, m), f64::NAN);
    for i in 1..n - 1 {
        for j in 1..m - 1 {
            ux[(i, j)] = (field.u[(i + 1, j)] - field.u[(i - 1, j)]) / (2.0 * h);
            uy[(i, j)] = (field.u[(i, j + 1)] - field.u[(i, j - 1)]) / (2.0 * h);
        }
    }
    // Laplace-Beltrami of each, then the outer divergence
    let mut lap_x = Array2::from_elem((n, m), f64::NAN);
    let mut lap_y = Array2::from_elem((n, m), f64::NAN);
    for i in 2..n - 2 {
        for j in 2..m - 2 {
            lap_x[(i, j)] = laplace_beltrami(field, &ux, i, j)?;
            lap_y[(i, j)] = laplace_beltrami(field, &uy, i, j)?;
        }
    }
    let mut res = Array2::from_elem((n, m), f64::NAN);
    let mut max = 0.0_f64;
    for i in 3..n - 3 {
        for j in 3..m - 3 {
            let r = (lap_x[(i + 1, j)] - lap_x[(i - 1, j)]) / (2.0 * h)
                + (lap_y[(i, j + 1)] - lap_y[(i, j - 1)]) / (2.0 * h);
            res[(i, j)] = r;
            max = max.max(r.abs());
        }
    }
    Ok((res, max))
}

/// Lagrangian angle of the graph: beta = atan(l1) + atan(l2) over the
/// Hessian eigenvalues, plus the max norm of its induced-metric Laplacian.
pub fn angle_field(field: &GraphField) -> Result<(Array2<f64>, Array2<f64>, f64), GraphError> {
    let (n, m) = field.dims();
    let mut beta = Array2::from_elem((n, m), f64::NAN);
    for i in 1..n - 1 {
        for j in 1..m - 1 {
            let (a, b, c) = field.hessian(i, j);
            let tr = a + c;
            let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
            let l1 = 0.5 * (tr + disc);
            let l2 = 0.5 * (tr - disc);
            beta[(i, j)] = l1.atan() + l2.atan();
        }
    }
    let mut lap = Array2::from_elem((n, m), f64::NAN);
    let mut max = 0.0_f64;
    for i in 2..n - 2 {
        for j in 2..m - 2 {
            let v = laplace_beltrami(field, &beta, i, j)?;
            lap[(i, j)] = v;
            max = max.max(v.abs());
        }
    }
    Ok((beta, lap, max))
}

/// Apply the linearized operator (the discrete bilaplacian pairing of the
/// area functional at u = 0) to a full grid; output supported on free nodes.
fn bilaplacian_apply(field: &GraphField, w: &Array2<f64>) -> Array2<f64> {
    let (n, m) = field.dims();
    let h2 = field.h * field.h;
    let mut hxx = Array2::zeros((n, m));
    let mut hxy = Array2::zeros((n, m));
    let mut hyy = Array2::zeros((n, m));
    for i in 1..n - 1 {
        for j in 1..m - 1 {
            hxx[(i, j)] = (w[(i + 1, j)] - 2.0 * w[(i, j)] + w[(i - 1, j)]) / h2;
            hyy[(i, j)] = (w[(i, j + 1)] - 2.0 * w[(i, j)] + w[(i, j - 1)]) / h2;
            hxy[(i, j)] = (w[(i + 1, j + 1)] - w[(i + 1, j - 1)] - w[(i - 1, j + 1)]
                + w[(i - 1, j - 1)])
                / (4.0 * h2);
        }
    }
    let mut out = Array2::zeros((n, m));
    for i in 2..n - 2 {
        for j in 2..m - 2 {
            out[(i, j)] = (hxx[(i - 1, j)] - 2.0 * hxx[(i, j)] + hxx[(i + 1, j)])
                + (hyy[(i, j - 1)] - 2.0 * hyy[(i, j)] + hyy[(i, j + 1)])
                + 0.5
                    * (hxy[(i + 1, j + 1)] - hxy[(i + 1, j - 1)] - hxy[(i - 1, j + 1)]
                        + hxy[(i - 1, j - 1)]);
        }
    }
    out
}

/// Solve the linearized (biharmonic-type) problem with the band of `field`
/// as data: returns the extension filling the free nodes, by conjugate
/// gradients on the SPD free-node operator.
pub fn biharmonic_extension(field: &GraphField) -> GraphField {
    let (n, m) = field.dims();
    let mut w = field.clone();
    // start from zero interior
    for i in 0..n {
        for j in 0..m {
            if w.is_free(i, j) {
                w.u[(i, j)] = 0.0;
            }
        }
    }
    let mask = |arr: &mut Array2<f64>| {
        for i in 0..n {
            for j in 0..m {
                if !field.is_free(i, j) {
                    arr[(i, j)] = 0.0;
                }
            }
        }
    };
    let mut r = bilaplacian_apply(field, &w.u);
    r.mapv_inplace(|x| -x);
    mask(&mut r);
    let mut p = r.clone();
    let mut rs: f64 = r.iter().map(|x| x * x).sum();
    let tol = (rs.sqrt() * 1e-13).max(1e-300);
    for _ in 0..(n * m) {
        if rs.sqrt() <= tol {
            break;
        }
        let mut ap = bilaplacian_apply(field, &p);
        mask(&mut ap);
        let alpha = rs / p.iter().zip(ap.iter()).map(|(a, b)| a * b).sum::<f64>();
        w.u.zip_mut_with(&p, |x, y| *x += alpha * y);
        r.zip_mut_with(&ap, |x, y| *x -= alpha * y);
        let rs_new: f64 = r.iter().map(|x| x * x).sum();
        let beta = rs_new / rs;
        rs = rs_new;
        p.mapv_inplace(|x| x * beta);
        p += &r;
    }
    w
}

/// Pull the graph into an R^4 immersion over the eval nodes, with first
/// derivatives of u taken from the grid.
pub fn to_immersion(field: &GraphField) -> crate::immersion::SampledImmersion {
    use crate::ambient::V4;
    use crate::immersion::{GridAxis, SampledImmersion};
    let (n, m) = field.dims();
    let h = field.h;
    let points = Array2::from_shape_fn((n - 2, m - 2), |(ii, jj)| {
        let (i, j) = (ii + 1, jj + 1);
        let ux = (field.u[(i + 1, j)] - field.u[(i - 1, j)]) / (2.0 * h);
        let uy = (field.u[(i, j + 1)] - field.u[(i, j - 1)]) / (2.0 * h);
        V4::new(field.x(i), ux, field.y(j), uy)
    });
    SampledImmersion::from_points(
        GridAxis::new(field.x(1), field.x(n - 2), n - 2),
        GridAxis::new(field.y(1), field.y(m - 2), m - 2),
        false,
        points,
    )
}

/// Max deviation between the pulled-back mean-curvature 1-form and minus the
/// differential of the angle field, over nodes where both are defined.
pub fn sigma_vs_dbeta(field: &GraphField) -> Result<f64, GraphError> {
    let imm = to_immersion(field);
    let shape = imm.shape().map_err(|_| GraphError::GridTooSmall(9))?;
    let (beta, _, _) = angle_field(field)?;
    let (n, m) = field.dims();
    let h = field.h;
    let mut worst = 0.0_f64;
    for i in 3..n - 3 {
        for j in 3..m - 3 {
            let dbx = (beta[(i + 1, j)] - beta[(i - 1, j)]) / (2.0 * h);
            let dby = (beta[(i, j + 1)] - beta[(i, j - 1)]) / (2.0 * h);
            // immersion grid is offset by the band layer
            let (si, sj) = (i - 1, j - 1);
            let su = shape.sigma_h.comp_u[(si, sj)];
            let sv = shape.sigma_h.comp_v[(si, sj)];
            worst = worst.max((su + dbx).abs()).max((sv + dby).abs());
        }
    }
    Ok(worst)
}
