//! Flat ambient conventions on R^4 identified with C^2.
//!
//! Coordinate order is (x1, y1, x2, y2) with z_j = x_j + i y_j. The fixed
//! compatible triple is
//!
//! * symplectic form  `omega = dx1 ^ dy1 + dx2 ^ dy2`,
//! * complex structure `J dx_j = dy_j`, `J dy_j = -dx_j` (multiplication by i),
//! * Euclidean metric `g`,
//!
//! so that `omega(v, J w) = g(v, w)` and `omega(Jv, Jw) = omega(v, w)`.
//! The primitive `eta = sum_j (x_j dy_j - y_j dx_j)` satisfies `d eta = 2 omega`,
//! and `alpha = dphi - eta` is the contact form on R^5 = R^4 x R_phi.
//!
//! Sign conventions fixed once here and inherited by every consumer:
//! for a Hamiltonian field `X = J grad f`, the 1-form `X -| omega` equals `-df`,
//! and on Hamiltonian-stationary surfaces `H -| omega = -d beta` where `beta`
//! is the Lagrangian angle (verified in the cone tests).

use nalgebra::{Matrix2, Vector2, Vector4};
use num_complex::Complex64;

pub type V4 = Vector4<f64>;
pub type C2 = Vector2<Complex64>;

/// Standard symplectic form.
#[inline]
pub fn omega(v: V4, w: V4) -> f64 {
    v[0] * w[1] - v[1] * w[0] + v[2] * w[3] - v[3] * w[2]
}

/// Euclidean inner product.
#[inline]
pub fn dot(v: V4, w: V4) -> f64 {
    v.dot(&w)
}

/// Complex structure (multiplication by i).
#[inline]
pub fn apply_j(v: V4) -> V4 {
    V4::new(-v[1], v[0], -v[3], v[2])
}

/// Primitive of 2*omega evaluated at point `p` on vector `v`.
#[inline]
pub fn eta(p: V4, v: V4) -> f64 {
    p[0] * v[1] - p[1] * v[0] + p[2] * v[3] - p[3] * v[2]
}

#[inline]
pub fn to_c2(v: V4) -> C2 {
    Vector2::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
}

#[inline]
pub fn from_c2(z: C2) -> V4 {
    V4::new(z[0].re, z[0].im, z[1].re, z[1].im)
}

/// Frobenius defect of `U* U - I` for the 2x2 complex matrix with the given
/// columns; zero iff the columns form a unitary frame.
pub fn unitary_defect(col1: C2, col2: C2) -> f64 {
    let u = Matrix2::from_columns(&[col1, col2]);
    let gram = u.adjoint() * u;
    let id = Matrix2::<Complex64>::identity();
    (gram - id).norm()
}

/// Complex determinant of the 2x2 matrix with the given columns.
pub fn complex_det(col1: C2, col2: C2) -> Complex64 {
    col1[0] * col2[1] - col1[1] * col2[0]
}

pub const BASIS: [V4; 4] = [
    V4::new(1.0, 0.0, 0.0, 0.0),
    V4::new(0.0, 1.0, 0.0, 0.0),
    V4::new(0.0, 0.0, 1.0, 0.0),
    V4::new(0.0, 0.0, 0.0, 1.0),
];

/// Exterior derivative of `eta` on a basis 2-plane: since the coefficients of
/// `eta` are linear, `d eta (e_a, e_b)` is exact arithmetic.
pub fn d_eta_on_basis(a: usize, b: usize) -> f64 {
    // eta = sum_j x_j dy_j - y_j dx_j; component functions eta_k(p)
    let comp = |k: usize, p: V4| -> f64 {
        match k {
            0 => -p[1],
            1 => p[0],
            2 => -p[3],
            3 => p[2],
            _ => unreachable!(),
        }
    };
    // d eta (e_a, e_b) = d/da eta_b - d/db eta_a, evaluated via linearity
    comp(b, BASIS[a]) - comp(a, BASIS[b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_v4(rng: &mut ChaCha8Rng) -> V4 {
        V4::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn omega_on_basis() {
        assert_eq!(omega(BASIS[0], BASIS[1]), 1.0);
        assert_eq!(omega(BASIS[2], BASIS[3]), 1.0);
        assert_eq!(omega(BASIS[0], BASIS[2]), 0.0);
        let v = V4::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(omega(v, v), 0.0);
    }

    #[test]
    fn compatibility_identities_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v = rand_v4(&mut rng);
            let w = rand_v4(&mut rng);
            assert_abs_diff_eq!(omega(v, apply_j(w)), dot(v, w), epsilon = 1e-14);
            assert_abs_diff_eq!(omega(apply_j(v), apply_j(w)), omega(v, w), epsilon = 1e-14);
        }
    }

    #[test]
    fn d_eta_is_twice_omega() {
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(d_eta_on_basis(a, b), 2.0 * omega(BASIS[a], BASIS[b]));
            }
        }
    }

    #[test]
    fn j_squares_to_minus_one() {
        let v = V4::new(0.3, -1.2, 2.0, 0.7);
        assert_eq!(apply_j(apply_j(v)), -v);
    }

    #[test]
    fn hamiltonian_contraction_sign() {
        // X = J grad f  =>  X -| omega = -df.  Checked on f with grad f = w.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let w = rand_v4(&mut rng); // grad f
            let v = rand_v4(&mut rng); // test vector
            let x = apply_j(w);
            assert_abs_diff_eq!(omega(x, v), -dot(w, v), epsilon = 1e-14);
        }
    }
}
