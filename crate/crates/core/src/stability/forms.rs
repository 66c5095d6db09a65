//! Second-variation quadratic forms on cones.
//!
//! For a Hamiltonian variation with potential f on the cone over the (p, q)
//! link (induced metric dr^2 + r^2 ds^2, area form r dr ds) the form is
//!
//! `Q(f) = int [ (Lap f)^2 - r^{-4} (q-p)^2/(pq) (f_s)^2 ] r dr ds`,
//!
//! with `Lap f = f_rr + f_r / r + r^{-2} f_ss`. A single Fourier mode
//! `f = zeta(r) cos(ell s / sqrt(pq))` reduces it to the radial form
//!
//! `R(zeta) = int [ (zeta'' + zeta'/r - zeta ell^2/(pq) r^{-2})^2
//!                  - r^{-4} (q-p)^2 ell^2/(pq)^2 zeta^2 ] r dr`
//!
//! times `pi k sqrt(pq)` (`2 pi k sqrt(pq)` for ell = 0). All radial
//! quadratures run in the log variable t = ln r, where the middle piece of
//! the instability profile integrates a constant; this keeps the estimate
//! sharp down to taper radii of 1e-8.

use super::profile::Profile;
use super::window::{Mode, Parity};
use crate::cones::ConeSpec;
use crate::quad;
use std::sync::Arc;

/// Value of a quadratic form with a quadrature error estimate (Richardson,
/// from comparing against the half-resolution rule piecewise).
#[derive(Debug, Clone, Copy)]
pub struct FormValue {
    pub value: f64,
    pub error_estimate: f64,
}

fn piecewise_log_quadrature(
    breaks: &[f64],
    nodes_per_piece: usize,
    f: impl Fn(f64) -> f64,
) -> FormValue {
    let mut value = 0.0;
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0].ln(), w[1].ln());
        if b <= a {
            continue;
        }
        let est = quad::simpson_fn_with_estimate(&f, a, b, nodes_per_piece);
        value += est.value;
        err += est.error_estimate;
    }
    FormValue { value, error_estimate: err }
}

/// Radial reduction of the second-variation form for one Fourier mode.
/// The angular prefactor is reported separately by [`angular_factor`].
pub fn radial_mode_form(spec: &ConeSpec, ell: f64, zeta: &Profile) -> FormValue {
    let pq = spec.pq();
    let gap2 = (spec.q as f64 - spec.p as f64).powi(2);
    let m2 = ell * ell / pq;
    let destab = gap2 * ell * ell / (pq * pq);
    piecewise_log_quadrature(&zeta.breakpoints, 1025, move |t| {
        let r = t.exp();
        let (z, dz, ddz) = zeta.jet(r);
        let bracket = ddz + dz / r - z * m2 / (r * r);
        // (bracket^2 - destab z^2 / r^4) * r dr  ->  * e^{2t} dt
        (bracket * bracket - destab * z * z / (r * r * r * r)) * (r * r)
    })
}

/// s-integral of cos^2 (or sin^2) of one admissible mode over the k-covered
/// link length.
pub fn angular_factor(spec: &ConeSpec, ell: f64) -> f64 {
    if ell == 0.0 {
        2.0 * std::f64::consts::PI * spec.k as f64 * spec.pq_sqrt()
    } else {
        std::f64::consts::PI * spec.k as f64 * spec.pq_sqrt()
    }
}

/// Jet of a scalar field on the cone: (f, f_r, f_s, f_rr, f_ss).
pub type ConeFieldJet = (f64, f64, f64, f64, f64);

/// Scalar field on the (r, s) cone chart with the partials the form needs.
#[derive(Clone)]
pub struct ConeField {
    pub eval: Arc<dyn Fn(f64, f64) -> ConeFieldJet + Send + Sync>,
    /// Radial support; must be compact and away from the vertex unless the
    /// field satisfies f(0,.) = f_r(0,.) = 0.
    pub radial_breaks: Vec<f64>,
}

/// Separable single-mode field zeta(r) cos(ell s / sqrt(pq)) or sin.
pub fn separable_mode(spec: &ConeSpec, mode: Mode, zeta: &Profile) -> ConeField {
    let freq = mode.ell_f64() / spec.pq_sqrt();
    let parity = mode.parity;
    let z = zeta.clone();
    let breaks = zeta.breakpoints.clone();
    ConeField {
        eval: Arc::new(move |r, s| {
            let (v, d, dd) = z.jet(r);
            let (sin, cos) = (freq * s).sin_cos();
            let (ang, ang_s, ang_ss) = match parity {
                Parity::Cos => (cos, -freq * sin, -freq * freq * cos),
                Parity::Sin | Parity::Both => (sin, freq * cos, -freq * freq * sin),
            };
            (v * ang, d * ang, v * ang_s, dd * ang, v * ang_ss)
        }),
        radial_breaks: breaks,
    }
}

/// Full two-variable second-variation form, composite Simpson in ln r by
/// pieces and the periodic trapezoid rule in s.
pub fn cone_second_variation(spec: &ConeSpec, field: &ConeField, ns: usize) -> FormValue {
    let pq = spec.pq();
    let gap2 = (spec.q as f64 - spec.p as f64).powi(2);
    let length = spec.length();
    let hs = length / ns as f64;
    let eval = field.eval.clone();
    piecewise_log_quadrature(&field.radial_breaks, 1025, move |t| {
        let r = t.exp();
        let ring: Vec<f64> = (0..ns)
            .map(|j| {
                let s = hs * j as f64;
                let (_, fr, fs, frr, fss) = eval(r, s);
                let lap = frr + fr / r + fss / (r * r);
                lap * lap - gap2 / pq * fs * fs / (r * r * r * r)
            })
            .collect();
        quad::trapezoid_periodic(&ring, hs) * (r * r)
    })
}

/// The radial form after substituting r = e^t, zeta = e^t rho(t), for the
/// near-stable family q = p + 1; the integrand is the expanded quadratic
///
/// `(rho'')^2 + (2 + 2 ell^2 / (p(p+1))) (rho')^2
///    + [ (p(p+1) - ell^2)^2 - ell^2 ] / (p(p+1))^2  rho^2`.
pub fn log_substituted_form(p: u32, ell: f64, rho: &Profile) -> FormValue {
    let pq = p as f64 * (p as f64 + 1.0);
    let c1 = 2.0 + 2.0 * ell * ell / pq;
    let c0 = ((pq - ell * ell).powi(2) - ell * ell) / (pq * pq);
    let mut value = 0.0;
    let mut err = 0.0;
    for w in rho.breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let est = quad::simpson_fn_with_estimate(
            |t| {
                let (v, d, dd) = rho.jet(t);
                dd * dd + c1 * d * d + c0 * v * v
            },
            a,
            b,
            1025,
        );
        value += est.value;
        err += est.error_estimate;
    }
    FormValue { value, error_estimate: err }
}

/// Mass coefficient of the log-substituted form, exact in rationals.
pub fn log_mass_coefficient(p: u32, ell: u32) -> num_rational::Ratio<i64> {
    let pq = i64::from(p) * (i64::from(p) + 1);
    let e2 = i64::from(ell) * i64::from(ell);
    num_rational::Ratio::new((pq - e2).pow(2) - e2, pq * pq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::profile::{bump, seeded_bank, truncated_log_gaussian};
    use crate::stability::window::frac;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_radial_mode_is_nonnegative() {
        // ell = 0 on any cone: the destabilizing term vanishes
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        for p in seeded_bank(3, 10, 0.4, 2.5) {
            let v = radial_mode_form(&spec, 0.0, &p);
            assert!(v.value >= -10.0 * v.error_estimate, "{v:?}");
        }
    }

    #[test]
    fn plane_cone_has_no_destabilizing_term() {
        // (1,1): the (q-p)^2 term vanishes; the form is a square
        let spec = ConeSpec::new(1, 1, 1).unwrap();
        for ell in [1.0, 2.0, 3.5] {
            for p in seeded_bank(11, 5, 0.3, 3.0) {
                let v = radial_mode_form(&spec, ell, &p);
                assert!(v.value >= -10.0 * v.error_estimate);
            }
        }
    }

    #[test]
    fn unit_gap_log_gaussian_and_bank_nonnegative() {
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        let lg = truncated_log_gaussian();
        let v = radial_mode_form(&spec, 1.0, &lg);
        assert!(v.value >= 0.0, "{v:?}");
        for p in seeded_bank(100, 100, 0.2, 4.0) {
            let v = radial_mode_form(&spec, 1.0, &p);
            assert!(v.value >= -10.0 * v.error_estimate, "{v:?}");
        }
    }

    #[test]
    fn quadratic_homogeneity_to_machine_precision() {
        let spec = ConeSpec::new(2, 3, 1).unwrap();
        let p = bump(1.3, 0.6, 1.1);
        let v1 = radial_mode_form(&spec, 2.0, &p).value;
        let v3 = radial_mode_form(&spec, 2.0, &p.scaled(3.0)).value;
        assert_abs_diff_eq!(v3, 9.0 * v1, epsilon = 1e-12 * v1.abs().max(1.0));
    }

    #[test]
    fn mass_coefficients() {
        assert_eq!(log_mass_coefficient(1, 1), frac(0, 1));
        assert_eq!(log_mass_coefficient(1, 2), frac(0, 1));
        assert_eq!(log_mass_coefficient(2, 1), frac(2, 3));
    }

    #[test]
    fn log_substitution_matches_radial_form() {
        // 50 seeded profiles x p <= 4, ell <= 4, q = p + 1
        let profiles = seeded_bank(7, 50, 0.3, 3.0);
        for p in 1..=4u32 {
            let spec = ConeSpec::new(p, p + 1, 1).unwrap();
            for ell in 1..=4u32 {
                for zeta in &profiles {
                    let r = radial_mode_form(&spec, ell as f64, zeta);
                    let l = log_substituted_form(p, ell as f64, &zeta.to_log_variable());
                    assert_abs_diff_eq!(
                        r.value,
                        l.value,
                        epsilon = 1e-8 * (1.0 + r.value.abs())
                    );
                }
            }
        }
    }

    #[test]
    fn positive_definite_without_mass_for_p1_ell1() {
        // mass coefficient 0: form = int (rho'')^2 + 3 (rho')^2 > 0
        let rho = bump(0.3, 1.0, 0.9); // in log variable already
        let v = log_substituted_form(1, 1.0, &rho);
        assert!(v.value > 0.0);
        // and the (rho')^2 coefficient is 3 at p = 1, ell = 1
        assert_abs_diff_eq!(2.0 + 2.0 / 2.0, 3.0);
    }

    #[test]
    fn mass_coefficient_grows_monotonically_past_twice_pq() {
        // tail argument for mode banks: decisive growth once ell^2 >= 2 pq
        for p in 1..=5u32 {
            let pq = p * (p + 1);
            let mut prev = None;
            for ell in 1..=40u32 {
                let c = log_mass_coefficient(p, ell);
                if u64::from(ell * ell) >= u64::from(2 * pq) {
                    if let Some(cp) = prev {
                        assert!(c > cp, "p={p}, ell={ell}");
                    }
                    prev = Some(c);
                }
            }
        }
    }

    #[test]
    fn fourier_reduction_single_mode() {
        use crate::stability::window::{Mode, Parity};
        let spec = ConeSpec::new(1, 2, 1).unwrap();
        let zeta = bump(1.2, 0.5, 1.0);
        let ell = 1u32;
        let mode = Mode::integer(ell, Parity::Cos);
        let field = separable_mode(&spec, mode, &zeta);
        let full = cone_second_variation(&spec, &field, 64);
        let radial = radial_mode_form(&spec, ell as f64, &zeta);
        let expect = angular_factor(&spec, ell as f64) * radial.value;
        assert_abs_diff_eq!(full.value, expect, epsilon = 1e-6 * expect.abs().max(1.0));

        // ell = 0 calibration: factor doubles
        let mode0 = Mode::integer(0, Parity::Cos);
        let field0 = separable_mode(&spec, mode0, &zeta);
        let full0 = cone_second_variation(&spec, &field0, 64);
        let radial0 = radial_mode_form(&spec, 0.0, &zeta);
        assert_abs_diff_eq!(
            full0.value,
            angular_factor(&spec, 0.0) * radial0.value,
            epsilon = 1e-6 * full0.value.abs().max(1.0)
        );
    }
}
