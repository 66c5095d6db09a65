//! Bessel functions of the first kind by power series.
//!
//! The kernel only needs arguments up to pi/2; the series is evaluated with
//! a truncation bound below 1e-13 for sigma <= 4, where fewer than 20 terms
//! suffice and no cancellation beyond a few digits occurs.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BesselError {
    #[error("argument {0} outside the supported range [0, 4]")]
    OutOfRange(f64),
}

const SERIES_TOL: f64 = 1e-16;

/// J_0(sigma) = sum_m (-1)^m (sigma/2)^{2m} / (m!)^2.
pub fn j0(sigma: f64) -> Result<f64, BesselError> {
    if !(0.0..=4.0).contains(&sigma) {
        return Err(BesselError::OutOfRange(sigma));
    }
    let x = 0.25 * sigma * sigma;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..60u32 {
        term *= -x / ((m * m) as f64);
        sum += term;
        if term.abs() < SERIES_TOL {
            break;
        }
    }
    Ok(sum)
}

/// J_1(sigma) / sigma = (1/2) sum_m (-1)^m (sigma/2)^{2m} / (m! (m+1)!),
/// smooth through sigma = 0.
pub fn j1_over_sigma(sigma: f64) -> Result<f64, BesselError> {
    if !(0.0..=4.0).contains(&sigma) {
        return Err(BesselError::OutOfRange(sigma));
    }
    let x = 0.25 * sigma * sigma;
    let mut term = 0.5;
    let mut sum = 0.5;
    for m in 1..60u32 {
        term *= -x / ((m * (m + 1)) as f64);
        sum += term;
        if term.abs() < SERIES_TOL {
            break;
        }
    }
    Ok(sum)
}

/// d/dtheta J_0(sqrt(theta^2 - mu^2)) = -J_1(w) theta / w with
/// w = sqrt(theta^2 - mu^2); evaluated through w = 0 via the smooth ratio.
pub fn dj0_dtheta(theta: f64, mu: f64) -> Result<f64, BesselError> {
    let w2 = (theta * theta - mu * mu).max(0.0);
    Ok(-j1_over_sigma(w2.sqrt())? * theta)
}

/// First positive zero of J_0, by bisection on the series.
pub fn j0_first_zero() -> f64 {
    let mut lo = 2.0;
    let mut hi = 3.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if j0(mid).unwrap() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn value_at_zero() {
        assert_eq!(j0(0.0).unwrap(), 1.0);
        assert_eq!(j1_over_sigma(0.0).unwrap(), 0.5);
    }

    #[test]
    fn first_zero_location() {
        let z = j0_first_zero();
        assert_abs_diff_eq!(z, 2.404825557695773, epsilon = 1e-9);
        assert!(z >= FRAC_PI_2);
    }

    #[test]
    fn satisfies_its_ode() {
        // J0'' + J0'/s + J0 = 0; derivatives by central differences
        let h = 1e-4;
        for i in 1..40 {
            let s = 0.1 * i as f64;
            let f = |x: f64| j0(x).unwrap();
            let d1 = (f(s + h) - f(s - h)) / (2.0 * h);
            let d2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
            assert!((d2 + d1 / s + f(s)).abs() < 1e-7, "residual at {s}");
        }
    }

    #[test]
    fn derivative_matches_j1() {
        // J0' = -J1
        let h = 1e-5;
        for &s in &[0.3, 1.0, 1.5, 2.2] {
            let d1 = (j0(s + h).unwrap() - j0(s - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(d1, -j1_over_sigma(s).unwrap() * s, epsilon = 1e-9);
        }
    }

    #[test]
    fn monotonicity_facts_on_the_quarter_period() {
        // J0 > 0, J0' < 0, J0'' < 0 and v = J0/cos increasing with v >= cos
        let n = 10_000;
        let h = 1e-5;
        let mut prev_v = 1.0;
        for i in 0..=n {
            let s = FRAC_PI_2 * i as f64 / n as f64;
            let f = j0(s).unwrap();
            assert!(f > 0.0);
            if i > 0 {
                let d1 = (j0(s + h).unwrap() - j0(s - h).unwrap()) / (2.0 * h);
                let d2 = (j0(s + h).unwrap() - 2.0 * f + j0(s - h).unwrap()) / (h * h);
                assert!(d1 < 0.0, "J0' at {s}");
                assert!(d2 < 0.0, "J0'' at {s}");
            }
            if i < n {
                let v = f / s.cos();
                assert!(v >= prev_v - 1e-12, "v not increasing at {s}");
                assert!(v >= s.cos() - 1e-12);
                prev_v = v;
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(j0(4.5).is_err());
        assert!(j0(-0.1).is_err());
    }
}
