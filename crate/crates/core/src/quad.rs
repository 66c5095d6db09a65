//! Deterministic quadrature rules.
//!
//! All composite rules reduce in ascending index order, so results do not
//! depend on the degree of parallelism used to fill the sample arrays.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("composite Simpson needs an odd sample count >= 3, got {0}")]
    BadSampleCount(usize),
    #[error("adaptive quadrature failed to converge (best error estimate {0:.3e})")]
    NoConvergence(f64),
}

/// Composite Simpson rule on uniformly spaced samples (odd count).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "simpson needs odd sample count >= 3");
    let mut sum = values[0] + values[n - 1];
    let mut four = 0.0;
    let mut two = 0.0;
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            four += v;
        } else {
            two += v;
        }
    }
    sum += 4.0 * four + 2.0 * two;
    sum * h / 3.0
}

/// Trapezoid rule for one full period of a periodic function.
///
/// `values` holds one sample per node with no duplicated endpoint; for smooth
/// periodic integrands this rule converges spectrally.
pub fn trapezoid_periodic(values: &[f64], h: f64) -> f64 {
    values.iter().sum::<f64>() * h
}

/// Cumulative integral of uniformly spaced samples, fourth order.
///
/// Entry `k` approximates the integral from the first sample to sample `k`.
/// Interior intervals use the two-sided cubic rule; the first and last use
/// the one-sided cubic rule. With `periodic`, neighbor samples wrap (the
/// sample array must then cover one period inclusive of both endpoints).
pub fn cumulative_integral(values: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "cumulative integral needs at least 4 samples");
    let get = |i: isize| -> f64 {
        if periodic {
            // values[0] == values[n-1]; period has n-1 distinct samples
            let m = (n - 1) as isize;
            values[(i.rem_euclid(m)) as usize]
        } else {
            values[i.clamp(0, (n - 1) as isize) as usize]
        }
    };
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let ii = i as isize;
        let piece = if !periodic && i == 0 {
            h / 24.0 * (9.0 * get(0) + 19.0 * get(1) - 5.0 * get(2) + get(3))
        } else if !periodic && i == n - 2 {
            let m = (n - 1) as isize;
            h / 24.0 * (get(m - 3) - 5.0 * get(m - 2) + 19.0 * get(m - 1) + 9.0 * get(m))
        } else {
            h / 24.0 * (-get(ii - 1) + 13.0 * get(ii) + 13.0 * get(ii + 1) - get(ii + 2))
        };
        acc += piece;
        out.push(acc);
    }
    out
}

/// Composite Simpson evaluated at `n` (odd) nodes of `f` with an error
/// estimate from comparison against the half-resolution rule.
pub struct Estimate {
    pub value: f64,
    pub error_estimate: f64,
}

pub fn simpson_fn_with_estimate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Estimate {
    let n = if n % 2 == 0 { n + 1 } else { n };
    let n = n.max(5);
    let h = (b - a) / (n - 1) as f64;
    let values: Vec<f64> = (0..n)
        .map(|i| f(a + h * i as f64))
        .collect();
    let fine = simpson(&values, h);
    let coarse_values: Vec<f64> = values.iter().copied().step_by(2).collect();
    let coarse = simpson(&coarse_values, 2.0 * h);
    Estimate {
        value: fine,
        // Richardson: Simpson halving error shrinks by 16
        error_estimate: (fine - coarse).abs() / 15.0,
    }
}

// 7-point Gauss / 15-point Kronrod abscissae and weights (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(c - x) + f(c + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

/// Adaptive Gauss–Kronrod integration with bisection refinement.
///
/// Subdivision order is deterministic (always process the left half first),
/// so the summation order, and hence the result bits, are reproducible.
pub fn adaptive_gk(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError> {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        abs_tol: f64,
        rel_tol: f64,
        depth: usize,
        worst: &mut f64,
    ) -> f64 {
        let (value, err) = gk15(f, a, b);
        if err <= abs_tol || err <= rel_tol * value.abs() || depth >= 28 {
            if depth >= 28 {
                *worst = worst.max(err);
            }
            return value;
        }
        let mid = 0.5 * (a + b);
        let left = recurse(f, a, mid, 0.5 * abs_tol, rel_tol, depth + 1, worst);
        let right = recurse(f, mid, b, 0.5 * abs_tol, rel_tol, depth + 1, worst);
        left + right
    }
    if a == b {
        return Ok(0.0);
    }
    let mut worst = 0.0;
    let value = recurse(f, a, b, abs_tol, rel_tol, 0, &mut worst);
    if worst > abs_tol.max(rel_tol * value.abs()) * 1e3 {
        return Err(QuadError::NoConvergence(worst));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_exact_on_cubics() {
        let n = 9;
        let h = 1.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
        assert_abs_diff_eq!(simpson(&vals, h), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn cumulative_fourth_order() {
        // integral of sin on [0, 2]
        let check = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
            let cum = cumulative_integral(&vals, h, false);
            (cum[n - 1] - (1.0 - 2.0_f64.cos())).abs()
        };
        let e1 = check(129);
        let e2 = check(257);
        assert!(e1 < 1e-8);
        assert!(e2 < e1 / 6.0, "order too low: {e1:.3e} -> {e2:.3e}");
    }

    #[test]
    fn periodic_cumulative_telescopes_to_trapezoid() {
        let n = 33;
        let h = std::f64::consts::TAU / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos().exp()).collect();
        let cum = cumulative_integral(&vals, h, true);
        let trap = trapezoid_periodic(&vals[..n - 1], h);
        assert_abs_diff_eq!(cum[n - 1], trap, epsilon = 1e-12);
    }

    #[test]
    fn gk_smooth_integrand() {
        let v = adaptive_gk(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn gk_endpoint_steep_integrand() {
        // integrable endpoint behavior after the substitutions used elsewhere
        let v = adaptive_gk(&|x: f64| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-11, 1e-12).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::FRAC_PI_2, epsilon = 1e-8);
    }
}
