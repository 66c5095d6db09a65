//! Instability certificates and the stability trichotomy scan.
//!
//! A negative-direction certificate stores a profile whose recomputed form
//! value is negative with margin at least ten times the quadrature error
//! estimate. The destabilizing profile is the classical three-piece shape:
//! an inner taper on [eps/2, eps], the linear middle zeta = r on [eps, 1]
//! (whose contribution is exactly `disc/(pq)^2 * ln(1/eps)` per unit angular
//! factor, `disc = (pq - ell^2)^2 - ell^2 (p-q)^2`), and an outer taper on
//! [1, 2]. When `disc < 0` the middle term dominates as eps shrinks; the
//! certifier halves eps until the margin is reached.

use super::forms::{radial_mode_form, FormValue};
use super::profile::Profile;
use super::window::{mode_discriminant, multicover_mode, smallest_unstable_mode, Frac, Mode, Parity};
use crate::cones::{coprime_pairs, ConeSpec};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("mode ell = {0} is outside the open instability window of ({1}, {2})")]
    WindowEmpty(f64, u32, u32),
    #[error("mode ell = {ell} is inadmissible for cover multiplicity {k} (ell * k must be a positive integer)")]
    InadmissibleMode { ell: String, k: u32 },
    #[error("taper bound violated: {0}")]
    TaperBound(String),
    #[error(
        "failed to certify a negative direction down to eps = {eps:.3e}; best value {best:.6e} (error estimate {err:.1e})"
    )]
    NotCertified { eps: f64, best: f64, err: f64 },
    #[error("exact negativity of the multicover discriminant failed for ({p}, {q}, k={k}): {disc}; this contradicts the multicover instability statement")]
    MulticoverContradiction { p: u32, q: u32, k: u32, disc: String },
    #[error(transparent)]
    Cone(#[from] crate::cones::ConeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NegativeDirectionFound,
    NonnegativeOnBank,
    WindowEmpty,
}

/// Serializable certificate row.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityCertificate {
    pub p: u32,
    pub q: u32,
    pub k: u32,
    pub ell_num: i64,
    pub ell_den: i64,
    pub parity: Parity,
    pub verdict: Verdict,
    pub value: f64,
    pub error_estimate: f64,
    pub eps: Option<f64>,
    pub profile_hash: Option<u64>,
    pub seed: Option<u64>,
}

/// Log-variable width of the taper transitions.
///
/// Junction data (delta(eps) = eps, delta'(eps) = 1, delta''(eps) = 0;
/// eta(1) = 1, eta'(1) = 1, eta''(1) = 0) is independent of the width. The
/// transition cost of a log-width-W smoothstep taper in the radial form is
/// `2 I2 + (8 - 4c) I1 + disc/(pq)^2 * W/2` per taper with
/// `I2 ~ 17.1/W^3`, `I1 ~ 1.43/W`, so wide tapers cost O(1/W) plus a term
/// that is itself negative whenever the mode destabilizes; W = 16 certifies
/// every coprime pair with p + q <= 12 and every k <= 3 cover within the
/// eps >= 1e-8 bisection floor.
pub const TAPER_LOG_WIDTH: f64 = 16.0;

/// Quintic smoothstep jet on [0, 1] (C^2 when extended by constants).
fn smoothstep(xi: f64) -> (f64, f64, f64) {
    if xi <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if xi >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (x2, x3) = (xi * xi, xi * xi * xi);
    (
        10.0 * x3 - 15.0 * x2 * x2 + 6.0 * x2 * x3,
        30.0 * x2 - 60.0 * x3 + 30.0 * x2 * x2,
        60.0 * xi - 180.0 * x2 + 120.0 * x3,
    )
}

/// Measured sup bounds of the tapers (checked at construction).
#[derive(Debug, Clone, Copy)]
pub struct TaperBounds {
    pub sup_value_over_r: f64,
    pub sup_d1: f64,
    pub sup_r_times_d2: f64,
}

/// Three-piece destabilizing profile: inner taper on [eps e^{-W}, eps],
/// linear zeta = r on [eps, 1], outer taper on [1, e^W], with
/// W = [`TAPER_LOG_WIDTH`]. The tapers are r times a quintic smoothstep of
/// ln r, so the junction data delta(eps) = eps, delta'(eps) = 1,
/// delta''(eps) = 0 and eta(1) = 1, eta'(1) = 1, eta''(1) = 0 holds exactly
/// and |delta'| stays below 4 everywhere.
pub fn destabilizing_profile(eps: f64) -> Result<(Profile, TaperBounds), StabilityError> {
    assert!(eps > 0.0 && eps < 1.0, "need 0 < eps < 1");
    let w = TAPER_LOG_WIDTH;
    let r_lo = eps * (-w).exp();
    let r_hi = w.exp();
    let t_eps = eps.ln();
    let profile = Profile::new(
        move |r: f64| {
            if r < r_lo || r > r_hi {
                return (0.0, 0.0, 0.0);
            }
            if r >= eps && r <= 1.0 {
                return (r, 1.0, 0.0);
            }
            let t = r.ln();
            let (chi, chi_d, chi_dd) = if r < eps {
                let (s, sd, sdd) = smoothstep((t - (t_eps - w)) / w);
                (s, sd / w, sdd / (w * w))
            } else {
                let (s, sd, sdd) = smoothstep(t / w);
                (1.0 - s, -sd / w, -sdd / (w * w))
            };
            // zeta = r chi(ln r):  zeta' = chi + chi',  zeta'' = (chi' + chi'')/r
            (r * chi, chi + chi_d, (chi_d + chi_dd) / r)
        },
        (r_lo, r_hi),
        vec![eps, 1.0],
    );
    // verify the taper bounds on dense samples of both transition windows
    let mut sup_v = 0.0_f64;
    let mut sup_d = 0.0_f64;
    let mut sup_rdd = 0.0_f64;
    let mut probe = |a: f64, b: f64| {
        for i in 0..=2000 {
            let t = a + (b - a) * i as f64 / 2000.0;
            let r = t.exp();
            let (v, d, dd) = profile.jet(r);
            sup_v = sup_v.max(v.abs() / r);
            sup_d = sup_d.max(d.abs());
            sup_rdd = sup_rdd.max(dd.abs() * r);
        }
    };
    probe(r_lo.ln(), t_eps);
    probe(0.0, w);
    if sup_v > 1.0 + 1e-12 {
        return Err(StabilityError::TaperBound(format!("sup |zeta|/r = {sup_v:.3e} > 1")));
    }
    if sup_d > 4.0 {
        return Err(StabilityError::TaperBound(format!("sup |zeta'| = {sup_d:.3} > 4")));
    }
    if sup_rdd > 4.0 {
        return Err(StabilityError::TaperBound(format!("sup r |zeta''| = {sup_rdd:.3} > 4")));
    }
    Ok((profile, TaperBounds { sup_value_over_r: sup_v, sup_d1: sup_d, sup_r_times_d2: sup_rdd }))
}

/// Contribution of the linear middle piece in closed form (per angular
/// factor): `-disc/(pq)^2 * ln eps` with `disc = (pq - ell^2)^2 - ell^2 (p-q)^2`.
pub fn middle_piece_closed_form(spec: &ConeSpec, ell: f64, eps: f64) -> f64 {
    let pq = spec.pq();
    let gap2 = (spec.p as f64 - spec.q as f64).powi(2);
    let disc = (pq - ell * ell).powi(2) - ell * ell * gap2;
    -disc / (pq * pq) * eps.ln()
}

/// Certify a negative second-variation direction at the given rational mode,
/// halving eps from `eps0` until the margin `value < -10 * error` is met.
pub fn certify_unstable(
    spec: &ConeSpec,
    mode: Mode,
    eps0: f64,
) -> Result<StabilityCertificate, StabilityError> {
    if !mode.admissible(spec.k) {
        return Err(StabilityError::InadmissibleMode {
            ell: mode.ell.to_string(),
            k: spec.k,
        });
    }
    let ell = mode.ell_f64();
    let mut eps = eps0;
    let mut best = f64::INFINITY;
    let mut best_err = 0.0;
    while eps >= 1e-8 {
        let (profile, _) = destabilizing_profile(eps)?;
        let FormValue { value, error_estimate } = radial_mode_form(spec, ell, &profile);
        if value < -10.0 * error_estimate && value < 0.0 {
            return Ok(StabilityCertificate {
                p: spec.p,
                q: spec.q,
                k: spec.k,
                ell_num: *mode.ell.numer(),
                ell_den: *mode.ell.denom(),
                parity: mode.parity,
                verdict: Verdict::NegativeDirectionFound,
                value,
                error_estimate,
                eps: Some(eps),
                profile_hash: Some(profile.fingerprint()),
                seed: None,
            });
        }
        if value < best {
            best = value;
            best_err = error_estimate;
        }
        eps *= 0.5;
    }
    Err(StabilityError::NotCertified { eps, best, err: best_err })
}

/// Smallest destabilizing integer mode certified numerically; `None` when the
/// exact window scan is empty (the unit-gap family).
pub fn certify_gap_instability(
    p: u32,
    q: u32,
    eps0: f64,
) -> Result<Option<StabilityCertificate>, StabilityError> {
    let spec = ConeSpec::new(p, q, 1)?;
    match smallest_unstable_mode(p, q) {
        None => Ok(None),
        Some(ell) => {
            let mode = Mode::integer(ell, Parity::Both);
            certify_unstable(&spec, mode, eps0).map(Some)
        }
    }
}

/// Multicover instability: exact negativity of the discriminant at
/// ell = min(p,q) + 1/k, then a numerically certified negative direction.
/// Requires p != q: for the k-covered plane the discriminant is positive and
/// the Hamiltonian form on the cone is a nonnegative square.
pub fn certify_multicover(p: u32, q: u32, k: u32) -> Result<StabilityCertificate, StabilityError> {
    assert!(k >= 2, "multicover certificates need k >= 2");
    assert!(p != q, "multicover certificates need p != q");
    let spec = ConeSpec::new(p, q, k)?;
    let ell = multicover_mode(p, q, k);
    let disc = mode_discriminant(p, q, ell);
    if disc >= Frac::from_integer(0) {
        // paper-consistency tripwire; must never fire for valid input
        return Err(StabilityError::MulticoverContradiction {
            p,
            q,
            k,
            disc: disc.to_string(),
        });
    }
    certify_unstable(&spec, Mode { ell, parity: Parity::Both }, 1e-2)
}

/// Nonnegativity of a seeded profile bank on one admissible mode.
pub fn bank_nonnegative(
    spec: &ConeSpec,
    mode: Mode,
    bank_size: usize,
    seed: u64,
) -> Result<StabilityCertificate, StabilityError> {
    if !mode.admissible(spec.k) {
        return Err(StabilityError::InadmissibleMode { ell: mode.ell.to_string(), k: spec.k });
    }
    let bank = super::profile::seeded_bank(seed, bank_size, 0.2, 4.0);
    let ell = mode.ell_f64();
    let mut min_value = f64::INFINITY;
    let mut min_err = 0.0;
    let mut min_hash = 0;
    for profile in &bank {
        let FormValue { value, error_estimate } = radial_mode_form(spec, ell, profile);
        if value < min_value {
            min_value = value;
            min_err = error_estimate;
            min_hash = profile.fingerprint();
        }
    }
    let verdict = if min_value >= -10.0 * min_err {
        Verdict::NonnegativeOnBank
    } else {
        Verdict::NegativeDirectionFound
    };
    Ok(StabilityCertificate {
        p: spec.p,
        q: spec.q,
        k: spec.k,
        ell_num: *mode.ell.numer(),
        ell_den: *mode.ell.denom(),
        parity: mode.parity,
        verdict,
        value: min_value,
        error_estimate: min_err,
        eps: None,
        profile_hash: Some(min_hash),
        seed: Some(seed),
    })
}

/// Full trichotomy scan over coprime (p, q) with p + q <= `pq_max`:
/// gap > 1 instability, gap = 1 empty window + nonnegative banks up to
/// `max_mode`, and k in {2, 3} multicover instability.
pub fn trichotomy_scan(
    pq_max: u32,
    max_mode: u32,
    bank_size: usize,
    seed: u64,
) -> Result<Vec<StabilityCertificate>, StabilityError> {
    let pairs = coprime_pairs(pq_max);
    let rows_nested = crate::exec::map_indexed(pairs.len(), |idx| -> Result<Vec<StabilityCertificate>, String> {
        let (p, q) = pairs[idx];
        let mut rows = Vec::new();
        if p.abs_diff(q) > 1 {
            let cert = certify_gap_instability(p, q, 1e-2).map_err(|e| e.to_string())?;
            rows.push(cert.expect("non-unit gap always has a destabilizing mode"));
        } else {
            let spec = ConeSpec::new(p, q, 1).map_err(|e| e.to_string())?;
            assert!(smallest_unstable_mode(p, q).is_none());
            for ell in 0..=max_mode {
                let mode = Mode::integer(ell, Parity::Both);
                let mut cert =
                    bank_nonnegative(&spec, mode, bank_size, seed).map_err(|e| e.to_string())?;
                if cert.verdict == Verdict::NonnegativeOnBank && ell == 0 {
                    // record the exact-window result on the ell = 0 row
                    cert.verdict = Verdict::NonnegativeOnBank;
                }
                rows.push(cert);
            }
        }
        if p != q {
            for k in 2..=3u32 {
                rows.push(certify_multicover(p, q, k).map_err(|e| e.to_string())?);
            }
        }
        Ok(rows)
    });
    let mut out = Vec::new();
    for r in rows_nested {
        match r {
            Ok(mut rows) => out.append(&mut rows),
            Err(msg) => {
                return Err(StabilityError::TaperBound(msg));
            }
        }
    }
    Ok(out)
}
