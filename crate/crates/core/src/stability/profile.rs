//! Radial test profiles with analytic derivatives.
//!
//! Quadratic-form quadratures need zeta, zeta', zeta'' pointwise; sampling a
//! grid first would cap accuracy at the grid order. Profiles therefore carry
//! a closure returning the full jet, a support interval, and the interior
//! breakpoints where smoothness drops (piecewise quadrature splits there).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

type Jet = (f64, f64, f64);

#[derive(Clone)]
pub struct Profile {
    eval: Arc<dyn Fn(f64) -> Jet + Send + Sync>,
    /// Closed support interval; the jet vanishes outside.
    pub support: (f64, f64),
    /// Piece boundaries (including both support endpoints).
    pub breakpoints: Vec<f64>,
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Profile")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl Profile {
    pub fn new(
        eval: impl Fn(f64) -> Jet + Send + Sync + 'static,
        support: (f64, f64),
        mut interior_breaks: Vec<f64>,
    ) -> Self {
        let mut breakpoints = vec![support.0];
        breakpoints.append(&mut interior_breaks);
        breakpoints.push(support.1);
        Self { eval: Arc::new(eval), support, breakpoints }
    }

    #[inline]
    pub fn jet(&self, r: f64) -> Jet {
        if r < self.support.0 || r > self.support.1 {
            return (0.0, 0.0, 0.0);
        }
        (self.eval)(r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).0
    }

    /// Scale the profile values by a constant.
    pub fn scaled(&self, c: f64) -> Profile {
        let inner = self.clone();
        Profile {
            eval: Arc::new(move |r| {
                let (v, d, dd) = inner.jet(r);
                (c * v, c * d, c * dd)
            }),
            support: self.support,
            breakpoints: self.breakpoints.clone(),
        }
    }

    /// The same profile read in the logarithmic variable: rho(t) =
    /// e^{-t} zeta(e^t), with the jet transformed accordingly.
    pub fn to_log_variable(&self) -> Profile {
        let inner = self.clone();
        let support = (self.support.0.ln(), self.support.1.ln());
        let breaks: Vec<f64> =
            self.breakpoints[1..self.breakpoints.len() - 1].iter().map(|b| b.ln()).collect();
        Profile::new(
            move |t: f64| {
                let r = t.exp();
                let (z, dz, ddz) = inner.jet(r);
                let rho = z / r;
                let drho = -rho + dz;
                let ddrho = -drho + r * ddz;
                (rho, drho, ddrho)
            },
            support,
            breaks,
        )
    }

    /// FNV-1a hash of the jet sampled on a fixed 257-node grid.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: f64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        let (lo, hi) = self.support;
        for i in 0..257 {
            let r = lo + (hi - lo) * i as f64 / 256.0;
            let (v, d, dd) = self.jet(r);
            eat(v);
            eat(d);
            eat(dd);
        }
        h
    }
}

/// cos^6 bump on [center - halfwidth, center + halfwidth]; vanishes to fifth
/// order at the edges.
pub fn bump(center: f64, halfwidth: f64, amplitude: f64) -> Profile {
    let support = (center - halfwidth, center + halfwidth);
    Profile::new(
        move |r: f64| {
            let x = (r - center) / halfwidth;
            if x.abs() >= 1.0 {
                return (0.0, 0.0, 0.0);
            }
            let u = std::f64::consts::FRAC_PI_2 * x;
            let (s, c) = u.sin_cos();
            let du = std::f64::consts::FRAC_PI_2 / halfwidth;
            let v = c.powi(6);
            let dv = -6.0 * c.powi(5) * s * du;
            let ddv = (30.0 * c.powi(4) * s * s - 6.0 * c.powi(6)) * du * du;
            (amplitude * v, amplitude * dv, amplitude * ddv)
        },
        support,
        vec![],
    )
}

/// Sum of a few seeded bumps supported inside (lo, hi).
pub fn seeded_bump_sum(seed: u64, lo: f64, hi: f64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3usize);
    let mut parts = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.gen_range(lo + 0.15 * (hi - lo)..hi - 0.15 * (hi - lo));
        let w_max = (c - lo).min(hi - c);
        let w = rng.gen_range(0.4 * w_max..0.95 * w_max);
        let a = rng.gen_range(-2.0..2.0_f64);
        parts.push(bump(c, w, if a.abs() < 0.2 { 0.3 } else { a }));
    }
    let support = (lo, hi);
    Profile::new(
        move |r: f64| {
            let mut v = (0.0, 0.0, 0.0);
            for p in &parts {
                let j = p.jet(r);
                v.0 += j.0;
                v.1 += j.1;
                v.2 += j.2;
            }
            v
        },
        support,
        vec![],
    )
}

pub fn seeded_bank(seed: u64, count: usize, lo: f64, hi: f64) -> Vec<Profile> {
    (0..count).map(|i| seeded_bump_sum(seed.wrapping_add(i as u64), lo, hi)).collect()
}

/// zeta(r) = r exp(-(ln r)^2), truncated to compact support by quintic-step
/// plateaus in the log variable (identically the original function on
/// ln r in [-2, 2], zero beyond |ln r| = 3).
pub fn truncated_log_gaussian() -> Profile {
    let support = ((-3.0_f64).exp(), (3.0_f64).exp());
    Profile::new(
        move |r: f64| {
            let t = r.ln();
            // base(t) = e^t  e^{-t^2} in log variable; work in t then convert
            let b = (t - t * t).exp(); // zeta as a function of t
            let db = (1.0 - 2.0 * t) * b;
            let ddb = (-2.0 + (1.0 - 2.0 * t) * (1.0 - 2.0 * t)) * b;
            let (w, dw, ddw) = plateau_jet(t, 2.0, 3.0);
            let z = b * w;
            let dz_dt = db * w + b * dw;
            let ddz_dt = ddb * w + 2.0 * db * dw + b * ddw;
            // convert d/dt to d/dr: d/dr = e^{-t} d/dt
            let dz = dz_dt / r;
            let ddz = (ddz_dt - dz_dt) / (r * r);
            (z, dz, ddz)
        },
        support,
        vec![(-2.0_f64).exp(), (2.0_f64).exp()],
    )
}

/// C^2 plateau: 1 on |t| <= inner, 0 on |t| >= outer, quintic ramps between.
fn plateau_jet(t: f64, inner: f64, outer: f64) -> Jet {
    let a = t.abs();
    if a <= inner {
        return (1.0, 0.0, 0.0);
    }
    if a >= outer {
        return (0.0, 0.0, 0.0);
    }
    let w = outer - inner;
    let xi = (a - inner) / w;
    let v = 1.0 - (10.0 * xi.powi(3) - 15.0 * xi.powi(4) + 6.0 * xi.powi(5));
    let dv = -(30.0 * xi.powi(2) - 60.0 * xi.powi(3) + 30.0 * xi.powi(4)) / w;
    let ddv = -(60.0 * xi - 180.0 * xi.powi(2) + 120.0 * xi.powi(3)) / (w * w);
    let sign = t.signum();
    (v, sign * dv, ddv)
}

/// Profile sampled on a uniform grid; the data-contract form used in
/// serialized reports and for admissibility checks.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    pub r: Vec<f64>,
    pub zeta: Vec<f64>,
    pub dzeta: Vec<f64>,
    pub ddzeta: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("profile is not compactly supported: |zeta| + |zeta'| = {0:.3e} at a grid end")]
    NotCompact(f64),
    #[error("vertex admissibility fails: zeta(0) = {0:.3e}, zeta'(0) = {1:.3e}")]
    VertexInadmissible(f64, f64),
}

impl SampledProfile {
    pub fn from_profile(p: &Profile, lo: f64, hi: f64, n: usize) -> Result<Self, ProfileError> {
        let h = (hi - lo) / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
        let mut zeta = Vec::with_capacity(n);
        let mut dzeta = Vec::with_capacity(n);
        let mut ddzeta = Vec::with_capacity(n);
        for &ri in &r {
            let (v, d, dd) = p.jet(ri);
            zeta.push(v);
            dzeta.push(d);
            ddzeta.push(dd);
        }
        let end_defect = zeta[0].abs() + dzeta[0].abs() + zeta[n - 1].abs() + dzeta[n - 1].abs();
        if end_defect > 0.0 {
            return Err(ProfileError::NotCompact(end_defect));
        }
        if lo == 0.0 && (zeta[0] != 0.0 || dzeta[0] != 0.0) {
            return Err(ProfileError::VertexInadmissible(zeta[0], dzeta[0]));
        }
        Ok(Self { r, zeta, dzeta, ddzeta })
    }
}
