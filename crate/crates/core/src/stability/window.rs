//! Exact-arithmetic instability windows.
//!
//! A mode frequency ell destabilizes the (p, q) cone exactly when
//! `ell (ell - |p - q|) < pq < ell (ell + |p - q|)` with strict inequalities;
//! boundary cases are decided in rational arithmetic, never by rounding.

use num_rational::Ratio;

pub type Frac = Ratio<i64>;

pub fn frac(num: i64, den: i64) -> Frac {
    Frac::new(num, den)
}

/// Strict window test for a rational mode frequency.
pub fn instability_window(p: u32, q: u32, ell: Frac) -> bool {
    let pq = Frac::from_integer(i64::from(p) * i64::from(q));
    let gap = Frac::from_integer((i64::from(p) - i64::from(q)).abs());
    ell * (ell - gap) < pq && pq < ell * (ell + gap)
}

/// Smallest destabilizing integer mode, if any (exhaustive scan to pq).
pub fn smallest_unstable_mode(p: u32, q: u32) -> Option<u32> {
    (1..=p * q).find(|&ell| instability_window(p, q, Frac::from_integer(i64::from(ell))))
}

/// Mode frequency used for k-fold covers: min(p, q) + 1/k.
pub fn multicover_mode(p: u32, q: u32, k: u32) -> Frac {
    Frac::from_integer(i64::from(p.min(q))) + frac(1, i64::from(k))
}

/// (pq - ell^2)^2 - ell^2 (p - q)^2, exactly.
pub fn mode_discriminant(p: u32, q: u32, ell: Frac) -> Frac {
    let pq = Frac::from_integer(i64::from(p) * i64::from(q));
    let gap2 = Frac::from_integer((i64::from(p) - i64::from(q)).pow(2));
    let e2 = ell * ell;
    (pq - e2) * (pq - e2) - e2 * gap2
}

/// A single Fourier mode of the angular variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Parity {
    Cos,
    Sin,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub ell: Frac,
    pub parity: Parity,
}

impl Mode {
    pub fn integer(ell: u32, parity: Parity) -> Self {
        Self { ell: Frac::from_integer(i64::from(ell)), parity }
    }

    /// Admissible iff ell * k is a nonnegative integer (periodicity of the
    /// mode over the k-covered link).
    pub fn admissible(&self, k: u32) -> bool {
        let lk = self.ell * Frac::from_integer(i64::from(k));
        lk.is_integer() && lk >= Frac::from_integer(0)
    }

    pub fn ell_f64(&self) -> f64 {
        *self.ell.numer() as f64 / *self.ell.denom() as f64
    }
}
