//! Second-variation stability analysis of the cone catalog.
//!
//! The trichotomy: cones with |p - q| > 1 admit certified negative
//! directions, the unit-gap family |p - q| = 1 has an empty (exact) integer
//! instability window and nonnegative seeded profile banks, and every
//! multiple cover k >= 2 is unstable at the fractional mode min(p,q) + 1/k.

pub mod certify;
pub mod forms;
pub mod profile;
pub mod window;

pub use certify::{
    bank_nonnegative, certify_gap_instability, certify_multicover, certify_unstable,
    destabilizing_profile, trichotomy_scan, StabilityCertificate, StabilityError, Verdict,
};
pub use forms::{
    angular_factor, cone_second_variation, log_substituted_form, radial_mode_form, separable_mode,
    ConeField, FormValue,
};
pub use profile::{bump, seeded_bank, truncated_log_gaussian, Profile, SampledProfile};
pub use window::{
    instability_window, mode_discriminant, multicover_mode, smallest_unstable_mode, Frac, Mode,
    Parity,
};
