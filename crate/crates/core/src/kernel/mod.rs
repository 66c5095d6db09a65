//! The Heisenberg-type monotonicity kernel.
//!
//! Built in layers: Bessel J_0 ([`bessel`]), the mollified cutoff and its
//! ODE solution ([`cutoff`]), the Riemann-function wave solution ([`wave`]),
//! the derived kernels F and G with their certification ([`fg`]), and the
//! contact-geometry side: Legendrian lifts, contact vector fields,
//! tangential identities, and density ratios ([`heis`]).

pub mod bessel;
pub mod cutoff;
pub mod fg;
pub mod heis;
pub mod wave;

pub use cutoff::{Cutoff, CutoffError, DEFAULT_C};
pub use fg::{default_axes, f_at, g_at, KernelCertification, KernelTables};
pub use heis::{contact_field, contact_form, density_ratio, heis_point, lie_scaling_check, tangential_residuals, HeisPoint, LiftedImmersion};
pub use wave::{eta_at, WaveTable};
