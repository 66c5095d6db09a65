//! Numerical toolkit for Hamiltonian-stationary Lagrangian geometry in C^2.
//!
//! The crate builds and cross-checks the explicit objects of the flat
//! two-dimensional Lagrangian area-minimization problem:
//!
//! * [`ambient`] — the fixed compatible triple (omega, g, J) on R^4 = C^2 and
//!   the contact form on R^5;
//! * [`curve`]/[`immersion`]/[`variation`] — discrete differential geometry
//!   for sampled curves and surfaces: shape operators, mean curvature,
//!   Lagrangian angle, Maslov winding, and second-variation evaluators;
//! * [`cones`] — the catalog of Hamiltonian-stationary Lagrangian cones
//!   indexed by coprime pairs (p, q) and cover multiplicity k;
//! * [`stability`] — second-variation quadratic forms on cones with
//!   instability/stability certificates;
//! * [`kernel`] — the Heisenberg-type monotonicity kernel: cutoff, wave
//!   solution, the derived F/G kernels and density ratios;
//! * [`graph`] — area minimization over Lagrangian graphs y = grad u.
//!
//! Everything is deterministic: parallel maps collect in index order and all
//! reductions run sequentially, so outputs are bit-identical across thread
//! counts (see [`exec`]).

pub mod ambient;
pub mod cones;
pub mod curve;
pub mod exec;
pub mod graph;
pub mod immersion;
pub mod kernel;
pub mod quad;
pub mod stability;
pub mod variation;
