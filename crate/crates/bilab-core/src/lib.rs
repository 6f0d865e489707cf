//! Numerical laboratory for the first-order-perturbed bi-harmonic operator
//!
//!   H = (-Δ)² - 2iB·∇ - i div B + q
//!
//! on a 2-D rectangle with clamped boundary conditions. The crate builds the
//! discrete Hermitian operator, synthesizes boundary spectral data
//! (eigenvalues and Neumann traces of eigenfunctions) and Dirichlet-to-Neumann
//! maps, and reconstructs curl B, q and the Hodge potential ψ from
//! complex-frequency probe pairings and their large-τ asymptotics.
//!
//! Module layout mirrors the pipeline:
//! - [`geometry`]: rectangle, tensor grid, boundary quadrature, collar.
//! - [`coeffs`]: closed-form coefficient presets (B, q) and sampled sets.
//! - [`linalg`]: banded complex LU, dense Hermitian eigensolver, block Lanczos.
//! - [`operator`]: stencil assembly of H, Dirichlet/Neumann trace maps.
//! - [`spectral`]: eigen data, pairing diagnostics, snapshots.
//! - [`bvp`]: (H - λ)u = 0 boundary value solves, DtN map, eigen-series forms.
//! - [`probes`]: complex-frequency probe geometry, amplitudes, pairings S, ℒ, ℒ*.
//! - [`reconstruct`]: Fourier recovery of curl B / q / ψ, Hodge solve, stability sweeps.

pub mod bvp;
pub mod coeffs;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod operator;
pub mod probes;
pub mod reconstruct;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{BoundaryField, Edge, ExtField, Grid, TracePair};
pub use operator::{CoefficientSet, DiscreteOperator};
pub use spectral::EigenData;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
