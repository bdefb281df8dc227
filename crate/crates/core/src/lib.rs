//! Collective-spin simulation of Ramsey and Rabi spectroscopy with a noisy
//! interrogation laser.
//!
//! The crate models an ensemble of `N` uncorrelated two-level atoms that are
//! addressed collectively, so all dynamics stay inside the permutation
//! symmetric (Dicke) subspace of dimension `N + 1`, or inside the product of
//! two such subspaces when the ensemble is split into two arms.
//!
//! Laser noise enters as collective Lindblad dissipators:
//!
//! * phase noise: `γ_d/2 · (2 S_z ρ S_z − S_z² ρ − ρ S_z²)`
//! * amplitude noise: `2γ_a · (2 S_x ρ S_x − S_x² ρ − ρ S_x²)`
//!
//! Note the rate prefactors: they are kept exactly in this form everywhere
//! (`γ_d/2` for phase noise, `2γ_a` for amplitude noise), not rescaled to a
//! normalized Lindblad convention.
//!
//! Modules:
//!
//! * [`spin`]: Dicke bases, collective operators, rotations and states.
//! * [`dynamics`]: exact dephasing propagators and an adaptive Lindblad integrator.
//! * [`moments`]: exact closed equations for first and second spin moments,
//!   used for sweeps whose density matrices would be too large.
//! * [`ramsey`], [`rabi`]: the two interrogation protocols.
//! * [`sensitivity`]: the frequency-sensitivity functional, interrogation-time
//!   optimization and power-law fits.
//! * [`oracles`]: independent stochastic-trajectory and full product-space
//!   engines used to certify the collective-spin results.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
mod linalg;
pub mod moments;
pub mod oracles;
pub mod rabi;
pub mod ramsey;
pub mod sensitivity;
pub mod spin;

pub use num_complex::Complex64 as C64;

pub use dynamics::{Engine, HamiltonianSpec, Jump, NoiseModel, Scheme};
pub use error::{Error, Result};
pub use rabi::{RabiOptions, RabiProfile, ScalingStudy};
pub use ramsey::{DetuningGrid, RamseyOptions, RamseyOutcome};
pub use sensitivity::{PowerLawFit, SensitivityPoint, TauOptimum};
pub use spin::{Basis, CollectiveState, DickeBasis, Preparation, SpinOp, SplitBasis, Subensemble};
