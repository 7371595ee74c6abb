//! Boundary-driven charge dynamics in one-dimensional chains.
//!
//! A bulk Hamiltonian that conserves a U(1) charge (particle number or
//! total `S^z`) is perturbed by a term living on one or two boundary sites
//! that breaks the symmetry. Depending on bulk parameters the charge either
//! stays frozen (bounded variance) or fluctuates extensively.
//!
//! The crate provides:
//!
//! * [`models`]: Hamiltonians of the free, interacting, spinful and transport
//!   fermion chains and of the XXZ spin chain, both in the Nambu
//!   single-particle form and as dense many-body matrices on a sector basis.
//! * [`gaussian`]: fermionic Gaussian states evolved under quadratic
//!   Hamiltonians (continuous time and stroboscopic), with observables
//!   evaluated through Wick contractions.
//! * [`ed`]: exact diagonalization on occupation bit-string bases.
//! * [`perturbation`]: sector spectra, near-degenerate cross-charge pairs,
//!   the boundary matrix-element criterion and the energy-dependent effective
//!   Hamiltonian.
//! * [`experiments`]: seeded sample scans, quench and transport protocols,
//!   phase-diagram extraction, CSV/JSON output.
//! * [`cli`]: the command-line front end used by the `boundary-charge` binary.

pub mod cli;
pub mod ed;
mod error;
pub mod experiments;
pub mod gaussian;
pub mod linalg;
pub mod models;
pub mod perturbation;
pub mod selftest;

pub use error::{Error, Result};
pub use faer::c64;
