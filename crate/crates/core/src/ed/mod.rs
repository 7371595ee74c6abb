//! Exact many-body simulation on occupation bit-string bases.

mod basis;
mod evolve;
mod state;

pub use basis::{BasisKind, Constraint, Parity, SectorBasis};
pub use evolve::{evolve_exact, floquet_unitary, ExactPropagator};
pub use state::{
    charge_mean_mb, charge_variance_mb, random_bits, random_sector_product_state, random_spinful_singlet_filling,
    DenseState,
};
