//! Quasi-Poisson engine for the master phase space: the pencil of bivectors
//! P_z, the degenerate family P_{z,c}, bracket evaluation against the
//! observable catalog, and the structural identity residuals.

pub mod chart;
pub mod ctx;
pub mod engine;
pub mod observable;
pub mod tables;

pub use chart::{ChartIndex, RawPoint, RawTangent, Slot};
pub use ctx::{BivectorKind, PencilParams, PointCtx};
pub use engine::{
    assemble_p, bracket, bracket_grads, cartan_trivector, hamiltonian_vf, jacobiator,
    momentmap_residual, p_rank, psi_morphism_residual, quasi_jacobi_residual, WGrad,
};
pub use observable::{MatFactor, MatWord, Observable, PullTarget};
pub use tables::{bk, bk_conj, bracket_slots};

#[cfg(test)]
mod tests;
