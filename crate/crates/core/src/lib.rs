//! qpflow core: quasi-Poisson master phase space numerics.

pub mod bivector;
pub mod dynamics;
pub mod error;
pub mod forms;
pub mod integrals;
pub mod matlie;
pub mod phasespace;
pub mod scalars;
pub mod spinrs;
pub mod suites;

pub use error::{Error, Result};
