//! Complex dense matrix core and U(n)/u(n) utilities shared by all modules.

pub mod basis;
pub mod classfn;
pub mod cmat;
pub mod eig;
pub mod random;
pub mod rmatrix;

pub use basis::{inner, inner_raw, OrthBasis};
pub use classfn::{ClassFn, ClassTerm, TracePart};
pub use cmat::{outer, vadd, vdot, vnorm_sqr, vscale, vsub, AntiHermMat, CMat, UnitaryMat};
pub use eig::{hermitian_eig, mat_exp, mat_log, polar_unitary, unitary_eig, DiagUnitary, UnitaryEig, DELTA_REG};
pub use random::{haar_random, random_antiherm};
pub use rmatrix::{project_t, project_tperp, rmatrix_apply, rmatrix_apply_operator};
