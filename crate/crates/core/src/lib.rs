//! Iso-entangled two-qubit bases and joint measurements.
//!
//! The crate builds every family of two-qubit bases whose four vectors
//! share the same tangle, decides local equivalence between bases,
//! simulates the triangle network with three joint measurements, and
//! constructs shift-and-multiply iso-Schmidt bases in local dimension `d`.

pub mod basis;
pub mod equivalence;
pub mod error;
pub mod families;
pub mod highdim;
pub mod io;
pub mod network;
pub mod optimize;
pub mod oracle;
pub mod qla;
pub mod rng;

pub use basis::{orthonormality_residual, Basis, Frame};
pub use error::{Error, LimitFamily, Result};
pub use families::{FamilyParams, GeneralOrthParams, Sign};
pub use qla::{BlochVector, DensityMatrix, Operator, SchmidtSpectrum, StateVector, Tolerances, C64};
