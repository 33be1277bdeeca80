//! Differential properties of s-boxes and small SPNs with respect to
//! alternative group operations on `F2^n`.

pub mod altop;
pub mod ddt;
pub mod error;
pub mod gf2;
pub mod homega;
pub mod par;
pub mod sboxclass;
pub mod spnlab;

pub use altop::{
    build_operation, AltOperation, Operation, ParallelOperation, ThetaSpec, TranslationGroup,
};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec, Subspace};
pub use par::Exec;
