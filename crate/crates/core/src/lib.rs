//! Polyhedral process networks, loop tiling, and FIFO recovery by splitting
//! channels on tile-crossing depth.
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the
//! command-line driver live in the companion `ppnfifo` crate.
#![no_std]

extern crate alloc;

pub mod error;
pub mod oracle;
pub mod patterns;
pub mod ppn;
pub mod presburger;
pub mod sizing;
pub mod splitter;
pub mod tiling;

pub use error::{Error, Result};
pub use presburger::{
    AffineExpr, Constraint, ConstraintKind, IntegerRelation, IntegerSet, ParamAssignment, SolverConfig, Space,
};
