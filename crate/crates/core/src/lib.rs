//! Classical simulation of odd-prime-dimensional qudit circuits with
//! closed-noncontextual (CNC) phase-space operators.

pub mod analysis;
pub mod circuit;
pub mod clifford;
pub mod cnc;
pub mod dense;
pub mod enumerate;
pub mod error;
pub mod field;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod pauli;
pub mod simulate;
pub mod symplectic;

pub use error::{Error, Result};
