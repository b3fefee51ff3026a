//! Power residue symbols and Kummer splitting tests in `Q(xi, zeta)`.
//!
//! The crate models elements of `Z[xi, zeta]` exactly, reduces them into the
//! residue field `F_{q^f}` at a prime above `q`, and reads off p-th power
//! residue symbols. On top of that sit the radical families whose total
//! splitting the drivers in [`scenarios`] test.

pub mod arith;
pub mod cyc;
pub mod error;
pub mod expr;
pub mod kummer;
pub mod resfield;
pub mod scenarios;
pub mod symbols;

pub use error::{Error, Result};

/// Version of this library, echoed in CLI reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
