//! Multi-mode GKP codes under Gaussian random displacement noise.

pub mod channel;
pub mod codes;
pub mod decoders;
pub mod error;
mod f2;
pub mod harness;
pub mod lattice;
pub mod rates;

pub use error::{GkpError, Result};
