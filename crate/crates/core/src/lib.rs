//! Measurement-induced entanglement and information for free-fermion,
//! random-singlet, stabilizer and tensor-network states.

pub mod error;
pub mod estimator;
pub mod gaussian;
pub mod lattice;
pub mod linalg;
pub mod mera;
pub mod oracle;
pub mod region;
pub mod singlet;
pub mod stabilizer;

pub use error::{Error, Result};
pub use region::RegionSpec;
