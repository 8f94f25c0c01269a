//! Optical-path entanglement witnesses built from displaced on/off photon
//! detection, PPT separability bounds, and a heralded single-photon source
//! model.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod linalg;
pub mod sdp;
pub mod source;
pub mod tol;
pub mod witness;

pub use error::{Error, Result};
