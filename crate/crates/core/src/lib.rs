//! Simulation and verification toolkit for t-recipient quantum private
//! broadcasting.
//!
//! The crate is organized in six layers:
//!
//! - [`linalg`]: dense complex operators, tensor/partial-trace kernels,
//!   norms, and Haar-random unitary sampling
//! - [`symspace`]: permutation operators, the symmetric projector, the
//!   Dicke-basis isometry, and the symmetric projective measurement
//! - [`pauli`]: generalized Pauli operators and the quantum one-time pad,
//!   including the same-key broadcast variant and its distinguishing attack
//! - [`designs`]: unitary ensembles, twirling channels, the analytic Haar
//!   moment operator, and exact/approximate design certification
//! - [`qpb`]: broadcast scheme semantics — encrypt/decrypt, correctness,
//!   symmetric-design verification, and the side-information experiment
//! - [`keylen`]: key-length accounting for one-time-pad vs design-based
//!   schemes

pub mod budget;
pub mod designs;
pub mod error;
pub mod keylen;
pub mod linalg;
pub mod pauli;
pub mod qpb;
pub mod symspace;

pub use error::{QpbError, Result};
