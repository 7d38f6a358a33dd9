//! Exact heat transport through quadratic fermionic systems.
//!
//! The engine works with single-particle correlation matrices in Nambu
//! form, so a system of `M` fermionic modes costs `O(M^3)` instead of the
//! `2^M` of a many-body treatment. On top of it sit the single-mode heat
//! valve model (two baths bridged by one level), closed-form steady-state
//! and perturbative predictions, a Fock-space oracle for small systems, and
//! a seeded multi-realization experiment harness.

pub mod error;
pub mod evolution;
pub mod exec;
pub mod fock;
pub mod harness;
pub mod model;
pub mod nambu;
pub mod oracles;
pub mod output;
pub mod quad;

mod linalg;

pub use error::{Error, Result};
pub use evolution::{CurrentMethod, CurrentTrace, Propagator, PropagatorOptions};
pub use exec::Execution;
pub use linalg::Unitary;
pub use nambu::{CorrelationMatrix, NambuMatrix, QuasiparticleBasis};
