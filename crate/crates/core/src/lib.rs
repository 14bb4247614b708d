//! Executable cube machinery for nilsequences.
//!
//! The crate generates nilsequences from explicit nilsystems, implements the
//! dynamical parallelepiped calculus (cube vertices, face transformations,
//! regionally proximal witnesses, vertex completion), evaluates uniformity
//! seminorms and dual functions on cyclic groups with their exact identities,
//! and runs bounded finite-window tests that separate `(d-1)`-step
//! nilsequence behaviour from sequences of higher complexity.

pub mod cube_index;
pub mod cube_struct;
pub mod error;
pub mod nilgroup;
pub mod observables;
pub mod sequences;
pub mod system;
pub mod uniformity;

pub use error::{Error, Result};
