//! Random walks, loop-erased walks, uniform spanning trees and their Peano
//! curves on planar lattices, together with the Loewner-chain machinery
//! used to measure their scaling limits.

pub mod domain;
pub mod error;
pub mod harmonic;
pub mod lattice;
pub mod linalg;
pub mod observables;
pub mod loewner;
pub mod lerw;
pub mod peano;
pub mod rng;
pub mod stats;
pub mod ust;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
