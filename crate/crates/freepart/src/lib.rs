//! Exact-arithmetic moments and free cumulants for finite systems of freely
//! independent particles, their Poissonized variants, and the limiting free
//! Poisson / free Levy white noises.
//!
//! Everything is computed over exact rationals. Two independent operator-level
//! oracles (a truncated full Fock space and a truncated free-product space)
//! certify the combinatorial pipeline; see the `fock` module.

pub mod combinat;
pub mod config;
pub mod cumulants;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod rational;
pub mod space;
pub mod systems;
pub mod targets;

pub use error::{Error, Result};
pub use rational::Rat;
