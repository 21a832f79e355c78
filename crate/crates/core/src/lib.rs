//! Orlicz-modular inequalities for noncommutative martingales on matrix
//! algebras: Orlicz functions and their indices, singular-value functional
//! calculus, finite filtrations, Rademacher and lacunary averages,
//! interpolation constants and seeded verifiers.

pub mod cli;
pub mod eigen;
pub mod error;
pub mod interpolation;
pub mod martingale;
pub mod noise_fourier;
pub mod operator;
pub mod orlicz;
pub mod random;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
