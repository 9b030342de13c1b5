//! Randomized Kaczmarz for dense linear systems, with the machinery to
//! verify how the iteration behaves along the singular directions of the
//! matrix.
//!
//! The solver repeatedly projects the iterate onto the hyperplane of one
//! equation, choosing row `i` with probability `||a_i||^2 / ||A||_F^2`.
//! The error component along each right singular vector `v_l` then contracts
//! in expectation by `1 - sigma_l^2 / ||A||_F^2` per step, so the error
//! drains out of the large-singular-value directions first and the iterate
//! approaches the solution along `v_n`. This crate implements the solver,
//! exact enumeration oracles and Monte Carlo ensembles that verify those
//! expectation identities, seeded generators for the test systems they are
//! checked on, and the application that falls out: driving the quotient
//! `||A x|| / ||x||` toward `sigma_n` by solving `A x = 0`.
//!
//! All randomness flows from explicit 64-bit seeds through the fixed
//! generator in [`rng`]; equal inputs produce bit-identical outputs.

pub mod analysis;
mod error;
pub mod generators;
pub mod io;
pub mod kaczmarz;
pub mod linalg;
pub mod rng;

pub use error::{Error, Result};
