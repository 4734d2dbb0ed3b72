//! Simulation lab for multiparameter random simplicial complexes `X([n], p)`
//! with `p_i = n^{-alpha_i}`.
//!
//! The modules layer bottom-up: [`exponents`] is the parameter calculus,
//! [`sampler`] draws complexes, [`homology`] computes Betti numbers over
//! GF(2), [`cycles`] decomposes a complex into strongly connected pieces
//! and evaluates the counting statistics, [`oracle`] gives exact and
//! asymptotic moments, and [`harness`] runs Monte Carlo campaigns.

pub mod combinatorics;
pub mod cycles;
pub mod error;
pub mod exponents;
pub mod harness;
pub mod homology;
pub mod oracle;
pub mod par;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use exponents::{derive_exponents, AlphaProfile, ExponentTable, Regime};
pub use sampler::{sample_complex, Complex, SampleConfig};
