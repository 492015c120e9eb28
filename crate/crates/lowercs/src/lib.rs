//! Compressed-sensing polynomial approximation of smooth high-dimensional
//! functions on downward-closed (lower) multi-index sets.
//!
//! The crate provides:
//!
//! * multi-index arithmetic, lower-set predicates and enumeration, and
//!   hyperbolic-cross construction ([`multiindex`]);
//! * orthonormal tensor Legendre and Chebyshev bases, their sup-norm
//!   weights and the combinatorial quantities `K(Λ)`, `K(s)`, `Θ`
//!   ([`orthopoly`]);
//! * random sampling, normalized sensing matrices and quadrature-based
//!   reference expansions ([`sensing`], [`quadrature`]);
//! * weighted ℓ1 basis-pursuit denoising and lower iterative hard
//!   thresholding ([`solvers`]);
//! * sample-complexity calculators, empirical restricted-isometry
//!   constants and best lower s-term approximations ([`analysis`]);
//! * an experiment harness producing plot-ready CSV ([`experiment`]).

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod multiindex;
pub mod orthopoly;
pub mod quadrature;
pub mod sensing;
pub mod solvers;

pub use error::Error;
pub use multiindex::{IndexSet, MultiIndex};
pub use orthopoly::{BasisKind, WeightVector};
pub use sensing::{CoefficientVector, SampleSet, SensingSystem};
