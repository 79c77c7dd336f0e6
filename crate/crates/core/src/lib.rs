//! Exact-arithmetic analysis of random homogeneous iterated function systems:
//! multifractal spectra under uniform strong separation, finite-type
//! characteristic-vector graphs with transition matrices, essential classes,
//! almost-sure dimensions via Lyapunov exponents, and closed-form
//! local-dimension intervals for commuting systems.

pub mod cache;
pub mod commuting;
pub mod config;
pub mod field;
pub mod lyapunov;
pub mod model;
pub mod netgraph;
pub mod precision;
pub mod rng;
pub mod spectrum;
