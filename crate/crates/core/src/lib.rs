//! Signature volatility models.
//!
//! Exact shuffle and tensor algebra over a finite alphabet, Lyndon-word
//! decompositions, truncated path signatures, a Monte Carlo engine for the
//! price process `dS/S = ⟨σ, 𝕎̂_t⟩ dB_t` and for the associated
//! signature-drift SDE, Black–Scholes smile tools, and executable
//! martingality / moment diagnostics.

pub mod algebra;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod lyndon;
pub mod pricing;
pub mod signature;
pub mod stats;

pub use error::{Error, Result};
