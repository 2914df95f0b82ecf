//! Exact model-based reliabilities of randomly assembled test forms under
//! the multidimensional 2PL response model, Spearman-Brown length
//! predictions, and the simulation studies built on them.
//!
//! The crate is organized around a pipeline: [`pool`] builds item pools
//! from parameter distributions, [`sampler`] draws random test forms from
//! them, [`irt`] computes each form's exact reliability by quadrature
//! ([`quad`]), [`sb`] maps reliabilities across test lengths, and
//! [`harness`] orchestrates the study grids and aggregates results that
//! [`report`] serializes. [`enumeration`] provides exhaustive oracles over
//! tiny pools for validating the sampling pipeline.

pub mod enumeration;
pub mod error;
pub mod harness;
pub mod irt;
pub mod pool;
pub mod quad;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod sb;

pub use error::{Error, Result};
