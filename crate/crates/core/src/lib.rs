//! Prototype filter design for FBMC/OQAM transmultiplexers.
//!
//! The crate covers the whole pipeline: spectral linear algebra on the
//! band-energy matrix, baseline pulses (Mirabbasi-Martin, EGF, OFDP), the
//! interference algebra, a relaxed convex QCQP designer with an outer
//! golden-section search, and a reference transmultiplexer for empirical SIR
//! and BER measurements.
//!
//! Heavy loops (Monte Carlo trials, Q-matrix batches, ζ sweeps, filter
//! batches) go through [`exec`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iteration otherwise.

// Guards are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod designer;
pub mod error;
pub mod exec;
pub mod filter;
pub mod interference;
pub mod merit;
pub mod qcqp;
pub mod search;
pub mod spectral;
pub mod tables;
pub mod transmux;

pub use error::{Error, Result};
pub use filter::PrototypeFilter;
pub use merit::{analyze, MeritReport};
