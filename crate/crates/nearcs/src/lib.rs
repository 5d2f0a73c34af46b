//! Side-information-assisted compressed-sensing channel estimation for
//! dual-band near-field XL-MIMO.
//!
//! The crate is organized around the simulation pipeline:
//!
//! * [`numerics`] — complex matrices, seeded random streams, QR least squares.
//! * [`channel`] — block-sparse angular channel synthesis, steering vectors,
//!   the Sub-6GHz support channel and the pilot measurement model.
//! * [`sideinfo`] — out-of-band probability vectors and the optimal prior
//!   coefficient `D` for logit-weighted greedy recovery.
//! * [`estimators`] — the OMP family (OMP, BOMP, CLW/CSLW variants), least
//!   squares and the genie-aided bound.
//! * [`theory`] — special functions and the selection-statistic distribution
//!   theory used to validate the prior coefficient.
//! * [`harness`] — seeded Monte Carlo sweeps, metrics, CSV/manifest output.
//!
//! Trials are data-parallel. With the default `parallel` feature they run on
//! a rayon pool; without it the crate falls back to a sequential executor
//! with identical (byte-for-byte) results.

pub mod channel;
pub mod estimators;
pub mod harness;
pub mod numerics;
pub mod sideinfo;
pub mod theory;

pub use numerics::{ComplexMatrix, RngStream};
