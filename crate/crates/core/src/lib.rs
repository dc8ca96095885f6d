//! Stationary queue-length analysis for the M^X/G/1 retrial queue.
//!
//! Customers arrive in Poisson batches at rate `lambda`; a customer that finds
//! the server busy joins an orbit and retries after independent Exp(`mu`)
//! delays. Service times and batch sizes may have regularly varying
//! (power-law) tails. The crate provides three independent routes to the
//! stationary distributions of the system size and orbit occupancy:
//!
//! * [`exact`] — truncated power-series extraction from the known generating
//!   functions, built on the [`series`] calculus over [`model`] primitives;
//! * [`asymptotics`] — closed-form tail constants and curves, including the
//!   refined equivalence coefficient for the difference between the retrial
//!   and non-retrial system-size tails;
//! * [`simulate`] — discrete-event simulation with replicated, reproducible
//!   random streams and time-weighted estimates.
//!
//! The three routes cross-validate each other; the CLI crate wires them into
//! file-producing commands and a comparison report.

// Float validations use `!(x > 0.0)` so that NaN is rejected along with the
// out-of-range values; index loops over coupled slices stay as indices.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod model;
pub mod quad;
pub mod rng;
pub mod series;
pub mod simulate;

pub use error::{Error, Result};
