//! Three-party secure computation of sign-based non-linear functions
//! (sign test, relu and variants, piecewise-linear units, max/min/sort/
//! median) over power-of-two rings.
//!
//! Two parties hold additive shares of every input; a third assisting party
//! evaluates blinded comparisons and supplies multiplication material, so
//! every protocol finishes in two communication rounds without any
//! preprocessing phase. A replicated-sharing variant of the sign test and
//! relu runs all three parties as share holders.
//!
//! The crate offers three execution surfaces:
//! - [`sim`]: a deterministic in-process simulator with full transcripts;
//! - [`net`]: three networked party processes plus a client;
//! - [`bench`]: a latency/throughput harness emitting machine-readable rows.

pub mod bench;
pub mod config;
pub mod error;
pub mod fixed;
pub mod net;
pub mod oracle;
pub mod prg;
pub mod proto;
pub mod ring;
pub mod sharing;
pub mod sim;
pub mod transport;
pub mod trunc;

pub use error::{Error, Result};
pub use ring::{Elem, RingParams};
