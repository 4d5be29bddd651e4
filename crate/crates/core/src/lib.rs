//! Zero-rate error exponents for the binary symmetric channel with noisy
//! passive feedback, exact large-deviation oracles for the underlying
//! three-codeword events, and seeded simulators of the one-switch and
//! active-feedback transmission schemes.
//!
//! All exponents are in nats per channel use.

pub mod channel;
pub mod codes;
pub mod error;
pub mod exponents;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
pub mod output;
pub mod schemes;
pub mod word;

pub use error::{Error, Result};
