//! Continuous-variable QKD key rates against a teleportation-based
//! eavesdropper whose stations sit on lossy fiber links, with optional
//! noiseless linear amplification of the distributed entanglement.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod channel;
pub mod config;
pub mod error;
pub mod gaussian;
pub mod keyrate;
pub mod output;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
