//! Numerical core for the continuous-alphabet CEO problem.
//!
//! `L` agents observe a hidden scalar source through a common noisy channel,
//! compress their observations through a test channel `U|Y`, and a central
//! decoder estimates the source from the decoded codewords. This crate holds
//! the pure pieces: source/observation models, test channels and their rate
//! accounting, order-statistic decoders, quantization, and the numerical
//! evaluation of achievability and converse bounds on the distortion decay.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod models;
pub mod numerics;
pub mod quantizer;
pub mod testchannels;

pub use error::{Error, Result};
