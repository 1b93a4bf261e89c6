//! Simulator and analytic noise-budget toolkit for a balanced, lock-in based
//! stimulated-Raman detection channel.
//!
//! The crate is split the same way the acquisition chain is reasoned about:
//!
//! * [`model`]: lasers, photodiodes, synthetic Raman samples and the
//!   photocurrent decomposition of one balanced channel.
//! * [`noise`]: closed-form one-sided spectral densities (RIN, shot noise,
//!   transimpedance electronics) and the balanced-channel total.
//! * [`chain`]: transfer functions and lock-in analytics (integrator TIA,
//!   DC network, subtractor, square-wave mixer, output filter, SNR).
//! * [`timesim`]: a time-domain Monte Carlo engine that runs synthetic
//!   photocurrents through a discretized copy of the chain and checks the
//!   measured statistics against the analytic budget.
//!
//! All quantities are SI unless a name says otherwise (`_ppm`, `_cm1`, `_nm`).

pub mod chain;
pub mod constants;
mod error;
pub mod model;
pub mod noise;
pub mod timesim;

pub use error::{Error, Result};
