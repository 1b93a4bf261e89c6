//! Time-domain Monte Carlo of the balanced lock-in channel.
//!
//! Waveforms are synthesized sample by sample, pushed through discretized
//! versions of the analog stages and demodulated. Every trial and scan point
//! draws from its own counter-based random stream, so results do not depend
//! on the order in which the worker pool finishes them.

mod channel;
mod compare;
mod scan;
mod stages;
mod synth;
mod trace;

pub use channel::{simulate_channel, ChannelResult, TrialStats};
pub use compare::{analytic_demod_rms, compare_analytic, ComparisonRow};
pub use scan::{analyze_scan, run_scan, FittedPeak, ScanAnalysis, ScanPoint, ScanResult, ScanSpec};
pub use stages::{square_reference, BilinearLowPass, LeakyIntegrator, LEAK_FREQUENCY};
pub use synth::{synth_colored_noise, Synthesis};
pub use trace::{measure_rms, Trace, Unit};

use crate::chain::FrontEndConfig;
use crate::error::{ensure, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which physical noise processes are injected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSources {
    /// Shot noise, independent per branch.
    pub shot: bool,
    /// First-stage amplifier and resistor noise, independent per branch.
    pub electronics: bool,
    /// Laser intensity noise, common to both branches.
    pub rin: bool,
}

impl NoiseSources {
    pub const ALL: NoiseSources = NoiseSources { shot: true, electronics: true, rin: true };
    pub const NONE: NoiseSources = NoiseSources { shot: false, electronics: false, rin: false };

    pub fn any(self) -> bool {
        self.shot || self.electronics || self.rin
    }

    /// Short label such as `shot+electronics`, or `none`.
    pub fn label(self) -> String {
        let mut parts = Vec::new();
        if self.shot {
            parts.push("shot");
        }
        if self.electronics {
            parts.push("electronics");
        }
        if self.rin {
            parts.push("rin");
        }
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join("+")
        }
    }
}

impl Default for NoiseSources {
    fn default() -> Self {
        NoiseSources::ALL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Hz
    pub sample_rate: f64,
    /// s
    pub duration: f64,
    pub seed: u64,
    pub n_trials: usize,
    /// Replace the constant photocurrent by the raised-cosine pulse train.
    pub include_pulse_train: bool,
    /// Samples before this time are excluded from statistics. `None` means
    /// five LPF time constants.
    pub transient_discard: Option<f64>,
    pub sources: NoiseSources,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            sample_rate: 256e6,
            duration: 20e-3,
            seed: 1,
            n_trials: 20,
            include_pulse_train: false,
            transient_discard: None,
            sources: NoiseSources::ALL,
        }
    }
}

impl SimConfig {
    pub fn discard(&self, fe: &FrontEndConfig) -> f64 {
        self.transient_discard.unwrap_or(5.0 * fe.tau)
    }

    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn validate(&self, fe: &FrontEndConfig) -> Result<()> {
        let fs = self.sample_rate;
        ensure(fs.is_finite() && fs >= 16.0 * fe.f_m, "sample_rate_Hz", || {
            format!("must be >= 16 x f_m = {} Hz, got {fs}", 16.0 * fe.f_m)
        })?;
        let d = self.duration;
        ensure(d.is_finite() && d >= 20.0 * fe.tau, "duration_s", || {
            format!("must be >= 20 x tau = {} s, got {d}", 20.0 * fe.tau)
        })?;
        ensure(self.n_trials >= 1, "n_trials", || "must be >= 1".to_string())?;
        let discard = self.discard(fe);
        ensure(discard >= 0.0 && discard + 1.0 / fe.f_m < d, "transient_discard_s", || {
            format!("must leave at least one modulation period before {d} s, got {discard}")
        })?;
        Ok(())
    }
}

/// Independent random streams inside one trial.
#[derive(Clone, Copy, Debug)]
#[repr(u8)]
pub(crate) enum Stream {
    SignalCurrent = 0,
    ReferenceCurrent = 1,
    SignalVoltage = 2,
    ReferenceVoltage = 3,
    Rin = 4,
}

/// Generator for one (seed, point, trial, stream) tuple.
pub(crate) fn stream_rng(seed: u64, point: usize, trial: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) ^ ((trial as u64) << 8) ^ stream as u64);
    rng
}
