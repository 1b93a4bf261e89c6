use super::stages::{modulation_on, square_reference, BilinearLowPass, LeakyIntegrator};
use super::synth::shaped_noise;
use super::trace::{mean, variance, Trace, Unit};
use super::{stream_rng, SimConfig, Stream};
use crate::chain::{dc_output, differential_output, FrontEndConfig};
use crate::error::{ensure, Error, Result};
use crate::model::{photocurrent_components, Branch, LaserSpec, PhotodiodeSpec};
use crate::noise::{frontend_electronics_noise, SpectralDensity};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Post-transient statistics of one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialStats {
    pub demod_mean: f64,
    pub demod_rms: f64,
    pub v_dc_sig: f64,
    pub v_dc_ref: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelResult {
    /// Demodulated output of the first trial, averaged over each modulation
    /// period (one sample per period).
    pub v_out: Trace,
    /// Trial-averaged DC outputs of the two first stages, V.
    pub v_dc_sig: f64,
    pub v_dc_ref: f64,
    /// Trial-averaged mean of the demodulated output, V.
    pub demod_mean: f64,
    /// Standard deviation of the demodulated output over all trials'
    /// post-transient samples, V.
    pub demod_rms: f64,
    pub trials: Vec<TrialStats>,
}

/// Runs `sim.n_trials` independent realizations of the balanced channel
/// with a Raman gain of `sample_gain_ppm` on the signal branch.
pub fn simulate_channel(
    laser: &LaserSpec,
    pd: &PhotodiodeSpec,
    sample_gain_ppm: f64,
    fe: &FrontEndConfig,
    sim: &SimConfig,
) -> Result<ChannelResult> {
    simulate_point(laser, pd, sample_gain_ppm, fe, sim, 0)
}

pub(crate) fn simulate_point(
    laser: &LaserSpec,
    pd: &PhotodiodeSpec,
    sample_gain_ppm: f64,
    fe: &FrontEndConfig,
    sim: &SimConfig,
    point: usize,
) -> Result<ChannelResult> {
    let setup = Setup::new(laser, pd, sample_gain_ppm, fe, sim)?;
    let runs: Vec<(TrialStats, Option<Trace>)> = (0..sim.n_trials)
        .into_par_iter()
        .map(|trial| {
            setup.run(point, trial).map_err(|e| match e {
                Error::Numerical(msg) => Error::Numerical(format!("trial {trial}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let n = runs.len() as f64;
    let trials: Vec<TrialStats> = runs.iter().map(|(s, _)| *s).collect();
    let avg = |f: &dyn Fn(&TrialStats) -> f64| trials.iter().map(f).sum::<f64>() / n;
    let grand_mean = avg(&|t| t.demod_mean);
    // Deviations are pooled about the mean of all trials. Within a single
    // window the slow output wanders with its own mean, which would bias the
    // variance low by about 2τ/T.
    let pooled = avg(&|t| t.demod_rms * t.demod_rms + (t.demod_mean - grand_mean).powi(2));
    let v_out = runs.into_iter().next().and_then(|(_, t)| t).expect("at least one trial");
    Ok(ChannelResult {
        v_out,
        v_dc_sig: avg(&|t| t.v_dc_sig),
        v_dc_ref: avg(&|t| t.v_dc_ref),
        demod_mean: grand_mean,
        demod_rms: pooled.sqrt(),
        trials,
    })
}

/// Everything a trial needs that does not depend on the random streams.
struct Setup<'a> {
    fe: &'a FrontEndConfig,
    sim: &'a SimConfig,
    /// Common-mode laser noise, current referred.
    rin_psd: Option<SpectralDensity>,
    n: usize,
    i_dc: f64,
    delta_i: f64,
    /// Per-sample σ of the white current noise of one branch, A.
    sigma_i: f64,
    /// Per-sample σ of the amplifier voltage noise at the integrator
    /// output, V.
    sigma_v: f64,
    pulse: Option<PulseTrain>,
}

impl<'a> Setup<'a> {
    fn new(
        laser: &'a LaserSpec,
        pd: &PhotodiodeSpec,
        gain_ppm: f64,
        fe: &'a FrontEndConfig,
        sim: &'a SimConfig,
    ) -> Result<Self> {
        laser.validate().map_err(|e| e.within("laser"))?;
        pd.validate().map_err(|e| e.within("photodiode"))?;
        fe.validate().map_err(|e| e.within("frontend"))?;
        sim.validate(fe).map_err(|e| e.within("sim"))?;
        ensure(gain_ppm.is_finite(), "sample_gain_ppm", || format!("must be finite, got {gain_ppm}"))?;
        let comps = photocurrent_components(laser, pd, gain_ppm, fe.f_m, Branch::Signal)
            .map_err(|e| e.within("frontend"))?;
        let fs = sim.sample_rate;
        let src = sim.sources;
        let mut white_i = 0.0;
        if src.shot {
            white_i += comps.s_shot.at(0.0);
        }
        let mut sigma_v = 0.0;
        if src.electronics {
            // the f² part of the input-referred density is the voltage noise
            // seen through the capacitive divider; inject it as such
            white_i += frontend_electronics_noise(fe).at(0.0);
            sigma_v = fe.amp_noise.e_n * (fe.c_f + fe.c_in) / fe.c_f * (fs / 2.0).sqrt();
        }
        let pulse = if sim.include_pulse_train {
            ensure(fs >= 4.0 * laser.rep_rate, "sim.sample_rate_Hz", || {
                format!("pulse train needs >= 4 x rep_rate = {} Hz", 4.0 * laser.rep_rate)
            })?;
            Some(PulseTrain::new(laser.rep_rate, fs, sim.n_samples()))
        } else {
            None
        };
        Ok(Setup {
            fe,
            sim,
            rin_psd: src.rin.then_some(comps.s_laser_noise),
            n: sim.n_samples(),
            i_dc: comps.i_dc,
            delta_i: comps.i_raman_amplitude,
            sigma_i: (white_i * fs / 2.0).sqrt(),
            sigma_v,
            pulse,
        })
    }

    fn run(&self, point: usize, trial: usize) -> Result<(TrialStats, Option<Trace>)> {
        let fe = self.fe;
        let fs = self.sim.sample_rate;
        let seed = self.sim.seed;
        let n = self.n;
        let rin = match &self.rin_psd {
            Some(psd) => {
                let mut rng = stream_rng(seed, point, trial, Stream::Rin);
                Some(shaped_noise(psd, n, fs, &mut rng)?)
            }
            None => None,
        };
        let mut rng_is = stream_rng(seed, point, trial, Stream::SignalCurrent);
        let mut rng_ir = stream_rng(seed, point, trial, Stream::ReferenceCurrent);
        let mut rng_vs = stream_rng(seed, point, trial, Stream::SignalVoltage);
        let mut rng_vr = stream_rng(seed, point, trial, Stream::ReferenceVoltage);
        let normal = |rng: &mut ChaCha8Rng, sigma: f64| -> f64 {
            if sigma == 0.0 {
                0.0
            } else {
                sigma * rng.sample::<f64, _>(StandardNormal)
            }
        };

        // The H(s) loop diverts the mean photocurrent through R_DC; only the
        // remainder reaches the integrator.
        let divert_sig = self.i_dc + self.delta_i / 2.0;
        let divert_ref = self.i_dc;
        let amp = self.delta_i / (8.0 * fe.f_m * fe.c_f);
        let mut int_sig = LeakyIntegrator::new(fe.c_f, fs).with_state(amp, self.delta_i / 2.0);
        let mut int_ref = LeakyIntegrator::new(fe.c_f, fs);

        let discard_idx = ((self.sim.discard(fe) * fs).ceil() as usize).min(n);
        let mut sum_sig = 0.0;
        let mut sum_ref = 0.0;
        let mut mixed = Vec::with_capacity(n);
        for k in 0..n {
            let p = self.pulse.as_ref().map_or(1.0, |t| t.at(k));
            let raman = if modulation_on(k, fs, fe.f_m) { self.delta_i } else { 0.0 };
            let common = rin.as_ref().map_or(0.0, |r| r[k]);
            let i_sig = p * (self.i_dc + raman) + common + normal(&mut rng_is, self.sigma_i);
            let i_ref = p * self.i_dc + common + normal(&mut rng_ir, self.sigma_i);
            if k >= discard_idx {
                sum_sig += i_sig;
                sum_ref += i_ref;
            }
            let v_sig = int_sig.step(i_sig - divert_sig) + normal(&mut rng_vs, self.sigma_v);
            let v_ref = int_ref.step(i_ref - divert_ref) + normal(&mut rng_vr, self.sigma_v);
            let d = differential_output(v_sig, v_ref, fe.g_diff, fe.cmrr);
            mixed.push(d * square_reference(k, fs, fe.f_m, fe.mixer_phase) * fe.g_ina);
        }
        let window = (n - discard_idx).max(1) as f64;
        let v_dc_sig = dc_output(sum_sig / window, fe.r_dc);
        let v_dc_ref = dc_output(sum_ref / window, fe.r_dc);

        let per_period = period_averaged_lowpass(&mixed, fs, fe.f_m, fe.tau);
        let v_out = Trace::new(1.0 / fe.f_m, Unit::V, per_period)?;
        let stats_window = v_out.after(self.sim.discard(fe));
        if stats_window.is_empty() {
            return Err(Error::invalid("sim.transient_discard_s", "leaves no full modulation period"));
        }
        let stats = TrialStats {
            demod_mean: mean(stats_window),
            demod_rms: variance(stats_window).sqrt(),
            v_dc_sig,
            v_dc_ref,
        };
        if !(stats.v_dc_sig.is_finite() && stats.v_dc_ref.is_finite()) {
            return Err(Error::Numerical("non-finite DC output".to_string()));
        }
        Ok((stats, (trial == 0).then_some(v_out)))
    }
}

/// Low-pass filters the mixer output at the full sample rate, then averages
/// the result over each complete modulation period. The averaging removes
/// the residual mixer ripple at 2·f_m and above, which would otherwise sit
/// on top of the much slower noise.
///
/// The filter starts from the mean of the first period rather than zero, so
/// a constant input gives no start-up transient.
fn period_averaged_lowpass(mixed: &[f64], fs: f64, f_m: f64, tau: f64) -> Vec<f64> {
    let ratio = f_m / fs;
    let first = mixed.iter().take((fs / f_m).round() as usize).copied().collect::<Vec<_>>();
    let mut lp = BilinearLowPass::new(tau, fs);
    lp.preset(mean(&first), mixed[0]);
    let mut out = Vec::new();
    let mut period = 0usize;
    let mut acc = 0.0;
    let mut count = 0usize;
    for (k, &u) in mixed.iter().enumerate() {
        let idx = (k as f64 * ratio).floor() as usize;
        if idx != period {
            out.push(acc / count as f64);
            period = idx;
            acc = 0.0;
            count = 0;
        }
        acc += lp.step(u);
        count += 1;
    }
    // keep the last period only if it is complete
    if ((mixed.len() as f64) * ratio - (period + 1) as f64).abs() < 1e-9 {
        out.push(acc / count as f64);
    }
    out
}

/// Raised-cosine pulses, half a repetition period wide, scaled to unit mean
/// over the simulated record.
struct PulseTrain {
    ratio: f64,
    scale: f64,
}

impl PulseTrain {
    fn new(rep_rate: f64, fs: f64, n: usize) -> Self {
        let mut train = PulseTrain { ratio: rep_rate / fs, scale: 1.0 };
        let m = (0..n).map(|k| train.at(k)).sum::<f64>() / n as f64;
        train.scale = 1.0 / m;
        train
    }

    #[inline]
    fn at(&self, k: usize) -> f64 {
        let x = k as f64 * self.ratio;
        let phase = x - x.floor();
        if phase < 0.5 {
            self.scale * (1.0 - (4.0 * PI * phase).cos())
        } else {
            0.0
        }
    }
}
