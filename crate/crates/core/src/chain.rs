//! Frequency-domain model of one acquisition channel: integrator TIA with DC
//! feedback network, subtractor, square-wave mixer, instrumentation amplifier
//! and first-order output filter.

use crate::error::{ensure, Result};
use crate::noise::AmplifierNoiseSpec;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Components of the slow DC feedback network `H(s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HNetwork {
    pub r_x: f64,
    pub c_x: f64,
    pub r_y: f64,
    pub r_d: f64,
    pub c_d: f64,
}

impl Default for HNetwork {
    /// Zero near 1 Hz, pole near 1 kHz, unity mid-band gain.
    fn default() -> Self {
        HNetwork {
            r_x: 1e6,
            c_x: 160e-9,
            r_y: 1e6,
            r_d: 16e3,
            c_d: 10e-9,
        }
    }
}

impl HNetwork {
    pub fn zero_frequency(&self) -> f64 {
        1.0 / (2.0 * PI * self.r_x * self.c_x)
    }

    pub fn pole_frequency(&self) -> f64 {
        1.0 / (2.0 * PI * self.r_d * self.c_d)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r_x_ohm", self.r_x),
            ("c_x_F", self.c_x),
            ("r_y_ohm", self.r_y),
            ("r_d_ohm", self.r_d),
            ("c_d_F", self.c_d),
        ] {
            ensure(v > 0.0 && v.is_finite(), name, || format!("must be > 0, got {v}"))?;
        }
        Ok(())
    }
}

/// Every component value of one acquisition channel.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontEndConfig {
    /// Integrator feedback capacitance, F.
    pub c_f: f64,
    /// Total capacitance on the virtual-ground node (photodiode + strays), F.
    pub c_in: f64,
    /// DC transimpedance, Ω.
    pub r_dc: f64,
    /// Op-amp gain-bandwidth product, Hz.
    pub gbwp: f64,
    pub amp_noise: AmplifierNoiseSpec,
    /// Differential gain of the subtractor stage.
    pub g_diff: f64,
    /// Linear common-mode rejection ratio (may be infinite).
    pub cmrr: f64,
    /// Instrumentation amplifier gain after the mixer.
    pub g_ina: f64,
    /// Output low-pass time constant, s.
    pub tau: f64,
    /// Modulation (and mixer clock) frequency, Hz.
    pub f_m: f64,
    /// Residual reference phase error, rad. Zero is the optimum phase for the
    /// integrated signal.
    pub mixer_phase: f64,
    /// K
    pub temperature: f64,
    pub h_net: HNetwork,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        Self::experiment()
    }
}

impl FrontEndConfig {
    /// Component values of the methanol measurement (R_DC = 47 kΩ).
    pub fn experiment() -> Self {
        FrontEndConfig {
            c_f: 0.5e-12,
            c_in: 15e-12,
            r_dc: 47e3,
            gbwp: 4e9,
            amp_noise: AmplifierNoiseSpec::default(),
            g_diff: 40.0,
            cmrr: 56.0,
            g_ina: 10.0,
            tau: 330e-6,
            f_m: 1e6,
            mixer_phase: 0.0,
            temperature: crate::constants::DEFAULT_TEMPERATURE,
            h_net: HNetwork::default(),
        }
    }

    /// Values used for the design-time noise analysis (R_DC = 20 kΩ).
    pub fn analysis() -> Self {
        FrontEndConfig {
            r_dc: 20e3,
            ..Self::experiment()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_f_F", self.c_f),
            ("c_in_F", self.c_in),
            ("r_dc_ohm", self.r_dc),
            ("gbwp_Hz", self.gbwp),
            ("g_diff", self.g_diff),
            ("g_ina", self.g_ina),
            ("tau_s", self.tau),
            ("f_m_Hz", self.f_m),
            ("temperature_K", self.temperature),
        ] {
            ensure(v > 0.0 && v.is_finite(), name, || format!("must be > 0, got {v}"))?;
        }
        ensure(self.cmrr >= 1.0, "cmrr", || {
            format!("must be >= 1 (linear ratio), got {}", self.cmrr)
        })?;
        ensure(self.mixer_phase.is_finite(), "mixer_phase_rad", || "must be finite".into())?;
        self.amp_noise.validate()?;
        self.h_net.validate().map_err(|e| e.within("h_net"))
    }

    /// Low-pass cut-off `1/(2πτ)`.
    pub fn f_c(&self) -> f64 {
        lpf_fc(self.tau)
    }
}

/// `−R_f / (1 + j2πf·R_f·C_f)`, V/A.
pub fn standard_tia_tf(f: f64, r_f: f64, c_f: f64) -> Complex64 {
    let jw = Complex64::new(0.0, 2.0 * PI * f);
    -r_f / (1.0 + jw * r_f * c_f)
}

/// Response of the DC feedback network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HResponse {
    /// The network integrates, so its DC gain is unbounded.
    InfiniteDc,
    Finite(Complex64),
}

impl HResponse {
    pub fn magnitude(&self) -> f64 {
        match self {
            HResponse::InfiniteDc => f64::INFINITY,
            HResponse::Finite(h) => h.norm(),
        }
    }
}

/// `H(jω) = −(1/R_y)·(1 + jωR_xC_x)/(jωC_x)·1/(1 + jωR_dC_d)`.
pub fn h_network_tf(f: f64, h: &HNetwork) -> HResponse {
    if f == 0.0 {
        return HResponse::InfiniteDc;
    }
    let jw = Complex64::new(0.0, 2.0 * PI * f);
    let v = -(1.0 / h.r_y) * (1.0 + jw * h.r_x * h.c_x) / (jw * h.c_x) / (1.0 + jw * h.r_d * h.c_d);
    HResponse::Finite(v)
}

/// In-band transimpedance of the integrator, `1/(2πf·C_f)`.
pub fn advanced_tia_ac_gain(f: f64, c_f: f64) -> Result<f64> {
    ensure(f > 0.0, "f_Hz", || {
        format!("integrator gain is unbounded at f = {f} Hz")
    })?;
    Ok(1.0 / (2.0 * PI * f * c_f))
}

/// `V_DC = −R_DC · I_DC`.
pub fn dc_output(i_dc: f64, r_dc: f64) -> f64 {
    -r_dc * i_dc
}

/// Average optical power recovered from the DC output:
/// `P̄ = −V_DC / (R_DC · R_λ)`.
pub fn power_from_dc_output(v_dc: f64, r_dc: f64, responsivity: f64) -> f64 {
    -v_dc / (r_dc * responsivity)
}

/// `GBWP · C_f / (C_f + C_in)`.
pub fn closed_loop_bandwidth(gbwp: f64, c_f: f64, c_in: f64) -> f64 {
    gbwp * c_f / (c_f + c_in)
}

/// Subtractor with finite CMRR:
/// `G·[(v_sig − v_ref) + ((v_sig + v_ref)/2)/CMRR]`.
pub fn differential_output(v_sig: f64, v_ref: f64, g_diff: f64, cmrr: f64) -> f64 {
    g_diff * ((v_sig - v_ref) + 0.5 * (v_sig + v_ref) / cmrr)
}

/// Waveform presented to the ±1 square-wave mixer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixerInput {
    /// 0/A square wave, 50 % duty. Zero phase means the edges coincide
    /// with the reference edges.
    Square,
    /// ±A triangle: a zero-mean square wave after the integrator. Zero phase
    /// means the reference edges sit on the triangle zero crossings.
    IntegratedSquare,
    /// A·sin, zero phase in phase with the reference fundamental.
    Sine,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixerResponse {
    /// Mean output per unit input amplitude A.
    pub dc_gain: f64,
    /// Output/input variance ratio for zero-mean white noise.
    pub noise_variance_gain: f64,
}

fn wrap_phase(phase: f64) -> f64 {
    let p = (phase + PI).rem_euclid(2.0 * PI) - PI;
    // keep +π rather than −π so a half-period shift reads as π
    if p == -PI {
        PI
    } else {
        p
    }
}

/// Ideal double-balanced mixer driven by a ±1 square reference.
///
/// Multiplying by ±1 leaves the instantaneous power unchanged, so the white
/// noise variance gain is exactly one; the DC gain is the period average of
/// the product at the given reference phase offset.
pub fn mixer_demod(input: MixerInput, reference_phase: f64) -> MixerResponse {
    let p = wrap_phase(reference_phase).abs();
    let dc_gain = match input {
        MixerInput::Square => 0.5 * (1.0 - 2.0 * p / PI),
        MixerInput::IntegratedSquare => {
            if p <= PI / 2.0 {
                0.5 * (1.0 - 4.0 * p * p / (PI * PI))
            } else {
                let q = PI - p;
                -0.5 * (1.0 - 4.0 * q * q / (PI * PI))
            }
        }
        MixerInput::Sine => 2.0 / PI * p.cos(),
    };
    MixerResponse {
        dc_gain,
        noise_variance_gain: 1.0,
    }
}

/// Mixer DC gain assumed by the stage-product gain budget: a 0/A square in
/// phase with the reference.
pub const MIXER_DC_GAIN: f64 = 0.5;

/// Demodulated output of an integrated 0/ΔI square current relative to the
/// stage-product budget `ΔI · advanced_tia_ac_gain(f_m) · ½`. The integrator
/// turns the square into a triangle; at optimum phase its demodulated mean
/// is `ΔI/(16 f_m C_f)` against `ΔI/(4π f_m C_f)`, a ratio of π/4.
pub const INTEGRATED_SQUARE_FACTOR: f64 = PI / 4.0;

/// ENBW of a first-order low-pass, `1/(4τ)`.
pub fn lpf_enbw(tau: f64) -> f64 {
    1.0 / (4.0 * tau)
}

/// −3 dB frequency of a first-order low-pass, `1/(2πτ)`.
pub fn lpf_fc(tau: f64) -> f64 {
    1.0 / (2.0 * PI * tau)
}

/// Lock-in signal-to-noise ratio `(1/√2)·ΔP / √(S_n/(4τ))`.
///
/// `s_n` is the total input-referred density at the modulation frequency in
/// W²/Hz. A noiseless input returns `f64::INFINITY`.
pub fn snr(delta_p: f64, s_n: f64, tau: f64) -> f64 {
    if s_n == 0.0 {
        return f64::INFINITY;
    }
    delta_p / (2.0f64.sqrt() * (s_n / (4.0 * tau)).sqrt())
}

/// Smallest `ΔP/P̄` (ppm) detected at SNR = 1.
pub fn sensitivity_ppm(s_n: f64, tau: f64, p_avg: f64) -> Result<f64> {
    ensure(p_avg > 0.0, "average_power_W", || format!("must be > 0, got {p_avg}"))?;
    Ok(2.0f64.sqrt() * (s_n / (4.0 * tau)).sqrt() / p_avg * 1e6)
}

/// Raman-signal transimpedance of the whole channel at one frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainReport {
    /// Ω
    pub gain: f64,
    /// False when `f` lies beyond the first-stage closed-loop bandwidth; the
    /// gain is still the in-band formula.
    pub within_bandwidth: bool,
}

/// Gain target for the Raman signal path, Ω.
pub const GAIN_REQUIREMENT: f64 = 10e6;

/// `1/(2πf·C_f) · G_diff · ½ · G_INA`.
pub fn total_ac_gain(f: f64, fe: &FrontEndConfig) -> Result<GainReport> {
    let gain = advanced_tia_ac_gain(f, fe.c_f)? * fe.g_diff * MIXER_DC_GAIN * fe.g_ina;
    Ok(GainReport {
        gain,
        within_bandwidth: f < closed_loop_bandwidth(fe.gbwp, fe.c_f, fe.c_in),
    })
}

/// Volts of demodulated output per ampere of 0/ΔI square Raman current on
/// the signal branch, including the integrator waveform factor and the
/// configured reference phase error. The signal drives only one input of
/// the subtractor, so the finite CMRR adds `1/(2·CMRR)` to its gain.
pub fn demod_signal_gain(fe: &FrontEndConfig) -> Result<f64> {
    let budget = total_ac_gain(fe.f_m, fe)?.gain;
    let phase = mixer_demod(MixerInput::IntegratedSquare, fe.mixer_phase).dc_gain
        / mixer_demod(MixerInput::IntegratedSquare, 0.0).dc_gain;
    let single_ended = 1.0 + 0.5 / fe.cmrr;
    Ok(budget * INTEGRATED_SQUARE_FACTOR * phase * single_ended)
}

/// Baseband one-sided density after the ±1 square mixer for a stationary
/// input of one-sided density `s_in` (any unit): each odd harmonic `n` of the
/// reference folds `S(n·f_m)` down with weight `8/(n²π²)`; the weights sum
/// to one.
pub fn folded_baseband_density(s_in: impl Fn(f64) -> f64, f_m: f64, harmonics: usize) -> f64 {
    let mut acc = 0.0;
    let mut weight_sum = 0.0;
    for k in 0..harmonics {
        let n = (2 * k + 1) as f64;
        let w = 8.0 / (n * n * PI * PI);
        acc += w * s_in(n * f_m);
        weight_sum += w;
    }
    // The remaining weight goes on the last evaluated harmonic, which is
    // exact for densities that are flat at high frequency.
    let n_last = (2 * harmonics - 1) as f64;
    acc + (1.0 - weight_sum) * s_in(n_last * f_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn standard_tia_examples() {
        let r = 10e6;
        let c = 0.5e-12;
        assert_relative_eq!(standard_tia_tf(0.0, r, c).re, -r);
        let pole = 1.0 / (2.0 * PI * r * c);
        assert_relative_eq!(standard_tia_tf(pole, r, c).norm(), r / 2f64.sqrt(), max_relative = 1e-12);
        // ωRC = 10π, |g| = R/√(1 + 100π²)
        assert_relative_eq!(standard_tia_tf(1e6, r, c).norm(), 318_148.75, max_relative = 1e-6);
    }

    #[test]
    fn standard_and_integrator_agree_at_high_frequency() {
        let c = 0.5e-12;
        for f in [1e8, 1e9] {
            let std = standard_tia_tf(f, 1e9, c).norm();
            let adv = advanced_tia_ac_gain(f, c).unwrap();
            assert_relative_eq!(std, adv, max_relative = 1e-6);
        }
    }

    #[test]
    fn h_network_shape() {
        let h = HNetwork::default();
        assert_eq!(h_network_tf(0.0, &h), HResponse::InfiniteDc);
        let low1 = h_network_tf(1e-3, &h).magnitude();
        let low2 = h_network_tf(2e-3, &h).magnitude();
        assert_relative_eq!(low1 / low2, 2.0, max_relative = 1e-3);
        let corner = h.zero_frequency().max(h.pole_frequency());
        let mut last = f64::INFINITY;
        for k in 1..40 {
            let f = corner * 1.3f64.powi(k);
            let m = h_network_tf(f, &h).magnitude();
            assert!(m < last);
            last = m;
        }
        // (R_x/R_y) / (2π·1 MHz·R_d·C_d) ≈ 9.9e-4
        let at_fm = h_network_tf(1e6, &h).magnitude();
        assert!(at_fm < 1e-2);
        assert_relative_eq!(at_fm, 9.947e-4, max_relative = 1e-3);
    }

    #[test]
    fn integrator_gain_examples() {
        assert_relative_eq!(advanced_tia_ac_gain(1e6, 0.5e-12).unwrap(), 318_309.886, max_relative = 1e-9);
        assert_relative_eq!(advanced_tia_ac_gain(10e6, 0.5e-12).unwrap(), 31_830.988_6, max_relative = 1e-9);
        assert!(advanced_tia_ac_gain(0.0, 0.5e-12).is_err());
    }

    #[test]
    fn dc_output_examples() {
        assert_eq!(dc_output(0.0, 47e3), 0.0);
        assert_relative_eq!(dc_output(20e-6, 47e3), -0.94, max_relative = 1e-12);
        let p = power_from_dc_output(dc_output(0.5 * 40e-6, 47e3), 47e3, 0.5);
        assert_relative_eq!(p, 40e-6, max_relative = 1e-15);
    }

    #[test]
    fn bandwidth_examples() {
        assert_relative_eq!(closed_loop_bandwidth(4e9, 0.5e-12, 15e-12), 129.032e6, max_relative = 1e-5);
        assert_eq!(closed_loop_bandwidth(4e9, 0.5e-12, 0.0), 4e9);
        let a = closed_loop_bandwidth(4e9, 0.1e-12, 1e-9);
        let b = closed_loop_bandwidth(4e9, 0.05e-12, 1e-9);
        assert_relative_eq!(a / b, 2.0, max_relative = 1e-4);
    }

    #[test]
    fn differential_examples() {
        assert_eq!(differential_output(0.3, 0.3, 40.0, f64::INFINITY), 0.0);
        assert_relative_eq!(differential_output(0.3, 0.3, 40.0, 56.0), 40.0 * 0.3 / 56.0, max_relative = 1e-14);
        assert_eq!(differential_output(0.3, 0.0, 40.0, f64::INFINITY), 12.0);
    }

    /// Fourier-series oracle: mean of the product of the input waveform and
    /// the ±1 reference (coefficients 4/(nπ) on odd harmonics).
    fn fourier_dc(input: MixerInput, phase: f64) -> f64 {
        (0..200_000)
            .map(|k| {
                let n = (2 * k + 1) as f64;
                let r = 4.0 / (n * PI);
                let (a, shift) = match input {
                    // 0/1 square: fundamental 2/(nπ) in phase
                    MixerInput::Square => (2.0 / (n * PI), 0.0),
                    // ±1 triangle: 8/(n²π²) with alternating sign when read
                    // against a reference whose edges sit on its zero crossings
                    MixerInput::IntegratedSquare => (8.0 / (n * n * PI * PI) * if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
                    MixerInput::Sine => (if k == 0 { 1.0 } else { 0.0 }, 0.0),
                };
                0.5 * a * r * (n * (phase + shift)).cos()
            })
            .sum()
    }

    #[test]
    fn mixer_closed_forms_match_fourier_sums() {
        for input in [MixerInput::Square, MixerInput::IntegratedSquare, MixerInput::Sine] {
            for phase in [0.0, 0.3, PI / 4.0, PI / 2.0, 2.0, PI, -1.1] {
                let closed = mixer_demod(input, phase).dc_gain;
                let series = fourier_dc(input, phase);
                assert!((closed - series).abs() < 1e-5, "{input:?} φ={phase}: {closed} vs {series}");
            }
        }
    }

    #[test]
    fn mixer_examples() {
        let sq = mixer_demod(MixerInput::Square, 0.0);
        assert_eq!(sq.dc_gain, 0.5);
        assert_eq!(sq.noise_variance_gain, 1.0);
        assert!(mixer_demod(MixerInput::Square, PI / 2.0).dc_gain.abs() < 1e-15);
        assert!(mixer_demod(MixerInput::Sine, PI / 2.0).dc_gain.abs() < 1e-15);
        assert!(mixer_demod(MixerInput::IntegratedSquare, PI / 2.0).dc_gain.abs() < 1e-15);
        // Σ_odd (2/(nπ))² = 1/2
        let partial: f64 = (0..100_000).map(|k| (2.0 / ((2 * k + 1) as f64 * PI)).powi(2)).sum();
        assert_relative_eq!(partial, 0.5, max_relative = 1e-5);
    }

    #[test]
    fn integrated_square_factor_matches_triangle_geometry() {
        // Triangle amplitude A = ΔI·T/(8C_f), demodulated mean A/2.
        let (di, f, c) = (5e-9, 1e6, 0.5e-12);
        let triangle = di / (8.0 * f * c) * mixer_demod(MixerInput::IntegratedSquare, 0.0).dc_gain;
        let budget = di * advanced_tia_ac_gain(f, c).unwrap() * MIXER_DC_GAIN;
        assert_relative_eq!(triangle / budget, INTEGRATED_SQUARE_FACTOR, max_relative = 1e-12);
    }

    #[test]
    fn filter_examples() {
        assert_relative_eq!(lpf_enbw(330e-6), 757.576, max_relative = 1e-5);
        assert_relative_eq!(lpf_fc(330e-6), 482.29, max_relative = 1e-4);
        assert!((lpf_fc(330e-6) / 480.0 - 1.0).abs() < 0.01);
        for tau in [1e-6, 330e-6, 0.1, 7.0] {
            assert!((lpf_enbw(tau) / lpf_fc(tau) - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn snr_and_sensitivity_examples() {
        let s_shot = (7.2e-12f64).powi(2);
        assert_relative_eq!(snr(10e-9, s_shot, 330e-6), 35.67, max_relative = 1e-3);
        assert_relative_eq!(snr(10e-9, s_shot, 660e-6) / snr(10e-9, s_shot, 330e-6), 2f64.sqrt(), max_relative = 1e-12);
        assert_eq!(snr(1e-9, 0.0, 1e-3), f64::INFINITY);

        let s = sensitivity_ppm(s_shot, 330e-6, 40e-6).unwrap();
        assert_relative_eq!(s, 7.009, max_relative = 1e-3);
        let s4 = sensitivity_ppm(s_shot, 4.0 * 330e-6, 40e-6).unwrap();
        assert_relative_eq!(s4, s / 2.0, max_relative = 1e-12);
        assert_eq!(sensitivity_ppm(0.0, 1e-3, 1e-6).unwrap(), 0.0);
        assert!(sensitivity_ppm(s_shot, 1e-3, 0.0).is_err());
    }

    #[test]
    fn total_gain_examples() {
        let fe = FrontEndConfig::default();
        let g1 = total_ac_gain(1e6, &fe).unwrap();
        assert_relative_eq!(g1.gain, 63.661_977e6, max_relative = 1e-7);
        assert!(g1.gain > GAIN_REQUIREMENT && g1.within_bandwidth);
        let g10 = total_ac_gain(10e6, &fe).unwrap();
        assert_relative_eq!(g10.gain, 6.366_197_7e6, max_relative = 1e-7);
        assert!(g10.gain < GAIN_REQUIREMENT);
        let beyond = total_ac_gain(200e6, &fe).unwrap();
        assert!(!beyond.within_bandwidth && beyond.gain > 0.0);
    }

    #[test]
    fn default_cutoff_matches_caption() {
        assert!((FrontEndConfig::default().f_c() / 480.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn validation_names_the_field() {
        let bad = FrontEndConfig { cmrr: 0.5, ..Default::default() };
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("`cmrr`"), "{msg}");
        let bad = FrontEndConfig { h_net: HNetwork { c_d: -1.0, ..Default::default() }, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("h_net.c_d_F"));
        assert!(FrontEndConfig { cmrr: f64::INFINITY, ..Default::default() }.validate().is_ok());
    }

    #[test]
    fn folding_of_white_and_integrated_white() {
        assert_relative_eq!(folded_baseband_density(|_| 3.0, 1e6, 1000), 3.0, max_relative = 1e-12);
        // 1/f² input: Σ 8/(n⁴π²) = π²/12
        let s = folded_baseband_density(|f| 1.0 / (f / 1e6).powi(2), 1e6, 10_000);
        assert_relative_eq!(s, PI * PI / 12.0, max_relative = 1e-8);
    }

    proptest! {
        #[test]
        fn integrator_identity(f in 1.0..1e9f64, c in 1e-15..1e-9f64) {
            let g = advanced_tia_ac_gain(f, c).unwrap();
            prop_assert!((g * 2.0 * PI * f * c - 1.0).abs() < 1e-12);
        }

        #[test]
        fn differential_is_linear(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64,
                                  g in 1.0..100.0f64, cmrr in 1.0..1e4f64) {
            let lhs = differential_output(a + c, b + d, g, cmrr);
            let rhs = differential_output(a, b, g, cmrr) + differential_output(c, d, g, cmrr);
            prop_assert!((lhs - rhs).abs() < 1e-12 * g);
            prop_assert_eq!(differential_output(a, a, g, f64::INFINITY), 0.0);
        }

        #[test]
        fn snr_inverts_sensitivity(s_n in 1e-26..1e-20f64, tau in 1e-5..1.0f64, p in 1e-6..1e-2f64) {
            let ppm = sensitivity_ppm(s_n, tau, p).unwrap();
            let r = snr(ppm * 1e-6 * p, s_n, tau);
            prop_assert!((r - 1.0).abs() < 1e-10);
        }
    }
}
