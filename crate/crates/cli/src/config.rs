//! JSON run configuration.
//!
//! Every key carries its SI unit in the name. Missing keys take the library
//! defaults, unknown keys are rejected.

#![allow(non_snake_case, clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};
use srs_core::chain::{FrontEndConfig, HNetwork};
use srs_core::model::{LaserSpec, PhotodiodeSpec, RamanLine, RamanSample, RinCurve};
use srs_core::noise::AmplifierNoiseSpec;
use srs_core::timesim::{NoiseSources, ScanSpec, SimConfig};
use std::path::Path;

use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub laser: LaserConfig,
    pub photodiode: PhotodiodeConfig,
    pub frontend: FrontEndFile,
    pub sample: SampleConfig,
    pub sim: SimFile,
    pub budget: BudgetConfig,
    pub scan: ScanConfig,
    pub sweep: SweepConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserConfig {
    pub wavelength_m: f64,
    pub average_power_W: f64,
    pub rep_rate_Hz: f64,
    /// `[frequency_Hz, rin_dB_per_Hz]` pairs.
    pub rin_curve: Vec<(f64, f64)>,
}

impl Default for LaserConfig {
    fn default() -> Self {
        let l = LaserSpec::default();
        LaserConfig {
            wavelength_m: l.wavelength,
            average_power_W: l.average_power,
            rep_rate_Hz: l.rep_rate,
            rin_curve: l.rin.points().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotodiodeConfig {
    pub responsivity_A_per_W: f64,
    pub junction_capacitance_F: f64,
}

impl Default for PhotodiodeConfig {
    fn default() -> Self {
        let p = PhotodiodeSpec::default();
        PhotodiodeConfig {
            responsivity_A_per_W: p.responsivity,
            junction_capacitance_F: p.junction_capacitance,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontEndFile {
    pub c_f_F: f64,
    pub c_in_F: f64,
    pub r_dc_ohm: f64,
    pub gbwp_Hz: f64,
    pub e_n_V_per_rtHz: f64,
    pub i_n_A_per_rtHz: f64,
    pub e_h_V_per_rtHz: f64,
    pub g_diff: f64,
    /// Linear ratio; `null` means an ideal subtractor.
    pub cmrr: Option<f64>,
    pub g_ina: f64,
    pub tau_s: f64,
    pub f_m_Hz: f64,
    pub mixer_phase_rad: f64,
    pub temperature_K: f64,
    pub h_net: HNetworkFile,
}

impl Default for FrontEndFile {
    fn default() -> Self {
        let f = FrontEndConfig::default();
        FrontEndFile {
            c_f_F: f.c_f,
            c_in_F: f.c_in,
            r_dc_ohm: f.r_dc,
            gbwp_Hz: f.gbwp,
            e_n_V_per_rtHz: f.amp_noise.e_n,
            i_n_A_per_rtHz: f.amp_noise.i_n,
            e_h_V_per_rtHz: f.amp_noise.e_h,
            g_diff: f.g_diff,
            cmrr: f.cmrr.is_finite().then_some(f.cmrr),
            g_ina: f.g_ina,
            tau_s: f.tau,
            f_m_Hz: f.f_m,
            mixer_phase_rad: f.mixer_phase,
            temperature_K: f.temperature,
            h_net: HNetworkFile::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HNetworkFile {
    pub r_x_ohm: f64,
    pub c_x_F: f64,
    pub r_y_ohm: f64,
    pub r_d_ohm: f64,
    pub c_d_F: f64,
}

impl Default for HNetworkFile {
    fn default() -> Self {
        let h = HNetwork::default();
        HNetworkFile {
            r_x_ohm: h.r_x,
            c_x_F: h.c_x,
            r_y_ohm: h.r_y,
            r_d_ohm: h.r_d,
            c_d_F: h.c_d,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub lines: Vec<LineConfig>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            lines: RamanSample::methanol()
                .lines
                .iter()
                .map(|l| LineConfig {
                    center_cm1: l.center,
                    half_width_cm1: l.half_width,
                    peak_gain_ppm: l.peak_gain,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    pub center_cm1: f64,
    pub half_width_cm1: f64,
    pub peak_gain_ppm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimFile {
    pub sample_rate_Hz: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub n_trials: usize,
    pub include_pulse_train: bool,
    /// `null` means five LPF time constants.
    pub transient_discard_s: Option<f64>,
    /// Raman gain on the signal branch for the signal run of `simulate`.
    pub sample_gain_ppm: f64,
    pub noise: NoiseSources,
}

impl Default for SimFile {
    fn default() -> Self {
        let s = SimConfig::default();
        SimFile {
            sample_rate_Hz: s.sample_rate,
            duration_s: s.duration,
            seed: s.seed,
            n_trials: s.n_trials,
            include_pulse_train: s.include_pulse_train,
            transient_discard_s: s.transient_discard,
            sample_gain_ppm: 250.0,
            noise: s.sources,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    /// Raman gain used for the SNR line.
    pub snr_gain_ppm: f64,
    pub f_min_Hz: f64,
    pub f_max_Hz: f64,
    pub points_per_decade: usize,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            snr_gain_ppm: 250.0,
            f_min_Hz: 1e5,
            f_max_Hz: 1e7,
            points_per_decade: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub lambda_pump_m: f64,
    pub lambda_start_m: f64,
    pub lambda_stop_m: f64,
    pub n_points: usize,
    /// Acquisition time per wavelength point.
    pub dwell_s: f64,
    pub trials_per_point: usize,
    /// Peak detection level in units of the baseline RMS.
    pub peak_threshold: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let s = ScanSpec::default();
        ScanConfig {
            lambda_pump_m: s.lambda_pump,
            lambda_start_m: s.lambda_start,
            lambda_stop_m: s.lambda_stop,
            n_points: s.n_points,
            dwell_s: 20e-3,
            trials_per_point: 1,
            peak_threshold: 5.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    RDc,
    CIn,
    Tau,
    FM,
    Cmrr,
    AveragePower,
}

impl SweepVariable {
    /// CSV column name of the swept value, with its unit.
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::RDc => "r_dc_ohm",
            SweepVariable::CIn => "c_in_F",
            SweepVariable::Tau => "tau_s",
            SweepVariable::FM => "f_m_Hz",
            SweepVariable::Cmrr => "cmrr",
            SweepVariable::AveragePower => "average_power_W",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            variable: SweepVariable::AveragePower,
            start: 10e-6,
            stop: 200e-6,
            n: 20,
            spacing: Spacing::Log,
        }
    }
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

/// Library records built from a validated configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub laser: LaserSpec,
    pub pd: PhotodiodeSpec,
    pub fe: FrontEndConfig,
    pub sample: RamanSample,
    pub sim: SimConfig,
    pub scan: ScanSpec,
    /// Per-wavelength simulation settings of a scan.
    pub scan_sim: SimConfig,
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => "{}".to_string(),
    };
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("at `{path}`: {inner}"))
        }
    })
}

fn invariant(e: srs_core::Error) -> CliError {
    CliError::Invariant(e.to_string())
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let l = &self.laser;
        let rin = RinCurve::new(l.rin_curve.clone()).map_err(|e| invariant(e.within("laser.rin_curve")))?;
        let laser = LaserSpec {
            wavelength: l.wavelength_m,
            average_power: l.average_power_W,
            rep_rate: l.rep_rate_Hz,
            rin,
        };
        laser.validate().map_err(|e| invariant(e.within("laser")))?;

        let pd = PhotodiodeSpec {
            responsivity: self.photodiode.responsivity_A_per_W,
            junction_capacitance: self.photodiode.junction_capacitance_F,
        };
        pd.validate().map_err(|e| invariant(e.within("photodiode")))?;

        let f = &self.frontend;
        let h = &f.h_net;
        let fe = FrontEndConfig {
            c_f: f.c_f_F,
            c_in: f.c_in_F,
            r_dc: f.r_dc_ohm,
            gbwp: f.gbwp_Hz,
            amp_noise: AmplifierNoiseSpec {
                e_n: f.e_n_V_per_rtHz,
                i_n: f.i_n_A_per_rtHz,
                e_h: f.e_h_V_per_rtHz,
            },
            g_diff: f.g_diff,
            cmrr: f.cmrr.unwrap_or(f64::INFINITY),
            g_ina: f.g_ina,
            tau: f.tau_s,
            f_m: f.f_m_Hz,
            mixer_phase: f.mixer_phase_rad,
            temperature: f.temperature_K,
            h_net: HNetwork {
                r_x: h.r_x_ohm,
                c_x: h.c_x_F,
                r_y: h.r_y_ohm,
                r_d: h.r_d_ohm,
                c_d: h.c_d_F,
            },
        };
        fe.validate().map_err(|e| invariant(e.within("frontend")))?;
        if !(fe.f_m < laser.rep_rate / 2.0) {
            return Err(CliError::Invariant(format!(
                "invalid value for `frontend.f_m_Hz`: must be below rep_rate/2 = {} Hz",
                laser.rep_rate / 2.0
            )));
        }

        let sample = RamanSample {
            lines: self
                .sample
                .lines
                .iter()
                .map(|l| RamanLine {
                    center: l.center_cm1,
                    half_width: l.half_width_cm1,
                    peak_gain: l.peak_gain_ppm,
                })
                .collect(),
        };
        sample.validate().map_err(|e| invariant(e.within("sample")))?;

        let s = &self.sim;
        let sim = SimConfig {
            sample_rate: s.sample_rate_Hz,
            duration: s.duration_s,
            seed: s.seed,
            n_trials: s.n_trials,
            include_pulse_train: s.include_pulse_train,
            transient_discard: s.transient_discard_s,
            sources: s.noise,
        };
        sim.validate(&fe).map_err(|e| invariant(e.within("sim")))?;
        if !s.sample_gain_ppm.is_finite() {
            return Err(CliError::Invariant("invalid value for `sim.sample_gain_ppm`: must be finite".into()));
        }

        let c = &self.scan;
        let scan = ScanSpec {
            lambda_pump: c.lambda_pump_m,
            lambda_start: c.lambda_start_m,
            lambda_stop: c.lambda_stop_m,
            n_points: c.n_points,
        };
        scan.validate().map_err(|e| invariant(e.within("scan")))?;
        let scan_sim = SimConfig {
            duration: c.dwell_s,
            n_trials: c.trials_per_point,
            ..sim.clone()
        };
        scan_sim.validate(&fe).map_err(|e| {
            let e = match e {
                srs_core::Error::InvalidParameter { name, reason } if name == "duration_s" => {
                    srs_core::Error::InvalidParameter { name: "dwell_s".into(), reason }
                }
                srs_core::Error::InvalidParameter { name, reason } if name == "n_trials" => {
                    srs_core::Error::InvalidParameter { name: "trials_per_point".into(), reason }
                }
                other => other,
            };
            invariant(e.within("scan"))
        })?;
        if !(c.peak_threshold > 0.0) {
            return Err(CliError::Invariant("invalid value for `scan.peak_threshold`: must be > 0".into()));
        }

        let b = &self.budget;
        if !(b.f_min_Hz > 0.0 && b.f_max_Hz > b.f_min_Hz && b.points_per_decade >= 1) {
            return Err(CliError::Invariant(
                "invalid value for `budget`: need 0 < f_min_Hz < f_max_Hz and points_per_decade >= 1".into(),
            ));
        }

        let w = &self.sweep;
        let positive = w.start > 0.0 && w.stop > 0.0 && w.start.is_finite() && w.stop.is_finite();
        if !(positive && w.n >= 1) {
            return Err(CliError::Invariant(
                "invalid value for `sweep`: start and stop must be > 0 and n >= 1".into(),
            ));
        }

        Ok(Resolved { laser, pd, fe, sample, sim, scan, scan_sim })
    }
}
