//! Lasers, photodiodes, synthetic Raman samples and the photocurrent of one
//! balanced channel.

use crate::error::{ensure, Result};
use crate::noise::{refer, rin_curve_to_psd, shot_psd_current, Referral, SpectralDensity};
use serde::{Deserialize, Serialize};

/// Relative intensity noise versus frequency, `(Hz, dB/Hz)` pairs.
///
/// Interpolated linearly in dB against log-frequency (log-log in linear
/// power) and clamped to the end values outside the table.
#[derive(Clone, Debug, PartialEq)]
pub struct RinCurve {
    points: Vec<(f64, f64)>,
}

impl RinCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        ensure(!points.is_empty(), "rin_curve", || "needs at least one point".into())?;
        for w in points.windows(2) {
            ensure(w[1].0 > w[0].0, "rin_curve", || {
                format!("frequencies must increase strictly ({} then {})", w[0].0, w[1].0)
            })?;
        }
        for &(f, db) in &points {
            ensure(f > 0.0 && f.is_finite(), "rin_curve", || format!("bad frequency {f}"))?;
            ensure(db.is_finite() && db <= 0.0, "rin_curve", || {
                format!("RIN must be finite and <= 0 dB/Hz, got {db} at {f} Hz")
            })?;
        }
        Ok(RinCurve { points })
    }

    /// A flat curve over `[f_lo, f_hi]`.
    pub fn flat(db: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        RinCurve::new(vec![(f_lo, db), (f_hi, db)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn db_at(&self, f: f64) -> f64 {
        let p = &self.points;
        if p.len() == 1 || f <= p[0].0 {
            return p[0].1;
        }
        let last = p[p.len() - 1];
        if f >= last.0 {
            return last.1;
        }
        let i = p.partition_point(|q| q.0 <= f) - 1;
        let t = (f / p[i].0).ln() / (p[i + 1].0 / p[i].0).ln();
        p[i].1 + t * (p[i + 1].1 - p[i].1)
    }
}

impl Default for RinCurve {
    /// −115 dB/Hz between 100 kHz and 10 MHz.
    fn default() -> Self {
        RinCurve::flat(-115.0, 1e5, 1e7).expect("valid default")
    }
}

/// One laser beam as seen by one photodiode.
#[derive(Clone, Debug, PartialEq)]
pub struct LaserSpec {
    /// m
    pub wavelength: f64,
    /// W
    pub average_power: f64,
    /// Pulse repetition rate, Hz.
    pub rep_rate: f64,
    pub rin: RinCurve,
}

impl Default for LaserSpec {
    /// The Stokes beam of the single-channel methanol experiment: 40 µW at
    /// 1000 nm from a 40 MHz oscillator.
    fn default() -> Self {
        LaserSpec {
            wavelength: 1000e-9,
            average_power: 40e-6,
            rep_rate: 40e6,
            rin: RinCurve::default(),
        }
    }
}

impl LaserSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(
            (400e-9..=2000e-9).contains(&self.wavelength),
            "wavelength_m",
            || format!("must lie in [400 nm, 2000 nm], got {} m", self.wavelength),
        )?;
        // Zero power is allowed (a dark detector); the noise and chain
        // formulas are all well defined there.
        ensure(
            self.average_power >= 0.0 && self.average_power.is_finite(),
            "average_power_W",
            || format!("must be >= 0, got {}", self.average_power),
        )?;
        ensure(self.rep_rate > 0.0 && self.rep_rate.is_finite(), "rep_rate_Hz", || {
            format!("must be > 0, got {}", self.rep_rate)
        })
    }

    pub fn with_power(&self, average_power: f64) -> Self {
        LaserSpec {
            average_power,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotodiodeSpec {
    /// A/W
    pub responsivity: f64,
    /// F
    pub junction_capacitance: f64,
}

impl Default for PhotodiodeSpec {
    /// Silicon array element near 1 µm: 0.5 A/W, 10 pF.
    fn default() -> Self {
        PhotodiodeSpec {
            responsivity: 0.5,
            junction_capacitance: 10e-12,
        }
    }
}

impl PhotodiodeSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.responsivity > 0.0 && self.responsivity <= 1.5,
            "responsivity_A_per_W",
            || format!("must lie in (0, 1.5], got {}", self.responsivity),
        )?;
        ensure(
            self.junction_capacitance > 0.0 && self.junction_capacitance.is_finite(),
            "junction_capacitance_F",
            || format!("must be > 0, got {}", self.junction_capacitance),
        )
    }
}

/// A single Lorentzian Raman line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanLine {
    /// cm⁻¹
    pub center: f64,
    /// Half width at half maximum, cm⁻¹.
    pub half_width: f64,
    /// Gain at the line center, ppm of the Stokes power.
    pub peak_gain: f64,
}

impl RamanLine {
    /// Lorentzian normalized to one at the center.
    pub fn gain_at(&self, shift: f64) -> f64 {
        let u = (shift - self.center) / self.half_width;
        self.peak_gain / (1.0 + u * u)
    }
}

/// Synthetic specimen: a sum of Lorentzian lines.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RamanSample {
    pub lines: Vec<RamanLine>,
}

impl RamanSample {
    /// Liquid methanol in the C-H stretch region: symmetric and
    /// anti-symmetric stretches at 2850 and 2950 cm⁻¹, 250 ppm each.
    pub fn methanol() -> Self {
        RamanSample {
            lines: vec![
                RamanLine {
                    center: 2850.0,
                    half_width: 25.0,
                    peak_gain: 250.0,
                },
                RamanLine {
                    center: 2950.0,
                    half_width: 25.0,
                    peak_gain: 250.0,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, l) in self.lines.iter().enumerate() {
            let at = |field: &str| format!("lines[{i}].{field}");
            ensure(l.center > 0.0 && l.center.is_finite(), &at("center_cm1"), || {
                format!("must be > 0, got {}", l.center)
            })?;
            ensure(l.half_width > 0.0 && l.half_width.is_finite(), &at("half_width_cm1"), || {
                format!("must be > 0, got {}", l.half_width)
            })?;
            ensure(l.peak_gain >= 0.0 && l.peak_gain.is_finite(), &at("peak_gain_ppm"), || {
                format!("must be >= 0, got {}", l.peak_gain)
            })?;
        }
        Ok(())
    }
}

/// Which photodiode of the balanced pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Passes through the sample and carries the Raman gain.
    Signal,
    /// Bypasses the sample; same power and common-mode noise.
    Reference,
}

/// Decomposition of one branch photocurrent.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotocurrentComponents {
    pub branch: Branch,
    /// A
    pub i_dc: f64,
    /// Equivalent sinusoidal amplitude of the pulse train at the repetition
    /// rate, A.
    pub i_train_amplitude: f64,
    pub rep_rate: f64,
    /// Common-mode laser intensity noise, current referred.
    pub s_laser_noise: SpectralDensity,
    /// Shot noise, current referred, independent between branches.
    pub s_shot: SpectralDensity,
    /// Peak-to-peak amplitude of the Raman current modulated at `f_m`
    /// (zero on the reference branch), A.
    pub i_raman_amplitude: f64,
    /// Hz
    pub f_m: f64,
}

/// Mean photocurrent `R_λ · P̄`.
pub fn dc_current(laser: &LaserSpec, pd: &PhotodiodeSpec) -> f64 {
    pd.responsivity * laser.average_power
}

/// Raman shift `10⁷·(1/λ_pump − 1/λ_stokes)` in cm⁻¹ for wavelengths in m.
pub fn wavenumber_shift(lambda_pump: f64, lambda_stokes: f64) -> Result<f64> {
    ensure(lambda_pump > 0.0, "lambda_pump_m", || format!("must be > 0, got {lambda_pump}"))?;
    ensure(lambda_stokes >= lambda_pump, "lambda_stokes_m", || {
        format!("anti-Stokes ({lambda_stokes} m < pump {lambda_pump} m) is not supported")
    })?;
    let nm = 1e9;
    Ok(1e7 * (1.0 / (lambda_pump * nm) - 1.0 / (lambda_stokes * nm)))
}

/// Sum of the sample's Lorentzian lines at `shift` (cm⁻¹), in ppm.
pub fn sample_gain_at(sample: &RamanSample, shift: f64) -> f64 {
    sample.lines.iter().map(|l| l.gain_at(shift)).sum()
}

pub fn photocurrent_components(
    laser: &LaserSpec,
    pd: &PhotodiodeSpec,
    gain_ppm: f64,
    f_m: f64,
    branch: Branch,
) -> Result<PhotocurrentComponents> {
    ensure(f_m > 0.0 && f_m < laser.rep_rate / 2.0, "f_m_Hz", || {
        format!("must lie in (0, {}) Hz, got {f_m}", laser.rep_rate / 2.0)
    })?;
    let i_dc = dc_current(laser, pd);
    let s_laser_noise = refer(
        &rin_curve_to_psd(&laser.rin, laser.average_power),
        Referral::Current,
        pd.responsivity,
    )?;
    let i_raman_amplitude = match branch {
        Branch::Signal => gain_ppm * 1e-6 * i_dc,
        Branch::Reference => 0.0,
    };
    Ok(PhotocurrentComponents {
        branch,
        i_dc,
        i_train_amplitude: i_dc,
        rep_rate: laser.rep_rate,
        s_laser_noise,
        s_shot: shot_psd_current(i_dc),
        i_raman_amplitude,
        f_m,
    })
}
