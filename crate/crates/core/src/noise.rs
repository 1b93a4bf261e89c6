//! One-sided noise spectral densities.
//!
//! Every density in this module is one-sided (integrate over `f > 0` to get a
//! variance) and carries the domain it is referred to. Densities are values
//! as functions of frequency, so composite budgets can be built once and
//! evaluated on any grid.

use crate::chain::FrontEndConfig;
use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, PLANCK, SPEED_OF_LIGHT};
use crate::error::{ensure, Error, Result};
use crate::model::{LaserSpec, PhotodiodeSpec, RinCurve};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Physical quantity a density is expressed in: W²/Hz, A²/Hz or V²/Hz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Referral {
    OpticalPower,
    Current,
    Voltage,
}

impl Referral {
    pub fn unit(self) -> &'static str {
        match self {
            Referral::OpticalPower => "W^2/Hz",
            Referral::Current => "A^2/Hz",
            Referral::Voltage => "V^2/Hz",
        }
    }
}

/// Frequency dependence of one density term.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `white + quadratic · f²`
    Polynomial { white: f64, quadratic: f64 },
    /// Positive samples on a frequency grid, interpolated linearly in log-log
    /// and held constant outside the grid.
    Curve(LogCurve),
}

impl Shape {
    fn at(&self, f: f64) -> f64 {
        match self {
            Shape::Polynomial { white, quadratic } => white + quadratic * f * f,
            Shape::Curve(c) => c.at(f),
        }
    }
}

/// Log-log interpolated table, clamped at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct LogCurve {
    ln_f: Vec<f64>,
    ln_v: Vec<f64>,
}

impl LogCurve {
    /// `points` are `(frequency, value)` with strictly increasing positive
    /// frequencies and strictly positive finite values.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        ensure(!points.is_empty(), "curve", || "needs at least one point".into())?;
        for w in points.windows(2) {
            ensure(w[1].0 > w[0].0, "curve", || {
                format!("frequencies must increase strictly ({} then {})", w[0].0, w[1].0)
            })?;
        }
        for &(f, v) in points {
            ensure(f > 0.0 && f.is_finite(), "curve", || format!("bad frequency {f}"))?;
            ensure(v > 0.0 && v.is_finite(), "curve", || format!("bad value {v} at {f} Hz"))?;
        }
        Ok(LogCurve {
            ln_f: points.iter().map(|p| p.0.ln()).collect(),
            ln_v: points.iter().map(|p| p.1.ln()).collect(),
        })
    }

    pub fn at(&self, f: f64) -> f64 {
        let n = self.ln_f.len();
        if n == 1 || f <= 0.0 {
            return self.ln_v[0].exp();
        }
        let x = f.ln();
        if x <= self.ln_f[0] {
            return self.ln_v[0].exp();
        }
        if x >= self.ln_f[n - 1] {
            return self.ln_v[n - 1].exp();
        }
        let i = self.ln_f.partition_point(|&g| g <= x) - 1;
        let t = (x - self.ln_f[i]) / (self.ln_f[i + 1] - self.ln_f[i]);
        (self.ln_v[i] + t * (self.ln_v[i + 1] - self.ln_v[i])).exp()
    }
}

/// A one-sided power spectral density with an explicit referral domain.
///
/// Internally a sum of scaled [`Shape`] terms; scaling and summation keep the
/// closed forms intact, so referral round trips are exact up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDensity {
    referral: Referral,
    terms: Vec<(f64, Shape)>,
}

impl SpectralDensity {
    pub fn zero(referral: Referral) -> Self {
        SpectralDensity {
            referral,
            terms: Vec::new(),
        }
    }

    pub fn flat(referral: Referral, density: f64) -> Self {
        Self::polynomial(referral, density, 0.0)
    }

    pub fn polynomial(referral: Referral, white: f64, quadratic: f64) -> Self {
        debug_assert!(white >= 0.0 && quadratic >= 0.0);
        SpectralDensity {
            referral,
            terms: vec![(1.0, Shape::Polynomial { white, quadratic })],
        }
    }

    pub fn curve(referral: Referral, curve: LogCurve) -> Self {
        SpectralDensity {
            referral,
            terms: vec![(1.0, Shape::Curve(curve))],
        }
    }

    pub fn referral(&self) -> Referral {
        self.referral
    }

    /// Density at frequency `f`, in `referral().unit()`.
    pub fn at(&self, f: f64) -> f64 {
        self.terms.iter().map(|(k, s)| k * s.at(f)).sum()
    }

    /// Square root of [`at`](Self::at), the usual "per root hertz" figure.
    pub fn amplitude_at(&self, f: f64) -> f64 {
        self.at(f).sqrt()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.iter().all(|(k, s)| {
            *k == 0.0
                || matches!(s, Shape::Polynomial { white, quadratic } if *white == 0.0 && *quadratic == 0.0)
        })
    }

    /// Multiplies the density by a nonnegative factor.
    pub fn scaled(mut self, factor: f64) -> Self {
        debug_assert!(factor >= 0.0);
        for t in &mut self.terms {
            t.0 *= factor;
        }
        self
    }

    /// Sum of two densities referred to the same domain.
    pub fn plus(mut self, other: SpectralDensity) -> Result<Self> {
        if self.referral != other.referral {
            return Err(Error::invalid(
                "referral",
                format!("cannot add {:?} and {:?} densities", self.referral, other.referral),
            ));
        }
        self.terms.extend(other.terms);
        Ok(self)
    }

    /// Current density converted to voltage through a flat transimpedance.
    pub fn to_voltage(self, transimpedance: f64) -> Result<Self> {
        if self.referral != Referral::Current {
            return Err(Error::VoltageReferral);
        }
        let mut v = self.scaled(transimpedance * transimpedance);
        v.referral = Referral::Voltage;
        Ok(v)
    }
}

/// Converts between optical-power and photocurrent referral.
///
/// `current = optical · R²`, `optical = current / R²`. Voltage referral
/// needs a gain and is rejected here; see [`SpectralDensity::to_voltage`].
pub fn refer(psd: &SpectralDensity, to: Referral, responsivity: f64) -> Result<SpectralDensity> {
    use Referral::*;
    if psd.referral == to {
        return Ok(psd.clone());
    }
    let factor = match (psd.referral, to) {
        (OpticalPower, Current) => responsivity * responsivity,
        (Current, OpticalPower) => 1.0 / (responsivity * responsivity),
        _ => return Err(Error::VoltageReferral),
    };
    ensure(responsivity > 0.0 && responsivity.is_finite(), "responsivity", || {
        format!("must be positive, got {responsivity}")
    })?;
    let mut out = psd.clone().scaled(factor);
    out.referral = to;
    Ok(out)
}

/// Laser intensity noise from a RIN figure: `P̄² · 10^(RIN/10)`.
pub fn rin_to_psd(rin_db: f64, p_avg: f64) -> SpectralDensity {
    SpectralDensity::flat(Referral::OpticalPower, p_avg * p_avg * 10f64.powf(rin_db / 10.0))
}

/// Same as [`rin_to_psd`] for a tabulated RIN curve.
pub fn rin_curve_to_psd(rin: &RinCurve, p_avg: f64) -> SpectralDensity {
    if p_avg == 0.0 {
        return SpectralDensity::zero(Referral::OpticalPower);
    }
    let pts: Vec<(f64, f64)> = rin
        .points()
        .iter()
        .map(|&(f, db)| (f, 10f64.powf(db / 10.0)))
        .collect();
    // RinCurve guarantees finite dB values and increasing frequencies.
    let curve = LogCurve::new(&pts).expect("RinCurve points are valid");
    SpectralDensity::curve(Referral::OpticalPower, curve).scaled(p_avg * p_avg)
}

/// Photon-counting shot noise in optical power units: `2·(h·c₀/λ)·P̄`.
pub fn shot_psd_optical(wavelength: f64, p_avg: f64) -> SpectralDensity {
    let photon_energy = PLANCK * SPEED_OF_LIGHT / wavelength;
    SpectralDensity::flat(Referral::OpticalPower, 2.0 * photon_energy * p_avg)
}

/// Photocurrent shot noise `2·q·I`.
pub fn shot_psd_current(i_dc: f64) -> SpectralDensity {
    SpectralDensity::flat(Referral::Current, 2.0 * ELEMENTARY_CHARGE * i_dc)
}

/// Responsivity at which the photon and photocurrent shot-noise forms agree
/// (unit quantum efficiency): `q·λ/(h·c₀)`.
pub fn unit_efficiency_responsivity(wavelength: f64) -> f64 {
    ELEMENTARY_CHARGE * wavelength / (PLANCK * SPEED_OF_LIGHT)
}

/// Op-amp and DC-network noise generators of the first stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifierNoiseSpec {
    /// Input voltage noise, V/√Hz.
    pub e_n: f64,
    /// Input current noise, A/√Hz.
    pub i_n: f64,
    /// Equivalent voltage noise of the DC feedback network, V/√Hz.
    pub e_h: f64,
}

impl Default for AmplifierNoiseSpec {
    fn default() -> Self {
        AmplifierNoiseSpec {
            e_n: 4e-9,
            i_n: 7e-15,
            e_h: 4e-9,
        }
    }
}

impl AmplifierNoiseSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("e_n", self.e_n), ("i_n", self.i_n), ("e_h", self.e_h)] {
            ensure(v >= 0.0 && v.is_finite(), name, || format!("must be >= 0, got {v}"))?;
        }
        Ok(())
    }

    pub fn silent() -> Self {
        AmplifierNoiseSpec {
            e_n: 0.0,
            i_n: 0.0,
            e_h: 0.0,
        }
    }
}

/// Input-referred current noise of a resistive-feedback TIA:
/// `eₙ²ω²C_tot² + eₙ²/R_f² + 4kT/R_f + iₙ²`. `r_f` may be infinite.
pub fn standard_tia_input_noise(
    e_n: f64,
    i_n: f64,
    r_f: f64,
    c_tot: f64,
    temperature: f64,
) -> SpectralDensity {
    let white = i_n * i_n + e_n * e_n / (r_f * r_f) + 4.0 * BOLTZMANN * temperature / r_f;
    let quadratic = (e_n * 2.0 * PI * c_tot).powi(2);
    SpectralDensity::polynomial(Referral::Current, white, quadratic)
}

/// Input-referred current noise of the integrator TIA with a DC feedback
/// network through `r_dc`:
/// `iₙ² + eₙ²ω²(C_f+C_in)² + eₙ²/R_DC² + e_H²/R_DC² + 4kT/R_DC`.
pub fn advanced_tia_input_noise(
    spec: &AmplifierNoiseSpec,
    c_f: f64,
    c_in: f64,
    r_dc: f64,
    temperature: f64,
) -> SpectralDensity {
    let white = spec.i_n * spec.i_n
        + (spec.e_n * spec.e_n + spec.e_h * spec.e_h) / (r_dc * r_dc)
        + 4.0 * BOLTZMANN * temperature / r_dc;
    let quadratic = (spec.e_n * 2.0 * PI * (c_f + c_in)).powi(2);
    SpectralDensity::polynomial(Referral::Current, white, quadratic)
}

/// FET-input approximation of [`advanced_tia_input_noise`]:
/// `eₙ²ω²(C_f+C_in)² + 4kT/R_DC`.
pub fn advanced_tia_input_noise_simplified(
    e_n: f64,
    c_f: f64,
    c_in: f64,
    r_dc: f64,
    temperature: f64,
) -> SpectralDensity {
    let white = 4.0 * BOLTZMANN * temperature / r_dc;
    let quadratic = (e_n * 2.0 * PI * (c_f + c_in)).powi(2);
    SpectralDensity::polynomial(Referral::Current, white, quadratic)
}

/// Per-branch electronics noise of the configured first stage.
pub fn frontend_electronics_noise(fe: &FrontEndConfig) -> SpectralDensity {
    advanced_tia_input_noise(&fe.amp_noise, fe.c_f, fe.c_in, fe.r_dc, fe.temperature)
}

/// Input-referred noise terms of one balanced channel, all in W²/Hz.
#[derive(Clone, Debug)]
pub struct BalancedNoise {
    /// Shot noise of both branches (uncorrelated, summed).
    pub shot: SpectralDensity,
    /// First-stage electronics noise of both branches.
    pub electronics: SpectralDensity,
    /// Common-mode laser noise leaking through the finite CMRR.
    pub leaked_rin: SpectralDensity,
}

impl BalancedNoise {
    pub fn new(fe: &FrontEndConfig, laser: &LaserSpec, pd: &PhotodiodeSpec) -> Result<Self> {
        let r = pd.responsivity;
        let i_dc = crate::model::dc_current(laser, pd);
        let shot = refer(&shot_psd_current(i_dc), Referral::OpticalPower, r)?.scaled(2.0);
        let electronics =
            refer(&frontend_electronics_noise(fe), Referral::OpticalPower, r)?.scaled(2.0);
        let cm = 1.0 / fe.cmrr;
        let leaked_rin = rin_curve_to_psd(&laser.rin, laser.average_power).scaled(cm * cm);
        Ok(BalancedNoise {
            shot,
            electronics,
            leaked_rin,
        })
    }

    pub fn total(&self) -> SpectralDensity {
        self.shot
            .clone()
            .plus(self.electronics.clone())
            .and_then(|s| s.plus(self.leaked_rin.clone()))
            .expect("all terms are optical-power referred")
    }
}

/// Total input-referred noise of a balanced channel in optical power units:
/// `2·[2qI + i²_neq]/R² + S_laser/CMRR²`.
pub fn balanced_total_input_noise(
    fe: &FrontEndConfig,
    laser: &LaserSpec,
    pd: &PhotodiodeSpec,
) -> Result<SpectralDensity> {
    Ok(BalancedNoise::new(fe, laser, pd)?.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PW: f64 = 1e-12;

    #[test]
    fn rin_at_100_uw() {
        let s = rin_to_psd(-115.0, 100e-6);
        assert_eq!(s.referral(), Referral::OpticalPower);
        assert_relative_eq!(s.amplitude_at(1e6) / PW, 177.8, max_relative = 1e-3);
        assert_relative_eq!(rin_to_psd(-115.0, 40e-6).amplitude_at(1e6) / PW, 71.13, max_relative = 1e-3);
        assert_eq!(rin_to_psd(f64::NEG_INFINITY, 1e-3).at(1e6), 0.0);
    }

    #[test]
    fn photon_shot_noise() {
        let s = shot_psd_optical(1000e-9, 100e-6);
        assert_relative_eq!(s.amplitude_at(1e6) / PW, 6.303, max_relative = 1e-3);
        assert_eq!(shot_psd_optical(800e-9, 0.0).at(1e6), 0.0);
        let blue = shot_psd_optical(500e-9, 100e-6);
        assert_relative_eq!(blue.at(1.0), 2.0 * s.at(1.0), max_relative = 1e-14);
    }

    #[test]
    fn photocurrent_shot_noise() {
        assert_eq!(shot_psd_current(0.0).at(1e3), 0.0);
        let s = shot_psd_current(20e-6);
        // 2 * 1.602176634e-19 * 20e-6 = 6.40870654e-24 A²/Hz
        assert_relative_eq!(s.at(1e6), 6.408_706_536e-24, max_relative = 1e-9);
        assert_relative_eq!(s.amplitude_at(1e6), 2.5315e-12, max_relative = 1e-4);
        let optical = refer(&s, Referral::OpticalPower, 0.5).unwrap().scaled(2.0);
        assert_relative_eq!(optical.amplitude_at(1e6) / PW, 7.16, max_relative = 2e-3);
    }

    #[test]
    fn photon_and_current_forms() {
        let lambda = 1000e-9;
        let p = 100e-6;
        let r_unit = unit_efficiency_responsivity(lambda);
        let via_current = refer(&shot_psd_current(r_unit * p), Referral::OpticalPower, r_unit).unwrap();
        assert_relative_eq!(via_current.at(1e6), shot_psd_optical(lambda, p).at(1e6), max_relative = 1e-12);

        // With R = 0.5 A/W the current form is larger by qλ/(h c R) ≈ 1.61.
        let r = 0.5;
        let ratio = refer(&shot_psd_current(r * p), Referral::OpticalPower, r).unwrap().at(1e6)
            / shot_psd_optical(lambda, p).at(1e6);
        assert_relative_eq!(ratio, r_unit / r, max_relative = 1e-12);
        assert_relative_eq!(ratio, 1.613, max_relative = 1e-3);
    }

    #[test]
    fn referral_conversions() {
        let opt = SpectralDensity::flat(Referral::OpticalPower, (6.3 * PW).powi(2));
        let cur = refer(&opt, Referral::Current, 0.5).unwrap();
        assert_relative_eq!(cur.amplitude_at(1e6), 3.15e-12, max_relative = 1e-12);
        let back = refer(&cur, Referral::OpticalPower, 0.5).unwrap();
        assert_relative_eq!(back.at(1e6), opt.at(1e6), max_relative = 1e-14);

        let el = SpectralDensity::flat(Referral::Current, (850e-15f64).powi(2));
        let el_opt = refer(&el, Referral::OpticalPower, 0.5).unwrap();
        assert_relative_eq!(el_opt.amplitude_at(1e6) / PW, 1.7, max_relative = 1e-12);
        assert_relative_eq!(el_opt.scaled(2.0).amplitude_at(1e6) / PW, 2.404, max_relative = 1e-3);

        assert_eq!(refer(&opt, Referral::Voltage, 0.5), Err(Error::VoltageReferral));
        assert!(refer(&opt, Referral::Current, 0.0).is_err());
        let v = cur.clone().to_voltage(1e6).unwrap();
        assert_eq!(v.referral(), Referral::Voltage);
        assert!(opt.to_voltage(1e6).is_err());
    }

    #[test]
    fn standard_tia_terms() {
        let floor = standard_tia_input_noise(0.0, 0.0, 1e6, 10e-12, 300.0);
        assert_relative_eq!(floor.at(0.0), 4.0 * BOLTZMANN * 300.0 / 1e6, max_relative = 1e-14);
        let cap = standard_tia_input_noise(4e-9, 0.0, f64::INFINITY, 15.5e-12, 300.0);
        // 4 nV * 2π * 1 MHz * 15.5 pF = 389.56 fA/√Hz
        assert_relative_eq!(cap.amplitude_at(1e6), 389.557e-15, max_relative = 1e-5);
        let cap2 = standard_tia_input_noise(4e-9, 0.0, f64::INFINITY, 31e-12, 300.0);
        assert_relative_eq!(cap2.at(1e6), 4.0 * cap.at(1e6), max_relative = 1e-14);
    }

    fn paper_stage() -> (AmplifierNoiseSpec, f64, f64, f64) {
        (AmplifierNoiseSpec { e_n: 4e-9, i_n: 7e-15, e_h: 4e-9 }, 0.5e-12, 15e-12, 20e3)
    }

    #[test]
    fn advanced_tia_frozen_values() {
        let (amp, cf, cin, rdc) = paper_stage();
        let full = advanced_tia_input_noise(&amp, cf, cin, rdc, 300.0);
        // i_n² 4.9e-29 + (eₙ²+e_H²)/R² 8.0e-26 + 4kT/R 8.2839e-25 + capacitive 1.51755e-25 at 1 MHz
        assert_relative_eq!(full.at(1e6), 1.060_193e-24, max_relative = 1e-5);
        assert_relative_eq!(full.amplitude_at(1e6), 1.0296e-12, max_relative = 1e-4);
        // 10 MHz: cap term is 100x
        assert_relative_eq!(full.amplitude_at(10e6), 4.0105e-12, max_relative = 1e-4);

        let no_h = advanced_tia_input_noise(&AmplifierNoiseSpec { e_h: 0.0, ..amp }, cf, cin, rdc, 300.0);
        assert_relative_eq!(no_h.amplitude_at(1e6), 1.0101e-12, max_relative = 1e-4);

        // Reconciliation with the published 850 fA/√Hz and 5 pA/√Hz figures (±20 %).
        assert!((full.amplitude_at(1e6) / 850e-15 - 1.0).abs() < 0.25);
        let simplified = advanced_tia_input_noise_simplified(4e-9, cf, cin, rdc, 300.0);
        assert_relative_eq!(simplified.amplitude_at(1e6), 0.99e-12, max_relative = 2e-3);
        assert!((full.amplitude_at(10e6) / 5e-12 - 1.0).abs() < 0.20);

        let silent = advanced_tia_input_noise(&AmplifierNoiseSpec::silent(), cf, cin, f64::INFINITY, 300.0);
        assert_eq!(silent.at(3e6), 0.0);
    }

    #[test]
    fn simplified_form_limits() {
        let s = advanced_tia_input_noise_simplified(4e-9, 0.5e-12, 15e-12, 20e3, 300.0);
        assert_relative_eq!(s.at(0.0), 4.0 * BOLTZMANN * 300.0 / 20e3, max_relative = 1e-14);
        let cap = advanced_tia_input_noise_simplified(4e-9, 0.5e-12, 15e-12, f64::INFINITY, 300.0);
        assert_relative_eq!(cap.amplitude_at(1e6), 389.557e-15, max_relative = 1e-5);
    }

    #[test]
    fn simplified_gap_is_the_dropped_terms() {
        let (amp, cf, cin, _) = paper_stage();
        for rdc in [1e3, 20e3, 47e3, 100e3, 1e6] {
            let full = advanced_tia_input_noise(&amp, cf, cin, rdc, 300.0).at(1e6);
            let simp = advanced_tia_input_noise_simplified(amp.e_n, cf, cin, rdc, 300.0).at(1e6);
            let dropped = amp.i_n.powi(2) + (amp.e_n.powi(2) + amp.e_h.powi(2)) / (rdc * rdc);
            assert_relative_eq!(full - simp, dropped, max_relative = 1e-9);
        }
        // The FET approximation is within 2 % once R_DC is large enough that
        // (eₙ² + e_H²)/R_DC² is small against 4kT/R_DC.
        let full = advanced_tia_input_noise(&amp, cf, cin, 100e3, 300.0).at(1e6);
        let simp = advanced_tia_input_noise_simplified(amp.e_n, cf, cin, 100e3, 300.0).at(1e6);
        assert!((full - simp) / full < 0.02);
        // ... but not at 20 kΩ, where the gap is ~7.5 %.
        let full = advanced_tia_input_noise(&amp, cf, cin, 20e3, 300.0).at(1e6);
        let simp = advanced_tia_input_noise_simplified(amp.e_n, cf, cin, 20e3, 300.0).at(1e6);
        assert_relative_eq!((full - simp) / full, 0.0755, max_relative = 1e-2);
    }

    #[test]
    fn log_curve_interpolates_in_log_log() {
        let c = LogCurve::new(&[(1e5, 1.0), (1e7, 100.0)]).unwrap();
        assert_relative_eq!(c.at(1e6), 10.0, max_relative = 1e-12);
        assert_eq!(c.at(1.0), 1.0);
        assert_relative_eq!(c.at(1e9), 100.0, max_relative = 1e-14);
        assert!(LogCurve::new(&[(1e5, 1.0), (1e5, 2.0)]).is_err());
        assert!(LogCurve::new(&[(1e5, 0.0)]).is_err());
    }

    #[test]
    fn mixed_referral_sum_is_rejected() {
        let a = SpectralDensity::flat(Referral::Current, 1.0);
        let b = SpectralDensity::flat(Referral::OpticalPower, 1.0);
        assert!(a.plus(b).is_err());
    }
}
