use super::channel::simulate_point;
use super::SimConfig;
use crate::chain::{dc_output, demod_signal_gain, FrontEndConfig};
use crate::error::{ensure, Error, Result};
use crate::model::{sample_gain_at, wavenumber_shift, LaserSpec, PhotodiodeSpec, RamanSample};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::io::{self, Write};

/// Wavelength axis of a Stokes scan, all in m.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub lambda_pump: f64,
    pub lambda_start: f64,
    pub lambda_stop: f64,
    pub n_points: usize,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            lambda_pump: 770e-9,
            lambda_start: 950e-9,
            lambda_stop: 1050e-9,
            n_points: 101,
        }
    }
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.n_points >= 2, "n_points", || format!("must be >= 2, got {}", self.n_points))?;
        ensure(self.lambda_pump > 0.0, "lambda_pump_m", || {
            format!("must be > 0, got {}", self.lambda_pump)
        })?;
        ensure(self.lambda_start >= self.lambda_pump, "lambda_start_m", || {
            format!("must be >= the pump wavelength {} m", self.lambda_pump)
        })?;
        ensure(self.lambda_stop > self.lambda_start, "lambda_stop_m", || {
            format!("must be > lambda_start_m = {} m", self.lambda_start)
        })
    }

    pub fn wavelength(&self, i: usize) -> f64 {
        let step = (self.lambda_stop - self.lambda_start) / (self.n_points - 1) as f64;
        self.lambda_start + step * i as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    /// m
    pub stokes_wavelength: f64,
    /// cm⁻¹
    pub shift: f64,
    /// Recovered ΔP/P̄, ppm.
    pub normalized_gain: f64,
    pub v_dc_sig: f64,
    pub v_dc_ref: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
}

impl ScanResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "lambda_nm,shift_cm1,gain_ppm,vdc_sig_V,vdc_ref_V")?;
        for p in &self.points {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                p.stokes_wavelength * 1e9,
                p.shift,
                p.normalized_gain,
                p.v_dc_sig,
                p.v_dc_ref
            )?;
        }
        Ok(())
    }
}

/// Steps the Stokes wavelength across `spec`, simulates the channel at each
/// point with the sample's gain there, and converts the demodulated output
/// back to ΔP/P̄ through the chain gain and the DC output of the reference
/// branch.
pub fn run_scan(
    sample: &RamanSample,
    spec: &ScanSpec,
    per_point: &SimConfig,
    fe: &FrontEndConfig,
    laser_template: &LaserSpec,
    pd: &PhotodiodeSpec,
) -> Result<ScanResult> {
    spec.validate().map_err(|e| e.within("scan"))?;
    sample.validate().map_err(|e| e.within("sample"))?;
    ensure(laser_template.average_power > 0.0, "laser.average_power_W", || {
        "must be > 0 to normalize a scan".to_string()
    })?;
    let gain = demod_signal_gain(fe)?;
    ensure(gain != 0.0, "frontend.mixer_phase_rad", || {
        "puts the reference in quadrature with the signal".to_string()
    })?;
    let points = (0..spec.n_points)
        .into_par_iter()
        .map(|i| {
            let lambda = spec.wavelength(i);
            let shift = wavenumber_shift(spec.lambda_pump, lambda)?;
            let laser = LaserSpec {
                wavelength: lambda,
                ..laser_template.clone()
            };
            let run = simulate_point(&laser, pd, sample_gain_at(sample, shift), fe, per_point, i)?;
            let i_dc = run.v_dc_ref / dc_output(1.0, fe.r_dc);
            let normalized_gain = run.demod_mean / gain / i_dc * 1e6;
            if !normalized_gain.is_finite() {
                return Err(Error::Numerical(format!("normalized gain {normalized_gain}")));
            }
            Ok(ScanPoint {
                stokes_wavelength: lambda,
                shift,
                normalized_gain,
                v_dc_sig: run.v_dc_sig,
                v_dc_ref: run.v_dc_ref,
            })
        })
        .enumerate()
        .map(|(index, r)| r.map_err(|e| Error::ScanPoint { index, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { points })
}

/// Lorentzian line recovered from a scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedPeak {
    /// cm⁻¹
    pub center: f64,
    /// ppm
    pub amplitude: f64,
    /// Half width at half maximum, cm⁻¹.
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanAnalysis {
    /// Sorted by center.
    pub peaks: Vec<FittedPeak>,
    /// Constant offset of the fitted baseline, ppm.
    pub baseline_offset: f64,
    /// RMS of the fit residual, ppm.
    pub baseline_rms: f64,
}

/// Detects lines standing more than `threshold` baseline RMS above the
/// baseline and refines them with a joint Lorentzian least-squares fit.
///
/// Detection is iterative: after each fit, local maxima of the residual
/// above the threshold become new lines, and fitted lines that end up below
/// it are dropped.
pub fn analyze_scan(scan: &ScanResult, threshold: f64) -> ScanAnalysis {
    let x: Vec<f64> = scan.points.iter().map(|p| p.shift).collect();
    let y: Vec<f64> = scan.points.iter().map(|p| p.normalized_gain).collect();
    let med = median(&y);
    let sigma0 = 1.4826 * median(&y.iter().map(|v| (v - med).abs()).collect::<Vec<_>>());
    let (lo, hi) = (x[0].min(x[x.len() - 1]), x[0].max(x[x.len() - 1]));
    // residual wiggles of a noiseless fit are not lines
    let floor = 1e-6 * y.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut lines = candidates(&x, &y, |_| med, threshold * sigma0);
    let mut offset = med;
    for _ in 0..MAX_DETECTION_ROUNDS {
        let (o, fitted, rms) = fit_lorentzians(&x, &y, offset, &lines);
        let kept: Vec<FittedPeak> = fitted
            .iter()
            .copied()
            .filter(|p| p.amplitude > threshold * rms && p.center >= lo && p.center <= hi)
            .collect();
        let changed = kept.len() != fitted.len();
        let model_at = |xv: f64| o + kept.iter().map(|p| lorentzian(p, xv)).sum::<f64>();
        // noise scale from point-to-point differences, so a broad line the
        // fit has not yet absorbed does not hide itself
        let resid: Vec<f64> = x.iter().zip(&y).map(|(&xv, &yv)| yv - model_at(xv)).collect();
        let steps: Vec<f64> = resid.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let sigma = (1.4826 * median(&steps) / 2f64.sqrt()).max(floor);
        let extra: Vec<FittedPeak> = candidates(&x, &y, model_at, threshold * sigma)
            .into_iter()
            .filter(|c| kept.iter().all(|p| (c.center - p.center).abs() > p.half_width))
            .collect();
        if !changed && extra.is_empty() {
            let mut peaks = kept;
            peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
            return ScanAnalysis {
                peaks,
                baseline_offset: o,
                baseline_rms: rms,
            };
        }
        offset = o;
        lines = kept;
        lines.extend(extra);
    }
    let (o, mut peaks, rms) = fit_lorentzians(&x, &y, offset, &lines);
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    ScanAnalysis {
        peaks,
        baseline_offset: o,
        baseline_rms: rms,
    }
}

const MAX_DETECTION_ROUNDS: usize = 10;

/// Local maxima of `y − base(x)` higher than `level`, with rough widths.
fn candidates(x: &[f64], y: &[f64], base: impl Fn(f64) -> f64, level: f64) -> Vec<FittedPeak> {
    let r: Vec<f64> = x.iter().zip(y).map(|(&xv, &yv)| yv - base(xv)).collect();
    (1..r.len().saturating_sub(1))
        .filter(|&i| r[i] >= r[i - 1] && r[i] > r[i + 1] && r[i] > level)
        .map(|i| FittedPeak {
            center: x[i],
            amplitude: r[i],
            half_width: half_width_guess(x, &r, i),
        })
        .collect()
}

fn lorentzian(p: &FittedPeak, xv: f64) -> f64 {
    let u = (xv - p.center) / p.half_width;
    p.amplitude / (1.0 + u * u)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn half_width_guess(x: &[f64], r: &[f64], i: usize) -> f64 {
    let y = r;
    let half = 0.5 * y[i];
    let mut l = i;
    while l > 0 && y[l] > half {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < y.len() && y[r] > half {
        r += 1;
    }
    let w = 0.5 * (x[r] - x[l]).abs();
    if w > 0.0 {
        w
    } else {
        (x[1] - x[0]).abs()
    }
}

fn model(params: &[f64], xv: f64) -> f64 {
    params[0]
        + params[1..]
            .chunks(3)
            .map(|p| {
                let u = (xv - p[1]) / p[2];
                p[0] / (1.0 + u * u)
            })
            .sum::<f64>()
}

/// Levenberg–Marquardt fit of `offset + Σ A/(1 + ((x − c)/w)²)`. Returns
/// the offset, the lines and the residual RMS corrected for the number of
/// fitted parameters.
fn fit_lorentzians(x: &[f64], y: &[f64], offset: f64, guesses: &[FittedPeak]) -> (f64, Vec<FittedPeak>, f64) {
    let n = x.len();
    let mut params = vec![offset];
    for g in guesses {
        params.extend([g.amplitude, g.center, g.half_width]);
    }
    let np = params.len();
    let residual = |p: &[f64]| DVector::from_iterator(n, (0..n).map(|i| y[i] - model(p, x[i])));
    let mut r = residual(&params);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jac = DMatrix::zeros(n, np);
        for i in 0..n {
            jac[(i, 0)] = 1.0;
            for (k, p) in params[1..].chunks(3).enumerate() {
                let u = (x[i] - p[1]) / p[2];
                let d = 1.0 + u * u;
                jac[(i, 1 + 3 * k)] = 1.0 / d;
                jac[(i, 2 + 3 * k)] = p[0] * 2.0 * u / (p[2] * d * d);
                jac[(i, 3 + 3 * k)] = p[0] * 2.0 * u * u / (p[2] * d * d);
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            let widths_ok = trial[1..].chunks(3).all(|p| p[2] > 0.0);
            let r_trial = residual(&trial);
            let c = r_trial.norm_squared();
            if widths_ok && c <= cost {
                let rel = (cost - c) / cost.max(f64::MIN_POSITIVE);
                params = trial;
                r = r_trial;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let dof = n.saturating_sub(np).max(1);
    let rms = (cost / dof as f64).sqrt();
    let peaks = params[1..]
        .chunks(3)
        .map(|p| FittedPeak {
            center: p[1],
            amplitude: p[0],
            half_width: p[2],
        })
        .collect();
    (params[0], peaks, rms)
}
