use super::trace::{Trace, Unit};
use super::{stream_rng, SimConfig, Stream};
use crate::error::{Error, Result};
use crate::noise::{Referral, SpectralDensity};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Coarsest frequency resolution at which the 0.1 MHz end of the budget
/// grid is still resolved by ten bins.
const MAX_RESOLUTION: f64 = 10e3;

#[derive(Clone, Debug)]
pub struct Synthesis {
    pub trace: Trace,
    /// Non-fatal accuracy notes, e.g. a frequency grid too coarse to
    /// resolve the density shape.
    pub warnings: Vec<String>,
}

fn unit_of(referral: Referral) -> Unit {
    match referral {
        Referral::OpticalPower => Unit::W,
        Referral::Current => Unit::A,
        Referral::Voltage => Unit::V,
    }
}

/// Gaussian noise with one-sided density `psd`, using the configured seed
/// and duration.
pub fn synth_colored_noise(psd: &SpectralDensity, sim: &SimConfig) -> Result<Synthesis> {
    let mut rng = stream_rng(sim.seed, 0, 0, Stream::Rin);
    let samples = shaped_noise(psd, sim.n_samples(), sim.sample_rate, &mut rng)?;
    let mut warnings = Vec::new();
    let resolution = sim.sample_rate / sim.n_samples() as f64;
    if resolution > MAX_RESOLUTION {
        warnings.push(format!(
            "frequency resolution {resolution:.3e} Hz is coarser than {MAX_RESOLUTION:e} Hz; \
             low-frequency density shape is not resolved"
        ));
    }
    Ok(Synthesis {
        trace: Trace::new(1.0 / sim.sample_rate, unit_of(psd.referral()), samples)?,
        warnings,
    })
}

/// Shapes white Gaussian noise in the frequency domain: every positive bin
/// gets an independent complex Gaussian scaled to `√(S·N·fs/4)`, mirrored
/// with Hermitian symmetry so the inverse transform is real. The DC bin is
/// zero.
pub(crate) fn shaped_noise<R: Rng>(
    psd: &SpectralDensity,
    n: usize,
    sample_rate: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid("duration_s", format!("gives only {n} samples")));
    }
    if psd.is_identically_zero() {
        return Ok(vec![0.0; n]);
    }
    let nf = n as f64;
    let df = sample_rate / nf;
    let half = n / 2;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..=half {
        let f = m as f64 * df;
        let s = psd.at(f);
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::invalid(
                "psd",
                format!("density {s} at {f} Hz is not a finite non-negative value"),
            ));
        }
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        if n.is_multiple_of(2) && m == half {
            spec[m] = Complex64::new((s * nf * sample_rate / 2.0).sqrt() * a, 0.0);
        } else {
            let amp = (s * nf * sample_rate / 4.0).sqrt();
            spec[m] = Complex64::new(amp * a, amp * b);
            spec[n - m] = spec[m].conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    Ok(spec.into_iter().map(|c| c.re / nf).collect())
}
