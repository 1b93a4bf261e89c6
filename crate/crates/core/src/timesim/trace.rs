use crate::error::{ensure, Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    A,
    V,
    W,
}

impl Unit {
    pub fn symbol(self) -> &'static str {
        match self {
            Unit::A => "A",
            Unit::V => "V",
            Unit::W => "W",
        }
    }
}

/// Uniformly sampled waveform starting at t = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    dt: f64,
    unit: Unit,
    samples: Vec<f64>,
}

impl Trace {
    pub fn new(dt: f64, unit: Unit, samples: Vec<f64>) -> Result<Self> {
        ensure(dt > 0.0 && dt.is_finite(), "dt", || format!("must be > 0, got {dt}"))?;
        ensure(samples.len() >= 2, "samples", || {
            format!("need at least 2 samples, got {}", samples.len())
        })?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite {} sample at index {i} (t = {} s)",
                unit.symbol(),
                i as f64 * dt
            )));
        }
        Ok(Trace { dt, unit, samples })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// Samples at or after time `t`.
    pub fn after(&self, t: f64) -> &[f64] {
        let start = ((t / self.dt).ceil().max(0.0) as usize).min(self.samples.len());
        &self.samples[start..]
    }

    /// Writes `t_s,value,unit` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t_s,value,unit")?;
        let unit = self.unit.symbol();
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(out, "{:e},{:e},{unit}", i as f64 * self.dt, v)?;
        }
        Ok(())
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub(crate) fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Standard deviation of the samples after `discard` seconds.
pub fn measure_rms(trace: &Trace, discard: f64) -> Result<f64> {
    ensure(discard >= 0.0 && discard < trace.duration(), "discard_s", || {
        format!("must lie in [0, {}) s, got {discard}", trace.duration())
    })?;
    let window = trace.after(discard);
    ensure(!window.is_empty(), "discard_s", || "leaves an empty window".to_string())?;
    Ok(variance(window).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn rejects_bad_traces() {
        assert!(Trace::new(0.0, Unit::V, vec![0.0, 1.0]).is_err());
        assert!(Trace::new(1.0, Unit::V, vec![0.0]).is_err());
        let err = Trace::new(1.0, Unit::V, vec![0.0, f64::NAN]).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn constant_trace_has_zero_rms() {
        let t = Trace::new(1e-3, Unit::V, vec![2.5; 100]).unwrap();
        assert_eq!(measure_rms(&t, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_white_rms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let t = Trace::new(1.0, Unit::A, x).unwrap();
        let rms = measure_rms(&t, 0.0).unwrap();
        // σ of the sample standard deviation is 1/√(2n)
        assert!((rms - 1.0).abs() < 3.0 / (2.0 * n as f64).sqrt());
    }

    #[test]
    fn discard_window() {
        let t = Trace::new(0.5, Unit::V, vec![100.0, 100.0, 1.0, 3.0]).unwrap();
        assert_eq!(measure_rms(&t, 1.0).unwrap(), 1.0);
        assert!(measure_rms(&t, 2.0).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let t = Trace::new(0.5, Unit::W, vec![1.0, -2.0]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t_s,value,unit\n0e0,1e0,W\n5e-1,-2e0,W\n");
    }
}
