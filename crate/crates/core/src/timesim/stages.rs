//! Discrete-time realizations of the analog stages.

use std::f64::consts::PI;

/// Subsonic leak of the simulated integrator, Hz. An ideal integrator would
/// random-walk without bound on white input.
pub const LEAK_FREQUENCY: f64 = 100.0;

/// Inverting integrator `−1/(C·(s + ω_l))` through the bilinear map.
#[derive(Clone, Debug)]
pub struct LeakyIntegrator {
    a: f64,
    b: f64,
    x_prev: f64,
    y: f64,
}

impl LeakyIntegrator {
    pub fn new(c_f: f64, sample_rate: f64) -> Self {
        let k = 2.0 * sample_rate;
        let wl = 2.0 * PI * LEAK_FREQUENCY;
        LeakyIntegrator {
            a: (k - wl) / (k + wl),
            b: 1.0 / (c_f * (k + wl)),
            x_prev: 0.0,
            y: 0.0,
        }
    }

    /// Starts from output `y` with `x` as the previous input.
    pub fn with_state(mut self, y: f64, x: f64) -> Self {
        self.y = y;
        self.x_prev = x;
        self
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        self.y = self.a * self.y - self.b * (x + self.x_prev);
        self.x_prev = x;
        self.y
    }
}

/// First-order low-pass `1/(1 + sτ)` through the bilinear map.
#[derive(Clone, Debug)]
pub struct BilinearLowPass {
    a: f64,
    b: f64,
    x_prev: f64,
    y: f64,
}

impl BilinearLowPass {
    pub fn new(tau: f64, sample_rate: f64) -> Self {
        let k = 2.0 * tau * sample_rate;
        BilinearLowPass {
            a: (k - 1.0) / (k + 1.0),
            b: 1.0 / (k + 1.0),
            x_prev: 0.0,
            y: 0.0,
        }
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        self.y = self.a * self.y + self.b * (x + self.x_prev);
        self.x_prev = x;
        self.y
    }

    /// Sets the output and previous input without running the filter.
    pub fn preset(&mut self, y: f64, x_prev: f64) {
        self.y = y;
        self.x_prev = x_prev;
    }

    pub fn filter(tau: f64, sample_rate: f64, x: &[f64]) -> Vec<f64> {
        let mut lp = BilinearLowPass::new(tau, sample_rate);
        x.iter().map(|&v| lp.step(v)).collect()
    }
}

#[inline]
fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// ±1 reference at sample `n`. At zero phase the reference is a quarter
/// period ahead of the modulation, which centres its edges on the peaks of
/// the integrated signal. Edges fall on the nearest later sample, so the
/// phase granularity is `2π·f_m/sample_rate`.
#[inline]
pub fn square_reference(n: usize, sample_rate: f64, f_m: f64, phase: f64) -> f64 {
    let cycles = n as f64 * (f_m / sample_rate) + 0.25 + phase / (2.0 * PI);
    if frac(cycles) < 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// True during the first half of each modulation period (pump on).
#[inline]
pub(crate) fn modulation_on(n: usize, sample_rate: f64, f_m: f64) -> bool {
    frac(n as f64 * (f_m / sample_rate)) < 0.5
}
