use super::channel::simulate_channel;
use super::{NoiseSources, SimConfig};
use crate::chain::{folded_baseband_density, lpf_enbw, FrontEndConfig};
use crate::error::Result;
use crate::model::{photocurrent_components, Branch, LaserSpec, PhotodiodeSpec};
use crate::noise::frontend_electronics_noise;
use std::f64::consts::PI;

/// Odd reference harmonics summed explicitly before the remaining weight is
/// lumped onto the last one.
const HARMONICS: usize = 2000;

/// One line of the Monte Carlo versus budget comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub sources: NoiseSources,
    pub n_trials: usize,
    pub demod_mean: f64,
    pub mc_rms: f64,
    pub analytic_rms: f64,
    /// `mc_rms / analytic_rms`; `None` when the budget predicts zero.
    pub ratio: Option<f64>,
}

impl ComparisonRow {
    pub fn label(&self) -> String {
        self.sources.label()
    }

    pub fn within(&self, tolerance: f64) -> bool {
        match self.ratio {
            Some(r) => (r - 1.0).abs() <= tolerance,
            None => self.mc_rms == 0.0,
        }
    }
}

/// Budget prediction of the demodulated output RMS for the enabled sources.
///
/// The differential current density at the integrator input is converted to
/// volts by `1/(2πf·C_f)`, folded to baseband by the square-wave mixer and
/// integrated over the low-pass ENBW.
pub fn analytic_demod_rms(
    fe: &FrontEndConfig,
    laser: &LaserSpec,
    pd: &PhotodiodeSpec,
    sources: NoiseSources,
) -> Result<f64> {
    let comps = photocurrent_components(laser, pd, 0.0, fe.f_m, Branch::Reference)?;
    let electronics = frontend_electronics_noise(fe);
    let eps = 0.5 / fe.cmrr;
    // each branch reaches the output with gain 1 ± ε
    let independent = 2.0 * (1.0 + eps * eps);
    let common = 1.0 / (fe.cmrr * fe.cmrr);
    let s_current = |f: f64| {
        let mut s = 0.0;
        if sources.shot {
            s += independent * comps.s_shot.at(f);
        }
        if sources.electronics {
            s += independent * electronics.at(f);
        }
        if sources.rin {
            s += common * comps.s_laser_noise.at(f);
        }
        s
    };
    let s_out = |f: f64| {
        let z = fe.g_diff / (2.0 * PI * f * fe.c_f);
        s_current(f) * z * z
    };
    let baseband = folded_baseband_density(s_out, fe.f_m, HARMONICS);
    Ok(fe.g_ina * (baseband * lpf_enbw(fe.tau)).sqrt())
}

/// Runs the simulation with each enabled source alone and, when more than
/// one is enabled, all of them together, and sets each result against the
/// budget. Ratios outside tolerance are reported, not rejected.
pub fn compare_analytic(
    fe: &FrontEndConfig,
    laser: &LaserSpec,
    pd: &PhotodiodeSpec,
    sim: &SimConfig,
) -> Result<Vec<ComparisonRow>> {
    let all = sim.sources;
    let mut combos = Vec::new();
    for single in [
        NoiseSources { shot: true, ..NoiseSources::NONE },
        NoiseSources { electronics: true, ..NoiseSources::NONE },
        NoiseSources { rin: true, ..NoiseSources::NONE },
    ] {
        if (single.shot && all.shot) || (single.electronics && all.electronics) || (single.rin && all.rin) {
            combos.push(single);
        }
    }
    if combos.len() != 1 {
        combos.push(all);
    }
    combos
        .into_iter()
        .map(|sources| {
            let run = simulate_channel(laser, pd, 0.0, fe, &SimConfig { sources, ..sim.clone() })?;
            let analytic = analytic_demod_rms(fe, laser, pd, sources)?;
            Ok(ComparisonRow {
                sources,
                n_trials: sim.n_trials,
                demod_mean: run.demod_mean,
                mc_rms: run.demod_rms,
                analytic_rms: analytic,
                ratio: (analytic > 0.0).then(|| run.demod_rms / analytic),
            })
        })
        .collect()
}
