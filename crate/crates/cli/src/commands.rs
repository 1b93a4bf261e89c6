use crate::config::{Resolved, RunConfig, SweepVariable};
use crate::CliError;
use srs_core::chain::{
    closed_loop_bandwidth, demod_signal_gain, lpf_enbw, sensitivity_ppm, snr, total_ac_gain, GAIN_REQUIREMENT,
};
use srs_core::model::dc_current;
use srs_core::noise::{frontend_electronics_noise, rin_curve_to_psd, shot_psd_optical, BalancedNoise};
use srs_core::timesim::{analyze_scan, compare_analytic, run_scan, simulate_channel};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

const PW: f64 = 1e-12;
const SENSITIVITY_TARGET_PPM: f64 = 10.0;
const RATIO_TOLERANCE: f64 = 0.05;

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn log_grid(f_min: f64, f_max: f64, per_decade: usize) -> Vec<f64> {
    let decades = (f_max / f_min).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n)
        .map(|i| f_min * 10f64.powf(decades * i as f64 / n.max(1) as f64))
        .collect()
}

fn csv_file(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn e(v: f64) -> String {
    format!("{v:e}")
}

pub fn budget(cfg: &RunConfig, r: &Resolved, out: &Path) -> Result<String, CliError> {
    let (fe, laser, pd) = (&r.fe, &r.laser, &r.pd);
    let b = &cfg.budget;
    let terms = BalancedNoise::new(fe, laser, pd)?;
    let total = terms.total();

    let mut w = csv_file(&out.join("budget.csv"))?;
    w.write_record([
        "f_Hz",
        "shot_W2_per_Hz",
        "electronics_W2_per_Hz",
        "leaked_rin_W2_per_Hz",
        "total_W2_per_Hz",
    ])?;
    let mut s = String::new();
    let _ = writeln!(s, "input-referred noise, pW/rtHz (both branches)");
    let _ = writeln!(s, "{:>12} {:>10} {:>12} {:>12} {:>10}", "f [MHz]", "shot", "electronics", "leaked RIN", "total");
    for f in log_grid(b.f_min_Hz, b.f_max_Hz, b.points_per_decade) {
        let vals = [terms.shot.at(f), terms.electronics.at(f), terms.leaked_rin.at(f), total.at(f)];
        w.write_record([e(f), e(vals[0]), e(vals[1]), e(vals[2]), e(vals[3])])?;
        let a: Vec<f64> = vals.iter().map(|v| v.sqrt() / PW).collect();
        let _ = writeln!(s, "{:>12.4} {:>10.3} {:>12.3} {:>12.3} {:>10.3}", f / 1e6, a[0], a[1], a[2], a[3]);
    }
    w.flush()?;

    let f_m = fe.f_m;
    let p = laser.average_power;
    let s_shot = terms.shot.at(f_m);
    let s_total = total.at(f_m);
    let sens_shot = sensitivity_ppm(s_shot, fe.tau, p)?;
    let sens_total = sensitivity_ppm(s_total, fe.tau, p)?;
    let delta_p = b.snr_gain_ppm * 1e-6 * p;
    let gain = total_ac_gain(f_m, fe)?;
    let bw = closed_loop_bandwidth(fe.gbwp, fe.c_f, fe.c_in);
    let electronics_current = frontend_electronics_noise(fe).amplitude_at(f_m);
    let single_rin = rin_curve_to_psd(&laser.rin, p).amplitude_at(f_m);
    let photon = shot_psd_optical(laser.wavelength, p).amplitude_at(f_m);

    let _ = writeln!(s);
    let _ = writeln!(s, "at f_m = {:.4} MHz, P = {:.2} uW, tau = {:.1} us", f_m / 1e6, p * 1e6, fe.tau * 1e6);
    let _ = writeln!(s, "shot noise (both branches)        {:.3} pW/rtHz", s_shot.sqrt() / PW);
    let _ = writeln!(s, "total noise                       {:.3} pW/rtHz", s_total.sqrt() / PW);
    let _ = writeln!(s, "electronics per branch            {:.3} pA/rtHz", electronics_current / PW);
    let _ = writeln!(s, "laser noise, single detector      {:.3} pW/rtHz", single_rin / PW);
    let _ = writeln!(s, "photon shot noise, one beam       {:.3} pW/rtHz", photon / PW);
    let _ = writeln!(
        s,
        "sensitivity (shot-limited)        {sens_shot:.3} ppm  {} (< {SENSITIVITY_TARGET_PPM} ppm)",
        pass(sens_shot < SENSITIVITY_TARGET_PPM)
    );
    let _ = writeln!(
        s,
        "sensitivity (total)               {sens_total:.3} ppm  {} (< {SENSITIVITY_TARGET_PPM} ppm)",
        pass(sens_total < SENSITIVITY_TARGET_PPM)
    );
    let _ = writeln!(
        s,
        "SNR at {} ppm (shot-limited)     {:.2}",
        b.snr_gain_ppm,
        snr(delta_p, s_shot, fe.tau)
    );
    let _ = writeln!(s, "SNR at {} ppm (total)            {:.2}", b.snr_gain_ppm, snr(delta_p, s_total, fe.tau));
    let _ = writeln!(
        s,
        "gain at f_m                       {:.3} MOhm  {} (> {} MOhm){}",
        gain.gain / 1e6,
        pass(gain.gain > GAIN_REQUIREMENT),
        GAIN_REQUIREMENT / 1e6,
        if gain.within_bandwidth { "" } else { "  [f_m beyond first-stage bandwidth]" }
    );
    let _ = writeln!(s, "first-stage closed-loop bandwidth {:.3} MHz", bw / 1e6);
    let _ = writeln!(s, "output filter f_c / ENBW          {:.2} Hz / {:.2} Hz", fe.f_c(), lpf_enbw(fe.tau));
    Ok(s)
}

pub fn simulate(cfg: &RunConfig, r: &Resolved, out: &Path) -> Result<String, CliError> {
    let (fe, laser, pd, sim) = (&r.fe, &r.laser, &r.pd, &r.sim);
    let rows = compare_analytic(fe, laser, pd, sim)?;
    let mut w = csv_file(&out.join("stats.csv"))?;
    w.write_record(["configuration", "n_trials", "demod_mean_V", "demod_rms_V", "analytic_rms_V", "ratio"])?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Monte Carlo vs budget: {} trials x {:.3} ms at {:.1} MHz sampling",
        sim.n_trials,
        sim.duration * 1e3,
        sim.sample_rate / 1e6
    );
    let _ = writeln!(s, "{:<24} {:>14} {:>14} {:>8}", "configuration", "MC rms [V]", "budget [V]", "ratio");
    for row in &rows {
        let ratio = row.ratio.map_or(String::new(), e);
        w.write_record([
            row.label(),
            row.n_trials.to_string(),
            e(row.demod_mean),
            e(row.mc_rms),
            e(row.analytic_rms),
            ratio,
        ])?;
        let shown = row.ratio.map_or("-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            s,
            "{:<24} {:>14.6e} {:>14.6e} {:>8}  {}",
            row.label(),
            row.mc_rms,
            row.analytic_rms,
            shown,
            pass(row.within(RATIO_TOLERANCE))
        );
    }
    w.flush()?;

    let gain_ppm = cfg.sim.sample_gain_ppm;
    let run = simulate_channel(laser, pd, gain_ppm, fe, sim)?;
    std::fs::create_dir_all(out.join("traces"))?;
    let mut f = BufWriter::new(File::create(out.join("traces").join("v_out.csv"))?);
    run.v_out.write_csv(&mut f)?;
    f.flush()?;
    let expected = gain_ppm * 1e-6 * dc_current(laser, pd) * demod_signal_gain(fe)?;
    let _ = writeln!(s);
    let _ = writeln!(s, "signal run at {gain_ppm} ppm");
    let _ = writeln!(s, "demod mean      {:.6e} V (gain product {:.6e} V)", run.demod_mean, expected);
    let _ = writeln!(s, "demod rms       {:.6e} V", run.demod_rms);
    let _ = writeln!(s, "SNR             {:.3}", run.demod_mean / run.demod_rms);
    let _ = writeln!(s, "V_DC signal     {:.6} V", run.v_dc_sig);
    let _ = writeln!(s, "V_DC reference  {:.6} V", run.v_dc_ref);
    let _ = writeln!(s, "trace           traces/v_out.csv ({} samples, one per modulation period)", run.v_out.len());
    Ok(s)
}

pub fn scan(cfg: &RunConfig, r: &Resolved, out: &Path) -> Result<String, CliError> {
    let result = run_scan(&r.sample, &r.scan, &r.scan_sim, &r.fe, &r.laser, &r.pd)?;
    let mut f = BufWriter::new(File::create(out.join("scan.csv"))?);
    result.write_csv(&mut f)?;
    f.flush()?;
    let a = analyze_scan(&result, cfg.scan.peak_threshold);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scan {:.1}-{:.1} nm, {} points, pump {:.1} nm, {:.1} ms per point",
        r.scan.lambda_start * 1e9,
        r.scan.lambda_stop * 1e9,
        r.scan.n_points,
        r.scan.lambda_pump * 1e9,
        r.scan_sim.duration * 1e3
    );
    let _ = writeln!(s, "baseline rms    {:.3} ppm", a.baseline_rms);
    let _ = writeln!(s, "baseline offset {:.3} ppm", a.baseline_offset);
    let _ = writeln!(s, "peaks above {} x baseline rms: {}", cfg.scan.peak_threshold, a.peaks.len());
    for p in &a.peaks {
        let _ = writeln!(
            s,
            "  {:8.1} cm-1  {:8.2} ppm  hwhm {:6.1} cm-1",
            p.center, p.amplitude, p.half_width
        );
    }
    Ok(s)
}

pub fn sweep(cfg: &RunConfig, r: &Resolved, out: &Path) -> Result<String, CliError> {
    let sw = &cfg.sweep;
    let var = sw.variable;
    let mut w = csv_file(&out.join("sweep.csv"))?;
    w.write_record([
        var.column(),
        "sensitivity_shot_ppm",
        "sensitivity_ppm",
        "total_noise_W2_per_Hz",
        "gain_ohm",
        "bandwidth_Hz",
    ])?;
    let mut s = String::new();
    let _ = writeln!(s, "sweep of {} ({} points)", var.column(), sw.n);
    let _ = writeln!(
        s,
        "{:>14} {:>12} {:>12} {:>14} {:>12} {:>12}",
        var.column(),
        "shot [ppm]",
        "total [ppm]",
        "noise [pW/rtHz]",
        "gain [MOhm]",
        "BW [MHz]"
    );
    for v in sw.values() {
        let mut fe = r.fe.clone();
        let mut laser = r.laser.clone();
        match var {
            SweepVariable::RDc => fe.r_dc = v,
            SweepVariable::CIn => fe.c_in = v,
            SweepVariable::Tau => fe.tau = v,
            SweepVariable::FM => fe.f_m = v,
            SweepVariable::Cmrr => fe.cmrr = v,
            SweepVariable::AveragePower => laser.average_power = v,
        }
        fe.validate()
            .map_err(|e| e.within("frontend"))
            .and_then(|_| laser.validate().map_err(|e| e.within("laser")))
            .map_err(|e| CliError::Invariant(format!("sweep value {v}: {e}")))?;
        let terms = BalancedNoise::new(&fe, &laser, &r.pd)?;
        let s_total = terms.total().at(fe.f_m);
        let sens_shot = sensitivity_ppm(terms.shot.at(fe.f_m), fe.tau, laser.average_power)?;
        let sens = sensitivity_ppm(s_total, fe.tau, laser.average_power)?;
        let gain = total_ac_gain(fe.f_m, &fe)?.gain;
        let bw = closed_loop_bandwidth(fe.gbwp, fe.c_f, fe.c_in);
        w.write_record([e(v), e(sens_shot), e(sens), e(s_total), e(gain), e(bw)])?;
        let _ = writeln!(
            s,
            "{:>14.4e} {:>12.3} {:>12.3} {:>14.3} {:>12.3} {:>12.3}",
            v,
            sens_shot,
            sens,
            s_total.sqrt() / PW,
            gain / 1e6,
            bw / 1e6
        );
    }
    w.flush()?;
    Ok(s)
}
