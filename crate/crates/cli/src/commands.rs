//! Command implementations: each wires config, core operations, and the
//! exchange file formats together.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use tesspec_core::config::RunConfig;
use tesspec_core::dsp::{analyze_traces, baseline_subtract, build_master, raw_area, MasterPulse, TraceSet};
use tesspec_core::error::{Error, Result};
use tesspec_core::fit::{
    build_histogram, calibrate as fit_calibrate, detect_peaks, fit_gaussian_mixture,
    invert_calibration, EnergyHistogram, HistUnit,
};
use tesspec_core::io::{
    read_areas_csv, read_trace_file, write_areas_csv, write_histogram_csv,
    write_measured_tuning_csv, write_theory_tuning_csv, write_trace_file, write_truth_csv,
    CalibrationFile, LineEstimateFile,
};
use tesspec_core::simulate::simulate_run;
use tesspec_core::spectro::{assemble_tuning_curve, estimate_line, pair_consistency, TuningPoint};
use tesspec_core::units::{photon_energy, Energy, Wavelength};
use tesspec_core::wgm::{
    theoretical_tuning_curve, MaterialModel, PumpSpec, TransverseCombo, DEFAULT_MATERIAL_FILE,
};

/// Environment variable overriding the material-data directory.
pub const DATA_DIR_ENV: &str = "TESSPEC_DATA_DIR";

fn stem_or(out: Option<&Path>, fallback: &Path) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| fallback.to_path_buf())
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    stem.with_file_name(name)
}

fn load_material(config: &RunConfig) -> Result<MaterialModel> {
    if let Some(path) = &config.wgm.material_file {
        return MaterialModel::from_json_file(Path::new(path));
    }
    if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
        return MaterialModel::from_json_file(&Path::new(&dir).join(DEFAULT_MATERIAL_FILE));
    }
    Ok(MaterialModel::builtin())
}

pub fn simulate(config: &RunConfig, out: Option<&Path>) -> Result<()> {
    let stem = stem_or(out, Path::new("run"));
    let (traces, truth) = simulate_run(
        &config.source,
        &config.pulse,
        &config.noise,
        &config.gate,
        config.n_gates,
    )?;

    let mean_area = traces
        .records
        .iter()
        .map(|r| baseline_subtract(r).map(|s| raw_area(&s)))
        .sum::<Result<f64>>()?
        / traces.len() as f64;

    let trace_path = with_suffix(&stem, ".tesr");
    let truth_path = with_suffix(&stem, ".truth.csv");
    write_trace_file(&trace_path, &traces)?;
    write_truth_csv(&truth_path, &truth)?;
    println!(
        "simulated {} gates, mean raw area {:.6e} -> {} and {}",
        traces.len(),
        mean_area,
        trace_path.display(),
        truth_path.display()
    );
    Ok(())
}

pub fn analyze(
    config: &RunConfig,
    trace_path: &Path,
    master_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let stem = stem_or(out, &trace_path.with_extension(""));
    let traces = read_trace_file(trace_path)?;

    let master = match master_path {
        Some(path) => {
            let set = read_trace_file(path)?;
            master_from_trace_set(&set)?
        }
        None => {
            let master = build_master(&traces)?;
            let master_set = TraceSet::new(vec![tesspec_core::dsp::TraceRecord {
                samples: master.template.clone(),
                sample_interval: master.sample_interval,
                trigger_index: master.trigger_index,
                gate_index: 0,
            }]);
            write_trace_file(&with_suffix(&stem, ".master.tesr"), &master_set)?;
            master
        }
    };

    let areas = analyze_traces(&traces, &master, config.fit.pileup_threshold)?;
    let accepted = areas.iter().filter(|a| a.accepted).count();
    let areas_path = with_suffix(&stem, ".areas.csv");
    write_areas_csv(&areas_path, &areas)?;
    println!(
        "analyzed {} records ({} accepted, {} rejected) -> {}",
        areas.len(),
        accepted,
        areas.len() - accepted,
        areas_path.display()
    );
    Ok(())
}

/// Rebuilds a master pulse from its single-record trace-file form (written by
/// `analyze` when it constructs the template itself).
fn master_from_trace_set(set: &TraceSet) -> Result<MasterPulse> {
    let record = set
        .records
        .first()
        .ok_or_else(|| Error::Format("master file holds no record".into()))?;
    let mut master = MasterPulse {
        template: record.samples.clone(),
        sample_interval: record.sample_interval,
        trigger_index: record.trigger_index,
        baseline_noise_rms: 0.0,
    };
    // stored as f32: renormalize to restore the unit-area invariant
    master.normalize()?;
    master.validate()?;
    Ok(master)
}

pub fn calibrate(
    config: &RunConfig,
    areas_path: &Path,
    wavelength_nm: f64,
    out: Option<&Path>,
) -> Result<()> {
    let stem = stem_or(out, &areas_path.with_extension(""));
    let areas = read_areas_csv(areas_path)?;
    let accepted: Vec<f64> = areas.iter().filter(|a| a.accepted).map(|a| a.value).collect();
    if accepted.is_empty() {
        return Err(Error::Calibration("no accepted pulse areas".into()));
    }

    let wavelength = Wavelength::new(wavelength_nm)?;
    let e0 = photon_energy(wavelength);
    let hist = build_histogram(&accepted, config.binning, HistUnit::Area)?;
    let seeds = detect_peaks(&hist, None).map_err(promote_to_calibration)?;
    let (peaks, diag) = fit_gaussian_mixture(&hist, &seeds)?;
    let curve = fit_calibrate(&peaks, e0)?;

    let cal = CalibrationFile::new(e0.ev(), curve, &peaks, diag);
    let cal_path = with_suffix(&stem, ".calibration.json");
    let hist_path = with_suffix(&stem, ".hist.csv");
    cal.write(&cal_path)?;
    write_histogram_csv(&hist_path, &hist)?;
    println!(
        "calibrated {} peaks (a1 = {:.6}, a2 = {:.3e}, valid to {:.3} eV) -> {}",
        cal.peaks.len(),
        curve.a1,
        curve.a2,
        curve.validity_max_ev,
        cal_path.display()
    );
    Ok(())
}

fn promote_to_calibration(err: Error) -> Error {
    match err {
        Error::Data(msg) => Error::Calibration(msg),
        other => other,
    }
}

pub fn spectro(
    _config: &RunConfig,
    areas_path: &Path,
    calibration_path: &Path,
    line_ev: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let stem = stem_or(out, &areas_path.with_extension(""));
    let areas = read_areas_csv(areas_path)?;
    let cal = CalibrationFile::read(calibration_path)?;
    cal.curve.validate()?;

    let mut energies = Vec::new();
    let mut out_of_range = 0usize;
    for a in areas.iter().filter(|a| a.accepted) {
        match invert_calibration(&cal.curve, a.value) {
            Ok(e) => energies.push(e.ev()),
            Err(_) => out_of_range += 1,
        }
    }
    if energies.is_empty() || out_of_range > energies.len() {
        return Err(Error::Range(format!(
            "{out_of_range} of {} accepted areas fall outside the calibrated range",
            out_of_range + energies.len()
        )));
    }

    let hist = build_histogram(&energies, tesspec_core::fit::BinningRule::default(), HistUnit::Ev)?;
    let window = match line_ev {
        Some(e) => {
            let e = Energy::new(e)?;
            (0.5 * e.ev(), 1.5 * e.ev())
        }
        None => auto_line_window(&hist)?,
    };
    let (estimate, diag) = estimate_line(&hist, window)?;

    let mut warnings = Vec::new();
    if estimate.n_counts < 1000 {
        let w = format!(
            "only {} counts in the line window; the ±2 nm uncertainty target needs more statistics",
            estimate.n_counts
        );
        eprintln!("warning: {w}");
        warnings.push(w);
    }
    if out_of_range > 0 {
        warnings.push(format!("{out_of_range} areas outside the calibrated range were dropped"));
    }

    let file = LineEstimateFile {
        estimate,
        fit: diag,
        warnings,
    };
    let path = with_suffix(&stem, ".line.json");
    file.write(&path)?;
    println!(
        "line: {:.4} ± {:.4} eV -> {:.2} ± {:.2} nm ({} counts) -> {}",
        estimate.energy_mean_ev,
        estimate.energy_mean_stderr_ev,
        estimate.wavelength_nm,
        estimate.wavelength_stderr_nm,
        estimate.n_counts,
        path.display()
    );
    Ok(())
}

/// Picks the line window from the strongest peak above the zero-photon
/// cluster.
fn auto_line_window(hist: &EnergyHistogram) -> Result<(f64, f64)> {
    let seeds = detect_peaks(hist, None)?;
    let mut best: Option<(f64, u64)> = None;
    for s in seeds {
        if s <= 0.3 {
            continue; // zero-photon cluster
        }
        let idx = (0..hist.n_bins())
            .min_by(|&a, &b| {
                (hist.bin_center(a) - s)
                    .abs()
                    .partial_cmp(&(hist.bin_center(b) - s).abs())
                    .unwrap()
            })
            .unwrap();
        let amp = hist.counts[idx];
        if best.map_or(true, |(_, a)| amp > a) {
            best = Some((s, amp));
        }
    }
    let (center, _) = best.ok_or_else(|| {
        Error::Data("no line peak found above 0.3 eV; pass an explicit line energy".into())
    })?;
    Ok((0.5 * center, 1.5 * center))
}

fn parse_combo(text: &str) -> Result<TransverseCombo> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "combo must be \"q_s,p_s,q_i,p_i\", got {text:?}"
        )));
    }
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("bad mode number {p:?} in combo {text:?}")))
        })
        .collect::<Result<_>>()?;
    Ok(TransverseCombo {
        q_s: nums[0],
        p_s: nums[1],
        q_i: nums[2],
        p_i: nums[3],
    })
}

#[allow(clippy::too_many_arguments)]
pub fn phasematch(
    config: &RunConfig,
    t_start: f64,
    t_stop: f64,
    t_step: f64,
    combo_args: &[String],
    m_halfwidth: Option<u32>,
    relock: bool,
    out: Option<&Path>,
) -> Result<()> {
    let stem = stem_or(out, Path::new("phasematch"));
    let material = load_material(config)?;
    let geometry = config.wgm.geometry;
    let pump = PumpSpec {
        relock_each_temperature: relock || config.wgm.pump.relock_each_temperature,
        ..config.wgm.pump
    };
    let m_halfwidth = m_halfwidth.unwrap_or(config.wgm.search.m_halfwidth);

    let combos: Vec<TransverseCombo> = if combo_args.is_empty() {
        vec![TransverseCombo {
            q_s: 1,
            p_s: 0,
            q_i: 1,
            p_i: 0,
        }]
    } else {
        combo_args.iter().map(|c| parse_combo(c)).collect::<Result<_>>()?
    };

    let mut any = false;
    for combo in combos {
        let curve = theoretical_tuning_curve(
            &geometry, &material, t_start, t_stop, t_step, &pump, combo, m_halfwidth,
        )?;
        let path = with_suffix(
            &stem,
            &format!(
                "_qs{}ps{}qi{}pi{}.csv",
                combo.q_s, combo.p_s, combo.q_i, combo.p_i
            ),
        );
        write_theory_tuning_csv(&path, &curve)?;
        println!(
            "combo (q_s={}, p_s={}, q_i={}, p_i={}): {} points, {} temperatures without solutions -> {}",
            combo.q_s,
            combo.p_s,
            combo.q_i,
            combo.p_i,
            curve.points.len(),
            curve.skipped_temperatures.len(),
            path.display()
        );
        any |= !curve.points.is_empty();
    }
    if !any {
        println!("no phase-matching solutions anywhere in [{t_start}, {t_stop}] °C");
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    temperature_c: f64,
    signal: PathBuf,
    idler: PathBuf,
}

pub fn tuning(manifest_path: &Path, pump_nm: Option<f64>, out: Option<&Path>) -> Result<()> {
    let stem = stem_or(out, &manifest_path.with_extension(""));
    let text = std::fs::read_to_string(manifest_path)?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid tuning manifest: {e}")))?;

    let mut points = Vec::new();
    for entry in &entries {
        let signal = LineEstimateFile::read(&entry.signal)?;
        let idler = LineEstimateFile::read(&entry.idler)?;
        points.push(TuningPoint {
            temperature_c: entry.temperature_c,
            signal: signal.estimate,
            idler: idler.estimate,
        });
    }
    let curve = assemble_tuning_curve(&points)?;
    let path = with_suffix(&stem, ".tuning.csv");
    write_measured_tuning_csv(&path, &curve)?;
    println!(
        "tuning curve over {} points: signal detuning {:.2} nm, idler detuning {:.2} nm -> {}",
        curve.points.len(),
        curve.signal_detuning_nm,
        curve.idler_detuning_nm,
        path.display()
    );
    if let Some(pump_nm) = pump_nm {
        let pump = Wavelength::new(pump_nm)?;
        for p in &curve.points {
            let r = pair_consistency(p, pump);
            let verdict = if r.abs() <= 3.0 { "ok" } else { "INCONSISTENT" };
            println!("  T = {:.2} °C: pair residual {:+.2}σ {}", p.temperature_c, r, verdict);
        }
    }
    Ok(())
}
