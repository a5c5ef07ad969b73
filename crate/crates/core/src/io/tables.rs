//! CSV and JSON exchange tables.
//!
//! CSV files carry a header row and fixed column order; floats are written in
//! Rust's shortest-round-trip form so values parse back exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::PulseArea;
use crate::error::{Error, Result};
use crate::fit::{CalibrationCurve, EnergyHistogram, FitDiagnostics, GaussianPeak};
use crate::simulate::TruthRecord;
use crate::spectro::{LineEstimate, TuningCurve as MeasuredCurve};
use crate::wgm::TuningCurve as TheoryCurve;

/// Truth table: gate_index, photon_count, total_energy_eV.
pub fn write_truth_csv(path: &Path, truth: &[TruthRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "gate_index,photon_count,total_energy_eV")?;
    for t in truth {
        writeln!(w, "{},{},{}", t.gate_index, t.photon_count, t.total_energy_ev)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-record pulse areas: gate_index, area, accepted.
pub fn write_areas_csv(path: &Path, areas: &[PulseArea]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "gate_index,area,accepted")?;
    for a in areas {
        writeln!(w, "{},{},{}", a.gate_index, a.value, a.accepted)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses an areas CSV produced by [`write_areas_csv`].
pub fn read_areas_csv(path: &Path) -> Result<Vec<PulseArea>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "gate_index,area,accepted" => {}
        Some((_, header)) => {
            return Err(Error::Format(format!(
                "unexpected areas CSV header: {header:?}"
            )))
        }
        None => return Err(Error::Format("empty areas CSV".into())),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse_err = |what: &str| {
            Error::Format(format!("areas CSV line {}: bad {what}: {line:?}", lineno + 1))
        };
        let gate_index = parts
            .next()
            .and_then(|s| s.trim().parse::<u32>().ok())
            .ok_or_else(|| parse_err("gate_index"))?;
        let value = parts
            .next()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| parse_err("area"))?;
        let accepted = parts
            .next()
            .and_then(|s| s.trim().parse::<bool>().ok())
            .ok_or_else(|| parse_err("accepted"))?;
        if parts.next().is_some() {
            return Err(parse_err("column count"));
        }
        out.push(PulseArea {
            gate_index,
            value,
            accepted,
        });
    }
    Ok(out)
}

/// Histogram table: bin_low, bin_high, count.
pub fn write_histogram_csv(path: &Path, hist: &EnergyHistogram) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "bin_low,bin_high,count")?;
    for i in 0..hist.n_bins() {
        writeln!(
            w,
            "{},{},{}",
            hist.bin_edges[i],
            hist.bin_edges[i + 1],
            hist.counts[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the calibration peak table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPeakRow {
    /// Photon number assigned by ascending mean.
    pub k: u32,
    /// Energy assigned to the peak, eV.
    pub energy_ev: f64,
    pub mean_area: f64,
    pub sigma_area: f64,
    pub amplitude: f64,
    pub mean_stderr: f64,
}

/// Calibration result file: response curve, peak table, fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub photon_energy_ev: f64,
    pub curve: CalibrationCurve,
    pub peaks: Vec<CalibrationPeakRow>,
    pub fit: FitDiagnostics,
}

impl CalibrationFile {
    pub fn new(
        photon_energy_ev: f64,
        curve: CalibrationCurve,
        peaks: &[GaussianPeak],
        fit: FitDiagnostics,
    ) -> Self {
        let rows = peaks
            .iter()
            .enumerate()
            .map(|(k, p)| CalibrationPeakRow {
                k: k as u32,
                energy_ev: k as f64 * photon_energy_ev,
                mean_area: p.mean,
                sigma_area: p.sigma,
                amplitude: p.amplitude,
                mean_stderr: p.mean_stderr,
            })
            .collect();
        Self {
            photon_energy_ev,
            curve,
            peaks: rows,
            fit,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("cannot serialize calibration: {e}")))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("invalid calibration JSON: {e}")))
    }
}

/// Line-estimate result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineEstimateFile {
    pub estimate: LineEstimate,
    pub fit: FitDiagnostics,
    /// Non-fatal conditions (e.g. low counts) worth surfacing.
    pub warnings: Vec<String>,
}

impl LineEstimateFile {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("cannot serialize line estimate: {e}")))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("invalid line-estimate JSON: {e}")))
    }
}

/// Measured tuning curve:
/// temperature_C, lambda_signal_nm, signal stderr, lambda_idler_nm, idler stderr.
pub fn write_measured_tuning_csv(path: &Path, curve: &MeasuredCurve) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "temperature_C,lambda_signal_nm,signal_stderr_nm,lambda_idler_nm,idler_stderr_nm"
    )?;
    for p in &curve.points {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.temperature_c,
            p.signal.wavelength_nm,
            p.signal.wavelength_stderr_nm,
            p.idler.wavelength_nm,
            p.idler.wavelength_stderr_nm
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Theory curve:
/// temperature_C, lambda_signal_nm, lambda_idler_nm, q_s, p_s, q_i, p_i, mismatch_Hz.
pub fn write_theory_tuning_csv(path: &Path, curve: &TheoryCurve) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "temperature_C,lambda_signal_nm,lambda_idler_nm,q_s,p_s,q_i,p_i,mismatch_Hz"
    )?;
    for p in &curve.points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.temperature_c,
            p.lambda_s_nm,
            p.lambda_i_nm,
            curve.combo.q_s,
            curve.combo.p_s,
            curve.combo.q_i,
            curve.combo.p_i,
            p.frequency_mismatch_hz
        )?;
    }
    w.flush()?;
    Ok(())
}
