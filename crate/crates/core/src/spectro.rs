//! Wavelength estimation from calibrated energy histograms.
//!
//! A single-Gaussian fit to the one-photon region gives the line energy and
//! the standard error of its mean; first-order propagation through λ = hc/E
//! yields the wavelength and its one-sigma uncertainty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_mixture_values, EnergyHistogram, FitDiagnostics, HistUnit};
use crate::units::{photon_energy, wavelength_of, Energy, Wavelength};

/// Fitted spectral line with propagated uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineEstimate {
    /// Fitted line energy in eV.
    pub energy_mean_ev: f64,
    /// One-sigma standard error of the fitted mean, in eV.
    pub energy_mean_stderr_ev: f64,
    /// Counts inside the fit window.
    pub n_counts: u64,
    /// Wavelength hc/E in nm.
    pub wavelength_nm: f64,
    /// First-order propagated uncertainty σ_λ = λ σ_E / E in nm.
    pub wavelength_stderr_nm: f64,
}

/// One temperature point of a measured tuning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningPoint {
    pub temperature_c: f64,
    pub signal: LineEstimate,
    pub idler: LineEstimate,
}

/// Measured tuning curve: points sorted by temperature plus the total
/// detuning of each branch.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningCurve {
    pub points: Vec<TuningPoint>,
    /// max - min signal wavelength over the curve, nm.
    pub signal_detuning_nm: f64,
    /// max - min idler wavelength over the curve, nm.
    pub idler_detuning_nm: f64,
}

/// Minimum counts required in the fit window.
pub const MIN_WINDOW_COUNTS: u64 = 50;

/// Default one-photon window as a fraction of the expected photon energy.
pub const DEFAULT_WINDOW: (f64, f64) = (0.5, 1.5);

/// Fits a single Gaussian to the windowed energy histogram and propagates the
/// mean's standard error to wavelength.
pub fn estimate_line(
    hist: &EnergyHistogram,
    window_ev: (f64, f64),
) -> Result<(LineEstimate, FitDiagnostics)> {
    if hist.unit != HistUnit::Ev {
        return Err(Error::Data(
            "estimate_line expects a calibrated histogram in eV".into(),
        ));
    }
    let sub = hist.window(window_ev.0, window_ev.1);
    let n_counts = sub.total_counts();
    if sub.n_bins() == 0 || n_counts < MIN_WINDOW_COUNTS {
        return Err(Error::Data(format!(
            "window [{}, {}] eV holds {} counts, need at least {}",
            window_ev.0, window_ev.1, n_counts, MIN_WINDOW_COUNTS
        )));
    }

    let centers: Vec<f64> = (0..sub.n_bins()).map(|i| sub.bin_center(i)).collect();
    let values: Vec<f64> = sub.counts.iter().map(|&c| c as f64).collect();
    let seed = centers[values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap()];
    let (peaks, diag) = fit_mixture_values(&centers, &values, &[seed])?;
    let peak = peaks[0];

    let energy = Energy::new(peak.mean).map_err(|_| Error::Range(format!(
        "fitted line energy {} eV is not physical",
        peak.mean
    )))?;
    let lambda = wavelength_of(energy)?;
    let estimate = LineEstimate {
        energy_mean_ev: peak.mean,
        energy_mean_stderr_ev: peak.mean_stderr,
        n_counts,
        wavelength_nm: lambda.nm(),
        wavelength_stderr_nm: lambda.nm() * peak.mean_stderr / peak.mean,
    };
    Ok((estimate, diag))
}

/// Energy-conservation residual of a signal/idler pair in combined standard
/// errors: (E_s + E_i - E_p) / sqrt(σ_s² + σ_i²). |residual| ≤ 3 flags a
/// consistent pair.
pub fn pair_consistency(point: &TuningPoint, pump: Wavelength) -> f64 {
    let e_p = photon_energy(pump).ev();
    let num = point.signal.energy_mean_ev + point.idler.energy_mean_ev - e_p;
    let denom = (point.signal.energy_mean_stderr_ev.powi(2)
        + point.idler.energy_mean_stderr_ev.powi(2))
    .sqrt();
    num / denom.max(f64::MIN_POSITIVE)
}

/// Sorts the points by temperature and reports the per-branch detunings.
pub fn assemble_tuning_curve(points: &[TuningPoint]) -> Result<TuningCurve> {
    if points.len() < 2 {
        return Err(Error::Data(format!(
            "a tuning curve needs at least 2 points, got {}",
            points.len()
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.temperature_c.partial_cmp(&b.temperature_c).unwrap());
    for w in sorted.windows(2) {
        if w[0].temperature_c == w[1].temperature_c {
            return Err(Error::Data(format!(
                "duplicate temperature {} °C in tuning curve",
                w[0].temperature_c
            )));
        }
    }
    let detuning = |f: fn(&TuningPoint) -> f64| -> f64 {
        let min = sorted.iter().map(f).fold(f64::INFINITY, f64::min);
        let max = sorted.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        max - min
    };
    Ok(TuningCurve {
        signal_detuning_nm: detuning(|p| p.signal.wavelength_nm),
        idler_detuning_nm: detuning(|p| p.idler.wavelength_nm),
        points: sorted,
    })
}
