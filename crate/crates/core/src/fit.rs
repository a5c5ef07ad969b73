//! Pulse-area histograms, photon-number peak fitting, and the detector
//! energy response.
//!
//! A coherent calibration run produces a histogram with peaks at multiples of
//! the single-photon energy. Gaussian fits to those peaks (Marquardt-Levenberg
//! least squares on bin counts) anchor a quadratic-through-origin response
//! curve mapping energy to pulse area, which [`invert_calibration`] inverts
//! for unknown sources.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{minimize, LeastSquares, LmOptions, LmOutcome};
use crate::units::Energy;

/// Histogram axis unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistUnit {
    Area,
    Ev,
}

/// Binned pulse-area or energy distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyHistogram {
    /// Strictly ascending bin edges; one more entry than `counts`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub unit: HistUnit,
}

/// Histogram binning rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningRule {
    /// Freedman–Diaconis bin width, bin count clamped to [100, 1000].
    FreedmanDiaconis,
    /// Fixed number of bins over the data range.
    Fixed(usize),
}

impl Default for BinningRule {
    fn default() -> Self {
        BinningRule::FreedmanDiaconis
    }
}

pub const FD_MIN_BINS: usize = 100;
pub const FD_MAX_BINS: usize = 1000;

impl EnergyHistogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    pub fn bin_width(&self) -> f64 {
        (self.bin_edges[self.bin_edges.len() - 1] - self.bin_edges[0]) / self.n_bins() as f64
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Sub-histogram restricted to bins whose centers lie in [lo, hi].
    pub fn window(&self, lo: f64, hi: f64) -> EnergyHistogram {
        let mut edges = Vec::new();
        let mut counts = Vec::new();
        for i in 0..self.n_bins() {
            let c = self.bin_center(i);
            if c >= lo && c <= hi {
                if edges.is_empty() {
                    edges.push(self.bin_edges[i]);
                }
                edges.push(self.bin_edges[i + 1]);
                counts.push(self.counts[i]);
            }
        }
        EnergyHistogram {
            bin_edges: edges,
            counts,
            unit: self.unit,
        }
    }
}

/// Bins the values according to the rule. Every input value lands in exactly
/// one bin (the top edge is inclusive for the last bin).
pub fn build_histogram(values: &[f64], rule: BinningRule, unit: HistUnit) -> Result<EnergyHistogram> {
    if values.is_empty() {
        return Err(Error::Data("cannot histogram an empty value list".into()));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite pulse area"));
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    // degenerate range: pad by half a unit so the single value sits mid-bin
    let (min, max) = if max > min {
        (min, max)
    } else {
        (min - 0.5, max + 0.5)
    };

    let n_bins = match rule {
        BinningRule::Fixed(n) => n.max(1),
        BinningRule::FreedmanDiaconis => {
            let n = sorted.len();
            let q = |f: f64| -> f64 {
                let idx = f * (n - 1) as f64;
                let lo = idx.floor() as usize;
                let hi = idx.ceil() as usize;
                let frac = idx - lo as f64;
                sorted[lo] * (1.0 - frac) + sorted[hi] * frac
            };
            let iqr = q(0.75) - q(0.25);
            let width = 2.0 * iqr / (n as f64).cbrt();
            let raw = if width > 0.0 {
                ((max - min) / width).ceil() as usize
            } else {
                FD_MIN_BINS
            };
            raw.clamp(FD_MIN_BINS, FD_MAX_BINS)
        }
    };

    let width = (max - min) / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &v in values {
        let mut idx = ((v - min) / width) as usize;
        if idx >= n_bins {
            idx = n_bins - 1; // top edge inclusive
        }
        counts[idx] += 1;
    }
    let bin_edges = (0..=n_bins).map(|i| min + i as f64 * width).collect();
    Ok(EnergyHistogram {
        bin_edges,
        counts,
        unit,
    })
}

/// One fitted Gaussian photon-number peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPeak {
    /// Peak position in histogram units.
    pub mean: f64,
    /// Peak width (standard deviation) in histogram units.
    pub sigma: f64,
    /// Peak height in counts.
    pub amplitude: f64,
    /// One-sigma uncertainty of the fitted mean.
    pub mean_stderr: f64,
}

/// Diagnostics of a converged mixture fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub cost: f64,
}

/// Finds seed positions for the photon-number peaks.
///
/// Local maxima of the 5-bin moving-average smoothed counts above
/// max(counts)/50, sorted ascending. With a spacing hint, equally spaced
/// positions missed by the local-maximum scan are filled in.
pub fn detect_peaks(hist: &EnergyHistogram, expected_spacing: Option<f64>) -> Result<Vec<f64>> {
    if hist.n_bins() == 0 || hist.total_counts() == 0 {
        return Err(Error::Data("cannot detect peaks in an empty histogram".into()));
    }
    let n = hist.n_bins();
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            let sum: u64 = hist.counts[lo..=hi].iter().sum();
            sum as f64 / (hi - lo + 1) as f64
        })
        .collect();
    let peak_floor = smoothed.iter().cloned().fold(0.0f64, f64::max) / 50.0;

    let mut seeds = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::NEG_INFINITY } else { smoothed[i - 1] };
        let right = if i + 1 == n { f64::NEG_INFINITY } else { smoothed[i + 1] };
        if smoothed[i] > peak_floor && smoothed[i] > left && smoothed[i] >= right {
            // the edge-truncated smoothing window can shift a maximum by a
            // bin or two; snap to the highest raw bin nearby
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            let best = (lo..=hi)
                .max_by_key(|&j| hist.counts[j])
                .unwrap_or(i);
            let center = hist.bin_center(best);
            if seeds.last().map_or(true, |&s: &f64| s < center) {
                seeds.push(center);
            }
        }
    }
    if seeds.is_empty() {
        return Err(Error::Data("no peaks above the detection floor".into()));
    }

    if let Some(spacing) = expected_spacing {
        if spacing > 0.0 && seeds.len() >= 2 {
            let base = seeds[0];
            let span = hist.bin_edges[n] - base;
            let k_max = (span / spacing).floor() as usize;
            let mut filled = seeds.clone();
            for k in 0..=k_max {
                let expect = base + k as f64 * spacing;
                if !filled.iter().any(|&s| (s - expect).abs() < 0.25 * spacing) {
                    filled.push(expect);
                }
            }
            filled.sort_by(|a, b| a.partial_cmp(b).unwrap());
            seeds = filled;
        }
    }
    Ok(seeds)
}

struct MixtureProblem {
    centers: Vec<f64>,
    values: Vec<f64>,
    n_params: usize,
}

fn mixture_value(params: &[f64], x: f64) -> f64 {
    params
        .chunks_exact(3)
        .map(|g| {
            let (amp, mean, sigma) = (g[0], g[1], g[2]);
            let z = (x - mean) / sigma;
            amp * (-0.5 * z * z).exp()
        })
        .sum()
}

impl LeastSquares for MixtureProblem {
    fn dims(&self) -> (usize, usize) {
        (self.centers.len(), self.n_params)
    }
    fn residuals(&self, params: &[f64], out: &mut [f64]) {
        for (o, (&x, &y)) in out.iter_mut().zip(self.centers.iter().zip(&self.values)) {
            *o = y - mixture_value(params, x);
        }
    }
    fn jacobian(&self, params: &[f64], out: &mut [Vec<f64>]) {
        for (row, &x) in out.iter_mut().zip(&self.centers) {
            for (k, g) in params.chunks_exact(3).enumerate() {
                let (amp, mean, sigma) = (g[0], g[1], g[2]);
                let z = (x - mean) / sigma;
                let e = (-0.5 * z * z).exp();
                row[3 * k] = e;
                row[3 * k + 1] = amp * e * z / sigma;
                row[3 * k + 2] = amp * e * z * z / sigma;
            }
        }
    }
    fn in_domain(&self, params: &[f64]) -> bool {
        params.chunks_exact(3).all(|g| g[2] > 0.0)
    }
}

/// Fits a sum of Gaussians to (bin center, value) pairs. Shared by the public
/// histogram entry point and the windowed line fit in `spectro`.
pub(crate) fn fit_mixture_values(
    centers: &[f64],
    values: &[f64],
    seeds: &[f64],
) -> Result<(Vec<GaussianPeak>, FitDiagnostics)> {
    if seeds.is_empty() {
        return Err(Error::Fit {
            message: "no seed positions given".into(),
            iterations: 0,
            cost: f64::NAN,
        });
    }
    let n_params = 3 * seeds.len();
    if centers.len() < 3 * n_params {
        return Err(Error::Fit {
            message: format!(
                "{} bins cannot constrain {} parameters (need 3 bins per parameter)",
                centers.len(),
                n_params
            ),
            iterations: 0,
            cost: f64::NAN,
        });
    }

    let bin_width = if centers.len() > 1 {
        (centers[centers.len() - 1] - centers[0]) / (centers.len() - 1) as f64
    } else {
        1.0
    };
    let mut spacing = f64::INFINITY;
    for w in seeds.windows(2) {
        spacing = spacing.min((w[1] - w[0]).abs());
    }

    let mut start = Vec::with_capacity(n_params);
    for &s in seeds {
        let idx = centers
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - s).abs().partial_cmp(&(b.1 - s).abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        let amp = values[idx].max(1.0);
        // width from the local half-maximum crossing, kept clear of the
        // neighbouring peak
        let half = 0.5 * values[idx];
        let mut left = idx;
        while left > 0 && values[left - 1] > half {
            left -= 1;
        }
        let mut right = idx;
        while right + 1 < values.len() && values[right + 1] > half {
            right += 1;
        }
        let fwhm = ((right - left + 1) as f64) * bin_width;
        let mut sigma0 = (fwhm / 2.355).max(0.6 * bin_width);
        if spacing.is_finite() {
            sigma0 = sigma0.min(spacing / 3.0);
        }
        start.extend_from_slice(&[amp, s, sigma0]);
    }

    let problem = MixtureProblem {
        centers: centers.to_vec(),
        values: values.to_vec(),
        n_params,
    };
    let LmOutcome {
        params,
        cost,
        iterations,
        covariance,
    } = minimize(&problem, &start, &LmOptions::default())?;

    let cov = covariance.ok_or(Error::Fit {
        message: "singular normal equations at the optimum".into(),
        iterations,
        cost,
    })?;

    let mut peaks: Vec<GaussianPeak> = params
        .chunks_exact(3)
        .enumerate()
        .map(|(k, g)| GaussianPeak {
            amplitude: g[0],
            mean: g[1],
            sigma: g[2].abs(),
            mean_stderr: cov[3 * k + 1][3 * k + 1].max(0.0).sqrt(),
        })
        .collect();
    peaks.sort_by(|a, b| a.mean.partial_cmp(&b.mean).unwrap());

    for p in &peaks {
        if !(p.sigma > 0.0) || !(p.amplitude > 0.0) || !p.mean_stderr.is_finite() {
            return Err(Error::Fit {
                message: format!(
                    "fit produced an invalid peak (amplitude {}, sigma {})",
                    p.amplitude, p.sigma
                ),
                iterations,
                cost,
            });
        }
    }
    // stderr of an exactly-interpolated model is 0; floor it so downstream
    // 1/stderr² weights stay finite
    for p in &mut peaks {
        let floor = 1e-12 * (p.mean.abs() + p.sigma);
        p.mean_stderr = p.mean_stderr.max(floor);
    }

    Ok((
        peaks,
        FitDiagnostics {
            iterations,
            converged: true,
            cost,
        },
    ))
}

/// Levenberg–Marquardt fit of a sum of Gaussians to the histogram counts.
///
/// Converged when the relative cost change drops below 1e-10 within 200
/// iterations; otherwise a fit error carrying the iteration diagnostics is
/// returned. Peaks come back sorted by mean with standard errors from the
/// parameter covariance at the optimum.
pub fn fit_gaussian_mixture(
    hist: &EnergyHistogram,
    seeds: &[f64],
) -> Result<(Vec<GaussianPeak>, FitDiagnostics)> {
    let centers: Vec<f64> = (0..hist.n_bins()).map(|i| hist.bin_center(i)).collect();
    let values: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    fit_mixture_values(&centers, &values, seeds)
}

/// Monotone quadratic-through-origin map from energy (eV) to pulse area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    /// Linear coefficient (area per eV).
    pub a1: f64,
    /// Quadratic coefficient (area per eV²); negative under soft saturation.
    pub a2: f64,
    /// Upper end of the validity range in eV (lower end is 0).
    pub validity_max_ev: f64,
}

impl CalibrationCurve {
    /// Area predicted for a given energy.
    pub fn area_of(&self, energy_ev: f64) -> f64 {
        self.a1 * energy_ev + self.a2 * energy_ev * energy_ev
    }

    fn derivative(&self, energy_ev: f64) -> f64 {
        self.a1 + 2.0 * self.a2 * energy_ev
    }

    /// Checks strict monotonicity over the validity range. The derivative is
    /// linear in E, so positivity at both ends implies positivity throughout.
    pub fn validate(&self) -> Result<()> {
        if !(self.validity_max_ev > 0.0) {
            return Err(Error::Calibration(format!(
                "validity range must be positive, got {} eV",
                self.validity_max_ev
            )));
        }
        if self.derivative(0.0) <= 0.0 || self.derivative(self.validity_max_ev) <= 0.0 {
            return Err(Error::Calibration(format!(
                "response curve is not strictly increasing on [0, {} eV]",
                self.validity_max_ev
            )));
        }
        Ok(())
    }
}

/// Fits the detector response from photon-number peaks.
///
/// Peak k (by ascending mean, starting at the k = 0 zero-photon peak) is
/// assigned energy k times the photon energy; the curve is the weighted
/// least-squares quadratic through the origin with weights 1/mean_stderr².
pub fn calibrate(peaks: &[GaussianPeak], photon_energy: Energy) -> Result<CalibrationCurve> {
    if peaks.len() < 3 {
        return Err(Error::Calibration(format!(
            "need at least 2 peaks beyond the zero-photon peak, got {} total",
            peaks.len()
        )));
    }
    if photon_energy.ev() <= 0.0 {
        return Err(Error::Calibration("photon energy must be positive".into()));
    }
    let mut sorted = peaks.to_vec();
    sorted.sort_by(|a, b| a.mean.partial_cmp(&b.mean).unwrap());

    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, p) in sorted.iter().enumerate() {
        let e = k as f64 * photon_energy.ev();
        let w = 1.0 / (p.mean_stderr * p.mean_stderr);
        s11 += w * e * e;
        s12 += w * e * e * e;
        s22 += w * e * e * e * e;
        t1 += w * e * p.mean;
        t2 += w * e * e * p.mean;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::Calibration(
            "normal equations of the response fit are singular".into(),
        ));
    }
    let a1 = (t1 * s22 - t2 * s12) / det;
    let a2 = (s11 * t2 - s12 * t1) / det;

    let curve = CalibrationCurve {
        a1,
        a2,
        validity_max_ev: (sorted.len() as f64 - 0.5) * photon_energy.ev(),
    };
    curve.validate()?;
    Ok(curve)
}

/// Inverts the response curve: unique energy whose predicted area matches.
pub fn invert_calibration(curve: &CalibrationCurve, area: f64) -> Result<Energy> {
    let max_area = curve.area_of(curve.validity_max_ev);
    let slack = 1e-12 * max_area.abs().max(1.0);
    if area < -slack || area > max_area + slack {
        return Err(Error::Range(format!(
            "area {area} outside the calibrated image [0, {max_area}]"
        )));
    }
    let area = area.clamp(0.0, max_area);
    let energy = if curve.a2.abs() < 1e-14 * curve.a1.abs() {
        area / curve.a1
    } else {
        // root of a2 E^2 + a1 E - area = 0 continuous at area -> 0
        let disc = curve.a1 * curve.a1 + 4.0 * curve.a2 * area;
        if disc < 0.0 {
            return Err(Error::Range(format!(
                "area {area} beyond the turning point of the response curve"
            )));
        }
        2.0 * area / (curve.a1 + disc.sqrt())
    };
    Energy::new(energy.max(0.0))
}
