//! Pulse processing: baseline subtraction, master-pulse construction, matched
//! filtering, and pileup rejection.
//!
//! The chain turns raw trace records into scalar pulse areas. Every operation
//! is a pure per-record transform, so a parallel map over records gives
//! results identical to sequential processing.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Minimum number of pre-trigger samples required for baseline estimation.
pub const MIN_PRE_TRIGGER: usize = 8;

/// Fraction of the candidate-selection window around the median nonzero area
/// used when picking one-photon pulses for the master template.
const MASTER_WINDOW_FRACTION: f64 = 0.25;

/// Noise-floor multiplier separating "nonzero" areas from baseline records.
const NONZERO_AREA_SIGMA: f64 = 5.0;

/// One digitized TES voltage record per trigger gate.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Voltage-like amplitudes on a uniform grid.
    pub samples: Vec<f64>,
    /// Sample spacing in seconds.
    pub sample_interval: f64,
    /// Sample index where the gate begins; everything before is baseline.
    pub trigger_index: usize,
    /// Gate number within the run.
    pub gate_index: u32,
}

impl TraceRecord {
    fn check_pre_trigger(&self) -> Result<()> {
        if self.trigger_index < MIN_PRE_TRIGGER {
            return Err(Error::Format(format!(
                "pre-trigger region has {} samples, need at least {}",
                self.trigger_index, MIN_PRE_TRIGGER
            )));
        }
        if self.samples.len() <= self.trigger_index {
            return Err(Error::Format(format!(
                "record of {} samples has no post-trigger region (trigger at {})",
                self.samples.len(),
                self.trigger_index
            )));
        }
        Ok(())
    }
}

/// A uniform collection of trace records sharing one sample grid.
#[derive(Debug, Clone, Default)]
pub struct TraceSet {
    pub records: Vec<TraceRecord>,
}

impl TraceSet {
    pub fn new(records: Vec<TraceRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Verifies all records share one grid and returns
    /// (samples_per_record, sample_interval, trigger_index).
    pub fn uniform_grid(&self) -> Result<(usize, f64, usize)> {
        let first = self
            .records
            .first()
            .ok_or_else(|| Error::Data("trace set is empty".into()))?;
        let key = (first.samples.len(), first.sample_interval, first.trigger_index);
        for r in &self.records {
            if (r.samples.len(), r.sample_interval, r.trigger_index) != key {
                return Err(Error::Format(format!(
                    "record {} does not share the common sample grid",
                    r.gate_index
                )));
            }
        }
        Ok(key)
    }
}

/// Unit-normalized template waveform used as the matched filter.
#[derive(Debug, Clone)]
pub struct MasterPulse {
    /// Template samples on the same grid as the traces it will filter.
    pub template: Vec<f64>,
    pub sample_interval: f64,
    pub trigger_index: usize,
    /// Pooled pre-trigger noise RMS of the run the template was built from;
    /// 0 when unknown (the pileup veto then falls back to the per-record
    /// estimate).
    pub baseline_noise_rms: f64,
}

impl MasterPulse {
    /// Scales the template so it sums to unit area.
    pub fn normalize(&mut self) -> Result<()> {
        let area: f64 = self.template.iter().sum::<f64>() * self.sample_interval;
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::Data(format!("template area {area} is not positive")));
        }
        for v in &mut self.template {
            *v /= area;
        }
        Ok(())
    }

    /// Checks the unit-area and positive-amplitude invariants.
    pub fn validate(&self) -> Result<()> {
        let area: f64 = self.template.iter().sum::<f64>() * self.sample_interval;
        if (area - 1.0).abs() > 1e-9 {
            return Err(Error::Format(format!(
                "template area {area} deviates from 1 by more than 1e-9"
            )));
        }
        let max = self.template.iter().cloned().fold(f64::MIN, f64::max);
        if !(max > 0.0) {
            return Err(Error::Format("template has no positive amplitude".into()));
        }
        Ok(())
    }

    fn check_grid(&self, trace: &TraceRecord) -> Result<()> {
        let dt_ok = (self.sample_interval - trace.sample_interval).abs()
            <= 1e-12 * self.sample_interval;
        if self.template.len() != trace.samples.len()
            || !dt_ok
            || self.trigger_index != trace.trigger_index
        {
            return Err(Error::Format(format!(
                "trace {} does not share the master-pulse sample grid",
                trace.gate_index
            )));
        }
        Ok(())
    }
}

/// One scalar pulse area with its pileup verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseArea {
    pub gate_index: u32,
    /// Pulse-area units (dimensionless after filter normalization).
    pub value: f64,
    /// False when the record was flagged as pileup.
    pub accepted: bool,
}

/// Subtracts the mean of the pre-trigger samples from the whole record.
pub fn baseline_subtract(trace: &TraceRecord) -> Result<TraceRecord> {
    trace.check_pre_trigger()?;
    let pre = &trace.samples[..trace.trigger_index];
    let mean = pre.iter().sum::<f64>() / pre.len() as f64;
    let samples = trace.samples.iter().map(|s| s - mean).collect();
    Ok(TraceRecord {
        samples,
        ..trace.clone()
    })
}

/// Sum of post-trigger samples times the sample interval.
///
/// Expects a baseline-subtracted trace; on raw traces the result is shifted
/// by the baseline offset times the post-trigger duration.
pub fn raw_area(trace: &TraceRecord) -> f64 {
    trace.samples[trace.trigger_index.min(trace.samples.len())..]
        .iter()
        .sum::<f64>()
        * trace.sample_interval
}

struct RecordStats {
    area: f64,
    baseline_mean: f64,
}

/// Builds the averaged one-photon master pulse from a calibration run.
///
/// Candidate selection: records whose raw area lies within ±25% of the median
/// of the nonzero-area records, where "nonzero" means more than five standard
/// deviations of pure-baseline area above zero. Candidates are averaged
/// sample-wise after baseline subtraction and normalized to unit area.
pub fn build_master(traces: &TraceSet) -> Result<MasterPulse> {
    if traces.len() < 100 {
        return Err(Error::Data(format!(
            "need at least 100 candidate traces to build a master pulse, got {}",
            traces.len()
        )));
    }
    let (n_samples, dt, trigger) = traces.uniform_grid()?;
    if trigger < MIN_PRE_TRIGGER {
        return Err(Error::Format(format!(
            "pre-trigger region has {trigger} samples, need at least {MIN_PRE_TRIGGER}"
        )));
    }

    // Pass 1: per-record baseline mean and raw area, pooled baseline noise.
    let mut stats = Vec::with_capacity(traces.len());
    let mut noise_ss = 0.0;
    let mut noise_n = 0usize;
    for r in &traces.records {
        let pre = &r.samples[..trigger];
        let mean = pre.iter().sum::<f64>() / pre.len() as f64;
        noise_ss += pre.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>();
        noise_n += pre.len() - 1;
        let area = r.samples[trigger..].iter().map(|s| s - mean).sum::<f64>() * dt;
        stats.push(RecordStats {
            area,
            baseline_mean: mean,
        });
    }
    let sigma_v = if noise_n > 0 {
        (noise_ss / noise_n as f64).sqrt()
    } else {
        0.0
    };
    let n_post = (n_samples - trigger) as f64;
    // raw-area noise: white post-trigger noise plus the baseline-mean
    // estimation error leaking through the post-trigger sum
    let sigma_area = sigma_v * dt * (n_post + n_post * n_post / trigger as f64).sqrt();
    let area_floor = NONZERO_AREA_SIGMA * sigma_area;

    let mut nonzero: Vec<f64> = stats
        .iter()
        .map(|s| s.area)
        .filter(|&a| a > area_floor)
        .collect();
    if nonzero.is_empty() {
        return Err(Error::Data(
            "no records with nonzero pulse area; cannot build a master pulse".into(),
        ));
    }
    nonzero.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if nonzero.len() % 2 == 1 {
        nonzero[nonzero.len() / 2]
    } else {
        0.5 * (nonzero[nonzero.len() / 2 - 1] + nonzero[nonzero.len() / 2])
    };
    let lo = median * (1.0 - MASTER_WINDOW_FRACTION);
    let hi = median * (1.0 + MASTER_WINDOW_FRACTION);

    let mut accum = vec![0.0f64; n_samples];
    let mut n_candidates = 0usize;
    for (r, s) in traces.records.iter().zip(&stats) {
        if s.area >= lo && s.area <= hi {
            for (acc, sample) in accum.iter_mut().zip(&r.samples) {
                *acc += sample - s.baseline_mean;
            }
            n_candidates += 1;
        }
    }
    if n_candidates < 20 {
        return Err(Error::Data(format!(
            "only {n_candidates} one-photon candidates survive the ±25% window, need at least 20"
        )));
    }
    for v in &mut accum {
        *v /= n_candidates as f64;
    }
    // re-zero the averaged template's baseline: candidate selection is
    // correlated with each record's few-sample baseline estimate, which would
    // otherwise leave a small constant pedestal in the average
    let pedestal = accum[..trigger].iter().sum::<f64>() / trigger as f64;
    for v in &mut accum {
        *v -= pedestal;
    }
    let mut master = MasterPulse {
        template: accum,
        sample_interval: dt,
        trigger_index: trigger,
        baseline_noise_rms: sigma_v,
    };
    master.normalize()?;
    master.validate()?;
    Ok(master)
}

/// Inner product of the baseline-subtracted trace with the template, scaled
/// by the sample interval. Linear in the trace amplitude.
pub fn matched_area(trace: &TraceRecord, master: &MasterPulse) -> Result<f64> {
    master.check_grid(trace)?;
    let sub = baseline_subtract(trace)?;
    Ok(sub
        .samples
        .iter()
        .zip(&master.template)
        .map(|(x, t)| x * t)
        .sum::<f64>()
        * trace.sample_interval)
}

/// Template-fit pileup veto.
///
/// Fits α·template (plus a constant mopping up the residual baseline error)
/// to the baseline-subtracted trace by least squares, then slides the
/// template over the fit residual — a matched detection of a second pulse at
/// any arrival time — and rejects when the largest positive matched-residual
/// excursion exceeds `threshold` times the baseline noise RMS seen through
/// the same matched smoothing. Single clean pulses and pure-baseline records
/// are accepted.
///
/// The noise scale is the pooled run estimate carried by the master pulse
/// when available, else this record's pre-trigger RMS.
pub fn pileup_flag(trace: &TraceRecord, master: &MasterPulse, threshold: f64) -> Result<bool> {
    let sigma = if master.baseline_noise_rms > 0.0 {
        Some(master.baseline_noise_rms)
    } else {
        None
    };
    pileup_flag_with_noise(trace, master, threshold, sigma)
}

/// [`pileup_flag`] with an explicit noise RMS (pooled over a whole run).
fn pileup_flag_with_noise(
    trace: &TraceRecord,
    master: &MasterPulse,
    threshold: f64,
    noise_rms: Option<f64>,
) -> Result<bool> {
    master.check_grid(trace)?;
    let sub = baseline_subtract(trace)?;
    let x = &sub.samples;
    let t = &master.template;
    let n = x.len();
    let trigger = trace.trigger_index;

    // joint least squares of x ≈ α·T + c; the constant absorbs the error of
    // the few-sample baseline estimate so the residual carries no offset
    let s_tt: f64 = t.iter().map(|v| v * v).sum();
    let s_t1: f64 = t.iter().sum();
    let s_11 = n as f64;
    let b_t: f64 = x.iter().zip(t).map(|(a, b)| a * b).sum();
    let b_1: f64 = x.iter().sum();
    let det = s_tt * s_11 - s_t1 * s_t1;
    let (alpha, offset) = if det.abs() > 0.0 && det.is_finite() {
        (
            (s_11 * b_t - s_t1 * b_1) / det,
            (s_tt * b_1 - s_t1 * b_t) / det,
        )
    } else {
        (0.0, 0.0)
    };
    let residual: Vec<f64> = x
        .iter()
        .zip(t)
        .map(|(a, b)| a - alpha * b - offset)
        .collect();

    let sigma_v = match noise_rms {
        Some(s) => s,
        None => {
            let pre = &residual[..trigger];
            (pre.iter().map(|v| v * v).sum::<f64>() / (trigger - 1) as f64).sqrt()
        }
    };

    // Slide the post-trigger part of the template over the residual. Each
    // truncated kernel is made zero-mean over its span so the detector is
    // blind to any leftover baseline offset, and unit-normalized so pure
    // noise produces unit-variance excursions. TES pulses are single-signed,
    // so only positive excursions count.
    let kernel = &t[trigger..];
    let len = kernel.len();
    let mut k_prefix = vec![0.0; len + 1];
    let mut k2_prefix = vec![0.0; len + 1];
    for (i, k) in kernel.iter().enumerate() {
        k_prefix[i + 1] = k_prefix[i] + k;
        k2_prefix[i + 1] = k2_prefix[i] + k * k;
    }
    let mut r_prefix = vec![0.0; n + 1];
    for (i, r) in residual.iter().enumerate() {
        r_prefix[i + 1] = r_prefix[i] + r;
    }
    let full_norm2 = k2_prefix[len] - k_prefix[len] * k_prefix[len] / len as f64;

    let mut stat = 0.0f64;
    for lag in 0..n {
        let span = len.min(n - lag);
        let sum_k = k_prefix[span];
        let norm2 = k2_prefix[span] - sum_k * sum_k / span as f64;
        if norm2 <= 1e-9 * full_norm2 {
            continue;
        }
        let c_raw: f64 = residual[lag..lag + span]
            .iter()
            .zip(&kernel[..span])
            .map(|(r, k)| r * k)
            .sum();
        let sum_r = r_prefix[lag + span] - r_prefix[lag];
        let z = (c_raw - sum_k * sum_r / span as f64) / norm2.sqrt();
        if z > stat {
            stat = z;
        }
    }

    let peak = x.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * peak + f64::MIN_POSITIVE;
    Ok(stat <= threshold * sigma_v + floor)
}

/// Runs the matched filter and pileup veto over a whole trace set in
/// parallel; record order is preserved. The pileup veto uses the baseline
/// noise RMS pooled over this set's pre-trigger regions.
pub fn analyze_traces(
    traces: &TraceSet,
    master: &MasterPulse,
    threshold: f64,
) -> Result<Vec<PulseArea>> {
    let (_, _, trigger) = traces.uniform_grid()?;
    if trigger < MIN_PRE_TRIGGER {
        return Err(Error::Format(format!(
            "pre-trigger region has {trigger} samples, need at least {MIN_PRE_TRIGGER}"
        )));
    }
    let mut ss = 0.0;
    let mut dof = 0usize;
    for r in &traces.records {
        let pre = &r.samples[..trigger];
        let mean = pre.iter().sum::<f64>() / pre.len() as f64;
        ss += pre.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        dof += pre.len() - 1;
    }
    let pooled = (ss / dof.max(1) as f64).sqrt();
    let noise = if pooled > 0.0 { Some(pooled) } else { None };

    traces
        .records
        .par_iter()
        .map(|r| {
            Ok(PulseArea {
                gate_index: r.gate_index,
                value: matched_area(r, master)?,
                accepted: pileup_flag_with_noise(r, master, threshold, noise)?,
            })
        })
        .collect()
}

/// Default pileup-rejection threshold: a second pulse must stand out from
/// the matched-smoothed baseline noise by five standard deviations.
pub const DEFAULT_PILEUP_THRESHOLD: f64 = 5.0;
