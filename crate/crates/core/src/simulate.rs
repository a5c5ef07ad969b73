//! Synthetic TES trace generation with known ground truth.
//!
//! The simulator is the independent oracle for the end-to-end tests: every
//! gate carries a [`TruthRecord`] stating exactly how many photons were
//! absorbed and how much energy that deposited. Gate generation is
//! embarrassingly parallel; each gate draws from its own counter-based random
//! stream derived from (seed, gate_index), so results are bitwise identical
//! under any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{TraceRecord, TraceSet};
use crate::error::{Error, Result};
use crate::units::{photon_energy, Energy, GateConfig, Wavelength};

/// Sample index where the simulated gate begins; everything before is
/// pre-trigger baseline.
pub const TRIGGER_INDEX: usize = 16;

/// Double-exponential TES pulse response.
///
/// A pulse of absorbed energy E has samples
/// `A(E) * (exp(-t/fall_time) - exp(-t/rise_time))` with the soft saturation
/// `A(E) = gain * saturation_energy * (1 - exp(-E/saturation_energy))`.
/// With the defaults the recovery time (decay to ~1% of peak, about five fall
/// times) is ~12 µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseShape {
    /// Rise time constant in seconds.
    pub rise_time: f64,
    /// Fall (recovery) time constant in seconds.
    pub fall_time: f64,
    /// Small-signal amplitude per eV.
    pub gain: f64,
    /// Soft saturation scale in eV; energies well below it stay linear.
    pub saturation_energy: f64,
}

impl Default for PulseShape {
    fn default() -> Self {
        Self {
            rise_time: 250e-9,
            fall_time: 2.4e-6,
            gain: 1.0,
            saturation_energy: 40.0,
        }
    }
}

impl PulseShape {
    pub fn validate(&self) -> Result<()> {
        if !(self.rise_time > 0.0 && self.fall_time > self.rise_time) {
            return Err(Error::Config(format!(
                "need 0 < rise_time < fall_time, got rise {} s, fall {} s",
                self.rise_time, self.fall_time
            )));
        }
        if !(self.gain > 0.0) || !self.gain.is_finite() {
            return Err(Error::Config(format!("gain must be positive, got {}", self.gain)));
        }
        if !(self.saturation_energy > 0.0) || !self.saturation_energy.is_finite() {
            return Err(Error::Config(format!(
                "saturation_energy must be positive, got {}",
                self.saturation_energy
            )));
        }
        Ok(())
    }

    /// Pulse amplitude for a given absorbed energy.
    pub fn amplitude(&self, energy: Energy) -> f64 {
        self.gain * self.saturation_energy * (1.0 - (-energy.ev() / self.saturation_energy).exp())
    }

    /// Time for the pulse to decay to about 1% of its peak.
    pub fn recovery_time(&self) -> f64 {
        5.0 * self.fall_time
    }
}

/// White Gaussian baseline noise added to every sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-sample standard deviation in trace amplitude units. The default is
    /// tuned so the fitted one-photon peak width comes out near 0.08 eV with
    /// the default pulse shape and gate.
    pub baseline_sigma: f64,
    /// Constant baseline offset added to every sample.
    pub baseline_offset: f64,
    /// Master seed; each gate derives its own stream from (seed, gate_index).
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            baseline_sigma: 0.1191,
            baseline_offset: 0.0,
            seed: 1,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if self.baseline_sigma < 0.0 || !self.baseline_sigma.is_finite() {
            return Err(Error::Config(format!(
                "baseline_sigma must be >= 0, got {}",
                self.baseline_sigma
            )));
        }
        if !self.baseline_offset.is_finite() {
            return Err(Error::Config("baseline_offset must be finite".into()));
        }
        Ok(())
    }
}

/// Which arm of a photon-pair source a detector observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Signal,
    Idler,
}

/// Light source feeding the simulated detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Attenuated coherent state: per-gate photon counts are Poisson with the
    /// given mean.
    Coherent {
        wavelength_nm: f64,
        mean_photon_number: f64,
    },
    /// Monochromatic line delivering exactly one photon per gate.
    SingleLine { wavelength_nm: f64 },
    /// One arm of a photon-pair source; per-gate pair counts are Poisson with
    /// the given mean and the detector absorbs the chosen arm's photons.
    PairSource {
        signal_nm: f64,
        idler_nm: f64,
        mean_pair_number: f64,
        detect: Arm,
    },
}

impl SourceSpec {
    /// Wavelength of the line this detector sees.
    pub fn detected_wavelength(&self) -> Result<Wavelength> {
        match self {
            SourceSpec::Coherent { wavelength_nm, .. }
            | SourceSpec::SingleLine { wavelength_nm } => Wavelength::new(*wavelength_nm),
            SourceSpec::PairSource {
                signal_nm,
                idler_nm,
                detect,
                ..
            } => Wavelength::new(match detect {
                Arm::Signal => *signal_nm,
                Arm::Idler => *idler_nm,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.detected_wavelength()?;
        match self {
            SourceSpec::Coherent {
                mean_photon_number, ..
            } => {
                if !(*mean_photon_number >= 0.0) || !mean_photon_number.is_finite() {
                    return Err(Error::Config(format!(
                        "mean_photon_number must be >= 0, got {mean_photon_number}"
                    )));
                }
            }
            SourceSpec::SingleLine { .. } => {}
            SourceSpec::PairSource {
                signal_nm,
                idler_nm,
                mean_pair_number,
                ..
            } => {
                Wavelength::new(*signal_nm)?;
                Wavelength::new(*idler_nm)?;
                if !(*mean_pair_number >= 0.0) || !mean_pair_number.is_finite() {
                    return Err(Error::Config(format!(
                        "mean_pair_number must be >= 0, got {mean_pair_number}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn mean(&self) -> Option<f64> {
        match self {
            SourceSpec::Coherent {
                mean_photon_number, ..
            } => Some(*mean_photon_number),
            SourceSpec::SingleLine { .. } => None,
            SourceSpec::PairSource {
                mean_pair_number, ..
            } => Some(*mean_pair_number),
        }
    }
}

/// Ground-truth bookkeeping for one simulated gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub gate_index: u32,
    pub photon_count: u32,
    /// Total absorbed energy in eV.
    pub total_energy_ev: f64,
}

/// Samples of the noiseless pulse waveform on the record grid, with the pulse
/// onset at t = 0. Zero energy yields the all-zero trace.
pub fn synth_pulse(energy: Energy, shape: &PulseShape, gate: &GateConfig) -> Vec<f64> {
    let n = gate.samples_per_record();
    let dt = gate.sample_interval();
    let amp = shape.amplitude(energy);
    if amp == 0.0 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            amp * ((-t / shape.fall_time).exp() - (-t / shape.rise_time).exp())
        })
        .collect()
}

/// Adds a pulse of the given energy into an existing sample buffer starting
/// at `onset` (used to construct pileup records).
pub fn add_pulse_at(
    samples: &mut [f64],
    energy: Energy,
    shape: &PulseShape,
    gate: &GateConfig,
    onset: usize,
) {
    let pulse = synth_pulse(energy, shape, gate);
    for (i, p) in pulse.iter().enumerate() {
        if let Some(s) = samples.get_mut(onset + i) {
            *s += p;
        }
    }
}

fn gate_rng(seed: u64, gate_index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(gate_index as u64);
    rng
}

/// Simulates a full run: one trace record and one truth record per gate.
///
/// Bitwise reproducible for a fixed (seed, n_gates) regardless of evaluation
/// order or worker count.
pub fn simulate_run(
    source: &SourceSpec,
    shape: &PulseShape,
    noise: &NoiseModel,
    gate: &GateConfig,
    n_gates: u32,
) -> Result<(TraceSet, Vec<TruthRecord>)> {
    if n_gates == 0 {
        return Err(Error::Config("n_gates must be at least 1".into()));
    }
    gate.validate()?;
    shape.validate()?;
    noise.validate()?;
    source.validate()?;

    let wavelength = source.detected_wavelength()?;
    let e_photon = photon_energy(wavelength);
    let mean = source.mean();
    let poisson = match mean {
        Some(m) if m > 0.0 => Some(
            Poisson::new(m).map_err(|e| Error::Config(format!("invalid photon mean {m}: {e}")))?,
        ),
        _ => None,
    };
    let normal = if noise.baseline_sigma > 0.0 {
        Some(
            Normal::new(0.0, noise.baseline_sigma)
                .map_err(|e| Error::Config(format!("invalid noise sigma: {e}")))?,
        )
    } else {
        None
    };

    let n_samples = gate.samples_per_record();
    let dt = gate.sample_interval();

    let pairs: Vec<(TraceRecord, TruthRecord)> = (0..n_gates)
        .into_par_iter()
        .map(|gi| {
            let mut rng = gate_rng(noise.seed, gi);
            let count: u32 = match (&poisson, mean) {
                (Some(p), _) => p.sample(&mut rng) as u32,
                (None, Some(_)) => 0,
                (None, None) => 1,
            };
            let total = Energy::new(count as f64 * e_photon.ev()).expect("non-negative energy");
            let mut samples = vec![noise.baseline_offset; n_samples];
            if total.ev() > 0.0 {
                add_pulse_at(&mut samples, total, shape, gate, TRIGGER_INDEX);
            }
            if let Some(nd) = &normal {
                for s in &mut samples {
                    *s += nd.sample(&mut rng);
                }
            }
            (
                TraceRecord {
                    samples,
                    sample_interval: dt,
                    trigger_index: TRIGGER_INDEX,
                    gate_index: gi,
                },
                TruthRecord {
                    gate_index: gi,
                    photon_count: count,
                    total_energy_ev: total.ev(),
                },
            )
        })
        .collect();

    let mut records = Vec::with_capacity(pairs.len());
    let mut truth = Vec::with_capacity(pairs.len());
    for (r, t) in pairs {
        records.push(r);
        truth.push(t);
    }
    Ok((TraceSet::new(records), truth))
}
