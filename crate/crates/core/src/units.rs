//! Physical units, constants, and the energy-conservation arithmetic used by
//! every other module.
//!
//! All wavelengths are vacuum wavelengths in nanometers, energies are in
//! electron-volts, and temperatures in degrees Celsius. No general unit
//! system: these three newtypes plus [`GateConfig`] cover the whole toolkit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// hc in eV·nm (CODATA). `photon_energy` and `wavelength_of` are exact
/// inverses through this constant.
pub const HC_EV_NM: f64 = 1239.84193;

/// Speed of light in m/s.
pub const C_M_PER_S: f64 = 299_792_458.0;

/// Wavelength validity window of the toolkit, in nm.
pub const WAVELENGTH_WINDOW_NM: (f64, f64) = (300.0, 2000.0);

/// Temperature validity window of the dispersion solver, in °C.
pub const TEMPERATURE_WINDOW_C: (f64, f64) = (20.0, 200.0);

/// Vacuum wavelength in nanometers.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Wavelength(f64);

impl Wavelength {
    /// Validating constructor: rejects non-finite values and values outside
    /// the 300–2000 nm window.
    pub fn new(nm: f64) -> Result<Self> {
        if !nm.is_finite() || nm <= 0.0 {
            return Err(Error::Domain(format!("wavelength must be positive, got {nm}")));
        }
        if !(WAVELENGTH_WINDOW_NM.0..=WAVELENGTH_WINDOW_NM.1).contains(&nm) {
            return Err(Error::Domain(format!(
                "wavelength {nm} nm outside validity window {:?} nm",
                WAVELENGTH_WINDOW_NM
            )));
        }
        Ok(Self(nm))
    }

    pub fn nm(self) -> f64 {
        self.0
    }

    pub fn meters(self) -> f64 {
        self.0 * 1e-9
    }
}

/// Photon or pulse energy in electron-volts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Energy(f64);

impl Energy {
    pub fn new(ev: f64) -> Result<Self> {
        if !ev.is_finite() || ev < 0.0 {
            return Err(Error::Domain(format!("energy must be >= 0 eV, got {ev}")));
        }
        Ok(Self(ev))
    }

    pub fn ev(self) -> f64 {
        self.0
    }
}

/// Resonator temperature in degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(celsius: f64) -> Result<Self> {
        if !celsius.is_finite() {
            return Err(Error::Domain(format!("temperature must be finite, got {celsius}")));
        }
        if !(TEMPERATURE_WINDOW_C.0..=TEMPERATURE_WINDOW_C.1).contains(&celsius) {
            return Err(Error::Domain(format!(
                "temperature {celsius} °C outside solver window {:?} °C",
                TEMPERATURE_WINDOW_C
            )));
        }
        Ok(Self(celsius))
    }

    pub fn celsius(self) -> f64 {
        self.0
    }
}

/// Trigger-gate timing of the acquisition.
///
/// The defaults reproduce the calibration-run geometry: 100 ns optical gates,
/// 13 µs records digitized at 25 MHz, 35 kHz trigger rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Optical gate length in seconds.
    pub gate_length: f64,
    /// Trigger repetition rate in Hz.
    pub repetition_rate: f64,
    /// Recorded trace duration in seconds.
    pub record_length: f64,
    /// Digitizer sample rate in Hz.
    pub sample_rate: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            gate_length: 100e-9,
            repetition_rate: 35e3,
            record_length: 13e-6,
            sample_rate: 25e6,
        }
    }
}

impl GateConfig {
    /// Number of samples per record.
    pub fn samples_per_record(&self) -> usize {
        (self.record_length * self.sample_rate).round() as usize
    }

    /// Sample interval in seconds.
    pub fn sample_interval(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Checks the structural invariants: the record must fit inside one
    /// trigger period and hold at least 64 samples.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gate_length", self.gate_length),
            ("repetition_rate", self.repetition_rate),
            ("record_length", self.record_length),
            ("sample_rate", self.sample_rate),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.record_length > 1.0 / self.repetition_rate {
            return Err(Error::Config(format!(
                "record_length {} s exceeds the trigger period {} s",
                self.record_length,
                1.0 / self.repetition_rate
            )));
        }
        if self.samples_per_record() < 64 {
            return Err(Error::Config(format!(
                "record holds only {} samples, need at least 64",
                self.samples_per_record()
            )));
        }
        Ok(())
    }
}

/// Photon energy E = hc/λ.
pub fn photon_energy(lambda: Wavelength) -> Energy {
    Energy(HC_EV_NM / lambda.nm())
}

/// Vacuum wavelength λ = hc/E. Exact inverse of [`photon_energy`].
pub fn wavelength_of(energy: Energy) -> Result<Wavelength> {
    if energy.ev() <= 0.0 {
        return Err(Error::Domain(format!(
            "cannot convert non-positive energy {} eV to a wavelength",
            energy.ev()
        )));
    }
    Wavelength::new(HC_EV_NM / energy.ev())
}

/// Idler wavelength from pump and signal via 1/λ_p = 1/λ_s + 1/λ_i.
///
/// Swapping the result back in as the signal returns the original signal.
pub fn idler_from_signal(pump: Wavelength, signal: Wavelength) -> Result<Wavelength> {
    if signal.nm() <= pump.nm() {
        return Err(Error::Domain(format!(
            "no physical idler: signal {} nm must exceed pump {} nm",
            signal.nm(),
            pump.nm()
        )));
    }
    let inv = 1.0 / pump.nm() - 1.0 / signal.nm();
    Wavelength::new(1.0 / inv)
}
