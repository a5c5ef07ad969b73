//! Run configuration: one JSON document wiring the whole pipeline together.
//!
//! Unknown keys are rejected; every field has an explicit default so an
//! emitted config fully documents the run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::BinningRule;
use crate::simulate::{NoiseModel, PulseShape, SourceSpec};
use crate::units::GateConfig;
use crate::wgm::{PumpSpec, ResonatorGeometry, SearchRanges};

/// Fit tolerances exposed through the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Pileup-rejection threshold in units of smoothed baseline noise RMS.
    pub pileup_threshold: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            pileup_threshold: crate::dsp::DEFAULT_PILEUP_THRESHOLD,
        }
    }
}

/// WGM solver section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct WgmConfig {
    pub geometry: ResonatorGeometry,
    /// Path to a material coefficients JSON file; None uses the shipped set
    /// (or the file in the directory named by the data-dir environment
    /// variable when set).
    pub material_file: Option<String>,
    pub pump: PumpSpec,
    pub search: SearchRanges,
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gate: GateConfig,
    pub pulse: PulseShape,
    pub noise: NoiseModel,
    pub source: SourceSpec,
    pub n_gates: u32,
    pub binning: BinningRule,
    pub fit: FitConfig,
    pub wgm: WgmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gate: GateConfig::default(),
            pulse: PulseShape::default(),
            noise: NoiseModel::default(),
            source: SourceSpec::Coherent {
                wavelength_nm: 1062.9,
                mean_photon_number: 1.8,
            },
            n_gates: 50_000,
            binning: BinningRule::default(),
            fit: FitConfig::default(),
            wgm: WgmConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        self.gate.validate()?;
        self.pulse.validate()?;
        self.noise.validate()?;
        self.source.validate()?;
        if self.n_gates == 0 {
            return Err(Error::Config("n_gates must be at least 1".into()));
        }
        if !(self.fit.pileup_threshold > 0.0) {
            return Err(Error::Config("pileup_threshold must be positive".into()));
        }
        self.wgm.geometry.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_and_validates() {
        let config = RunConfig::default();
        config.validate().unwrap();
        let text = config.to_json();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn emitted_config_spells_out_all_defaults() {
        let text = RunConfig::default().to_json();
        for key in [
            "gate_length",
            "repetition_rate",
            "record_length",
            "sample_rate",
            "rise_time",
            "fall_time",
            "gain",
            "saturation_energy",
            "baseline_sigma",
            "baseline_offset",
            "seed",
            "n_gates",
            "pileup_threshold",
            "equatorial_radius_m",
            "polar_radius_m",
            "quality_factor",
            "target_nm",
            "m_halfwidth",
        ] {
            assert!(text.contains(key), "emitted config is missing {key}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut value: serde_json::Value =
            serde_json::from_str(&RunConfig::default().to_json()).unwrap();
        value["surprise"] = serde_json::json!(1);
        assert!(matches!(
            RunConfig::from_json(&value.to_string()),
            Err(Error::Config(_))
        ));
        // nested unknown key
        let mut value: serde_json::Value =
            serde_json::from_str(&RunConfig::default().to_json()).unwrap();
        value["noise"]["surprise"] = serde_json::json!(1);
        assert!(matches!(
            RunConfig::from_json(&value.to_string()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_gates_rejected() {
        let mut value: serde_json::Value =
            serde_json::from_str(&RunConfig::default().to_json()).unwrap();
        value["n_gates"] = serde_json::json!(0);
        assert!(RunConfig::from_json(&value.to_string()).is_err());
    }
}
