//! Temperature-dependent Sellmeier model of the resonator material.
//!
//! Coefficients are data: the shipped set describes 5% MgO-doped congruent
//! lithium niobate (the closest published composition to the grown 5.8%
//! doping), with n² = a1 + b1·f + (a2 + b2·f)/(λ² − (a3 + b3·f)²)
//! + (a4 + b4·f)/(λ² − a5²) − a6·λ², λ in µm and the temperature folded into
//! f = (T − t_offset)(T + t_scale).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Temperature, Wavelength};

/// Polarization relative to the crystal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

/// One Sellmeier coefficient set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierSet {
    /// Static coefficients a1..a6.
    pub a: [f64; 6],
    /// Temperature-dependence coefficients b1..b4.
    pub b: [f64; 4],
}

/// Material dispersion model with validity windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialModel {
    pub name: String,
    pub t_offset_c: f64,
    pub t_scale_c: f64,
    /// Wavelength validity window in nm.
    pub lambda_window_nm: [f64; 2],
    /// Temperature validity window in °C.
    pub temp_window_c: [f64; 2],
    pub ordinary: SellmeierSet,
    pub extraordinary: SellmeierSet,
}

const BUILTIN_JSON: &str = include_str!("../../data/lithium_niobate_mgo_5.json");

/// Default data file name looked up in an overridden data directory.
pub const DEFAULT_MATERIAL_FILE: &str = "lithium_niobate_mgo_5.json";

impl MaterialModel {
    /// The coefficient set shipped with the toolkit.
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN_JSON).expect("embedded material data is valid")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: MaterialModel = serde_json::from_str(json)
            .map_err(|e| Error::Config(format!("invalid material data: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_window_nm[0] > 0.0 && self.lambda_window_nm[1] > self.lambda_window_nm[0])
        {
            return Err(Error::Config("material wavelength window is empty".into()));
        }
        if !(self.temp_window_c[1] > self.temp_window_c[0]) {
            return Err(Error::Config("material temperature window is empty".into()));
        }
        Ok(())
    }

    fn set(&self, pol: Polarization) -> &SellmeierSet {
        match pol {
            Polarization::Ordinary => &self.ordinary,
            Polarization::Extraordinary => &self.extraordinary,
        }
    }

    /// Refractive index without newtype wrappers; used by the dispersion
    /// solver's Newton iteration.
    pub(crate) fn index_nm(&self, pol: Polarization, lambda_nm: f64, t_c: f64) -> Result<f64> {
        if !(self.lambda_window_nm[0]..=self.lambda_window_nm[1]).contains(&lambda_nm) {
            return Err(Error::Domain(format!(
                "wavelength {lambda_nm} nm outside material validity window {:?} nm",
                self.lambda_window_nm
            )));
        }
        if !(self.temp_window_c[0]..=self.temp_window_c[1]).contains(&t_c) {
            return Err(Error::Domain(format!(
                "temperature {t_c} °C outside material validity window {:?} °C",
                self.temp_window_c
            )));
        }
        let s = self.set(pol);
        let lam = lambda_nm * 1e-3; // µm
        let lam2 = lam * lam;
        let f = (t_c - self.t_offset_c) * (t_c + self.t_scale_c);
        let pole1 = s.a[2] + s.b[2] * f;
        let n2 = s.a[0] + s.b[0] * f + (s.a[1] + s.b[1] * f) / (lam2 - pole1 * pole1)
            + (s.a[3] + s.b[3] * f) / (lam2 - s.a[4] * s.a[4])
            - s.a[5] * lam2;
        if !(n2 > 1.0) {
            return Err(Error::Numerical(format!(
                "Sellmeier evaluation gave n² = {n2} at {lambda_nm} nm, {t_c} °C"
            )));
        }
        Ok(n2.sqrt())
    }
}

/// Sellmeier refractive index for the given polarization, wavelength, and
/// temperature.
pub fn refractive_index(
    material: &MaterialModel,
    pol: Polarization,
    lambda: Wavelength,
    temperature: Temperature,
) -> Result<f64> {
    material.index_nm(pol, lambda.nm(), temperature.celsius())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn n(pol: Polarization, nm: f64, t: f64) -> f64 {
        MaterialModel::builtin().index_nm(pol, nm, t).unwrap()
    }

    #[test]
    fn matches_direct_evaluation_of_published_coefficients() {
        // frozen from a one-off arithmetic evaluation of the coefficient table
        let cases = [
            (Polarization::Ordinary, 1064.0, 25.0, 2.229627404),
            (Polarization::Extraordinary, 1064.0, 25.0, 2.148288130),
            (Polarization::Ordinary, 532.0, 25.0, 2.319453575),
            (Polarization::Extraordinary, 532.0, 25.0, 2.224581381),
            (Polarization::Ordinary, 1064.0, 100.0, 2.239108146),
            (Polarization::Extraordinary, 532.0, 100.0, 2.248534902),
            (Polarization::Ordinary, 1550.0, 25.0, 2.208868412),
            (Polarization::Ordinary, 650.0, 80.0, 2.286017104),
            (Polarization::Extraordinary, 650.0, 80.0, 2.206865398),
        ];
        for (pol, nm, t, expect) in cases {
            assert_relative_eq!(n(pol, nm, t), expect, max_relative = 1e-8);
        }
    }

    #[test]
    fn negative_uniaxial_over_windows() {
        // n_o > n_e on a deterministic (λ, T) grid spanning the windows
        for i in 0..10 {
            for j in 0..10 {
                let nm = 500.0 + 1500.0 * (i as f64 + 0.5) / 10.0;
                let t = 20.0 + 180.0 * (j as f64 + 0.5) / 10.0;
                assert!(
                    n(Polarization::Ordinary, nm, t) > n(Polarization::Extraordinary, nm, t),
                    "n_o <= n_e at {nm} nm, {t} °C"
                );
            }
        }
    }

    #[test]
    fn indices_inside_physical_bounds() {
        for nm in [500.0, 800.0, 1200.0, 1600.0, 2000.0] {
            for t in [20.0, 100.0, 200.0] {
                for pol in [Polarization::Ordinary, Polarization::Extraordinary] {
                    let v = n(pol, nm, t);
                    assert!(v > 1.0 && v < 3.0);
                }
            }
        }
    }

    #[test]
    fn out_of_window_is_domain_error() {
        let m = MaterialModel::builtin();
        assert!(m.index_nm(Polarization::Ordinary, 400.0, 25.0).is_err());
        assert!(m.index_nm(Polarization::Ordinary, 2100.0, 25.0).is_err());
        assert!(m.index_nm(Polarization::Ordinary, 1064.0, 10.0).is_err());
        assert!(m.index_nm(Polarization::Ordinary, 1064.0, 250.0).is_err());
    }

    #[test]
    fn json_round_trip_preserves_model() {
        let m = MaterialModel::builtin();
        let text = serde_json::to_string(&m).unwrap();
        let back = MaterialModel::from_json(&text).unwrap();
        assert_eq!(m, back);
    }
}
