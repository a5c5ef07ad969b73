//! Whispering-gallery-mode dispersion and type I phase matching.
//!
//! Mode frequencies of the oblate spheroid resonator come from the asymptotic
//! dispersion relation
//!
//! ```text
//! 2πR·n(λ,T)/λ = m + α_q (m/2)^(1/3) + (2p(R−r)+R)/(2r)
//!                − P·n/√(n²−1) + (3α_q²/20) (m/2)^(−1/3)
//! ```
//!
//! with α_q the q-th Airy zero and P = 1 for ordinary polarization (electric
//! field tangential at the rim) and 1/n² for extraordinary. Solving it for λ
//! by Newton iteration gives each mode's frequency; the phase-matching search
//! then looks for ordinary signal/idler pairs that conserve azimuthal number
//! and energy against the extraordinary pump within the resonator linewidth.

mod airy;
mod material;

pub use airy::{airy_zero, MAX_RADIAL_ORDER};
pub use material::{refractive_index, MaterialModel, Polarization, SellmeierSet, DEFAULT_MATERIAL_FILE};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{idler_from_signal, Temperature, Wavelength, C_M_PER_S};

/// Resonator geometry and quality factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonatorGeometry {
    /// Equatorial radius R in meters.
    pub equatorial_radius_m: f64,
    /// Polar radius r in meters.
    pub polar_radius_m: f64,
    /// Loaded quality factor used for the linewidth criterion (one value for
    /// all three waves).
    pub quality_factor: f64,
}

impl Default for ResonatorGeometry {
    fn default() -> Self {
        Self {
            equatorial_radius_m: 1.61e-3,
            polar_radius_m: 0.4e-3,
            quality_factor: 3e7,
        }
    }
}

impl ResonatorGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.polar_radius_m > 0.0 && self.polar_radius_m <= self.equatorial_radius_m) {
            return Err(Error::Config(format!(
                "need 0 < polar radius <= equatorial radius, got r = {} m, R = {} m",
                self.polar_radius_m, self.equatorial_radius_m
            )));
        }
        if !(self.quality_factor > 0.0) {
            return Err(Error::Config(format!(
                "quality factor must be positive, got {}",
                self.quality_factor
            )));
        }
        Ok(())
    }
}

/// Mode labels of one whispering-gallery mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeIndices {
    /// Azimuthal number m ≥ 1.
    pub m: u32,
    /// Radial number q ≥ 1.
    pub q: u32,
    /// Polar number p ≥ 0.
    pub p: u32,
    pub polarization: Polarization,
}

impl ModeIndices {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Domain("azimuthal number m must be >= 1".into()));
        }
        if self.q == 0 || self.q > MAX_RADIAL_ORDER {
            return Err(Error::Domain(format!(
                "radial number q = {} outside 1..={MAX_RADIAL_ORDER}",
                self.q
            )));
        }
        Ok(())
    }
}

/// One phase-matched signal/idler pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSolution {
    pub temperature_c: f64,
    pub pump: ModeIndices,
    pub signal: ModeIndices,
    pub idler: ModeIndices,
    /// Pump wavelength of the locked mode, nm.
    pub lambda_p_nm: f64,
    /// Signal wavelength from the dispersion relation, nm.
    pub lambda_s_nm: f64,
    /// Idler wavelength from exact energy conservation, nm.
    pub lambda_i_nm: f64,
    /// ν_p − ν_s − ν_i in Hz.
    pub frequency_mismatch_hz: f64,
}

/// Transverse mode combination (q, p) of the signal and idler branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransverseCombo {
    pub q_s: u32,
    pub p_s: u32,
    pub q_i: u32,
    pub p_i: u32,
}

impl TransverseCombo {
    pub fn is_symmetric(&self) -> bool {
        self.q_s == self.q_i && self.p_s == self.p_i
    }
}

/// Mode-number search ranges for the phase-matching scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchRanges {
    /// Signal azimuthal numbers scanned: m_p/2 ± m_halfwidth.
    pub m_halfwidth: u32,
    /// Inclusive radial-number range for signal and idler.
    pub q_range: (u32, u32),
    /// Inclusive polar-number range for signal and idler.
    pub p_range: (u32, u32),
}

impl Default for SearchRanges {
    fn default() -> Self {
        Self {
            m_halfwidth: 500,
            q_range: (1, 3),
            p_range: (0, 2),
        }
    }
}

impl SearchRanges {
    fn combos(&self) -> Vec<TransverseCombo> {
        let mut out = Vec::new();
        for q_s in self.q_range.0..=self.q_range.1 {
            for p_s in self.p_range.0..=self.p_range.1 {
                for q_i in self.q_range.0..=self.q_range.1 {
                    for p_i in self.p_range.0..=self.p_range.1 {
                        out.push(TransverseCombo { q_s, p_s, q_i, p_i });
                    }
                }
            }
        }
        out
    }
}

/// Newton convergence limit on the wavelength step, nm.
const NEWTON_STEP_TOL_NM: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 100;

fn polarization_term(pol: Polarization, n: f64) -> f64 {
    let p = match pol {
        Polarization::Ordinary => 1.0,
        Polarization::Extraordinary => 1.0 / (n * n),
    };
    p * n / (n * n - 1.0).sqrt()
}

struct Dispersion<'a> {
    geom: &'a ResonatorGeometry,
    mat: &'a MaterialModel,
}

impl Dispersion<'_> {
    /// Dimensionless left-minus-right side of the dispersion relation.
    fn residual(&self, mode: &ModeIndices, lambda_nm: f64, t_c: f64) -> Result<f64> {
        let n = self.mat.index_nm(mode.polarization, lambda_nm, t_c)?;
        let m = mode.m as f64;
        let aq = airy_zero(mode.q)?;
        let r_eq = self.geom.equatorial_radius_m;
        let r_pol = self.geom.polar_radius_m;
        let geo = (2.0 * mode.p as f64 * (r_eq - r_pol) + r_eq) / (2.0 * r_pol);
        let rhs = m + aq * (m / 2.0).powf(1.0 / 3.0) + geo - polarization_term(mode.polarization, n)
            + (3.0 * aq * aq / 20.0) * (m / 2.0).powf(-1.0 / 3.0);
        let lhs = 2.0 * std::f64::consts::PI * r_eq * n / (lambda_nm * 1e-9);
        Ok(lhs - rhs)
    }

    /// Solves the dispersion relation for the mode wavelength in nm.
    fn mode_wavelength_nm(&self, mode: &ModeIndices, t_c: f64) -> Result<f64> {
        mode.validate()?;
        let (w_lo, w_hi) = (self.mat.lambda_window_nm[0], self.mat.lambda_window_nm[1]);
        let clamp = |l: f64| l.clamp(w_lo + 1e-6, w_hi - 1e-6);

        // fixed-point warm-up: λ ≈ 2πR n(λ) / (effective mode number)
        let m = mode.m as f64;
        let aq = airy_zero(mode.q)?;
        let r_eq = self.geom.equatorial_radius_m;
        let r_pol = self.geom.polar_radius_m;
        let geo = (2.0 * mode.p as f64 * (r_eq - r_pol) + r_eq) / (2.0 * r_pol);
        let mut lambda = clamp(0.5 * (w_lo + w_hi));
        for _ in 0..8 {
            let n = self.mat.index_nm(mode.polarization, lambda, t_c)?;
            let m_eff = m + aq * (m / 2.0).powf(1.0 / 3.0) + geo
                - polarization_term(mode.polarization, n)
                + (3.0 * aq * aq / 20.0) * (m / 2.0).powf(-1.0 / 3.0);
            let next = 2.0 * std::f64::consts::PI * r_eq * n * 1e9 / m_eff;
            lambda = clamp(next);
        }

        // Newton with forward-difference derivative
        let h = 1e-5;
        for _ in 0..NEWTON_MAX_ITER {
            let g = self.residual(mode, lambda, t_c)?;
            let gh = self.residual(mode, lambda + h, t_c)?;
            let d = (gh - g) / h;
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Numerical(format!(
                    "dispersion derivative vanished at λ = {lambda} nm"
                )));
            }
            let step = -g / d;
            lambda += step;
            if !(w_lo..=w_hi).contains(&lambda) {
                return Err(Error::Domain(format!(
                    "mode (m={}, q={}, p={}) leaves the material validity window at {lambda} nm",
                    mode.m, mode.q, mode.p
                )));
            }
            if step.abs() < NEWTON_STEP_TOL_NM {
                return Ok(lambda);
            }
        }
        Err(Error::Numerical(format!(
            "dispersion Newton iteration did not converge for mode (m={}, q={}, p={})",
            mode.m, mode.q, mode.p
        )))
    }
}

/// Frequency of one resonator mode at the given temperature.
pub fn mode_frequency(
    geom: &ResonatorGeometry,
    mat: &MaterialModel,
    mode: &ModeIndices,
    temperature: Temperature,
) -> Result<f64> {
    geom.validate()?;
    let solver = Dispersion { geom, mat };
    let lambda_nm = solver.mode_wavelength_nm(mode, temperature.celsius())?;
    Ok(C_M_PER_S / (lambda_nm * 1e-9))
}

/// Substitutes a solved wavelength back into the dispersion relation;
/// used by tests to bound the solver residual.
pub fn dispersion_residual(
    geom: &ResonatorGeometry,
    mat: &MaterialModel,
    mode: &ModeIndices,
    lambda_nm: f64,
    temperature: Temperature,
) -> Result<f64> {
    Dispersion { geom, mat }.residual(mode, lambda_nm, temperature.celsius())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MParity {
    Any,
    Even,
}

fn nearest_mode(
    geom: &ResonatorGeometry,
    mat: &MaterialModel,
    target: Wavelength,
    q: u32,
    p: u32,
    pol: Polarization,
    t_c: f64,
    parity: MParity,
) -> Result<(ModeIndices, f64)> {
    let solver = Dispersion { geom, mat };
    let n = mat.index_nm(pol, target.nm(), t_c)?;
    let aq = airy_zero(q)?;
    let r_eq = geom.equatorial_radius_m;
    let r_pol = geom.polar_radius_m;
    let geo = (2.0 * p as f64 * (r_eq - r_pol) + r_eq) / (2.0 * r_pol);
    let circumference_waves = 2.0 * std::f64::consts::PI * r_eq * n * 1e9 / target.nm();

    // iterate the azimuthal estimate: the Airy correction depends on m itself
    let mut m_est = circumference_waves;
    for _ in 0..8 {
        m_est = circumference_waves - aq * (m_est / 2.0).powf(1.0 / 3.0) - geo
            + polarization_term(pol, n)
            - (3.0 * aq * aq / 20.0) * (m_est / 2.0).powf(-1.0 / 3.0);
    }
    let m0 = m_est.round() as i64;

    let nu_target = C_M_PER_S / target.meters();
    let mut best: Option<(ModeIndices, f64, f64)> = None;
    for dm in -4i64..=4 {
        let m = m0 + dm;
        if m < 1 {
            continue;
        }
        if parity == MParity::Even && m % 2 != 0 {
            continue;
        }
        let mode = ModeIndices {
            m: m as u32,
            q,
            p,
            polarization: pol,
        };
        let lambda = solver.mode_wavelength_nm(&mode, t_c)?;
        let nu = C_M_PER_S / (lambda * 1e-9);
        let dist = (nu - nu_target).abs();
        if best.as_ref().map_or(true, |b| dist < b.2) {
            best = Some((mode, nu, dist));
        }
    }
    best.map(|(mode, nu, _)| (mode, nu))
        .ok_or_else(|| Error::Numerical("no candidate pump mode found".into()))
}

/// Finds the extraordinary-polarized mode (m, q, p) whose frequency is
/// nearest to the target wavelength at this temperature, modelling the pump
/// laser locked to the resonance.
pub fn lock_pump_mode(
    geom: &ResonatorGeometry,
    mat: &MaterialModel,
    target: Wavelength,
    q_p: u32,
    p_p: u32,
    temperature: Temperature,
) -> Result<(ModeIndices, f64)> {
    geom.validate()?;
    nearest_mode(
        geom,
        mat,
        target,
        q_p,
        p_p,
        Polarization::Extraordinary,
        temperature.celsius(),
        MParity::Any,
    )
}

/// Combined half linewidth (ν_p + ν_s + ν_i)/(2Q) of the three waves, Hz.
pub fn combined_half_linewidth(nu_p: f64, nu_s: f64, nu_i: f64, quality_factor: f64) -> f64 {
    (nu_p + nu_s + nu_i) / (2.0 * quality_factor)
}

/// Phase-matching scan over one set of transverse combinations.
///
/// For every candidate signal mode m_s (with m_i = m_p − m_s), ordinary
/// signal and idler frequencies are solved and candidates with
/// |ν_p − ν_s − ν_i| below the combined half linewidth are kept. Reported
/// wavelengths satisfy exact energy conservation: λ_i is recomputed from
/// (λ_p, λ_s). Solutions are sorted by |mismatch|. An empty result is a valid
/// outcome, not an error.
pub fn solve_phase_matching_combos(
    geom: &ResonatorGeometry,
    mat: &MaterialModel,
    temperature: Temperature,
    pump: &ModeIndices,
    combos: &[TransverseCombo],
    m_halfwidth: u32,
) -> Result<Vec<PhaseMatchSolution>> {
    geom.validate()?;
    if pump.polarization != Polarization::Extraordinary {
        return Err(Error::Domain(
            "type I phase matching requires an extraordinary-polarized pump".into(),
        ));
    }
    let t_c = temperature.celsius();
    let nu_p = mode_frequency(geom, mat, pump, temperature)?;
    let lambda_p = Wavelength::new(C_M_PER_S / nu_p * 1e9)?;

    let center = pump.m / 2;
    let m_lo = center.saturating_sub(m_halfwidth).max(1);
    let m_hi = center + m_halfwidth + 1;

    // distinct transverse labels needed on either side
    let mut labels: Vec<(u32, u32)> = Vec::new();
    for c in combos {
        for l in [(c.q_s, c.p_s), (c.q_i, c.p_i)] {
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
    }

    // frequency table per label over the scanned azimuthal range
    let solver = Dispersion { geom, mat };
    let mut table: Vec<Vec<Option<f64>>> = Vec::with_capacity(labels.len());
    for &(q, p) in &labels {
        let freqs: Vec<Option<f64>> = (m_lo..=m_hi)
            .into_par_iter()
            .map(|m| {
                let mode = ModeIndices {
                    m,
                    q,
                    p,
                    polarization: Polarization::Ordinary,
                };
                solver
                    .mode_wavelength_nm(&mode, t_c)
                    .ok()
                    .map(|l| C_M_PER_S / (l * 1e-9))
            })
            .collect();
        table.push(freqs);
    }
    let label_index = |q: u32, p: u32| labels.iter().position(|&l| l == (q, p)).unwrap();

    let mut out = Vec::new();
    for combo in combos {
        let sig = &table[label_index(combo.q_s, combo.p_s)];
        let idl = &table[label_index(combo.q_i, combo.p_i)];
        for m_s in m_lo..=m_hi {
            if m_s >= pump.m {
                continue;
            }
            let m_i = pump.m - m_s;
            if m_i < m_lo || m_i > m_hi {
                continue;
            }
            let (Some(nu_s), Some(nu_i)) = (
                sig[(m_s - m_lo) as usize],
                idl[(m_i - m_lo) as usize],
            ) else {
                continue;
            };
            // signal is the higher-frequency branch; keeps mirrored
            // assignments from appearing twice
            if nu_s < nu_i {
                continue;
            }
            let mismatch = nu_p - nu_s - nu_i;
            let half_lw = combined_half_linewidth(nu_p, nu_s, nu_i, geom.quality_factor);
            if mismatch.abs() > half_lw {
                continue;
            }
            let lambda_s = Wavelength::new(C_M_PER_S / nu_s * 1e9)?;
            let lambda_i = idler_from_signal(lambda_p, lambda_s)?;
            out.push(PhaseMatchSolution {
                temperature_c: t_c,
                pump: *pump,
                signal: ModeIndices {
                    m: m_s,
                    q: combo.q_s,
                    p: combo.p_s,
                    polarization: Polarization::Ordinary,
                },
                idler: ModeIndices {
                    m: m_i,
                    q: combo.q_i,
                    p: combo.p_i,
                    polarization: Polarization::Ordinary,
                },
                lambda_p_nm: lambda_p.nm(),
                lambda_s_nm: lambda_s.nm(),
                lambda_i_nm: lambda_i.nm(),
                frequency_mismatch_hz: mismatch,
            });
        }
    }
    out.sort_by(|a, b| {
        a.frequency_mismatch_hz
            .abs()
            .partial_cmp(&b.frequency_mismatch_hz.abs())
            .unwrap()
            .then(a.signal.m.cmp(&b.signal.m))
            .then(a.signal.q.cmp(&b.signal.q))
            .then(a.signal.p.cmp(&b.signal.p))
            .then(a.idler.q.cmp(&b.idler.q))
            .then(a.idler.p.cmp(&b.idler.p))
    });
    Ok(out)
}

/// Full phase-matching search over the given mode-number ranges.
pub fn solve_phase_matching(
    geom: &ResonatorGeometry,
    mat: &MaterialModel,
    temperature: Temperature,
    pump: &ModeIndices,
    search: &SearchRanges,
) -> Result<Vec<PhaseMatchSolution>> {
    solve_phase_matching_combos(geom, mat, temperature, pump, &search.combos(), search.m_halfwidth)
}

/// Pump handling across a temperature sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpSpec {
    /// Free-running target wavelength the laser is steered toward, nm.
    pub target_nm: f64,
    pub q: u32,
    pub p: u32,
    /// When false (default) the pump follows one locked mode chosen at the
    /// sweep start; when true it re-locks to the nearest mode at every
    /// temperature.
    pub relock_each_temperature: bool,
}

impl Default for PumpSpec {
    fn default() -> Self {
        Self {
            target_nm: 532.0,
            q: 1,
            p: 0,
            relock_each_temperature: false,
        }
    }
}

/// One sample of a theoretical tuning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub temperature_c: f64,
    pub lambda_p_nm: f64,
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
    pub frequency_mismatch_hz: f64,
    pub m_p: u32,
    pub m_s: u32,
    pub m_i: u32,
}

/// Theoretical tuning curve for one fixed transverse combination.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningCurve {
    pub combo: TransverseCombo,
    pub points: Vec<TheoryPoint>,
    /// Temperatures where no candidate passed the linewidth filter.
    pub skipped_temperatures: Vec<f64>,
}

/// Sweeps temperature, re-locks the pump, and solves phase matching
/// restricted to one transverse combination. Temperatures with no solution
/// are omitted from the curve and reported in `skipped_temperatures`.
pub fn theoretical_tuning_curve(
    geom: &ResonatorGeometry,
    mat: &MaterialModel,
    t_start_c: f64,
    t_stop_c: f64,
    t_step_c: f64,
    pump: &PumpSpec,
    combo: TransverseCombo,
    m_halfwidth: u32,
) -> Result<TuningCurve> {
    if !(t_step_c > 0.0) || t_stop_c < t_start_c {
        return Err(Error::Config(format!(
            "invalid temperature range [{t_start_c}, {t_stop_c}] step {t_step_c}"
        )));
    }
    let n_samples = ((t_stop_c - t_start_c) / t_step_c).floor() as usize + 1;
    if n_samples < 2 {
        return Err(Error::Config(
            "temperature range must contain at least 2 samples".into(),
        ));
    }
    let target = Wavelength::new(pump.target_nm)?;
    let t0 = Temperature::new(t_start_c)?;
    let (locked, _) = lock_pump_mode(geom, mat, target, pump.q, pump.p, t0)?;

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for i in 0..n_samples {
        let t_c = t_start_c + i as f64 * t_step_c;
        let temperature = Temperature::new(t_c)?;
        let pump_mode = if pump.relock_each_temperature {
            lock_pump_mode(geom, mat, target, pump.q, pump.p, temperature)?.0
        } else {
            locked
        };
        let solutions = solve_phase_matching_combos(
            geom,
            mat,
            temperature,
            &pump_mode,
            &[combo],
            m_halfwidth,
        )?;
        match solutions.first() {
            Some(s) => points.push(TheoryPoint {
                temperature_c: t_c,
                lambda_p_nm: s.lambda_p_nm,
                lambda_s_nm: s.lambda_s_nm,
                lambda_i_nm: s.lambda_i_nm,
                frequency_mismatch_hz: s.frequency_mismatch_hz,
                m_p: s.pump.m,
                m_s: s.signal.m,
                m_i: s.idler.m,
            }),
            None => skipped.push(t_c),
        }
    }
    Ok(TuningCurve {
        combo,
        points,
        skipped_temperatures: skipped,
    })
}

/// Locates the degeneracy temperature of a symmetric transverse combination:
/// the T where the equally-split pair (m_s = m_i = m_p/2) exactly conserves
/// energy against the pump. The pump is locked once, to an even-m mode so the
/// exact split exists. Returns None when the mismatch does not change sign in
/// the window.
pub fn find_degeneracy(
    geom: &ResonatorGeometry,
    mat: &MaterialModel,
    pump: &PumpSpec,
    combo: TransverseCombo,
    t_lo_c: f64,
    t_hi_c: f64,
) -> Result<Option<PhaseMatchSolution>> {
    if !combo.is_symmetric() {
        return Err(Error::Domain(
            "degeneracy search needs a symmetric transverse combination".into(),
        ));
    }
    if !(t_hi_c > t_lo_c) {
        return Err(Error::Config("empty degeneracy search window".into()));
    }
    let target = Wavelength::new(pump.target_nm)?;
    let t_mid = Temperature::new(0.5 * (t_lo_c + t_hi_c))?;
    let (pump_mode, _) = nearest_mode(
        geom,
        mat,
        target,
        pump.q,
        pump.p,
        Polarization::Extraordinary,
        t_mid.celsius(),
        MParity::Even,
    )?;

    let half_mode = ModeIndices {
        m: pump_mode.m / 2,
        q: combo.q_s,
        p: combo.p_s,
        polarization: Polarization::Ordinary,
    };
    let mismatch = |t_c: f64| -> Result<f64> {
        let t = Temperature::new(t_c)?;
        let nu_p = mode_frequency(geom, mat, &pump_mode, t)?;
        let nu_s = mode_frequency(geom, mat, &half_mode, t)?;
        Ok(nu_p - 2.0 * nu_s)
    };

    // coarse scan for a sign change
    let n_scan = 64;
    let step = (t_hi_c - t_lo_c) / n_scan as f64;
    let mut bracket = None;
    let mut prev = mismatch(t_lo_c)?;
    for i in 1..=n_scan {
        let t = t_lo_c + i as f64 * step;
        let cur = mismatch(t)?;
        if prev.signum() != cur.signum() {
            bracket = Some((t - step, t, prev));
            break;
        }
        prev = cur;
    }
    let Some((mut a, mut b, f_a)) = bracket else {
        return Ok(None);
    };
    let mut f_a = f_a;
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let f_m = mismatch(m)?;
        if f_m == 0.0 || (b - a) < 1e-9 {
            break;
        }
        if f_m.signum() == f_a.signum() {
            a = m;
            f_a = f_m;
        } else {
            b = m;
        }
    }
    let t_deg = 0.5 * (a + b);
    let temperature = Temperature::new(t_deg)?;
    let nu_p = mode_frequency(geom, mat, &pump_mode, temperature)?;
    let nu_s = mode_frequency(geom, mat, &half_mode, temperature)?;
    let lambda_p = Wavelength::new(C_M_PER_S / nu_p * 1e9)?;
    let lambda_s = Wavelength::new(C_M_PER_S / nu_s * 1e9)?;
    let lambda_i = idler_from_signal(lambda_p, lambda_s)?;
    Ok(Some(PhaseMatchSolution {
        temperature_c: t_deg,
        pump: pump_mode,
        signal: half_mode,
        idler: ModeIndices {
            m: pump_mode.m - half_mode.m,
            ..half_mode
        },
        lambda_p_nm: lambda_p.nm(),
        lambda_s_nm: lambda_s.nm(),
        lambda_i_nm: lambda_i.nm(),
        frequency_mismatch_hz: nu_p - 2.0 * nu_s,
    }))
}
