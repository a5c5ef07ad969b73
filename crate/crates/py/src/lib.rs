//! Python bindings: the main types and operations of the toolkit.
//!
//! Build the importable module with
//! `cargo build -p tesspec-py --release --features extension-module`,
//! then rename `libtesspec.so` to `tesspec.so` somewhere on the Python path
//! (`python/smoke_test.py` does this automatically).

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use tesspec_core::dsp;
use tesspec_core::error::Error;
use tesspec_core::fit::{self, BinningRule, HistUnit};
use tesspec_core::simulate::{self, NoiseModel, PulseShape, SourceSpec};
use tesspec_core::spectro;
use tesspec_core::units::{self, Energy, GateConfig, Temperature, Wavelength};
use tesspec_core::wgm;

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Photon energy hc/λ in eV for a vacuum wavelength in nm.
#[pyfunction]
fn photon_energy_ev(wavelength_nm: f64) -> PyResult<f64> {
    let w = Wavelength::new(wavelength_nm).map_err(to_py_err)?;
    Ok(units::photon_energy(w).ev())
}

/// Vacuum wavelength hc/E in nm for a photon energy in eV.
#[pyfunction]
fn wavelength_nm(energy_ev: f64) -> PyResult<f64> {
    let e = Energy::new(energy_ev).map_err(to_py_err)?;
    Ok(units::wavelength_of(e).map_err(to_py_err)?.nm())
}

/// Idler wavelength from energy conservation 1/λ_p = 1/λ_s + 1/λ_i.
#[pyfunction]
fn idler_from_signal_nm(pump_nm: f64, signal_nm: f64) -> PyResult<f64> {
    let p = Wavelength::new(pump_nm).map_err(to_py_err)?;
    let s = Wavelength::new(signal_nm).map_err(to_py_err)?;
    Ok(units::idler_from_signal(p, s).map_err(to_py_err)?.nm())
}

/// Magnitude of the q-th zero of the Airy function Ai.
#[pyfunction]
fn airy_zero(q: u32) -> PyResult<f64> {
    wgm::airy_zero(q).map_err(to_py_err)
}

/// Sellmeier refractive index of the shipped resonator material.
/// `polarization` is "ordinary" or "extraordinary".
#[pyfunction]
fn refractive_index(polarization: &str, wavelength_nm: f64, temperature_c: f64) -> PyResult<f64> {
    let pol = match polarization {
        "ordinary" | "o" => wgm::Polarization::Ordinary,
        "extraordinary" | "e" => wgm::Polarization::Extraordinary,
        other => {
            return Err(PyValueError::new_err(format!(
                "polarization must be \"ordinary\" or \"extraordinary\", got {other:?}"
            )))
        }
    };
    let w = Wavelength::new(wavelength_nm).map_err(to_py_err)?;
    let t = Temperature::new(temperature_c).map_err(to_py_err)?;
    wgm::refractive_index(&wgm::MaterialModel::builtin(), pol, w, t).map_err(to_py_err)
}

/// A set of simulated TES trace records.
#[pyclass]
struct TraceSet {
    inner: dsp::TraceSet,
}

#[pymethods]
impl TraceSet {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn samples_per_record(&self) -> usize {
        self.inner.records.first().map_or(0, |r| r.samples.len())
    }

    /// Samples of one record.
    fn record(&self, index: usize) -> PyResult<Vec<f64>> {
        self.inner
            .records
            .get(index)
            .map(|r| r.samples.clone())
            .ok_or_else(|| PyValueError::new_err(format!("record {index} out of range")))
    }

    /// Writes the set in the binary trace format.
    fn write(&self, path: &str) -> PyResult<()> {
        tesspec_core::io::write_trace_file(std::path::Path::new(path), &self.inner)
            .map_err(to_py_err)
    }

    /// Reads a binary trace file.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let inner =
            tesspec_core::io::read_trace_file(std::path::Path::new(path)).map_err(to_py_err)?;
        Ok(Self { inner })
    }
}

/// Simulates an attenuated coherent source (Poisson photon numbers).
#[pyfunction]
#[pyo3(signature = (wavelength_nm, mean_photon_number, n_gates, seed = 1))]
fn simulate_coherent(
    wavelength_nm: f64,
    mean_photon_number: f64,
    n_gates: u32,
    seed: u64,
) -> PyResult<TraceSet> {
    let source = SourceSpec::Coherent {
        wavelength_nm,
        mean_photon_number,
    };
    run_simulation(source, n_gates, seed)
}

/// Simulates a monochromatic source delivering one photon per gate.
#[pyfunction]
#[pyo3(signature = (wavelength_nm, n_gates, seed = 1))]
fn simulate_single_line(wavelength_nm: f64, n_gates: u32, seed: u64) -> PyResult<TraceSet> {
    run_simulation(SourceSpec::SingleLine { wavelength_nm }, n_gates, seed)
}

fn run_simulation(source: SourceSpec, n_gates: u32, seed: u64) -> PyResult<TraceSet> {
    let noise = NoiseModel {
        seed,
        ..NoiseModel::default()
    };
    let (traces, _) = simulate::simulate_run(
        &source,
        &PulseShape::default(),
        &noise,
        &GateConfig::default(),
        n_gates,
    )
    .map_err(to_py_err)?;
    Ok(TraceSet { inner: traces })
}

/// Averaged unit-area master pulse.
#[pyclass]
struct MasterPulse {
    inner: dsp::MasterPulse,
}

#[pymethods]
impl MasterPulse {
    fn template(&self) -> Vec<f64> {
        self.inner.template.clone()
    }
}

/// Builds the master pulse from a calibration trace set.
#[pyfunction]
fn build_master(traces: &TraceSet) -> PyResult<MasterPulse> {
    Ok(MasterPulse {
        inner: dsp::build_master(&traces.inner).map_err(to_py_err)?,
    })
}

/// Matched-filter areas and pileup verdicts for every record:
/// returns (areas, accepted).
#[pyfunction]
#[pyo3(signature = (traces, master, threshold = dsp::DEFAULT_PILEUP_THRESHOLD))]
fn analyze(
    traces: &TraceSet,
    master: &MasterPulse,
    threshold: f64,
) -> PyResult<(Vec<f64>, Vec<bool>)> {
    let areas = dsp::analyze_traces(&traces.inner, &master.inner, threshold).map_err(to_py_err)?;
    Ok((
        areas.iter().map(|a| a.value).collect(),
        areas.iter().map(|a| a.accepted).collect(),
    ))
}

/// Fitted detector response: area = a1·E + a2·E².
#[pyclass]
struct Calibration {
    curve: fit::CalibrationCurve,
    peak_means: Vec<f64>,
}

#[pymethods]
impl Calibration {
    #[getter]
    fn a1(&self) -> f64 {
        self.curve.a1
    }

    #[getter]
    fn a2(&self) -> f64 {
        self.curve.a2
    }

    #[getter]
    fn validity_max_ev(&self) -> f64 {
        self.curve.validity_max_ev
    }

    fn peak_means(&self) -> Vec<f64> {
        self.peak_means.clone()
    }

    /// Pulse area predicted for an energy in eV.
    fn area_of(&self, energy_ev: f64) -> f64 {
        self.curve.area_of(energy_ev)
    }

    /// Energy in eV recovered from a pulse area.
    fn invert(&self, area: f64) -> PyResult<f64> {
        Ok(fit::invert_calibration(&self.curve, area)
            .map_err(to_py_err)?
            .ev())
    }
}

/// Runs the photon-number calibration on accepted pulse areas from a
/// known-wavelength coherent run.
#[pyfunction]
fn calibrate(areas: Vec<f64>, accepted: Vec<bool>, wavelength_nm: f64) -> PyResult<Calibration> {
    let kept: Vec<f64> = areas
        .iter()
        .zip(&accepted)
        .filter(|(_, &ok)| ok)
        .map(|(&a, _)| a)
        .collect();
    let hist =
        fit::build_histogram(&kept, BinningRule::default(), HistUnit::Area).map_err(to_py_err)?;
    let seeds = fit::detect_peaks(&hist, None).map_err(to_py_err)?;
    let (peaks, _) = fit::fit_gaussian_mixture(&hist, &seeds).map_err(to_py_err)?;
    let w = Wavelength::new(wavelength_nm).map_err(to_py_err)?;
    let curve = fit::calibrate(&peaks, units::photon_energy(w)).map_err(to_py_err)?;
    Ok(Calibration {
        curve,
        peak_means: peaks.iter().map(|p| p.mean).collect(),
    })
}

/// Single-Gaussian line estimate on calibrated energies (eV): returns
/// (energy_ev, energy_stderr_ev, wavelength_nm, wavelength_stderr_nm,
/// n_counts).
#[pyfunction]
fn estimate_line(
    energies_ev: Vec<f64>,
    window_lo_ev: f64,
    window_hi_ev: f64,
) -> PyResult<(f64, f64, f64, f64, u64)> {
    let hist = fit::build_histogram(&energies_ev, BinningRule::default(), HistUnit::Ev)
        .map_err(to_py_err)?;
    let (line, _) =
        spectro::estimate_line(&hist, (window_lo_ev, window_hi_ev)).map_err(to_py_err)?;
    Ok((
        line.energy_mean_ev,
        line.energy_mean_stderr_ev,
        line.wavelength_nm,
        line.wavelength_stderr_nm,
        line.n_counts,
    ))
}

/// Theoretical tuning curve of the parametric source for one transverse mode
/// combination: list of (temperature_c, lambda_signal_nm, lambda_idler_nm).
#[pyfunction]
#[pyo3(signature = (t_start_c, t_stop_c, t_step_c, pump_nm = 532.0,
                    q_s = 1, p_s = 0, q_i = 1, p_i = 0, m_halfwidth = 500))]
#[allow(clippy::too_many_arguments)]
fn tuning_curve(
    t_start_c: f64,
    t_stop_c: f64,
    t_step_c: f64,
    pump_nm: f64,
    q_s: u32,
    p_s: u32,
    q_i: u32,
    p_i: u32,
    m_halfwidth: u32,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let pump = wgm::PumpSpec {
        target_nm: pump_nm,
        ..wgm::PumpSpec::default()
    };
    let curve = wgm::theoretical_tuning_curve(
        &wgm::ResonatorGeometry::default(),
        &wgm::MaterialModel::builtin(),
        t_start_c,
        t_stop_c,
        t_step_c,
        &pump,
        wgm::TransverseCombo { q_s, p_s, q_i, p_i },
        m_halfwidth,
    )
    .map_err(to_py_err)?;
    Ok(curve
        .points
        .iter()
        .map(|p| (p.temperature_c, p.lambda_s_nm, p.lambda_i_nm))
        .collect())
}

/// Degeneracy point of the symmetric mode combination:
/// (temperature_c, lambda_signal_nm, lambda_pump_nm), or None when the
/// window holds no degeneracy.
#[pyfunction]
#[pyo3(signature = (t_lo_c, t_hi_c, pump_nm = 532.0))]
fn find_degeneracy(t_lo_c: f64, t_hi_c: f64, pump_nm: f64) -> PyResult<Option<(f64, f64, f64)>> {
    let pump = wgm::PumpSpec {
        target_nm: pump_nm,
        ..wgm::PumpSpec::default()
    };
    let combo = wgm::TransverseCombo {
        q_s: 1,
        p_s: 0,
        q_i: 1,
        p_i: 0,
    };
    let deg = wgm::find_degeneracy(
        &wgm::ResonatorGeometry::default(),
        &wgm::MaterialModel::builtin(),
        &pump,
        combo,
        t_lo_c,
        t_hi_c,
    )
    .map_err(to_py_err)?;
    Ok(deg.map(|d| (d.temperature_c, d.lambda_s_nm, d.lambda_p_nm)))
}

#[pymodule]
fn tesspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(photon_energy_ev, m)?)?;
    m.add_function(wrap_pyfunction!(wavelength_nm, m)?)?;
    m.add_function(wrap_pyfunction!(idler_from_signal_nm, m)?)?;
    m.add_function(wrap_pyfunction!(airy_zero, m)?)?;
    m.add_function(wrap_pyfunction!(refractive_index, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_single_line, m)?)?;
    m.add_function(wrap_pyfunction!(build_master, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_line, m)?)?;
    m.add_function(wrap_pyfunction!(tuning_curve, m)?)?;
    m.add_function(wrap_pyfunction!(find_degeneracy, m)?)?;
    m.add_class::<TraceSet>()?;
    m.add_class::<MasterPulse>()?;
    m.add_class::<Calibration>()?;
    m.add("HC_EV_NM", units::HC_EV_NM)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
