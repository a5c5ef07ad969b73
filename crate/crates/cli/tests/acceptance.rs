//! Acceptance suite: simulator loop-back reproductions of the quantitative
//! targets plus the solver invariants. One pass/fail line per criterion.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tesspec_core::dsp::{
    analyze_traces, baseline_subtract, build_master, matched_area, raw_area, MasterPulse,
    DEFAULT_PILEUP_THRESHOLD,
};
use tesspec_core::fit::{
    build_histogram, calibrate, detect_peaks, fit_gaussian_mixture, invert_calibration,
    BinningRule, CalibrationCurve, GaussianPeak, HistUnit,
};
use tesspec_core::simulate::{
    add_pulse_at, simulate_run, NoiseModel, PulseShape, SourceSpec, TRIGGER_INDEX,
};
use tesspec_core::spectro::estimate_line;
use tesspec_core::units::{
    photon_energy, Energy, GateConfig, Temperature, Wavelength, C_M_PER_S, HC_EV_NM,
};
use tesspec_core::wgm::{
    combined_half_linewidth, dispersion_residual, find_degeneracy, solve_phase_matching_combos,
    theoretical_tuning_curve, MaterialModel, PhaseMatchSolution, PumpSpec, ResonatorGeometry,
    TransverseCombo,
};

const CAL_WAVELENGTH_NM: f64 = 1062.9;
const CAL_MEAN_PHOTONS: f64 = 1.8;
const CAL_GATES: u32 = 50_000;

struct Calibration {
    curve: CalibrationCurve,
    master: MasterPulse,
    peaks: Vec<GaussianPeak>,
}

fn run_calibration(seed: u64) -> Calibration {
    let source = SourceSpec::Coherent {
        wavelength_nm: CAL_WAVELENGTH_NM,
        mean_photon_number: CAL_MEAN_PHOTONS,
    };
    let noise = NoiseModel {
        seed,
        ..NoiseModel::default()
    };
    let (traces, _) = simulate_run(
        &source,
        &PulseShape::default(),
        &noise,
        &GateConfig::default(),
        CAL_GATES,
    )
    .unwrap();
    let master = build_master(&traces).unwrap();
    let areas = analyze_traces(&traces, &master, DEFAULT_PILEUP_THRESHOLD).unwrap();
    let accepted: Vec<f64> = areas
        .iter()
        .filter(|a| a.accepted)
        .map(|a| a.value)
        .collect();
    let hist = build_histogram(&accepted, BinningRule::default(), HistUnit::Area).unwrap();
    let seeds = detect_peaks(&hist, None).unwrap();
    let (peaks, _) = fit_gaussian_mixture(&hist, &seeds).unwrap();
    let curve = calibrate(&peaks, photon_energy(Wavelength::new(CAL_WAVELENGTH_NM).unwrap()))
        .unwrap();
    Calibration {
        curve,
        master,
        peaks,
    }
}

fn shared_calibration() -> &'static Calibration {
    static CAL: OnceLock<Calibration> = OnceLock::new();
    CAL.get_or_init(|| run_calibration(1001))
}

/// Measures a monochromatic single-photon run against an existing detector
/// calibration and returns (wavelength, stderr, accepted one-photon records).
fn measure_line(cal: &Calibration, wavelength_nm: f64, n_gates: u32, seed: u64) -> (f64, f64, u64) {
    let source = SourceSpec::SingleLine { wavelength_nm };
    let noise = NoiseModel {
        seed,
        ..NoiseModel::default()
    };
    let (traces, _) = simulate_run(
        &source,
        &PulseShape::default(),
        &noise,
        &GateConfig::default(),
        n_gates,
    )
    .unwrap();
    let areas = analyze_traces(&traces, &cal.master, DEFAULT_PILEUP_THRESHOLD).unwrap();
    let energies: Vec<f64> = areas
        .iter()
        .filter(|a| a.accepted)
        .filter_map(|a| invert_calibration(&cal.curve, a.value).ok())
        .map(Energy::ev)
        .collect();
    let hist = build_histogram(&energies, BinningRule::default(), HistUnit::Ev).unwrap();
    let expect = HC_EV_NM / wavelength_nm;
    let (line, diag) = estimate_line(&hist, (0.5 * expect, 1.5 * expect)).unwrap();
    assert!(diag.converged);
    (line.wavelength_nm, line.wavelength_stderr_nm, line.n_counts)
}

#[test]
fn a1_photon_number_calibration() {
    // full pipeline on one thread, timed
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let started = Instant::now();
    let cal = pool.install(|| run_calibration(4242));
    let elapsed = started.elapsed();

    assert!(
        cal.peaks.len() >= 5,
        "need photon-number peaks k = 0..4, found {}",
        cal.peaks.len()
    );
    assert!(
        cal.peaks[0].mean.abs() < 0.02,
        "zero-photon peak should sit at zero area, got {}",
        cal.peaks[0].mean
    );
    let e0 = HC_EV_NM / CAL_WAVELENGTH_NM;
    for k in 1..=4usize {
        let inverted = invert_calibration(&cal.curve, cal.peaks[k].mean)
            .unwrap()
            .ev();
        let expect = k as f64 * e0;
        let rel = (inverted - expect).abs() / expect;
        assert!(
            rel < 0.01,
            "peak k = {k} inverts to {inverted} eV, expected {expect} eV (rel {rel:.4})"
        );
    }
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "single-threaded pipeline took {elapsed:?}, budget is 60 s"
    );
    println!(
        "[A1 PASS] photon-number peaks k=0..4 invert to k x 1.1665 eV within 1% \
         ({} peaks, single-threaded in {:.1} s)",
        cal.peaks.len(),
        elapsed.as_secs_f64()
    );
}

#[test]
fn a2_wavelength_uncertainty() {
    let cal = shared_calibration();
    for (nm, seed) in [(1100.0, 2100u64), (1250.0, 2200u64)] {
        let (recovered, stderr, n) = measure_line(cal, nm, 40_000, seed);
        assert!(n >= 10_000, "need at least 1e4 one-photon records, got {n}");
        assert!(
            (recovered - nm).abs() <= 2.0,
            "{nm} nm recovered as {recovered} nm (error {:+.2} nm exceeds ±2 nm)",
            recovered - nm
        );
        assert!(
            stderr <= 2.0,
            "reported wavelength stderr {stderr} nm exceeds 2 nm at {nm} nm"
        );
        println!(
            "[A2 PASS] {nm} nm recovered as {recovered:.2} ± {stderr:.2} nm from {n} records"
        );
    }
}

#[test]
fn a3_matched_filter_benefit() {
    let source = SourceSpec::SingleLine {
        wavelength_nm: CAL_WAVELENGTH_NM,
    };
    let noise = NoiseModel {
        seed: 3003,
        ..NoiseModel::default()
    };
    let (traces, _) = simulate_run(
        &source,
        &PulseShape::default(),
        &noise,
        &GateConfig::default(),
        10_000,
    )
    .unwrap();
    let master = build_master(&traces).unwrap();
    let mut matched = Vec::with_capacity(traces.len());
    let mut raw = Vec::with_capacity(traces.len());
    for r in &traces.records {
        matched.push(matched_area(r, &master).unwrap());
        raw.push(raw_area(&baseline_subtract(r).unwrap()));
    }
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        (mean, sd)
    };
    let (m_mean, m_sd) = stats(&matched);
    let (r_mean, r_sd) = stats(&raw);
    // matched and raw areas live on different scales; compare the spreads
    // relative to each statistic's own one-photon signal
    let cv_matched = m_sd / m_mean;
    let cv_raw = r_sd / r_mean;
    assert!(
        cv_matched <= cv_raw * 1.01,
        "matched relative spread {cv_matched:.4} exceeds raw {cv_raw:.4}"
    );
    println!(
        "[A3 PASS] matched-filter relative spread {:.4} <= raw {:.4} on 1e4 fixed-energy pulses",
        cv_matched, cv_raw
    );
}

#[test]
fn a4_pileup_rejection() {
    let gate = GateConfig::default();
    let shape = PulseShape::default();
    let source = SourceSpec::SingleLine {
        wavelength_nm: CAL_WAVELENGTH_NM,
    };
    let noise = NoiseModel {
        seed: 4004,
        ..NoiseModel::default()
    };
    let n_gates = 20_000u32;
    let (mut traces, _) = simulate_run(&source, &shape, &noise, &gate, n_gates).unwrap();

    // inject a second pulse 2-6 µs after the first into 5% of the records
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let dt = gate.sample_interval();
    let energy = Energy::new(HC_EV_NM / CAL_WAVELENGTH_NM).unwrap();
    let mut is_double = vec![false; n_gates as usize];
    for (record, flag) in traces.records.iter_mut().zip(&mut is_double) {
        if rng.random::<f64>() < 0.05 {
            let offset_s = rng.random_range(2e-6..6e-6);
            let onset = TRIGGER_INDEX + (offset_s / dt).round() as usize;
            add_pulse_at(&mut record.samples, energy, &shape, &gate, onset);
            *flag = true;
        }
    }

    let master = build_master(&traces).unwrap();
    let areas = analyze_traces(&traces, &master, DEFAULT_PILEUP_THRESHOLD).unwrap();
    assert_eq!(areas.len(), n_gates as usize, "acceptance completeness");

    let n_doubles = is_double.iter().filter(|&&d| d).count();
    let rejected_doubles = areas
        .iter()
        .zip(&is_double)
        .filter(|(a, &d)| d && !a.accepted)
        .count();
    let n_cleans = n_gates as usize - n_doubles;
    let rejected_cleans = areas
        .iter()
        .zip(&is_double)
        .filter(|(a, &d)| !d && !a.accepted)
        .count();

    let double_rate = rejected_doubles as f64 / n_doubles as f64;
    let clean_rate = rejected_cleans as f64 / n_cleans as f64;
    assert!(
        double_rate >= 0.95,
        "only {rejected_doubles}/{n_doubles} = {:.1}% of double-pulse records rejected",
        100.0 * double_rate
    );
    assert!(
        clean_rate <= 0.01,
        "{rejected_cleans}/{n_cleans} = {:.2}% of clean records rejected",
        100.0 * clean_rate
    );
    println!(
        "[A4 PASS] pileup veto rejects {:.1}% of doubles, {:.3}% of cleans at default threshold",
        100.0 * double_rate,
        100.0 * clean_rate
    );
}

// ---- A5: LM fitter against a brute-force coordinate grid search ----

fn mixture(params: &[f64], x: f64) -> f64 {
    params
        .chunks_exact(3)
        .map(|g| g[0] * (-0.5 * ((x - g[1]) / g[2]).powi(2)).exp())
        .sum()
}

fn cost(params: &[f64], centers: &[f64], counts: &[f64]) -> f64 {
    centers
        .iter()
        .zip(counts)
        .map(|(&x, &y)| {
            let r = y - mixture(params, x);
            r * r
        })
        .sum()
}

/// Brute-force grid search realized as cyclic full-coordinate scans plus a
/// ±1-step pairwise polish: each parameter in turn is scanned over its whole
/// grid holding the others fixed, and once that stalls, every pair of
/// parameters is probed one step in each direction (single-coordinate moves
/// alone can stall one step short on correlated parameters). Repeats until
/// no grid move improves the cost.
fn grid_search(
    start: &[f64],
    ranges: &[(f64, f64)],
    steps: usize,
    centers: &[f64],
    counts: &[f64],
) -> (Vec<f64>, f64) {
    let snap = |v: f64, lo: f64, step: f64| ((v - lo) / step).round() * step + lo;
    let step_of = |i: usize| (ranges[i].1 - ranges[i].0) / steps as f64;
    let mut params: Vec<f64> = start
        .iter()
        .zip(ranges)
        .map(|(&v, &(lo, hi))| snap(v.clamp(lo, hi), lo, (hi - lo) / steps as f64))
        .collect();
    let n = params.len();
    let mut best_cost = cost(&params, centers, counts);
    for _ in 0..200 {
        let mut improved = false;
        for i in 0..n {
            let (lo, _) = ranges[i];
            let step = step_of(i);
            let mut best_v = params[i];
            let mut trial = params.clone();
            for k in 0..=steps {
                let v = lo + k as f64 * step;
                trial[i] = v;
                let c = cost(&trial, centers, counts);
                if c < best_cost {
                    best_cost = c;
                    best_v = v;
                    improved = true;
                }
            }
            params[i] = best_v;
        }
        if !improved {
            // pairwise one-step probe
            'pairs: for i in 0..n {
                for j in i + 1..n {
                    for di in [-1.0, 0.0, 1.0] {
                        for dj in [-1.0, 1.0] {
                            let mut trial = params.clone();
                            trial[i] =
                                (trial[i] + di * step_of(i)).clamp(ranges[i].0, ranges[i].1);
                            trial[j] =
                                (trial[j] + dj * step_of(j)).clamp(ranges[j].0, ranges[j].1);
                            let c = cost(&trial, centers, counts);
                            if c < best_cost {
                                best_cost = c;
                                params = trial;
                                improved = true;
                                break 'pairs;
                            }
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    (params, best_cost)
}

#[test]
fn a5_lm_fitter_vs_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let steps = 1000usize;
    for case in 0..20 {
        let a1 = rng.random_range(400.0..1200.0);
        let a2 = rng.random_range(400.0..1200.0);
        let m1 = rng.random_range(2.5..4.0);
        let m2 = rng.random_range(6.0..7.5);
        let s1 = rng.random_range(0.25..0.6);
        let s2 = rng.random_range(0.25..0.6);
        let truth = [a1, m1, s1, a2, m2, s2];

        let n_bins = 120usize;
        let centers: Vec<f64> = (0..n_bins).map(|i| (i as f64 + 0.5) * 10.0 / n_bins as f64).collect();
        // Poisson-fluctuated counts around the model
        let counts: Vec<f64> = centers
            .iter()
            .map(|&x| {
                let mu = mixture(&truth, x);
                if mu < 1e-9 {
                    0.0
                } else {
                    rand_distr::Distribution::sample(
                        &rand_distr::Poisson::new(mu).unwrap(),
                        &mut rng,
                    )
                }
            })
            .collect();
        let hist = tesspec_core::fit::EnergyHistogram {
            bin_edges: (0..=n_bins).map(|i| i as f64 * 10.0 / n_bins as f64).collect(),
            counts: counts.iter().map(|&c| c as u64).collect(),
            unit: HistUnit::Area,
        };

        let seeds = detect_peaks(&hist, None).unwrap();
        assert_eq!(seeds.len(), 2, "case {case}: expected 2 seeds, got {seeds:?}");
        let (peaks, diag) = fit_gaussian_mixture(&hist, &seeds).unwrap();
        let lm: Vec<f64> = peaks
            .iter()
            .flat_map(|p| [p.amplitude, p.mean, p.sigma])
            .collect();

        let max_count = counts.iter().cloned().fold(0.0f64, f64::max);
        let ranges = [
            (0.0, 2.0 * max_count),
            (0.0, 10.0),
            (10.0 / n_bins as f64 * 0.5, 2.5),
            (0.0, 2.0 * max_count),
            (0.0, 10.0),
            (10.0 / n_bins as f64 * 0.5, 2.5),
        ];
        let start = [
            max_count, seeds[0], 0.5, max_count, seeds[1], 0.5,
        ];
        let counts_f: Vec<f64> = counts.clone();
        let (grid, grid_cost) = grid_search(&start, &ranges, steps, &centers, &counts_f);

        for (i, (&l, &g)) in lm.iter().zip(&grid).enumerate() {
            let step = (ranges[i].1 - ranges[i].0) / steps as f64;
            assert!(
                (l - g).abs() <= step + 1e-12,
                "case {case} parameter {i}: LM {l} vs grid {g} differ by more than one step {step}"
            );
        }
        assert!(
            diag.cost <= grid_cost + 1e-9,
            "case {case}: LM cost {} above grid-oracle cost {grid_cost}",
            diag.cost
        );
    }
    println!("[A5 PASS] LM optimum matches the coordinate grid oracle within one step on 20 randomized two-Gaussian histograms");
}

// ---- A6/A7: phase-matching structure and conservation invariants ----

fn symmetric_combo() -> TransverseCombo {
    TransverseCombo {
        q_s: 1,
        p_s: 0,
        q_i: 1,
        p_i: 0,
    }
}

fn degeneracy() -> &'static PhaseMatchSolution {
    static DEG: OnceLock<PhaseMatchSolution> = OnceLock::new();
    DEG.get_or_init(|| {
        find_degeneracy(
            &ResonatorGeometry::default(),
            &MaterialModel::builtin(),
            &PumpSpec::default(),
            symmetric_combo(),
            30.0,
            60.0,
        )
        .unwrap()
        .expect("degeneracy point inside the 30 °C search window")
    })
}

#[test]
fn a6_phase_matching_structure() {
    let geom = ResonatorGeometry::default();
    let mat = MaterialModel::builtin();
    let deg = degeneracy();

    // degeneracy: symmetric combination reaches λ_s = λ_i = 2 λ_p within one
    // combined linewidth, somewhere in the 30 °C window
    assert!(deg.temperature_c > 30.0 && deg.temperature_c < 60.0);
    let nu_p = C_M_PER_S / (deg.lambda_p_nm * 1e-9);
    let half_lw = combined_half_linewidth(nu_p, nu_p / 2.0, nu_p / 2.0, geom.quality_factor);
    let lw_as_wavelength_nm = (deg.lambda_s_nm * 1e-9).powi(2) / C_M_PER_S * half_lw * 1e9;
    assert!(deg.frequency_mismatch_hz.abs() <= half_lw);
    assert!((deg.lambda_s_nm - 2.0 * deg.lambda_p_nm).abs() <= lw_as_wavelength_nm);
    assert!((deg.lambda_i_nm - deg.lambda_s_nm).abs() <= lw_as_wavelength_nm);

    // detuning ratio over a 4 °C window just past the fork opening
    let t0 = deg.temperature_c + 4.0;
    let curve = theoretical_tuning_curve(
        &geom,
        &mat,
        t0,
        t0 + 4.0,
        0.05,
        &PumpSpec::default(),
        symmetric_combo(),
        3000,
    )
    .unwrap();
    assert!(
        curve.points.len() >= 10,
        "too few tuning-curve points: {}",
        curve.points.len()
    );
    let min_max = |f: &dyn Fn(&tesspec_core::wgm::TheoryPoint) -> f64| {
        let lo = curve.points.iter().map(|p| f(p)).fold(f64::INFINITY, f64::min);
        let hi = curve.points.iter().map(|p| f(p)).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let signal_detuning = min_max(&|p| p.lambda_s_nm);
    let idler_detuning = min_max(&|p| p.lambda_i_nm);
    let ratio = idler_detuning / signal_detuning;

    // mirror ordering: the branches move in opposite directions with T
    for w in curve.points.windows(2) {
        let ds = w[1].lambda_s_nm - w[0].lambda_s_nm;
        let di = w[1].lambda_i_nm - w[0].lambda_i_nm;
        assert!(
            ds * di <= 0.0,
            "signal and idler branches moved the same way between {} and {} °C",
            w[0].temperature_c,
            w[1].temperature_c
        );
    }
    assert!(
        (1.4..=2.6).contains(&ratio),
        "idler/signal detuning ratio {ratio:.2} outside 2.0 ± 0.6 \
         (idler {idler_detuning:.1} nm, signal {signal_detuning:.1} nm)"
    );
    println!(
        "[A6 PASS] degeneracy at {:.2} °C (λ_s = 2λ_p within one linewidth); \
         idler/signal detuning {:.1}/{:.1} nm, ratio {:.2} in 2.0 ± 0.6",
        deg.temperature_c, idler_detuning, signal_detuning, ratio
    );
}

#[test]
fn a7_conservation_invariants() {
    let geom = ResonatorGeometry::default();
    let mat = MaterialModel::builtin();
    let deg = degeneracy();

    let combos: Vec<TransverseCombo> = (1..=3)
        .flat_map(|q_s| {
            (0..=2).flat_map(move |p_s| {
                (1..=3).flat_map(move |q_i| {
                    (0..=2).map(move |p_i| TransverseCombo { q_s, p_s, q_i, p_i })
                })
            })
        })
        .collect();

    // sample temperatures across the band where the q = 1 cluster family
    // (all p combinations) phase-matches
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut solutions: Vec<PhaseMatchSolution> = Vec::new();
    let mut attempts = 0;
    while solutions.len() < 1000 && attempts < 700 {
        attempts += 1;
        let t_c = deg.temperature_c + rng.random_range(0.05..5.0);
        let sols = solve_phase_matching_combos(
            &geom,
            &mat,
            Temperature::new(t_c).unwrap(),
            &deg.pump,
            &combos,
            2500,
        )
        .unwrap();
        solutions.extend(sols);
    }
    assert!(
        solutions.len() >= 1000,
        "collected only {} solutions in {attempts} random temperatures",
        solutions.len()
    );

    for s in solutions.iter().take(1000) {
        // azimuthal conservation is an exact integer identity
        assert_eq!(s.pump.m, s.signal.m + s.idler.m);
        // energy conservation of the reported wavelengths to 1e-12 relative
        let lhs = 1.0 / s.lambda_p_nm;
        let rhs = 1.0 / s.lambda_s_nm + 1.0 / s.lambda_i_nm;
        assert!(
            ((lhs - rhs) / lhs).abs() < 1e-12,
            "energy conservation violated: {lhs} vs {rhs}"
        );
        // dispersion residual below 1e-8 for each solved mode
        let t = Temperature::new(s.temperature_c).unwrap();
        let nu_p = C_M_PER_S / (s.lambda_p_nm * 1e-9);
        let nu_s = C_M_PER_S / (s.lambda_s_nm * 1e-9);
        let nu_i = nu_p - nu_s - s.frequency_mismatch_hz;
        let lambda_i_disp = C_M_PER_S / nu_i * 1e9;
        for (mode, lambda) in [
            (&s.pump, s.lambda_p_nm),
            (&s.signal, s.lambda_s_nm),
            (&s.idler, lambda_i_disp),
        ] {
            let res = dispersion_residual(&geom, &mat, mode, lambda, t).unwrap();
            assert!(
                res.abs() < 1e-8,
                "dispersion residual {res:.2e} for mode m={} q={} p={}",
                mode.m,
                mode.q,
                mode.p
            );
        }
    }
    println!(
        "[A7 PASS] {} solver outputs conserve azimuthal number exactly, energy to 1e-12, \
         dispersion residual < 1e-8",
        solutions.len().min(1000)
    );
}

// ---- A8: CLI determinism ----

#[test]
fn a8_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        r#"{"source": {"kind": "coherent", "wavelength_nm": 1062.9, "mean_photon_number": 1.8}, "n_gates": 3000}"#,
    )
    .unwrap();

    let run_pipeline = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let stem = dir.path().join(tag);
        let bin = env!("CARGO_BIN_EXE_tesspec");
        let run = |args: &[&str]| {
            let out = std::process::Command::new(bin)
                .args(args)
                .output()
                .expect("spawn tesspec");
            assert!(
                out.status.success(),
                "command {:?} failed: {}",
                args,
                String::from_utf8_lossy(&out.stderr)
            );
        };
        let stem_s = stem.to_str().unwrap().to_string();
        run(&[
            "--config",
            config_path.to_str().unwrap(),
            "--seed",
            "99",
            "--out",
            &stem_s,
            "simulate",
        ]);
        run(&[
            "--out",
            &stem_s,
            "analyze",
            &format!("{stem_s}.tesr"),
        ]);
        run(&[
            "--out",
            &stem_s,
            "calibrate",
            &format!("{stem_s}.areas.csv"),
            "--wavelength",
            "1062.9",
        ]);
        let mut outputs = Vec::new();
        for suffix in [
            ".tesr",
            ".truth.csv",
            ".master.tesr",
            ".areas.csv",
            ".calibration.json",
            ".hist.csv",
        ] {
            let path = dir.path().join(format!("{tag}{suffix}"));
            outputs.push((suffix.to_string(), std::fs::read(&path).unwrap()));
        }
        outputs
    };

    let first = run_pipeline("one");
    let second = run_pipeline("two");
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        assert_eq!(a, b, "{name} differs between identical reruns");
    }
    println!(
        "[A8 PASS] simulate + analyze + calibrate reruns are byte-identical across {} output files",
        first.len()
    );
}
