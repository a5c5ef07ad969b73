//! `tesspec` — simulate, process, calibrate, and interpret TES single-photon
//! runs, and predict the parametric source's tuning curves.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tesspec_core::config::RunConfig;
use tesspec_core::Error;

#[derive(Parser)]
#[command(name = "tesspec", version, about = "Calorimetric single-photon spectroscopy toolkit")]
struct Cli {
    /// Run configuration JSON; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the simulation seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output path stem; command-specific suffixes are appended.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Writes the fully-resolved configuration (all defaults explicit) to
    /// this path before running.
    #[arg(long, global = true)]
    emit_config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic run: trace file plus ground-truth CSV.
    Simulate,
    /// Turn a trace file into per-record pulse areas (building the master
    /// pulse when none is given).
    Analyze {
        /// Input trace file.
        trace: PathBuf,
        /// Reuse a previously saved master pulse.
        #[arg(long)]
        master: Option<PathBuf>,
    },
    /// Fit photon-number peaks of a known-wavelength run and fit the energy
    /// response curve.
    Calibrate {
        /// Areas CSV from `analyze`.
        areas: PathBuf,
        /// Wavelength of the calibration source in nm.
        #[arg(long)]
        wavelength: f64,
    },
    /// Estimate the emission line of an unknown source from calibrated areas.
    Spectro {
        /// Areas CSV from `analyze`.
        areas: PathBuf,
        /// Calibration JSON from `calibrate`.
        #[arg(long)]
        calibration: PathBuf,
        /// Optional line-energy hint in eV; auto-detected when absent.
        #[arg(long)]
        line_ev: Option<f64>,
    },
    /// Predict theoretical signal/idler tuning curves over a temperature
    /// range for one or more transverse mode combinations.
    Phasematch {
        #[arg(long)]
        t_start: f64,
        #[arg(long)]
        t_stop: f64,
        #[arg(long, default_value_t = 0.05)]
        t_step: f64,
        /// Transverse combination "q_s,p_s,q_i,p_i"; repeatable.
        #[arg(long = "combo", value_name = "QS,PS,QI,PI")]
        combos: Vec<String>,
        /// Half-width of the signal azimuthal-number scan.
        #[arg(long)]
        m_halfwidth: Option<u32>,
        /// Re-lock the pump to the nearest mode at every temperature instead
        /// of following one locked mode.
        #[arg(long)]
        relock: bool,
    },
    /// Assemble a measured tuning curve from per-temperature line estimates.
    Tuning {
        /// Manifest JSON: [{"temperature_c": .., "signal": "line.json",
        /// "idler": "line.json"}, ..].
        manifest: PathBuf,
        /// Pump wavelength for pair-consistency checks, nm.
        #[arg(long)]
        pump_nm: Option<f64>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Io(_) => 2,
        Error::Format(_) => 3,
        Error::Data(_) | Error::Fit { .. } | Error::Calibration(_) | Error::Numerical(_) => 4,
        Error::Range(_) => 5,
    }
}

fn run(cli: Cli) -> tesspec_core::Result<()> {
    if let Some(threads) = cli.threads {
        // ignore the error when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let mut config = match &cli.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.noise.seed = seed;
    }
    if let Some(path) = &cli.emit_config {
        std::fs::write(path, config.to_json())?;
    }

    match cli.command {
        Command::Simulate => commands::simulate(&config, cli.out.as_deref()),
        Command::Analyze { trace, master } => {
            commands::analyze(&config, &trace, master.as_deref(), cli.out.as_deref())
        }
        Command::Calibrate { areas, wavelength } => {
            commands::calibrate(&config, &areas, wavelength, cli.out.as_deref())
        }
        Command::Spectro {
            areas,
            calibration,
            line_ev,
        } => commands::spectro(&config, &areas, &calibration, line_ev, cli.out.as_deref()),
        Command::Phasematch {
            t_start,
            t_stop,
            t_step,
            combos,
            m_halfwidth,
            relock,
        } => commands::phasematch(
            &config,
            t_start,
            t_stop,
            t_step,
            &combos,
            m_halfwidth,
            relock,
            cli.out.as_deref(),
        ),
        Command::Tuning { manifest, pump_nm } => {
            commands::tuning(&manifest, pump_nm, cli.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
