use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use readout_core::chain::measurement_noise_sigma;
use readout_core::montecarlo::run_ensemble;
use readout_core::sweep::{
    analytic_error_at, calibrate_b, evaluate_point, knee_detect, separation_and_sigma, sweep_power, sweep_pulse_width,
    CalibrationPoint, CalibrationTarget, DEFAULT_KNEE_THRESHOLD, DEFAULT_TARGET_ERROR,
};
use readout_core::touchstone::parse_touchstone;
use readout_core::units::db_to_voltage_ratio;
use readout_core::{IQEnsemble, QubitState, SweepRow};
use serde_json::json;

use crate::config::{load_config, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{write_iq_csv, write_json, write_s2p_csv, write_sweep_csv};
use crate::svg::{Plot, Series, Style};

#[derive(Debug, Parser)]
#[command(name = "readout-sim", version, about = "Dispersive qubit readout error simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one Monte Carlo point at the configured pulse.
    Simulate(RunArgs),
    /// Sweep the pulse width (seconds) at fixed power; default 1e-6 to 5e-6 in 9 steps.
    SweepWidth {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Analytic error at which the knee is reported.
        #[arg(long, default_value_t = DEFAULT_KNEE_THRESHOLD)]
        threshold: f64,
    },
    /// Sweep the generator power (dB relative to the configured power); default -10 to 0 in 11 steps.
    SweepPower {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, default_value_t = DEFAULT_KNEE_THRESHOLD)]
        threshold: f64,
    },
    /// Fit the bandwidth factor to a target analytic error at the configured pulse.
    Calibrate {
        #[command(flatten)]
        run: RunArgs,
        /// Target error; defaults to the config's calibration target or 1e-3.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Parse a Touchstone .s2p file and emit its points as CSV.
    ParseS2p {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Dump the raw I-Q samples of both states.
    IqDump {
        #[command(flatten)]
        run: RunArgs,
        /// Scale samples by the amplifier chain's voltage gain.
        #[arg(long)]
        amplified: bool,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG figure here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Worker threads for the Monte Carlo runs. Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Sweep range; absent flags take the subcommand's defaults.
#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

impl RangeArgs {
    pub fn values(&self, defaults: (f64, f64, usize)) -> CliResult<Vec<f64>> {
        linspace(self.from.unwrap_or(defaults.0), self.to.unwrap_or(defaults.1), self.steps.unwrap_or(defaults.2))
    }
}

pub const WIDTH_RANGE: (f64, f64, usize) = (1e-6, 5e-6, 9);
pub const POWER_RANGE: (f64, f64, usize) = (-10.0, 0.0, 11);

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> CliResult<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::validation("--from/--to", "must be finite"));
    }
    match steps {
        0 => Err(CliError::validation("--steps", "must be at least 1")),
        1 if from == to => Ok(vec![from]),
        1 => Err(CliError::validation("--steps", "1 step needs --from equal to --to")),
        _ if to <= from => Err(CliError::validation("--to", "must exceed --from")),
        _ => {
            let h = (to - from) / (steps - 1) as f64;
            let mut v: Vec<f64> = (0..steps).map(|i| from + i as f64 * h).collect();
            v[steps - 1] = to;
            Ok(v)
        }
    }
}

fn load(run: &RunArgs) -> CliResult<RunConfig> {
    let mut cfg = match &run.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = run.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = run.trials {
        if trials < 2 {
            return Err(CliError::validation("--trials", format!("{trials} must be ≥ 2")));
        }
        cfg.trials = trials;
    }
    Ok(cfg)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    match workers {
        None => f(),
        Some(0) => Err(CliError::validation("--workers", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn write_to(path: Option<&Path>, emit: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            emit(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn write_plot(path: Option<&Path>, plot: impl FnOnce() -> Plot<'static>) -> CliResult<()> {
    if let Some(p) = path {
        std::fs::write(p, plot().render()).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn iq_plot(ensemble: &IQEnsemble, title: &'static str) -> Plot<'static> {
    let pts = |s: QubitState| ensemble.samples(s).iter().map(|z| (z.re, z.im)).collect();
    Plot {
        title,
        x_label: "I (V)",
        y_label: "Q (V)",
        log_y: false,
        style: Style::Markers,
        series: vec![
            Series { label: "|0>", points: pts(QubitState::Ground) },
            Series { label: "|1>", points: pts(QubitState::Excited) },
        ],
    }
}

fn sweep_plot(rows: &[SweepRow], title: &'static str, x_label: &'static str) -> Plot<'static> {
    Plot {
        title,
        x_label,
        y_label: "readout error",
        log_y: true,
        style: Style::Lines,
        series: vec![
            Series { label: "analytic", points: rows.iter().map(|r| (r.parameter, r.analytic_error)).collect() },
            Series { label: "Monte Carlo", points: rows.iter().map(|r| (r.parameter, r.empirical_error)).collect() },
        ],
    }
}

fn report_knee(rows: &[SweepRow], threshold: f64, unit: &str) {
    match knee_detect(rows, threshold) {
        Ok(k) => eprintln!("knee at error {threshold:e}: {k:.6e} {unit}"),
        Err(e) => eprintln!("no knee: {e}"),
    }
}

fn threshold_ok(threshold: f64) -> CliResult<()> {
    if threshold > 0.0 && threshold < 0.5 {
        Ok(())
    } else {
        Err(CliError::validation("--threshold", format!("{threshold} must lie in (0, 0.5)")))
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(run) => {
            let cfg = load(&run)?;
            with_workers(run.workers, || {
                let chain = cfg.effective_chain()?;
                let spec = cfg.pulse;
                let row = evaluate_point(&chain, &cfg.grid, &spec, spec.width(), cfg.trials, cfg.seed)?;
                write_to(run.out.as_deref(), |w| write_sweep_csv(w, &[row]))?;
                if run.plot.is_some() {
                    let ensemble = run_ensemble(&chain, &cfg.grid.build(spec.width())?, &spec, cfg.trials, cfg.seed)?;
                    write_plot(run.plot.as_deref(), || iq_plot(&ensemble, "I-Q readout"))?;
                }
                Ok(())
            })
        }
        Command::SweepWidth { run, range, threshold } => {
            threshold_ok(threshold)?;
            let widths = range.values(WIDTH_RANGE)?;
            if widths[0] <= 0.0 {
                return Err(CliError::validation("--from", "pulse widths must be positive"));
            }
            let cfg = load(&run)?;
            with_workers(run.workers, || {
                let chain = cfg.effective_chain()?;
                let rows = sweep_pulse_width(&chain, &cfg.grid, &cfg.pulse, &widths, cfg.trials, cfg.seed)?;
                write_to(run.out.as_deref(), |w| write_sweep_csv(w, &rows))?;
                write_plot(run.plot.as_deref(), || {
                    sweep_plot(&rows, "Readout error vs pulse width", "pulse width (s)")
                })?;
                report_knee(&rows, threshold, "s");
                Ok(())
            })
        }
        Command::SweepPower { run, range, threshold } => {
            threshold_ok(threshold)?;
            let powers = range.values(POWER_RANGE)?;
            let cfg = load(&run)?;
            with_workers(run.workers, || {
                let chain = cfg.effective_chain()?;
                let rows = sweep_power(&chain, &cfg.grid, &cfg.pulse, &powers, cfg.trials, cfg.seed)?;
                write_to(run.out.as_deref(), |w| write_sweep_csv(w, &rows))?;
                write_plot(run.plot.as_deref(), || {
                    sweep_plot(&rows, "Readout error vs relative power", "relative power (dB)")
                })?;
                report_knee(&rows, threshold, "dB");
                Ok(())
            })
        }
        Command::Calibrate { run, target } => {
            let cfg = load(&run)?;
            let target = target.or(cfg.calibration_target).unwrap_or(DEFAULT_TARGET_ERROR);
            if !(target > 0.0 && target < 0.5) {
                return Err(CliError::validation("--target", format!("{target} must lie in (0, 0.5)")));
            }
            let point = CalibrationPoint { spec: cfg.pulse, target: CalibrationTarget::Error(target) };
            let b = calibrate_b(&cfg.chain, &cfg.grid, &point)?;
            let chain = cfg.chain.with_bandwidth_factor(b)?;
            let (d, _) = separation_and_sigma(&chain, &cfg.grid, &cfg.pulse)?;
            let value = json!({
                "bandwidth_factor": b,
                "target_error": target,
                "analytic_error": analytic_error_at(&chain, &cfg.grid, &cfg.pulse)?,
                "d_volts": d,
                "sigma_volts": measurement_noise_sigma(&chain, &cfg.pulse)?,
                "pulse_width_s": cfg.pulse.width(),
                "generator_power_dbm": cfg.pulse.generator_power_dbm(),
            });
            write_to(run.out.as_deref(), |w| write_json(w, &value))
        }
        Command::ParseS2p { path, out, plot } => {
            let text =
                std::fs::read_to_string(&path).map_err(|e| CliError::validation(&path.display().to_string(), e))?;
            let table =
                parse_touchstone::<f64>(&text).map_err(|e| CliError::validation(&path.display().to_string(), e))?;
            write_to(out.as_deref(), |w| write_s2p_csv(w, &table))?;
            write_plot(plot.as_deref(), || Plot {
                title: "|S21|",
                x_label: "frequency (Hz)",
                y_label: "|S21| (dB)",
                log_y: false,
                style: Style::Lines,
                series: vec![Series {
                    label: "S21",
                    points: table.points().iter().map(|p| (p.freq, 20.0 * p.s21.norm().log10())).collect(),
                }],
            })
        }
        Command::IqDump { run, amplified } => {
            let cfg = load(&run)?;
            with_workers(run.workers, || {
                let chain = cfg.effective_chain()?;
                let spec = cfg.pulse;
                let mut ensemble = run_ensemble(&chain, &cfg.grid.build(spec.width())?, &spec, cfg.trials, cfg.seed)?;
                if amplified {
                    let g = db_to_voltage_ratio(chain.total_gain_db());
                    ensemble = ensemble.map_samples(|z| z * g);
                }
                write_to(run.out.as_deref(), |w| write_iq_csv(w, &ensemble))?;
                write_plot(run.plot.as_deref(), || iq_plot(&ensemble, "I-Q samples"))
            })
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
