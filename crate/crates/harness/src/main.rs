use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arcsim::emit::{bounds_json, fidelity_csv, run_json, trace_csv, trace_json, write_text};
use arcsim::selftest::run_selftest;
use arcsim::{
    emit_svg, point_bounds, run_prepared, run_ptrace, ExperimentConfig, Format, HarnessError,
    HarnessResult, Prepared,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arc-sim", version, about = "Randomized Hamiltonian compilation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity of each protocol over the configured sweep.
    Run,
    /// Per-step adaptive weights along one seeded trajectory.
    Ptrace,
    /// State-dependent error bounds along the exact trajectory.
    Bounds,
    /// Randomized oracle checks of the estimators and bounds.
    Selftest,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "M")]
    trajectories: Option<usize>,
    #[arg(long = "noise-std", global = true, value_name = "F")]
    noise_std: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// Also write a line chart next to the output file.
    #[arg(long, global = true)]
    svg: bool,
}

impl Common {
    fn load(&self) -> HarnessResult<ExperimentConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| HarnessError::Config("--config PATH is required".into()))?;
        let mut config = ExperimentConfig::from_path(path)?;
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(m) = self.trajectories {
            config.trajectories = m;
        }
        if let Some(s) = self.noise_std {
            config.noise_std = s;
        }
        config.validate()?;
        Ok(config)
    }

    fn out_path(&self, config: &ExperimentConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| config.output.clone())
    }
}

fn deliver(path: Option<&Path>, text: &str) -> HarnessResult<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> HarnessResult<()> {
    let common = &cli.common;
    match cli.command {
        Command::Selftest => {
            let outcomes = run_selftest(common.seed.unwrap_or(0))?;
            let mut report = String::new();
            for c in &outcomes {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                report.push_str(&format!("{verdict} {}: {}\n", c.name, c.detail));
            }
            deliver(common.out.as_deref(), &report)?;
            if outcomes.iter().any(|c| !c.passed) {
                return Err(HarnessError::Sim(arcsim_core::SimError::InvalidState(
                    "selftest failed".into(),
                )));
            }
            Ok(())
        }
        Command::Run => {
            let config = common.load()?;
            let out = common.out_path(&config);
            let prepared = Prepared::new(config.clone())?;
            let result = run_prepared(&prepared)?;
            for e in &result.extrapolated {
                eprintln!("{}: fidelity extrapolated to zero step size {:.6}", e.protocol, e.fidelity);
            }
            let text = match common.format {
                Format::Csv => fidelity_csv(&result)?,
                Format::Json => {
                    let bounds = if config.include_bounds {
                        Some(point_bounds(&prepared)?)
                    } else {
                        None
                    };
                    run_json(&config, &result, bounds.as_deref())?
                }
            };
            deliver(out.as_deref(), &text)?;
            if common.svg {
                let path = out
                    .as_ref()
                    .map(|p| p.with_extension("svg"))
                    .ok_or_else(|| HarnessError::Config("--svg needs an output path".into()))?;
                emit_svg(&result, &path)?;
            }
            Ok(())
        }
        Command::Ptrace => {
            let config = common.load()?;
            let trace = run_ptrace(&config)?;
            let text = match common.format {
                Format::Csv => trace_csv(&trace)?,
                Format::Json => trace_json(&config, &trace)?,
            };
            deliver(common.out_path(&config).as_deref(), &text)
        }
        Command::Bounds => {
            let config = common.load()?;
            let prepared = Prepared::new(config.clone())?;
            let text = bounds_json(&config, &point_bounds(&prepared)?)?;
            deliver(common.out_path(&config).as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("arc-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
