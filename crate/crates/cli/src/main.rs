//! `rti`: growth rates, modes, synthesis and time-domain checks from the command line.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rti_core::synthesis::IllposedOptions;

use crate::config::{parse_config, ConfigError, Format, InitKind, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "rti", version, about = "Linear Rayleigh-Taylor growth in rotating compressible two-layer columns")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML configuration; the reference column when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hydrostatic profile on the configured grid.
    Equilibrium,
    /// Growth rate over a sweep of |xi|.
    Dispersion {
        #[arg(long)]
        xi_min: Option<f64>,
        #[arg(long)]
        xi_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Normal mode at one horizontal frequency.
    Mode {
        #[arg(long, default_value_t = 10.0)]
        xi1: f64,
        #[arg(long, default_value_t = 0.0)]
        xi2: f64,
        #[arg(long, default_value_t = 2)]
        k_max: usize,
    },
    /// Sobolev norms of a synthesized solution.
    Synth {
        #[arg(long)]
        r3: Option<f64>,
        #[arg(long)]
        r4: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        t_list: Option<Vec<f64>>,
        #[arg(long)]
        nr: Option<usize>,
        #[arg(long)]
        ntheta: Option<usize>,
    },
    /// Time integration at one horizontal frequency.
    Evolve {
        #[arg(long)]
        xi1: Option<f64>,
        #[arg(long)]
        xi2: Option<f64>,
        #[arg(long = "T")]
        t_final: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum)]
        init: Option<InitKind>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Small data that grows past a threshold, for a sequence of sizes.
    Illposed {
        #[arg(long, default_value_t = 2)]
        j: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        t0: f64,
        #[arg(long, default_value_t = 4)]
        nmax: usize,
    },
    /// Full invariant suite; nonzero exit on any failure.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Dispersion { .. } => "dispersion",
            Command::Mode { .. } => "mode",
            Command::Synth { .. } => "synth",
            Command::Evolve { .. } => "evolve",
            Command::Illposed { .. } => "illposed",
            Command::Verify => "verify",
        }
    }
}

fn set_if<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn load_config(global: &Global) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse {
                line: 0,
                column: 0,
                message: format!("{}: {e}", path.display()),
            })?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    set_if(&mut cfg.output.directory, global.out.clone());
    set_if(&mut cfg.output.format, global.format);
    Ok(cfg)
}

/// Applies flags to the config and validates the result.
fn apply_flags(cfg: &mut RunConfig, command: &Command) -> Result<(), ConfigError> {
    match command {
        Command::Dispersion { xi_min, xi_max, steps } => {
            set_if(&mut cfg.sweep.xi_min, *xi_min);
            set_if(&mut cfg.sweep.xi_max, *xi_max);
            set_if(&mut cfg.sweep.steps, *steps);
        }
        Command::Synth {
            r3,
            r4,
            k,
            t_list,
            nr,
            ntheta,
        } => {
            set_if(&mut cfg.synth.r3, *r3);
            set_if(&mut cfg.synth.r4, *r4);
            set_if(&mut cfg.synth.k, *k);
            set_if(&mut cfg.synth.t, t_list.clone());
            set_if(&mut cfg.synth.n_r, *nr);
            set_if(&mut cfg.synth.n_theta, *ntheta);
        }
        Command::Evolve {
            xi1,
            xi2,
            t_final,
            dt,
            init,
            seed,
        } => {
            set_if(&mut cfg.evolve.xi1, *xi1);
            set_if(&mut cfg.evolve.xi2, *xi2);
            if t_final.is_some() {
                cfg.evolve.t_final = *t_final;
            }
            set_if(&mut cfg.evolve.dt, *dt);
            set_if(&mut cfg.evolve.init, *init);
            set_if(&mut cfg.evolve.seed, *seed);
        }
        _ => {}
    }
    let problems = cfg.violations();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::Validation(problems))
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("RTI_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow!("RTI_THREADS must be a positive integer, got {raw:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

enum Failure {
    Config(ConfigError),
    Run(anyhow::Error),
    Checks(usize),
}

fn run(cli: &Cli) -> Result<(), Failure> {
    configure_threads().map_err(Failure::Run)?;
    let mut cfg = load_config(&cli.global).map_err(Failure::Config)?;
    apply_flags(&mut cfg, &cli.command).map_err(Failure::Config)?;
    let dir = cfg.output.directory.clone();
    let start = Instant::now();
    let mut failed = 0;
    let artifacts = match &cli.command {
        Command::Equilibrium => commands::equilibrium(&cfg, &dir),
        Command::Dispersion { .. } => commands::dispersion(&cfg, &dir),
        Command::Mode { xi1, xi2, k_max } => commands::mode(&cfg, &dir, [*xi1, *xi2], *k_max),
        Command::Synth { .. } => commands::synth(&cfg, &dir),
        Command::Evolve { .. } => commands::evolve_cmd(&cfg, &dir),
        Command::Illposed { j, k, alpha, t0, nmax } => {
            let opts = IllposedOptions {
                j: *j,
                k: *k,
                alpha: *alpha,
                t0: *t0,
                n_max: *nmax,
                ..IllposedOptions::default()
            };
            commands::illposed(&cfg, &dir, &opts)
        }
        Command::Verify => (|| {
            let fluid = cfg.fluid_config().map_err(|v| anyhow!(v.join("; ")))?;
            let checks = verify::run_suite(&fluid, cfg.grid.n_elements)?;
            for c in &checks {
                eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            }
            failed = checks.iter().filter(|c| !c.passed).count();
            Ok(vec![verify::table(&checks).write(&dir, "verify", cfg.output.format)?])
        })(),
    }
    .map_err(Failure::Run)?;
    output::write_run_meta(&dir, cli.command.name(), &cfg, &artifacts, start.elapsed()).map_err(Failure::Run)?;
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let record = match &failure {
                Failure::Config(ConfigError::Parse { line, column, message }) => json!({
                    "error": "parse",
                    "line": line,
                    "column": column,
                    "message": message,
                }),
                Failure::Config(ConfigError::Validation(list)) => json!({
                    "error": "validation",
                    "violations": list,
                }),
                Failure::Run(e) => json!({
                    "error": "run",
                    "command": cli.command.name(),
                    "message": format!("{e:#}"),
                }),
                Failure::Checks(n) => json!({
                    "error": "checks_failed",
                    "failed": n,
                }),
            };
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
