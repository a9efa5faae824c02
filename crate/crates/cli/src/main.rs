//! `qrecon`: simulate boundary-flux data, reconstruct the potential, verify invariants and sweep parameters.

mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::Axis;
use config::RunConfig;
use wave_inverse::inversion::Variant;

#[derive(Parser)]
#[command(name = "qrecon", version, about = "Potential reconstruction for the 1-D wave equation from boundary flux data")]
struct Cli {
    /// TOML file with `key = value` lines; missing keys take the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fine-grid implicit solve with the true potential; writes the flux measurement.
    Simulate(Overrides),
    /// Fixed-point reconstruction from a measurement file.
    Invert {
        /// Measurement CSV (`t,flux`); defaults to the file `simulate` would use in the output directory.
        #[arg(long)]
        measurement: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Runs the invariant checks and prints a JSON report; exit code 2 when any fails.
    Verify {
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// One reconstruction per axis value, aggregated in `sweep.csv`.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Prints the effective configuration as TOML.
    Config(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// True potential `Q(x)` as an expression.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    w0: Option<String>,
    /// Relative noise amplitude, e.g. 0.05.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    no_penalty: bool,
    #[arg(long)]
    ncut: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    eps_stop: Option<f64>,
    #[arg(long)]
    alpha_floor: Option<f64>,
    #[arg(long)]
    inverse_tau: Option<f64>,
    #[arg(long)]
    direct_h: Option<f64>,
    #[arg(long)]
    direct_tau: Option<f64>,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    no_reference: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, hide = true)]
    oterm_coeff: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Alg3,
    Alg4,
}

impl Overrides {
    fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })* };
        }
        set!(s, m, cfl, potential, w0, noise, seed, max_iter, eps_stop, alpha_floor, inverse_tau, direct_h, direct_tau, output, oterm_coeff);
        if self.passes.is_some() {
            cfg.passes = self.passes;
        }
        if self.ncut.is_some() {
            cfg.ncut = self.ncut;
        }
        if let Some(v) = self.variant {
            cfg.variant = match v {
                VariantArg::Alg3 => Variant::Alg3,
                VariantArg::Alg4 => Variant::Alg4,
            };
        }
        cfg.penalty &= !self.no_penalty;
        cfg.sequential |= self.sequential;
        cfg.reference &= !self.no_reference;
        cfg
    }
}

fn base_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), |p| RunConfig::load(p))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let base = base_config(cli.config.as_ref())?;
    match cli.command {
        Command::Simulate(o) => {
            let cfg = o.apply(base);
            let out = commands::simulate(&cfg)?;
            for f in &out.files {
                println!("{}", f.display());
            }
            println!("input for invert: {}", out.observed.display());
        }
        Command::Invert { measurement, overrides } => {
            let cfg = overrides.apply(base);
            let path = measurement.unwrap_or_else(|| {
                let name = if cfg.noise > 0.0 { commands::REGULARIZED_FILE } else { commands::CLEAN_FILE };
                cfg.output.join(name)
            });
            let res = commands::invert(&cfg, &path)?;
            println!(
                "{} after {} iterations; results in {}",
                if res.converged { "converged" } else { "stopped" },
                res.history.len(),
                cfg.output.display()
            );
        }
        Command::Verify { report, overrides } => {
            let cfg = overrides.apply(base);
            let r = verify::verify(&cfg);
            let text = serde_json::to_string_pretty(&r)?;
            println!("{text}");
            if let Some(p) = report {
                std::fs::write(&p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
            }
            if !r.passed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Sweep { axis, values, overrides } => {
            let cfg = overrides.apply(base);
            for row in commands::sweep(&cfg, axis, &values)? {
                println!("{} iterations={} converged={} error={:.4e}", row.value, row.iterations, row.converged, row.relative_l2_error);
            }
        }
        Command::Config(o) => print!("{}", toml::to_string(&o.apply(base))?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
