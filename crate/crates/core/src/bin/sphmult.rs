//! `sphmult`: reproducible multiplier, verifier and eigenvalue experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sphere_multipliers::config::{ExperimentConfig, Overrides};
use sphere_multipliers::runner::{self, Format, Outcome, CHECKS};
use sphere_multipliers::Error;

#[derive(Parser, Debug)]
#[command(
    name = "sphmult",
    version,
    about = "Multiplier operators and kernel verifiers on the sphere"
)]
struct Cli {
    /// TOML or JSON experiment config (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplier family: shifting, combo, cap, steklov or custom.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Sphere dimension.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Order of the combo family.
    #[arg(long, global = true)]
    l: Option<usize>,
    /// Band limit of tables, test functions and generated kernels.
    #[arg(long, global = true)]
    kmax: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Csv)]
    format: Fmt,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Table of η_k^t over the configured (k, t) lattice.
    Multipliers,
    /// Run a verifier campaign.
    Verify {
        #[arg(value_name = "CHECK", help = format!("one of: {}", CHECKS.join(", ")))]
        check: String,
    },
    /// Fit the Hölder exponent of the kernel under the family.
    FitHolder,
    /// Decreasing eigenvalue sequence of the kernel.
    Eigen,
    /// Print the effective configuration with every default spelled out.
    PrintConfig,
}

fn run(cli: &Cli) -> Result<Option<Outcome>, Error> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::read(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        family: cli.family.clone(),
        m: cli.m,
        l: cli.l,
        k_max: cli.kmax,
        out: cli.out.clone(),
    });
    let format = match cli.format {
        Fmt::Csv => Format::Csv,
        Fmt::Json => Format::Json,
    };
    let outcome = match &cli.command {
        Cmd::PrintConfig => {
            cfg.validate()?;
            match format {
                Format::Csv => print!("{}", cfg.to_toml()?),
                Format::Json => print!("{}", cfg.to_json()?),
            }
            return Ok(None);
        }
        Cmd::Multipliers => runner::multipliers(&cfg, format)?,
        Cmd::Verify { check } => runner::verify(check, &cfg)?,
        Cmd::FitHolder => runner::fit_holder(&cfg)?,
        Cmd::Eigen => runner::eigen(&cfg, format)?,
    };
    runner::write_outputs(&cfg.output.dir, &outcome.outputs)?;
    Ok(Some(outcome))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(o)) => {
            println!("{}", o.summary);
            if o.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Fit(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
