mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{Outcome, Output};
use crate::config::RunConfig;
use crate::error::{CliError, EXIT_OK, EXIT_VERIFICATION};

#[derive(Parser, Debug)]
#[command(name = "plurisolve", version, about = "Complex Monge-Ampere Dirichlet solver and verification toolkit")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One Newton solve at the first s of the schedule.
    Solve,
    /// Continuity path t = 0 -> 1 at the first s.
    Continuation,
    /// Solve along the s schedule and check uniform bounds.
    Sfamily,
    /// Relative capacity of a sublevel node set.
    Capacity,
    /// Relative extremal function and its support defect.
    Extremal,
    /// Discrete comparison principle for two expressions.
    Compare,
    /// Sublevel statistics and the Kolodziej-type inequalities.
    Stats {
        /// Analyse a saved field instead of solving.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// De Giorgi iteration bound from (l, F) samples.
    Degiorgi {
        /// Two-column CSV `l,F`; defaults to the built-in ramp fixture.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Uniform C0 certificate for a solution.
    C0cert {
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Solve with logarithmic poles for each delta.
    Poles,
    /// Check log-pole asymptotics of saved solutions.
    Asymptotics,
    /// Discrepancy of the cone over a Fermat hypersurface.
    Klt {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        m: i64,
    },
    /// Random semipositivity checks of the blow-up metric.
    BlowupCheck {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Continuation => "continuation",
            Command::Sfamily => "sfamily",
            Command::Capacity => "capacity",
            Command::Extremal => "extremal",
            Command::Compare => "compare",
            Command::Stats { .. } => "stats",
            Command::Degiorgi { .. } => "degiorgi",
            Command::C0cert { .. } => "c0cert",
            Command::Poles => "poles",
            Command::Asymptotics => "asymptotics",
            Command::Klt { .. } => "klt",
            Command::BlowupCheck { .. } => "blowup-check",
        }
    }
}

fn load_config(cli: &Cli, required: bool) -> Result<Option<RunConfig>, CliError> {
    match &cli.config {
        Some(p) => {
            let cfg = config::load(p)?;
            cfg.check_command(cli.command.name())?;
            cfg.validate_solver()?;
            Ok(Some(cfg))
        }
        None if required => Err(CliError::config("config", format!("`{}` needs --config", cli.command.name()))),
        None => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let needs_config = !matches!(cli.command, Command::Degiorgi { .. } | Command::Klt { .. } | Command::BlowupCheck { .. });
    let cfg = load_config(cli, needs_config)?;
    let out_dir = cli.out.clone().or_else(|| cfg.as_ref().and_then(|c| c.output_dir.clone()));
    let out = Output::new(out_dir)?;
    match (&cli.command, cfg.as_ref()) {
        (Command::Degiorgi { samples, a, alpha }, cfg) => {
            let d = cfg.map(|c| c.degiorgi.clone()).unwrap_or_default();
            let path = samples.clone().or(d.samples);
            let data = match path {
                Some(p) => commands::read_samples(&p)?,
                None => commands::ramp_fixture(),
            };
            commands::degiorgi(&data, a.unwrap_or(d.a), alpha.unwrap_or(d.alpha), &out)
        }
        (Command::Klt { n, m }, _) => commands::klt(*n, *m, &out),
        (Command::BlowupCheck { samples, seed }, _) => commands::blowup_check(*samples, *seed, &out),
        (cmd, Some(cfg)) => match cmd {
            Command::Solve => commands::solve(cfg, &out),
            Command::Continuation => commands::continuation(cfg, &out),
            Command::Sfamily => commands::sfamily(cfg, &out),
            Command::Capacity => commands::capacity_cmd(cfg, &out),
            Command::Extremal => commands::extremal(cfg, &out),
            Command::Compare => commands::compare(cfg, &out),
            Command::Stats { field } => commands::stats(cfg, &out, field.as_deref()),
            Command::C0cert { field } => commands::c0cert(cfg, &out, field.as_deref()),
            Command::Poles => commands::poles(cfg, &out),
            Command::Asymptotics => commands::asymptotics(cfg, &out),
            Command::Degiorgi { .. } | Command::Klt { .. } | Command::BlowupCheck { .. } => unreachable!(),
        },
        (_, None) => unreachable!("config presence checked above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.report);
            ExitCode::from(if outcome.passed { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code())
        }
    }
}
