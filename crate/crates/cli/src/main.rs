use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bcoutage_cli::commands::{self, parse_list};
use bcoutage_cli::{BdpcArgs, FigureName, Outcome, RegionScheme, RunConfig};
use clap::{Parser, Subcommand, ValueEnum};

/// Outage rate regions of fading broadcast channels.
#[derive(Parser, Debug)]
#[command(name = "bcoutage", version, about)]
struct Cli {
    /// JSON run configuration; defaults to the two-user 20 dB example.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV, SVG and JSON files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the quantile gain of every user.
    Quantile {
        /// Quantile level used for every user instead of its epsilon.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Sweep the rate region frontier.
    Region {
        #[arg(long, value_enum, default_value_t = SchemeArg::Both)]
        scheme: SchemeArg,
    },
    /// Outage of blind dirty-paper coding across precoding coefficients.
    BdpcSweep {
        #[arg(long = "P", alias = "power")]
        power: f64,
        #[arg(long = "Q1", alias = "known", default_value_t = 0.0)]
        known: f64,
        #[arg(long = "Q2", alias = "unknown", default_value_t = 0.0)]
        unknown: f64,
        #[arg(long = "N0", alias = "noise", default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value = "exp(mean=1)")]
        fading: String,
        /// Target rate in nats.
        #[arg(long)]
        rate: f64,
        /// Number of coefficients in [0, 1].
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Monte Carlo outage of the successive decoding cascade.
    Simulate {
        /// Comma-separated power split, configuration order.
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        /// Comma-separated rates in nats, configuration order.
        #[arg(long, allow_hyphen_values = true)]
        rates: String,
        /// Overrides `mc_samples`.
        #[arg(long)]
        n: Option<usize>,
        /// Overrides `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Regenerate a figure's curves and chart.
    Figure {
        #[arg(value_enum)]
        name: FigureArg,
        /// Overrides the superposition grid.
        #[arg(long)]
        grid: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    Star,
    Timesharing,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FigureArg {
    Fig2,
    Fig4,
    Fig5,
}

fn run(cli: Cli) -> Result<Option<Outcome>> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let outcome = match cli.command {
        Command::Quantile { t } => {
            print!("{}", commands::quantile(&cfg, t)?);
            return Ok(None);
        }
        Command::Region { scheme } => {
            let scheme = match scheme {
                SchemeArg::Star => RegionScheme::Star,
                SchemeArg::Timesharing => RegionScheme::TimeSharing,
                SchemeArg::Both => RegionScheme::Both,
            };
            commands::region(&cfg, scheme, &out)?
        }
        Command::BdpcSweep {
            power,
            known,
            unknown,
            noise,
            fading,
            rate,
            points,
        } => {
            let args = BdpcArgs {
                power,
                known,
                unknown,
                noise,
                fading,
                rate,
                points,
            };
            commands::bdpc_sweep(&args, &out)?
        }
        Command::Simulate {
            gamma,
            rates,
            n,
            seed,
        } => {
            if let Some(n) = n {
                cfg.mc_samples = n;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            commands::simulate(&cfg, &parse_list(&gamma)?, &parse_list(&rates)?, &out)?
        }
        Command::Figure { name, grid } => {
            let name = match name {
                FigureArg::Fig2 => FigureName::Fig2,
                FigureArg::Fig4 => FigureName::Fig4,
                FigureArg::Fig5 => FigureName::Fig5,
            };
            commands::figure(name, grid.unwrap_or(cfg.grid), &out)?
        }
    };
    Ok(Some(outcome))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(outcome)) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&outcome.summary).expect("summary serializes")
            );
            match outcome.violation {
                Some(why) => {
                    eprintln!("invariant violated: {why}");
                    ExitCode::from(2)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
