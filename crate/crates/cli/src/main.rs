use clap::{Args, Parser, Subcommand};
use onebit::montecarlo::{Parallelism, WORKERS_ENV};
use onebit::selfcheck::SelfCheck;
use onebit_cli::commands::{self, Format, Overrides, RocRequest, RunSource, TheoryRequest};
use onebit_cli::config::parse_mode;
use onebit_cli::preset::Preset;
use onebit_cli::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "onebit", version, about = "One-bit likelihood-ratio spectrum sensing experiments")]
#[command(after_help = format!("The {WORKERS_ENV} environment variable caps the number of worker threads."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate ROC curves and write one curve file per run plus a manifest.
    Roc {
        #[command(flatten)]
        source: SourceArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
        /// Trials per hypothesis, overriding the config.
        #[arg(long)]
        trials: Option<u64>,
        /// Master seed (decimal or 0x-prefixed hex), overriding the config.
        #[arg(long, value_parser = parse_seed)]
        seed: Option<u64>,
        /// Theory columns written to the CSV.
        #[arg(long, value_parser = ["paper", "consistent"])]
        mode: Option<String>,
    },
    /// Write agreement probability, moments and theoretical rates.
    Theory {
        #[command(flatten)]
        source: SourceArgs,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// Run the built-in oracle suite. Exits 1 if any check fails.
    Validate {
        /// Report file.
        #[arg(long, default_value = "validate-report.txt")]
        out: PathBuf,
        /// 2000 trials per hypothesis instead of 20000.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Built-in experiment: fig2 (r sweep) or fig3 (sensor count sweep).
    #[arg(long, value_parser = ["fig2", "fig3"])]
    preset: Option<String>,
    /// Flat key = value config file, or a manifest.json to replay.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SourceArgs {
    fn resolve(self) -> Result<RunSource, CliError> {
        match (self.preset, self.config) {
            (Some(p), _) => Ok(RunSource::Preset(Preset::parse(&p)?)),
            (None, Some(c)) => Ok(RunSource::File(c)),
            (None, None) => Err(CliError::Usage("one of --preset or --config is required".into())),
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    match s.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    }
    .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Roc { source, out, format, trials, seed, mode } => {
            let req = RocRequest {
                source: source.resolve()?,
                out_dir: out,
                format: Format::parse(&format)?,
                overrides: Overrides { trials, seed, mode: mode.as_deref().map(parse_mode).transpose()? },
                parallelism: Parallelism::from_env(),
            };
            for path in commands::cmd_roc(&req)? {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", req.out_dir.join(commands::MANIFEST_FILE).display());
        }
        Command::Theory { source, out, format } => {
            let req = TheoryRequest {
                source: source.resolve()?,
                out,
                format: Format::parse(&format)?,
                overrides: Overrides::default(),
            };
            println!("wrote {}", commands::cmd_theory(&req)?.display());
        }
        Command::Validate { out, quick } => {
            let suite = if quick { SelfCheck::quick() } else { SelfCheck::default() };
            let (passed, results) = commands::cmd_validate(&out, &suite)?;
            print!("{}", commands::validation_report(&results, suite.trials));
            if !passed {
                return Err(CliError::CheckFailed);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
