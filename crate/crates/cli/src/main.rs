use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use sigauto_cli::config::{parse_config, Emission, Mode, Settings};
use sigauto_core::{GridWidth, StatVariant};

#[derive(Parser)]
#[command(
    name = "sigauto",
    version,
    about = "Forecast a stream of observations with signal automata"
)]
struct Cli {
    #[arg(value_enum)]
    command: Mode,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Flat JSON config file; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input path, or - for standard input
    #[arg(long)]
    input: Option<String>,
    /// Output path (standard output when absent)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Emission model
    #[arg(long, value_enum)]
    mode: Option<Emission>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stop at the first malformed row
    #[arg(long)]
    strict: bool,
    /// Write a snapshot here on termination
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Continue from a snapshot
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Fail with exit code 3 when a bench bound is violated
    #[arg(long)]
    check: bool,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    grid_width: Option<f64>,
    #[arg(long, value_parser = parse_variant)]
    stat_variant: Option<StatVariant>,
    /// First held-out instant for fit
    #[arg(long)]
    split: Option<u64>,
    #[arg(long)]
    score_floor: Option<f64>,
}

fn parse_variant(s: &str) -> Result<StatVariant, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

impl Flags {
    fn settings(&self) -> Settings {
        Settings {
            input: self.input.clone(),
            output: self.output.clone(),
            horizon: self.horizon,
            emission: self.mode,
            seed: self.seed,
            strict: self.strict.then_some(true),
            snapshot: self.snapshot.clone(),
            resume: self.resume.clone(),
            check: self.check.then_some(true),
            lambda: self.lambda,
            delta: self.delta,
            grid_width: self.grid_width.map(GridWidth::Uniform),
            stat_variant: self.stat_variant,
            split: self.split,
            score_floor: self.score_floor,
            ..Default::default()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SIGAUTO_LOG", "error")).init();
    let cli = Cli::parse();
    let result = parse_config(cli.flags.config.as_deref(), cli.flags.settings(), cli.command)
        .and_then(|cfg| sigauto_cli::run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("sigauto: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
