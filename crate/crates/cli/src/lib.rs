//! Command-line front end: configuration, ingestion, streaming forecasts,
//! fitting and the timing harness.

pub mod bench;
pub mod config;
pub mod error;
pub mod ingest;
pub mod stream;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};

use log::warn;
use sigauto_core::{fit, Signal};

use config::{Input, Mode, RunConfig};
use error::{CliError, CliResult};
use ingest::Observations;

pub use stream::{run_stream, StreamSummary};

pub fn open_input(input: &Input) -> CliResult<Box<dyn BufRead>> {
    Ok(match input {
        Input::Stdin => Box::new(BufReader::new(io::stdin())),
        Input::Path(p) => Box::new(BufReader::new(
            File::open(p).map_err(|e| CliError::Input(format!("cannot open {}: {e}", p.display())))?,
        )),
    })
}

pub fn open_output(cfg: &RunConfig) -> CliResult<Box<dyn Write>> {
    Ok(match &cfg.output {
        None => Box::new(BufWriter::new(io::stdout())),
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
    })
}

/// Reads a whole signal, skipping malformed rows unless strict.
pub fn read_signal(cfg: &RunConfig, input: Box<dyn BufRead>) -> CliResult<Signal> {
    let mut rows = Vec::new();
    for row in Observations::new(input, None)? {
        match row {
            Ok(obs) => rows.push(obs.coords),
            Err(e) if cfg.strict => return Err(CliError::Input(format!("line {}: {}", e.line, e.message))),
            Err(e) => warn!("skipping line {}: {}", e.line, e.message),
        }
    }
    if rows.is_empty() {
        return Err(CliError::Input("empty input".into()));
    }
    Ok(Signal::from_rows(rows)?)
}

pub fn run_fit(cfg: &RunConfig, input: Box<dyn BufRead>, out: &mut dyn Write) -> CliResult<sigauto_core::FitReport> {
    let signal = read_signal(cfg, input)?;
    let n = signal.len() as u64 - 1;
    let split = cfg.split.unwrap_or(n / 2);
    let report = fit(&cfg.grid, &signal, split, cfg.score_floor)?;
    serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(report)
}

/// Runs the configured mode end to end.
pub fn run(cfg: &RunConfig) -> CliResult<()> {
    match cfg.mode {
        Mode::Run | Mode::Lookahead => {
            let input = open_input(&cfg.input)?;
            run_stream(cfg, input, &mut *open_output(cfg)?).map(|_| ())
        }
        Mode::Fit => {
            let input = open_input(&cfg.input)?;
            run_fit(cfg, input, &mut *open_output(cfg)?).map(|_| ())
        }
        Mode::Bench => {
            let report = bench::run_bench(&cfg.bench, cfg.seed)?;
            let mut out = open_output(cfg)?;
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| CliError::Io(e.into()))?;
            writeln!(out)?;
            out.flush()?;
            if cfg.check {
                report.check()?;
            }
            Ok(())
        }
    }
}
