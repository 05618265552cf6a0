//! The streaming loop: one forecast record per observation.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use log::{debug, info, warn};
use serde::Serialize;
use sigauto_core::{
    default_bandwidth, forecast, forecast_mean, load_snapshot, real_mass, save_snapshot, Bandwidth, EventId, Forecast,
    Kernel, LookaheadFrontier, Model, Pipeline, PluginParams, Resumable, Signal, Snapshot,
};

use crate::config::{Emission, Mode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::{Observations, Row, RowError};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StreamSummary {
    pub observations: u64,
    pub errors: u64,
    pub dummies: u64,
}

#[derive(Debug, Serialize)]
pub struct ForecastRecord {
    pub i: u64,
    pub dummy: bool,
    pub steps: Vec<StepRecord>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poisoned: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<Option<Vec<f64>>>>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum StepRecord {
    Discrete {
        j: usize,
        dist: BTreeMap<String, f64>,
    },
    Continuous {
        j: usize,
        mass: f64,
        mean: Option<Vec<f64>>,
    },
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    line: u64,
    error: &'a str,
}

fn discrete_steps(f: &Forecast) -> Vec<StepRecord> {
    f.steps
        .iter()
        .enumerate()
        .map(|(k, step)| StepRecord::Discrete {
            j: k + 1,
            dist: step
                .iter()
                .map(|(e, p)| {
                    let key = match e {
                        EventId::Dummy => "dummy".to_string(),
                        EventId::Cluster(c) => c.to_string(),
                    };
                    (key, *p)
                })
                .collect(),
        })
        .collect()
}

enum Engine {
    Pipeline(Pipeline),
    Lookahead {
        params: PluginParams,
        seed: u64,
        pending: Signal,
        frontier: Option<LookaheadFrontier>,
    },
}

impl Engine {
    fn resume(snapshot: Snapshot, cfg: &RunConfig) -> CliResult<Self> {
        if snapshot.tau != cfg.params {
            warn!("resuming with the snapshot's plugin parameters; configured ones are ignored");
        }
        let params = snapshot.tau;
        let engine = match (snapshot.resume, cfg.mode) {
            (Resumable::Pipeline(p), Mode::Run) => {
                let continuous = matches!(p.model(), Some(Model::Continuous(_)));
                if continuous != (cfg.emission == Emission::Continuous) {
                    return Err(CliError::Config("snapshot emission mode differs from --mode".into()));
                }
                Engine::Pipeline(p)
            }
            (Resumable::Lookahead(f), Mode::Lookahead) => Engine::Lookahead {
                params,
                seed: f.seed(),
                pending: Signal::new(f.signal().dim()),
                frontier: Some(f),
            },
            (Resumable::Pending(signal), Mode::Lookahead) => Engine::Lookahead {
                params,
                seed: cfg.seed,
                pending: signal,
                frontier: None,
            },
            _ => return Err(CliError::Config("snapshot was written by a different mode".into())),
        };
        Ok(engine)
    }

    fn fresh(cfg: &RunConfig, dim: usize, kernel: Option<Kernel>) -> CliResult<Self> {
        Ok(match cfg.mode {
            Mode::Lookahead => Engine::Lookahead {
                params: cfg.params.clone(),
                seed: cfg.seed,
                pending: Signal::new(dim),
                frontier: None,
            },
            _ => match kernel {
                Some(k) => Engine::Pipeline(Pipeline::continuous(cfg.params.clone(), k)?),
                None => Engine::Pipeline(Pipeline::discrete(cfg.params.clone(), dim)?),
            },
        })
    }

    fn push(&mut self, obs: &[f64]) -> sigauto_core::Result<()> {
        match self {
            Engine::Pipeline(p) => p.push(obs),
            Engine::Lookahead {
                params,
                seed,
                pending,
                frontier,
            } => match frontier {
                Some(f) => f.advance(obs),
                None => {
                    pending.push(obs)?;
                    if pending.len() > params.horizon {
                        *frontier = Some(LookaheadFrontier::build(pending, params, *seed)?);
                    }
                    Ok(())
                }
            },
        }
    }

    fn record(&self, h: usize, seed: u64) -> ForecastRecord {
        match self {
            Engine::Pipeline(p) => {
                let i = p.signal().len() as u64 - 1;
                match p.model().expect("pushed at least once") {
                    Model::Discrete(m) => {
                        let f = forecast(m, h);
                        ForecastRecord {
                            i,
                            dummy: f.is_dummy,
                            steps: discrete_steps(&f),
                            seed,
                            poisoned: None,
                            estimates: None,
                        }
                    }
                    Model::Continuous(m) => ForecastRecord {
                        i,
                        dummy: h > 0 && m.current_is_new(),
                        steps: (1..=h)
                            .map(|j| StepRecord::Continuous {
                                j,
                                mass: real_mass(m, j),
                                mean: forecast_mean(m, p.signal(), j),
                            })
                            .collect(),
                        seed,
                        poisoned: None,
                        estimates: None,
                    },
                }
            }
            Engine::Lookahead {
                pending,
                frontier,
                seed,
                ..
            } => {
                let i = frontier.as_ref().map_or_else(|| pending.len() as u64 - 1, |f| f.n());
                let (f, poisoned, estimates) = match frontier {
                    Some(fr) => (fr.forecast(h), fr.is_poisoned(), fr.estimated()),
                    None => (Forecast::dummy(h), true, Vec::new()),
                };
                ForecastRecord {
                    i,
                    dummy: f.is_dummy,
                    steps: discrete_steps(&f),
                    seed: *seed,
                    poisoned: Some(poisoned),
                    estimates: Some(estimates),
                }
            }
        }
    }

    fn snapshot(&self) -> Snapshot {
        match self {
            Engine::Pipeline(p) => Snapshot::of_pipeline(p),
            Engine::Lookahead {
                params,
                pending,
                frontier,
                ..
            } => match frontier {
                Some(f) => Snapshot::of_lookahead(f, params),
                None => Snapshot::of_pending(pending, params),
            },
        }
    }
}

/// Kernel for a continuous run. Scott's rule needs every observation, so the
/// rows are buffered first in that case.
fn continuous_kernel(cfg: &RunConfig, rows: &[Row]) -> CliResult<Kernel> {
    let matrix = match &cfg.params.bandwidth {
        Bandwidth::Matrix(m) => m.clone(),
        Bandwidth::Scott => {
            let valid: Vec<&[f64]> = rows
                .iter()
                .filter_map(|r| r.as_ref().ok())
                .map(|o| o.coords.as_slice())
                .collect();
            if valid.is_empty() {
                return Err(CliError::Input("empty input".into()));
            }
            let signal = Signal::from_rows(valid)?;
            default_bandwidth(&signal)?
        }
    };
    Ok(Kernel::new(&matrix)?)
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> CliResult<()> {
    serde_json::to_writer(&mut *out, value).map_err(|e| CliError::Io(e.into()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Streams `input` through the configured model, writing one JSONL record per
/// row to `out`.
pub fn run_stream(cfg: &RunConfig, input: Box<dyn BufRead>, out: &mut dyn Write) -> CliResult<StreamSummary> {
    let rows = Observations::new(input, None)?;
    let mut engine = match &cfg.resume {
        Some(path) => Some(Engine::resume(load_snapshot(path)?, cfg)?),
        None => None,
    };
    let needs_kernel = engine.is_none() && cfg.emission == Emission::Continuous;
    let (rows, kernel): (Box<dyn Iterator<Item = Row>>, Option<Kernel>) = if needs_kernel {
        let buffered: Vec<Row> = rows.collect();
        let k = continuous_kernel(cfg, &buffered)?;
        (Box::new(buffered.into_iter()), Some(k))
    } else {
        (Box::new(rows), None)
    };

    let mut summary = StreamSummary::default();
    for row in rows {
        let pushed = match row {
            Ok(obs) => {
                if engine.is_none() {
                    engine = Some(Engine::fresh(cfg, obs.coords.len(), kernel.clone())?);
                }
                let e = engine.as_mut().expect("engine created above");
                e.push(&obs.coords).map_err(|err| RowError {
                    line: obs.line,
                    message: err.to_string(),
                })
            }
            Err(e) => Err(e),
        };
        match pushed {
            Ok(()) => {
                let rec = engine.as_ref().expect("pushed").record(cfg.horizon, cfg.seed);
                summary.observations += 1;
                summary.dummies += u64::from(rec.dummy);
                write_json(out, &rec)?;
            }
            Err(e) => {
                if cfg.strict {
                    return Err(CliError::Input(format!("line {}: {}", e.line, e.message)));
                }
                debug!("skipping line {}: {}", e.line, e.message);
                summary.errors += 1;
                write_json(
                    out,
                    &ErrorRecord {
                        line: e.line,
                        error: &e.message,
                    },
                )?;
            }
        }
    }
    out.flush()?;
    if summary.observations == 0 && cfg.resume.is_none() {
        return Err(CliError::Input("empty input".into()));
    }
    if let (Some(path), Some(e)) = (&cfg.snapshot, &engine) {
        save_snapshot(&e.snapshot(), path)?;
        info!("snapshot written to {}", path.display());
    }
    info!(
        "{} observations, {} rejected rows, {} dummy forecasts",
        summary.observations, summary.errors, summary.dummies
    );
    Ok(summary)
}
