//! Run configuration: a flat JSON file merged with command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sigauto_core::{Bandwidth, GridWidth, PluginParams, Region, StatVariant, DEFAULT_SCORE_FLOOR};

use crate::bench::BenchSizes;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Run,
    Fit,
    Bench,
    Lookahead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Emission {
    #[default]
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    Stdin,
    Path(PathBuf),
}

impl Input {
    fn parse(s: &str) -> Self {
        if s == "-" {
            Input::Stdin
        } else {
            Input::Path(PathBuf::from(s))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PluginParams,
    pub mode: Mode,
    pub horizon: usize,
    pub input: Input,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub resume: Option<PathBuf>,
    pub seed: u64,
    pub emission: Emission,
    pub score_floor: f64,
    pub strict: bool,
    pub check: bool,
    pub split: Option<u64>,
    pub grid: Vec<PluginParams>,
    pub bench: BenchSizes,
}

/// Every key a config file may set. Command-line flags fill the same struct
/// and win over the file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub lambda: Option<f64>,
    pub grid_width: Option<GridWidth>,
    pub delta: Option<f64>,
    pub bandwidth: Option<Bandwidth>,
    pub region: Option<Region>,
    pub stat_variant: Option<StatVariant>,
    pub horizon: Option<usize>,
    pub input: Option<String>,
    pub output: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub resume: Option<PathBuf>,
    pub seed: Option<u64>,
    pub emission: Option<Emission>,
    pub score_floor: Option<f64>,
    pub strict: Option<bool>,
    pub check: Option<bool>,
    pub split: Option<u64>,
    /// Fit grid: either plugin key → list of values (the grid is their
    /// product) or a list of partial parameter objects.
    pub grid: Option<Value>,
    pub bench_update_sizes: Option<Vec<usize>>,
    pub bench_build_sizes: Option<Vec<usize>>,
    pub bench_samples: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl Settings {
    pub fn from_json(text: &str) -> CliResult<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Keys set in `top` replace those in `self`.
    pub fn overlay(mut self, top: Settings) -> Self {
        overlay!(self, top; lambda, grid_width, delta, bandwidth, region, stat_variant, horizon, input,
            output, snapshot, resume, seed, emission, score_floor, strict, check, split, grid,
            bench_update_sizes, bench_build_sizes, bench_samples);
        self
    }

    pub fn resolve(self, mode: Mode) -> CliResult<RunConfig> {
        let defaults = PluginParams::default();
        let horizon = self.horizon.unwrap_or(defaults.horizon);
        let params = PluginParams {
            lambda: self.lambda.unwrap_or(defaults.lambda),
            grid_width: self.grid_width.unwrap_or(defaults.grid_width),
            delta: self.delta.unwrap_or(defaults.delta),
            bandwidth: self.bandwidth.unwrap_or(defaults.bandwidth),
            horizon,
            region: self.region.or(defaults.region),
            stat_variant: self.stat_variant.unwrap_or(defaults.stat_variant),
        };
        params.validate()?;
        if mode == Mode::Lookahead && horizon == 0 {
            return Err(CliError::Config("lookahead mode needs horizon >= 1".into()));
        }
        let emission = self.emission.unwrap_or_default();
        if mode == Mode::Lookahead && emission == Emission::Continuous {
            return Err(CliError::Config("lookahead mode is discrete only".into()));
        }
        let score_floor = self.score_floor.unwrap_or(DEFAULT_SCORE_FLOOR);
        if !(score_floor > 0.0 && score_floor <= 1.0) {
            return Err(CliError::Config(format!(
                "score_floor must lie in (0, 1], got {score_floor}"
            )));
        }
        let input = Input::parse(self.input.as_deref().unwrap_or("-"));
        check_distinct(&input, &self.output, &self.snapshot)?;
        let grid = match &self.grid {
            None => vec![params.clone()],
            Some(Value::Object(axes)) => expand_grid(&params, axes)?,
            Some(Value::Array(points)) => grid_points(&params, points)?,
            Some(_) => return Err(CliError::Config("grid must be an object or a list".into())),
        };
        let mut bench = BenchSizes::default();
        if let Some(s) = self.bench_update_sizes {
            bench.update = s;
        }
        if let Some(s) = self.bench_build_sizes {
            bench.build = s;
        }
        if let Some(s) = self.bench_samples {
            bench.samples = s;
        }
        bench.validate()?;
        Ok(RunConfig {
            params,
            mode,
            horizon,
            input,
            output: self.output,
            snapshot: self.snapshot,
            resume: self.resume,
            seed: self.seed.unwrap_or(0),
            emission,
            score_floor,
            strict: self.strict.unwrap_or(false),
            check: self.check.unwrap_or(false),
            split: self.split,
            grid,
            bench,
        })
    }
}

/// Reads the optional config file and applies the flag overrides.
pub fn parse_config(path: Option<&Path>, flags: Settings, mode: Mode) -> CliResult<RunConfig> {
    let file = match path {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    file.overlay(flags).resolve(mode)
}

fn check_distinct(input: &Input, output: &Option<PathBuf>, snapshot: &Option<PathBuf>) -> CliResult<()> {
    let mut paths: Vec<&Path> = Vec::new();
    if let Input::Path(p) = input {
        paths.push(p);
    }
    paths.extend(output.as_deref());
    paths.extend(snapshot.as_deref());
    for (k, a) in paths.iter().enumerate() {
        if paths[k + 1..].contains(a) {
            return Err(CliError::Config(format!("path {} is used twice", a.display())));
        }
    }
    Ok(())
}

const GRID_KEYS: [&str; 6] = ["lambda", "grid_width", "delta", "bandwidth", "region", "stat_variant"];

/// Cartesian product of the grid axes over the base parameters, first axis
/// varying slowest.
fn expand_grid(base: &PluginParams, axes: &Map<String, Value>) -> CliResult<Vec<PluginParams>> {
    let base = serde_json::to_value(base).expect("parameters serialize");
    let mut points = vec![base];
    for (key, values) in axes {
        if !GRID_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("grid key {key:?} is not a plugin parameter")));
        }
        let values = values
            .as_array()
            .ok_or_else(|| CliError::Config(format!("grid axis {key:?} must be a list")))?;
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut p = p.clone();
                    p[key.as_str()] = v.clone();
                    p
                })
            })
            .collect();
    }
    finish_grid(points)
}

/// Explicit grid points, each overriding some keys of the base parameters.
fn grid_points(base: &PluginParams, points: &[Value]) -> CliResult<Vec<PluginParams>> {
    let base = serde_json::to_value(base).expect("parameters serialize");
    let mut out = Vec::with_capacity(points.len());
    for point in points {
        let Value::Object(keys) = point else {
            return Err(CliError::Config("grid points must be objects".into()));
        };
        let mut p = base.clone();
        for (key, v) in keys {
            if !GRID_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("grid key {key:?} is not a plugin parameter")));
            }
            p[key.as_str()] = v.clone();
        }
        out.push(p);
    }
    finish_grid(out)
}

fn finish_grid(points: Vec<Value>) -> CliResult<Vec<PluginParams>> {
    if points.is_empty() {
        return Err(CliError::Config("fit grid is empty".into()));
    }
    points
        .into_iter()
        .map(|v| {
            let p: PluginParams = serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))?;
            p.validate()?;
            Ok(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let c = Settings::from_json("").unwrap().resolve(Mode::Run).unwrap();
        assert_eq!(c.params, PluginParams::default());
        assert_eq!(c.horizon, 1);
        assert_eq!(c.emission, Emission::Discrete);
        assert_eq!(c.input, Input::Stdin);
        assert_eq!(c.grid, vec![PluginParams::default()]);
        let c2 = Settings::from_json("{}").unwrap().resolve(Mode::Run).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn out_of_range_and_unknown_keys() {
        let err = Settings::from_json(r#"{"delta": 1.0}"#)
            .unwrap()
            .resolve(Mode::Run)
            .unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(matches!(
            Settings::from_json(r#"{"colour": 1}"#),
            Err(CliError::Config(_))
        ));
        let err = Settings::from_json(r#"{"horizon": 0}"#)
            .unwrap()
            .resolve(Mode::Lookahead)
            .unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn flags_win_over_file() {
        let file = Settings::from_json(r#"{"horizon": 2, "lambda": 0.5}"#).unwrap();
        let flags = Settings {
            horizon: Some(4),
            ..Default::default()
        };
        let c = file.overlay(flags).resolve(Mode::Run).unwrap();
        assert_eq!(c.horizon, 4);
        assert_eq!(c.params.lambda, 0.5);
    }

    #[test]
    fn paths_must_differ() {
        let s = Settings::from_json(r#"{"output": "a.jsonl", "snapshot": "a.jsonl"}"#).unwrap();
        assert!(matches!(s.resolve(Mode::Run), Err(CliError::Config(_))));
    }

    #[test]
    fn grid_is_a_product() {
        let s = Settings::from_json(r#"{"grid": {"delta": [0.0, 0.9], "lambda": [1.0, 0.5, 0.25]}}"#).unwrap();
        let c = s.resolve(Mode::Fit).unwrap();
        assert_eq!(c.grid.len(), 6);
        assert_eq!((c.grid[0].delta, c.grid[0].lambda), (0.0, 1.0));
        assert_eq!((c.grid[5].delta, c.grid[5].lambda), (0.9, 0.25));
        let bad = Settings::from_json(r#"{"grid": {"seed": [1]}}"#).unwrap();
        assert!(bad.resolve(Mode::Fit).is_err());
        let empty = Settings::from_json(r#"{"grid": {"delta": []}}"#).unwrap();
        assert!(empty.resolve(Mode::Fit).is_err());
        let listed = Settings::from_json(r#"{"grid": [{}, {"delta": 0.9, "stat_variant": "discounted_sum"}]}"#)
            .unwrap()
            .resolve(Mode::Fit)
            .unwrap();
        assert_eq!(listed.grid[0], PluginParams::default());
        assert_eq!(listed.grid[1].stat_variant, StatVariant::DiscountedSum);
        assert!(Settings::from_json(r#"{"grid": []}"#)
            .unwrap()
            .resolve(Mode::Fit)
            .is_err());
    }
}
