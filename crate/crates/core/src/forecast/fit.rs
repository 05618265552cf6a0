//! Parameter fitting by one-step-ahead held-out log-likelihood.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forecast_slots;
use crate::error::{Error, Result};
use crate::pipeline::Pipeline;
use crate::plugins::PluginParams;
use crate::signal::Signal;

/// Probability floor applied to zero-probability outcomes when scoring.
pub const DEFAULT_SCORE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub grid: Vec<PluginParams>,
    pub scores: Vec<f64>,
    /// Index into `grid` of the best-scoring parameters.
    pub best: usize,
    pub split: u64,
}

impl FitReport {
    pub fn best_params(&self) -> &PluginParams {
        &self.grid[self.best]
    }
}

/// Mean of `log f_{i,1}(cluster of r_{i+1})` over `i ∈ [from, to)`.
pub fn score(params: &PluginParams, signal: &Signal, from: u64, to: u64, eps: f64) -> Result<f64> {
    let n = signal.len().saturating_sub(1) as u64;
    if signal.is_empty() || from >= to || to > n {
        return Err(Error::WindowOutOfRange { from, to, n });
    }
    check_floor(eps)?;
    let mut pipeline = Pipeline::discrete(params.clone(), signal.dim())?;
    let mut total = 0.0;
    for i in 0..to as usize {
        pipeline.push(signal.get(i))?;
        if (i as u64) < from {
            continue;
        }
        let hmm = pipeline.hmm().expect("discrete pipeline");
        let p = match hmm.slot_of_observation(signal.get(i + 1))? {
            Some(slot) => forecast_slots(hmm, 1)[0][slot],
            None => 0.0,
        };
        total += p.max(eps).ln();
    }
    Ok(total / (to - from) as f64)
}

/// Scores every grid point on `[split, n)` and keeps the best; ties go to the
/// earliest grid point.
pub fn fit(grid: &[PluginParams], signal: &Signal, split: u64, eps: f64) -> Result<FitReport> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let n = signal.len().saturating_sub(1) as u64;
    if split == 0 || split >= n {
        return Err(Error::WindowOutOfRange { from: split, to: n, n });
    }
    let scores = grid
        .par_iter()
        .map(|p| score(p, signal, split, n, eps))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (k, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = k;
        }
    }
    Ok(FitReport {
        grid: grid.to_vec(),
        scores,
        best,
        split,
    })
}

fn check_floor(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("score floor must lie in (0, 1], got {eps}")))
    }
}
