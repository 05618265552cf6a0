//! Classifiers mapping signal prefixes to automaton states.

use serde::{Deserialize, Serialize};

use super::cluster::grid_cell;
use super::params::{GridWidth, PluginParams};
use crate::error::{Error, Result};
use crate::signal::{check_coords, Signal};
use crate::state::{CellId, StateId};

/// A classifier with a constant-time precursor: it consumes one observation at a
/// time and emits the label of the prefix seen so far.
pub trait StepClassifier {
    fn step(&mut self, obs: &[f64]) -> Result<StateId>;
}

/// Exponential moving average quantized on a grid.
///
/// The handle keeps the unquantized average as its running summary; the emitted
/// label is the grid cell of that average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmaClassifier {
    lambda: f64,
    grid_width: GridWidth,
    ema: Option<Vec<f64>>,
    consumed: u64,
}

impl EmaClassifier {
    pub fn new(params: &PluginParams) -> Self {
        Self {
            lambda: params.lambda,
            grid_width: params.grid_width.clone(),
            ema: None,
            consumed: 0,
        }
    }

    /// Number of observations consumed so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn summary(&self) -> Option<&[f64]> {
        self.ema.as_deref()
    }

    fn label(&self) -> StateId {
        let ema = self.ema.as_deref().expect("label requested before any observation");
        StateId::Cell(grid_cell(ema, &self.grid_width))
    }
}

impl StepClassifier for EmaClassifier {
    fn step(&mut self, obs: &[f64]) -> Result<StateId> {
        check_coords(obs)?;
        match &mut self.ema {
            None => {
                self.grid_width.check_dim(obs.len())?;
                self.ema = Some(obs.to_vec());
            }
            Some(ema) => {
                if ema.len() != obs.len() {
                    return Err(Error::DimensionMismatch {
                        expected: ema.len(),
                        got: obs.len(),
                    });
                }
                for (e, x) in ema.iter_mut().zip(obs) {
                    *e = ema_update(self.lambda, *e, *x);
                }
            }
        }
        self.consumed += 1;
        Ok(self.label())
    }
}

#[inline]
fn ema_update(lambda: f64, prev: f64, x: f64) -> f64 {
    lambda * x + (1.0 - lambda) * prev
}

/// Classifies a whole signal prefix from scratch.
pub fn classify_full(params: &PluginParams, signal: &Signal) -> Result<StateId> {
    let mut rows = signal.iter();
    let first = rows.next().ok_or(Error::EmptyInput)?;
    check_coords(first)?;
    params.grid_width.check_dim(first.len())?;
    let mut ema = first.to_vec();
    for r in rows {
        check_coords(r)?;
        for (e, x) in ema.iter_mut().zip(r) {
            *e = ema_update(params.lambda, *e, *x);
        }
    }
    Ok(StateId::Cell(grid_cell(&ema, &params.grid_width)))
}

/// Lookahead classifier: the label of instant `i` is the word of grid cells of
/// the `h` observations following it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookaheadClassifier {
    horizon: usize,
    grid_width: GridWidth,
}

impl LookaheadClassifier {
    pub fn new(params: &PluginParams) -> Result<Self> {
        if params.horizon == 0 {
            return Err(Error::Config("lookahead needs horizon >= 1".into()));
        }
        Ok(Self {
            horizon: params.horizon,
            grid_width: params.grid_width.clone(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn grid_width(&self) -> &GridWidth {
        &self.grid_width
    }

    /// Word for a future window given as observations.
    pub fn classify<R: AsRef<[f64]>>(&self, future: &[R]) -> Result<StateId> {
        if future.len() != self.horizon {
            return Err(Error::Arity {
                expected: self.horizon,
                got: future.len(),
            });
        }
        let mut word = Vec::with_capacity(self.horizon);
        for r in future {
            check_coords(r.as_ref())?;
            word.push(grid_cell(r.as_ref(), &self.grid_width));
        }
        Ok(StateId::Word(word))
    }

    /// Word for a future window whose cells are already known.
    pub fn word_of_cells(&self, cells: Vec<CellId>) -> Result<StateId> {
        if cells.len() != self.horizon {
            return Err(Error::Arity {
                expected: self.horizon,
                got: cells.len(),
            });
        }
        Ok(StateId::Word(cells))
    }
}

/// Lookahead classification of `r_{≤i}` given the `h` following observations.
/// The past is not consulted by the word classifier.
pub fn classify_lookahead<R: AsRef<[f64]>>(params: &PluginParams, _signal: &Signal, future: &[R]) -> Result<StateId> {
    LookaheadClassifier::new(params)?.classify(future)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(lambda: f64, w: f64) -> PluginParams {
        PluginParams {
            lambda,
            grid_width: GridWidth::Uniform(w),
            ..Default::default()
        }
    }

    fn cell(k: i64) -> StateId {
        StateId::Cell(CellId::new(&[k]))
    }

    #[test]
    fn full_classification_examples() {
        let s = Signal::from_scalars(&[1.0, 1.0, 5.0]).unwrap();
        assert_eq!(classify_full(&params(1.0, 1.0), &s).unwrap(), cell(5));
        let s = Signal::from_scalars(&[1.0, 3.0]).unwrap();
        assert_eq!(classify_full(&params(0.5, 1.0), &s).unwrap(), cell(2));
        let s = Signal::from_scalars(&[1.3]).unwrap();
        assert_eq!(classify_full(&params(0.5, 1.0), &s).unwrap(), cell(1));
    }

    #[test]
    fn step_sequence_on_worked_example() {
        let mut c = EmaClassifier::new(&params(1.0, 1.0));
        let labels: Vec<_> = [1.0, 1.0, 5.0, 1.0, 5.0]
            .iter()
            .map(|x| c.step(&[*x]).unwrap().to_string())
            .collect();
        assert_eq!(labels, ["1", "1", "5", "1", "5"]);
        assert_eq!(c.consumed(), 5);
    }

    #[test]
    fn unit_lambda_depends_only_on_observation() {
        let mut a = EmaClassifier::new(&params(1.0, 1.0));
        let mut b = EmaClassifier::new(&params(1.0, 1.0));
        a.step(&[100.0]).unwrap();
        assert_eq!(a.step(&[2.5]).unwrap(), b.step(&[2.5]).unwrap());
    }

    #[test]
    fn rejects_nan() {
        let mut c = EmaClassifier::new(&params(1.0, 1.0));
        assert!(matches!(c.step(&[f64::NAN]), Err(Error::RejectedInput(_))));
    }

    #[test]
    fn lookahead_words() {
        let p = PluginParams {
            horizon: 2,
            ..Default::default()
        };
        let s = Signal::from_scalars(&[0.0]).unwrap();
        let w = classify_lookahead(&p, &s, &[[5.0], [1.0]]).unwrap();
        assert_eq!(w.to_string(), "5|1");
        let p1 = PluginParams::default();
        assert_eq!(classify_lookahead(&p1, &s, &[[5.0]]).unwrap().to_string(), "5");
        assert!(matches!(
            classify_lookahead(&p, &s, &[[5.0]]),
            Err(Error::Arity { expected: 2, got: 1 })
        ));
    }

    proptest! {
        #[test]
        fn precursor_matches_full(
            xs in prop::collection::vec(-50.0f64..50.0, 1..60),
            lambda in 0.05f64..=1.0,
            w in 0.1f64..5.0,
        ) {
            let p = params(lambda, w);
            let mut c = EmaClassifier::new(&p);
            let s = Signal::from_scalars(&xs).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                let step = c.step(&[x]).unwrap();
                prop_assert_eq!(step, classify_full(&p, &s.prefix(i)).unwrap());
            }
        }
    }
}
