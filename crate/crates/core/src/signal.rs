//! Append-only storage for the observed prefix of a time series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single d-dimensional measurement with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation(Vec<f64>);

impl Observation {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_coords(&coords)?;
        Ok(Self(coords))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Observation {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_coords(coords: &[f64]) -> Result<()> {
    if coords.is_empty() {
        return Err(Error::RejectedInput("observation has no coordinates".into()));
    }
    if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
        return Err(Error::RejectedInput(format!("non-finite coordinate {x}")));
    }
    Ok(())
}

/// The signal `r_0 .. r_n`, stored flat so that `get(i)` is a slice into one buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    dim: usize,
    data: Vec<f64>,
}

impl Signal {
    pub fn new(dim: usize) -> Self {
        Self { dim, data: Vec::new() }
    }

    /// Builds a signal from a list of observations; all must share one dimension.
    pub fn from_rows<I, R>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let mut rows = rows.into_iter().peekable();
        let dim = match rows.peek() {
            Some(r) => r.as_ref().len(),
            None => return Err(Error::EmptyInput),
        };
        let mut signal = Self::new(dim);
        for r in rows {
            signal.push(r.as_ref())?;
        }
        Ok(signal)
    }

    /// One-dimensional convenience constructor.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_rows(values.iter().map(std::slice::from_ref))
    }

    pub fn push(&mut self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: coords.len(),
            });
        }
        check_coords(coords)?;
        self.data.extend_from_slice(coords);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Latest instant `n`, if any observation has arrived.
    pub fn last_instant(&self) -> Option<u64> {
        self.len().checked_sub(1).map(|n| n as u64)
    }

    /// Observation at instant `i`. Panics when `i` is out of range.
    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// The prefix `r_0 .. r_end` (inclusive).
    pub fn prefix(&self, end: usize) -> Signal {
        Signal {
            dim: self.dim,
            data: self.data[..(end + 1) * self.dim].to_vec(),
        }
    }
}
