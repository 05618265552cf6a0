//! Identifiers for automaton states and observable events.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Index of a grid cell, one integer per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub SmallVec<[i64; 4]>);

impl CellId {
    pub fn new(indices: &[i64]) -> Self {
        Self(SmallVec::from_slice(indices))
    }

    pub fn indices(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [k] => write!(f, "{k}"),
            ks => {
                f.write_str("(")?;
                for (i, k) in ks.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A state of a signal automaton or of the derived model.
///
/// `Bottom` is the artificial source state of every automaton and `Dummy` the
/// absorbing sink of every model; no classifier ever produces either.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateId {
    Bottom,
    Dummy,
    /// Label of the quantizing classifier.
    Cell(CellId),
    /// Label of the lookahead classifier: the cluster word of the future window.
    Word(Vec<CellId>),
}

impl StateId {
    pub fn is_real(&self) -> bool {
        matches!(self, StateId::Cell(_) | StateId::Word(_))
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateId::Bottom => f.write_str("⊥"),
            StateId::Dummy => f.write_str("dummy"),
            StateId::Cell(c) => c.fmt(f),
            StateId::Word(w) => {
                for (i, c) in w.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    c.fmt(f)?;
                }
                Ok(())
            }
        }
    }
}

/// An observable event: a cluster of the observation space, or the dummy event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventId {
    Dummy,
    Cluster(CellId),
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventId::Dummy => f.write_str("dummy"),
            EventId::Cluster(c) => c.fmt(f),
        }
    }
}
