//! Hidden Markov model semantics of signal automata.
//!
//! Model state slots mirror automaton state slots: slot `k > 0` is the same
//! label in both, while slot 0 holds the automaton's `Bottom` and the model's
//! absorbing `Dummy` state.

mod continuous;
mod discrete;
pub mod sparse;

use serde::{Deserialize, Serialize};

pub use continuous::{isa_to_hmm_continuous, next_hmm_continuous, HmmContinuous};
pub use discrete::{isa_to_hmm, next_hmm, Hmm, HmmUndo, DUMMY_EVENT};
pub use sparse::{SparseRow, SparseStochasticMatrix};

use crate::error::{Error, Result};
use crate::isa::{Isa, IsaStep, BOTTOM};
use crate::plugins::{StatAccumulator, StatFunction};
use crate::signal::Signal;
use crate::state::StateId;

pub const DUMMY_STATE: usize = 0;

/// States, initial distribution and transition matrix shared by the discrete
/// and continuous models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transitions {
    sigma: StatFunction,
    states: Vec<StateId>,
    current: usize,
    n: u64,
    matrix: SparseStochasticMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct TransitionUndo {
    entry: Option<sparse::EntryUndo>,
    new_state: bool,
    current: usize,
    n: u64,
}

impl Transitions {
    fn from_isa(isa: &Isa, signal: &Signal, sigma: &StatFunction) -> Self {
        let mut states = isa.states().to_vec();
        states[DUMMY_STATE] = StateId::Dummy;
        let rows = (0..states.len())
            .map(|p| {
                if p == BOTTOM {
                    return SparseRow::default();
                }
                let mut row = SparseRow::default();
                for cell in isa.outgoing(p) {
                    let acc = StatAccumulator::from_instants(sigma, signal, &cell.instants);
                    row.total.merge(sigma, &acc);
                    row.entries.push((cell.to, acc));
                }
                row
            })
            .collect();
        Self {
            sigma: sigma.clone(),
            states,
            current: isa.current(),
            n: isa.n(),
            matrix: SparseStochasticMatrix::from_rows(rows, DUMMY_STATE),
        }
    }

    /// Derives the step that took `isa` from this model's instant to its own.
    fn pending_step(&self, isa: &Isa) -> Result<IsaStep> {
        if isa.n() != self.n + 1 {
            return Err(Error::Stale {
                model: self.n,
                signal: isa.n(),
            });
        }
        let new_state = isa.states().len() == self.states.len() + 1;
        if !new_state && isa.states().len() != self.states.len() {
            return Err(Error::Stale {
                model: self.n,
                signal: isa.n(),
            });
        }
        Ok(IsaStep {
            instant: isa.n(),
            from: self.current,
            to: isa.current(),
            cell: usize::MAX,
            new_cell: false,
            new_state,
        })
    }

    fn apply(&mut self, label: &StateId, step: &IsaStep, obs: &[f64]) -> Result<TransitionUndo> {
        let undo_base = TransitionUndo {
            entry: None,
            new_state: step.new_state,
            current: self.current,
            n: self.n,
        };
        if step.new_state {
            debug_assert_eq!(step.to, self.states.len());
            self.states.push(label.clone());
            self.matrix.push_row();
        }
        let entry = if step.from != BOTTOM {
            Some(self.matrix.push(step.from, step.to, &self.sigma, obs, step.instant)?)
        } else {
            None
        };
        self.current = step.to;
        self.n = step.instant;
        Ok(TransitionUndo { entry, ..undo_base })
    }

    fn undo(&mut self, u: &TransitionUndo) {
        if let Some(e) = &u.entry {
            self.matrix.undo(e);
        }
        if u.new_state {
            self.states.pop();
            self.matrix.pop_row();
        }
        self.current = u.current;
        self.n = u.n;
    }

    pub fn sigma(&self) -> &StatFunction {
        &self.sigma
    }

    /// Latest instant the model reflects.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// All model states, `Dummy` first.
    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn current(&self) -> usize {
        self.current
    }

    /// The state carrying all initial mass.
    pub fn alpha(&self) -> &StateId {
        &self.states[self.current]
    }

    pub fn matrix(&self) -> &SparseStochasticMatrix {
        &self.matrix
    }

    pub fn index_of(&self, state: &StateId) -> Option<usize> {
        match state {
            StateId::Dummy => Some(DUMMY_STATE),
            StateId::Bottom => None,
            s => self.states.iter().position(|x| x == s),
        }
    }

    /// Whether the current state has no outgoing transitions yet.
    pub fn current_is_new(&self) -> bool {
        self.current != DUMMY_STATE && self.matrix.row(self.current).entries.is_empty()
    }

    pub fn for_each_transition(&self, p: usize, visit: impl FnMut(usize, f64)) {
        self.matrix.for_each_weight(p, &self.sigma, self.n, visit)
    }

    pub fn transition_row_by_index(&self, p: usize) -> Vec<(usize, f64)> {
        self.matrix.weights(p, &self.sigma, self.n)
    }

    /// Dense view of one transition row, keyed by state.
    pub fn transition_row(&self, state: &StateId) -> Result<Vec<(StateId, f64)>> {
        let p = self
            .index_of(state)
            .ok_or_else(|| Error::UnknownState(state.to_string()))?;
        Ok(self
            .transition_row_by_index(p)
            .into_iter()
            .map(|(q, w)| (self.states[q].clone(), w))
            .collect())
    }

    pub fn transition(&self, from: &StateId, to: &StateId) -> Result<f64> {
        Ok(self
            .transition_row(from)?
            .into_iter()
            .find(|(q, _)| q == to)
            .map_or(0.0, |(_, w)| w))
    }

    /// One step of the state distribution: `v ↦ v·T`.
    pub fn propagate(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.states.len()];
        for (p, &mass) in v.iter().enumerate() {
            if mass != 0.0 {
                self.for_each_transition(p, |q, w| out[q] += mass * w);
            }
        }
        out
    }

    /// Indicator vector of the current state.
    pub fn initial(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.states.len()];
        v[self.current] = 1.0;
        v
    }

    /// `α·T^j` by repeated row-vector products.
    pub fn state_distribution(&self, j: usize) -> Vec<f64> {
        let mut v = self.initial();
        for _ in 0..j {
            v = self.propagate(&v);
        }
        v
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.matrix.rebuild_index();
    }
}
