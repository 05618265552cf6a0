//! Instantaneous signal automata and their inductive construction.
//!
//! Slot 0 of the state table always holds [`StateId::Bottom`]; the remaining
//! slots hold classifier labels in order of first appearance. The instants
//! matrix is stored as a list of non-empty cells plus adjacency lists, so that
//! every update touches exactly one cell.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plugins::StepClassifier;
use crate::signal::Signal;
use crate::state::StateId;

pub const BOTTOM: usize = 0;

/// A non-empty cell `Θ(from, to)` of the instants matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub from: usize,
    pub to: usize,
    pub instants: Vec<u64>,
}

/// What one construction step changed; enough to undo it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsaStep {
    pub instant: u64,
    pub from: usize,
    pub to: usize,
    pub cell: usize,
    pub new_cell: bool,
    pub new_state: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonStats {
    pub n: u64,
    pub distinct_states: usize,
    pub new_state_instants: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Isa {
    states: Vec<StateId>,
    cells: Vec<Cell>,
    current: usize,
    n: u64,
    new_state_instants: Vec<u64>,
    #[serde(skip)]
    state_index: HashMap<StateId, usize>,
    #[serde(skip)]
    cell_index: HashMap<(usize, usize), usize>,
    #[serde(skip)]
    outgoing: Vec<Vec<usize>>,
    #[serde(skip)]
    incoming: Vec<Vec<usize>>,
}

impl PartialEq for Isa {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.cells == other.cells
            && self.current == other.current
            && self.n == other.n
            && self.new_state_instants == other.new_state_instants
    }
}

impl Isa {
    /// `S_0` for an already classified first state.
    pub fn start(first: StateId) -> Result<(Self, IsaStep)> {
        check_label(&first)?;
        let mut isa = Isa {
            states: vec![StateId::Bottom],
            cells: Vec::new(),
            current: BOTTOM,
            n: 0,
            new_state_instants: Vec::new(),
            state_index: HashMap::from([(StateId::Bottom, BOTTOM)]),
            cell_index: HashMap::new(),
            outgoing: vec![Vec::new()],
            incoming: vec![Vec::new()],
        };
        let step = isa.apply(first, 0);
        Ok((isa, step))
    }

    /// `S_0` from the first observation.
    pub fn init(r0: &[f64], classifier: &mut impl StepClassifier) -> Result<Self> {
        let label = classifier.step(r0)?;
        Ok(Self::start(label)?.0)
    }

    /// From-scratch construction over the whole signal.
    pub fn build(signal: &Signal, classifier: &mut impl StepClassifier) -> Result<Self> {
        if signal.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut isa = Self::init(signal.get(0), classifier)?;
        for i in 1..signal.len() {
            let label = classifier.step(signal.get(i))?;
            isa.push_state(label)?;
        }
        Ok(isa)
    }

    /// One inductive step: classifies `r_{n+1}` (the last observation of
    /// `signal`) and moves the automaton to instant `n + 1`.
    pub fn next(&mut self, signal: &Signal, classifier: &mut impl StepClassifier) -> Result<IsaStep> {
        let expected = self.n as usize + 2;
        if signal.len() != expected {
            return Err(Error::Stale {
                model: self.n,
                signal: signal.len().saturating_sub(1) as u64,
            });
        }
        let label = classifier.step(signal.get(expected - 1))?;
        self.push_state(label)
    }

    /// Moves to instant `n + 1` with the given current state.
    pub fn push_state(&mut self, label: StateId) -> Result<IsaStep> {
        check_label(&label)?;
        let instant = self.n + 1;
        Ok(self.apply(label, instant))
    }

    fn apply(&mut self, label: StateId, instant: u64) -> IsaStep {
        let from = self.current;
        let (to, new_state) = match self.state_index.get(&label) {
            Some(&q) => (q, false),
            None => {
                let q = self.states.len();
                self.state_index.insert(label.clone(), q);
                self.states.push(label);
                self.outgoing.push(Vec::new());
                self.incoming.push(Vec::new());
                self.new_state_instants.push(instant);
                (q, true)
            }
        };
        let (cell, new_cell) = match self.cell_index.get(&(from, to)) {
            Some(&c) => {
                self.cells[c].instants.push(instant);
                (c, false)
            }
            None => {
                let c = self.cells.len();
                self.cells.push(Cell {
                    from,
                    to,
                    instants: vec![instant],
                });
                self.cell_index.insert((from, to), c);
                self.outgoing[from].push(c);
                self.incoming[to].push(c);
                (c, true)
            }
        };
        self.current = to;
        self.n = instant;
        IsaStep {
            instant,
            from,
            to,
            cell,
            new_cell,
            new_state,
        }
    }

    /// Reverts the most recent step. Steps must be undone in reverse order.
    pub fn undo(&mut self, step: &IsaStep) {
        debug_assert_eq!(step.instant, self.n);
        debug_assert!(step.instant > 0, "the initial step cannot be undone");
        if step.new_cell {
            let cell = self.cells.pop().expect("undo of a missing cell");
            self.cell_index.remove(&(cell.from, cell.to));
            self.outgoing[cell.from].pop();
            self.incoming[cell.to].pop();
        } else {
            self.cells[step.cell].instants.pop();
        }
        if step.new_state {
            let label = self.states.pop().expect("undo of a missing state");
            self.state_index.remove(&label);
            self.outgoing.pop();
            self.incoming.pop();
            self.new_state_instants.pop();
        }
        self.current = step.from;
        self.n = step.instant - 1;
    }

    pub(crate) fn rebuild_indexes(&mut self) -> Result<()> {
        self.state_index = self.states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        if self.state_index.len() != self.states.len() {
            return Err(Error::Snapshot("duplicate automaton states".into()));
        }
        self.outgoing = vec![Vec::new(); self.states.len()];
        self.incoming = vec![Vec::new(); self.states.len()];
        self.cell_index.clear();
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.from >= self.states.len() || cell.to >= self.states.len() {
                return Err(Error::Snapshot("cell refers to an unknown state".into()));
            }
            self.cell_index.insert((cell.from, cell.to), c);
            self.outgoing[cell.from].push(c);
            self.incoming[cell.to].push(c);
        }
        if self.current >= self.states.len() {
            return Err(Error::Snapshot("current state out of range".into()));
        }
        Ok(())
    }

    /// Latest instant.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// All states, `Bottom` first.
    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> &StateId {
        &self.states[idx]
    }

    pub fn index_of(&self, state: &StateId) -> Option<usize> {
        self.state_index.get(state).copied()
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn current_state(&self) -> &StateId {
        &self.states[self.current]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// `Θ(p, q)`, or `None` if the cell is empty.
    pub fn cell(&self, from: &StateId, to: &StateId) -> Option<&[u64]> {
        let key = (self.index_of(from)?, self.index_of(to)?);
        self.cell_index.get(&key).map(|&c| self.cells[c].instants.as_slice())
    }

    pub fn outgoing(&self, state: usize) -> impl Iterator<Item = &Cell> + '_ {
        self.outgoing[state].iter().map(|&c| &self.cells[c])
    }

    pub fn incoming(&self, state: usize) -> impl Iterator<Item = &Cell> + '_ {
        self.incoming[state].iter().map(|&c| &self.cells[c])
    }

    /// Whether the current state has never been left.
    pub fn is_new_state(&self) -> bool {
        self.outgoing[self.current].is_empty()
    }

    pub fn stats(&self) -> AutomatonStats {
        AutomatonStats {
            n: self.n,
            distinct_states: self.states.len() - 1,
            new_state_instants: self.new_state_instants.clone(),
        }
    }
}

fn check_label(label: &StateId) -> Result<()> {
    if label.is_real() {
        Ok(())
    } else {
        Err(Error::RejectedInput(format!("{label} is not a classifier label")))
    }
}

/// Free-function forms of the construction operations.
pub fn init_isa(r0: &[f64], classifier: &mut impl StepClassifier) -> Result<Isa> {
    Isa::init(r0, classifier)
}

pub fn next_isa(isa: &mut Isa, signal: &Signal, classifier: &mut impl StepClassifier) -> Result<IsaStep> {
    isa.next(signal, classifier)
}

pub fn build_isa(signal: &Signal, classifier: &mut impl StepClassifier) -> Result<Isa> {
    Isa::build(signal, classifier)
}

pub fn is_new_state(isa: &Isa) -> bool {
    isa.is_new_state()
}

pub fn automaton_stats(isa: &Isa) -> AutomatonStats {
    isa.stats()
}
