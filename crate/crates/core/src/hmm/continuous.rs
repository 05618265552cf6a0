use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::{TransitionUndo, Transitions, DUMMY_STATE};
use crate::error::{Error, Result};
use crate::isa::{Isa, IsaStep, BOTTOM};
use crate::plugins::{Kernel, StatFunction};
use crate::signal::Signal;
use crate::state::StateId;

/// Hidden Markov model whose emissions are kernel density estimates over the
/// observations recorded on entry to each state.
///
/// State `q` emits with density `(1/m) Σ_j φ_H(x − r_j)` over its `m` entry
/// instants `j`. The dummy state emits the dummy event, which lies outside the
/// observation space; its density at any observation is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmContinuous {
    transitions: Transitions,
    mixtures: Vec<Vec<u64>>,
    kernel: Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousUndo {
    transitions: TransitionUndo,
    state: usize,
}

impl Deref for HmmContinuous {
    type Target = Transitions;

    fn deref(&self) -> &Transitions {
        &self.transitions
    }
}

impl HmmContinuous {
    pub fn from_isa(isa: &Isa, signal: &Signal, sigma: &StatFunction, kernel: Kernel) -> Result<Self> {
        if kernel.dim() != signal.dim() {
            return Err(Error::DimensionMismatch {
                expected: signal.dim(),
                got: kernel.dim(),
            });
        }
        if (signal.len() as u64) <= isa.n() {
            return Err(Error::Stale {
                model: isa.n(),
                signal: signal.len().saturating_sub(1) as u64,
            });
        }
        let transitions = Transitions::from_isa(isa, signal, sigma);
        let mixtures = (0..isa.states().len())
            .map(|q| {
                if q == BOTTOM {
                    return Vec::new();
                }
                let mut js: Vec<u64> = isa.incoming(q).flat_map(|c| c.instants.iter().copied()).collect();
                js.sort_unstable();
                js
            })
            .collect();
        Ok(Self {
            transitions,
            mixtures,
            kernel,
        })
    }

    pub fn next(&mut self, isa: &Isa, signal: &Signal) -> Result<ContinuousUndo> {
        let step = self.transitions.pending_step(isa)?;
        if (signal.len() as u64) <= isa.n() {
            return Err(Error::Stale {
                model: isa.n(),
                signal: signal.len().saturating_sub(1) as u64,
            });
        }
        self.apply(isa.current_state(), &step, signal.get(step.instant as usize))
    }

    pub(crate) fn apply(&mut self, label: &StateId, step: &IsaStep, obs: &[f64]) -> Result<ContinuousUndo> {
        let transitions = self.transitions.apply(label, step, obs)?;
        if step.new_state {
            self.mixtures.push(Vec::new());
        }
        self.mixtures[step.to].push(step.instant);
        Ok(ContinuousUndo {
            transitions,
            state: step.to,
        })
    }

    /// Reverts the most recent update. Updates must be undone in reverse order.
    pub fn undo(&mut self, u: &ContinuousUndo) {
        self.mixtures[u.state].pop();
        if u.transitions.new_state {
            self.mixtures.pop();
        }
        self.transitions.undo(&u.transitions);
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.transitions.rebuild_index();
    }

    pub fn transitions(&self) -> &Transitions {
        &self.transitions
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Mixture centers (instants) of a state; each carries weight `1/len`.
    pub fn mixture(&self, q: usize) -> &[u64] {
        &self.mixtures[q]
    }

    pub fn mixture_of(&self, state: &StateId) -> Result<&[u64]> {
        let q = self
            .index_of(state)
            .ok_or_else(|| Error::UnknownState(state.to_string()))?;
        Ok(&self.mixtures[q])
    }

    /// Emission density of state `q` at `x`.
    pub fn density(&self, q: usize, signal: &Signal, x: &[f64]) -> f64 {
        let centers = &self.mixtures[q];
        if q == DUMMY_STATE || centers.is_empty() {
            return 0.0;
        }
        let sum: f64 = centers
            .iter()
            .map(|&j| self.kernel.eval_centered(x, signal.get(j as usize)))
            .sum();
        sum / centers.len() as f64
    }

    /// Replaces the kernel, e.g. after the bandwidth was re-estimated.
    pub fn set_kernel(&mut self, kernel: Kernel) -> Result<()> {
        if kernel.dim() != self.kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.dim(),
                got: kernel.dim(),
            });
        }
        self.kernel = kernel;
        Ok(())
    }
}

pub fn isa_to_hmm_continuous(
    isa: &Isa,
    signal: &Signal,
    sigma: &StatFunction,
    kernel: Kernel,
) -> Result<HmmContinuous> {
    HmmContinuous::from_isa(isa, signal, sigma, kernel)
}

pub fn next_hmm_continuous(prev: &mut HmmContinuous, isa: &Isa, signal: &Signal) -> Result<()> {
    prev.next(isa, signal).map(|_| ())
}
