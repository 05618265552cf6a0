use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::sparse::{EntryUndo, SparseRow, SparseStochasticMatrix};
use super::{TransitionUndo, Transitions};
use crate::error::{Error, Result};
use crate::isa::{Isa, IsaStep, BOTTOM};
use crate::plugins::{Clusterer, GridWidth, StatAccumulator, StatFunction};
use crate::signal::Signal;
use crate::state::{CellId, EventId, StateId};

/// Event slot of the dummy event; cluster `k` occupies slot `k + 1`.
pub const DUMMY_EVENT: usize = 0;

/// Hidden Markov model with clustered (discrete) emissions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hmm {
    transitions: Transitions,
    rho: StatFunction,
    clusterer: Clusterer,
    emissions: SparseStochasticMatrix,
}

/// Everything one update changed, for rolling it back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmUndo {
    transitions: TransitionUndo,
    emission: EntryUndo,
    new_cluster: bool,
}

impl Deref for Hmm {
    type Target = Transitions;

    fn deref(&self) -> &Transitions {
        &self.transitions
    }
}

impl Hmm {
    /// From-scratch conversion of an automaton into its model. Linear in `n`.
    pub fn from_isa(
        isa: &Isa,
        signal: &Signal,
        sigma: &StatFunction,
        rho: &StatFunction,
        width: &GridWidth,
    ) -> Result<Self> {
        sigma.check_compatible(rho)?;
        check_signal(isa, signal)?;
        let transitions = Transitions::from_isa(isa, signal, sigma);

        let mut clusterer = Clusterer::new(width.clone());
        let mut event_of = Vec::with_capacity(isa.n() as usize + 1);
        for i in 0..=isa.n() as usize {
            let (_, pos, _) = clusterer.cluster_of(signal.get(i))?;
            event_of.push(pos + 1);
        }

        let mut rows = Vec::with_capacity(isa.states().len());
        for q in 0..isa.states().len() {
            let mut row = SparseRow::default();
            if q != BOTTOM {
                let mut instants: Vec<u64> = isa.incoming(q).flat_map(|c| c.instants.iter().copied()).collect();
                instants.sort_unstable();
                // Group by event in order of first entry into q.
                let mut groups: Vec<(usize, Vec<u64>)> = Vec::new();
                for j in instants {
                    let e = event_of[j as usize];
                    match groups.iter_mut().find(|(g, _)| *g == e) {
                        Some((_, v)) => v.push(j),
                        None => groups.push((e, vec![j])),
                    }
                }
                for (e, js) in groups {
                    let acc = StatAccumulator::from_instants(rho, signal, &js);
                    row.total.merge(rho, &acc);
                    row.entries.push((e, acc));
                }
            }
            rows.push(row);
        }

        Ok(Self {
            transitions,
            rho: rho.clone(),
            clusterer,
            emissions: SparseStochasticMatrix::from_rows(rows, DUMMY_EVENT),
        })
    }

    /// Brings the model from `S_{n−1}` to `S_n`, touching only the entries
    /// affected by instant `n`.
    pub fn next(&mut self, isa: &Isa, signal: &Signal) -> Result<HmmUndo> {
        let step = self.transitions.pending_step(isa)?;
        check_signal(isa, signal)?;
        self.apply(isa.current_state(), &step, signal.get(step.instant as usize))
    }

    /// Applies one automaton step whose instant observed `obs`.
    pub(crate) fn apply(&mut self, label: &StateId, step: &IsaStep, obs: &[f64]) -> Result<HmmUndo> {
        let (_, pos, new_cluster) = self.clusterer.cluster_of(obs)?;
        let transitions = match self.transitions.apply(label, step, obs) {
            Ok(t) => t,
            Err(e) => {
                if new_cluster {
                    self.clusterer.unregister_last();
                }
                return Err(e);
            }
        };
        if step.new_state {
            self.emissions.push_row();
        }
        let emission = self.emissions.push(step.to, pos + 1, &self.rho, obs, step.instant)?;
        Ok(HmmUndo {
            transitions,
            emission,
            new_cluster,
        })
    }

    /// Reverts the most recent update. Updates must be undone in reverse order.
    pub fn undo(&mut self, u: &HmmUndo) {
        self.emissions.undo(&u.emission);
        if u.transitions.new_state {
            self.emissions.pop_row();
        }
        self.transitions.undo(&u.transitions);
        if u.new_cluster {
            self.clusterer.unregister_last();
        }
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.transitions.rebuild_index();
        self.emissions.rebuild_index();
        self.clusterer.rebuild_index();
    }

    pub fn transitions(&self) -> &Transitions {
        &self.transitions
    }

    pub fn rho(&self) -> &StatFunction {
        &self.rho
    }

    pub fn clusterer(&self) -> &Clusterer {
        &self.clusterer
    }

    pub fn emission_matrix(&self) -> &SparseStochasticMatrix {
        &self.emissions
    }

    /// Events in slot order: the dummy event, then clusters by first appearance.
    pub fn events(&self) -> Vec<EventId> {
        std::iter::once(EventId::Dummy)
            .chain(self.clusterer.observed().iter().cloned().map(EventId::Cluster))
            .collect()
    }

    pub fn event(&self, slot: usize) -> EventId {
        if slot == DUMMY_EVENT {
            EventId::Dummy
        } else {
            EventId::Cluster(self.clusterer.observed()[slot - 1].clone())
        }
    }

    pub fn event_slot(&self, event: &EventId) -> Option<usize> {
        match event {
            EventId::Dummy => Some(DUMMY_EVENT),
            EventId::Cluster(c) => self.clusterer.position(c).map(|p| p + 1),
        }
    }

    /// Slot of the cluster containing `obs`, if that cluster has been observed.
    pub fn slot_of_observation(&self, obs: &[f64]) -> Result<Option<usize>> {
        let cell: CellId = self.clusterer.cell_of(obs)?;
        Ok(self.clusterer.position(&cell).map(|p| p + 1))
    }

    pub fn event_count(&self) -> usize {
        self.clusterer.observed().len() + 1
    }

    pub fn for_each_emission(&self, q: usize, visit: impl FnMut(usize, f64)) {
        self.emissions
            .for_each_weight(q, &self.rho, self.transitions.n(), visit)
    }

    pub fn emission_row(&self, state: &StateId) -> Result<Vec<(EventId, f64)>> {
        let q = self
            .index_of(state)
            .ok_or_else(|| Error::UnknownState(state.to_string()))?;
        Ok(self
            .emissions
            .weights(q, &self.rho, self.transitions.n())
            .into_iter()
            .map(|(e, w)| (self.event(e), w))
            .collect())
    }

    pub fn emission(&self, state: &StateId, event: &EventId) -> Result<f64> {
        Ok(self
            .emission_row(state)?
            .into_iter()
            .find(|(e, _)| e == event)
            .map_or(0.0, |(_, w)| w))
    }

    /// Event distribution for a state distribution: `v ↦ v·ℰ`.
    pub fn emit(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.event_count()];
        for (q, &mass) in v.iter().enumerate() {
            if mass != 0.0 {
                self.for_each_emission(q, |e, w| out[e] += mass * w);
            }
        }
        out
    }
}

fn check_signal(isa: &Isa, signal: &Signal) -> Result<()> {
    if (signal.len() as u64) <= isa.n() {
        return Err(Error::Stale {
            model: isa.n(),
            signal: signal.len().saturating_sub(1) as u64,
        });
    }
    Ok(())
}

/// From-scratch model of an automaton.
pub fn isa_to_hmm(
    isa: &Isa,
    signal: &Signal,
    sigma: &StatFunction,
    rho: &StatFunction,
    width: &GridWidth,
) -> Result<Hmm> {
    Hmm::from_isa(isa, signal, sigma, rho, width)
}

/// Incremental model update after `isa` advanced by one instant.
pub fn next_hmm(prev: &mut Hmm, isa: &Isa, signal: &Signal) -> Result<()> {
    prev.next(isa, signal).map(|_| ())
}
