//! Versioned JSON snapshots of a running pipeline or lookahead frontier.
//!
//! The document carries a readable view of the model (states, events,
//! weights, instants matrix) next to the raw internals needed to resume
//! bit-identically. Only the internals are read back; the view is for people
//! and other tools.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::LookaheadFrontier;
use crate::hmm::{Hmm, HmmContinuous, Transitions};
use crate::isa::Isa;
use crate::pipeline::{Model, Pipeline};
use crate::plugins::PluginParams;
use crate::signal::Signal;
use crate::state::{EventId, StateId};

pub const SNAPSHOT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resumable {
    Pipeline(Pipeline),
    Lookahead(LookaheadFrontier),
    /// Observations buffered before a lookahead window could be filled.
    Pending(Signal),
}

/// A state with its mixture instants and the matching centers.
pub type MixtureView = (StateId, Vec<u64>, Vec<Vec<f64>>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u64,
    pub tau: PluginParams,
    pub n: Option<u64>,
    pub states: Vec<StateId>,
    pub events: Vec<EventId>,
    pub alpha: Option<StateId>,
    pub transitions: Vec<(StateId, StateId, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emissions: Option<Vec<(StateId, EventId, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixtures: Option<Vec<MixtureView>>,
    pub instants_matrix: Vec<(StateId, StateId, Vec<u64>)>,
    pub resume: Resumable,
}

impl Snapshot {
    pub fn of_pipeline(p: &Pipeline) -> Self {
        let mut s = Self::empty(p.params().clone(), Resumable::Pipeline(p.clone()));
        if let (Some(isa), Some(model)) = (p.isa(), p.model()) {
            s.fill_isa(isa);
            match model {
                Model::Discrete(m) => s.fill_discrete(m),
                Model::Continuous(m) => s.fill_continuous(m),
            }
        }
        s
    }

    pub fn of_lookahead(f: &LookaheadFrontier, params: &PluginParams) -> Self {
        let mut s = Self::empty(params.clone(), Resumable::Lookahead(f.clone()));
        let (isa, hmm) = f.tip();
        s.fill_isa(isa);
        s.fill_discrete(hmm);
        s
    }

    pub fn of_pending(signal: &Signal, params: &PluginParams) -> Self {
        Self::empty(params.clone(), Resumable::Pending(signal.clone()))
    }

    fn empty(tau: PluginParams, resume: Resumable) -> Self {
        Self {
            version: SNAPSHOT_VERSION,
            tau,
            n: None,
            states: Vec::new(),
            events: Vec::new(),
            alpha: None,
            transitions: Vec::new(),
            emissions: None,
            mixtures: None,
            instants_matrix: Vec::new(),
            resume,
        }
    }

    fn fill_isa(&mut self, isa: &Isa) {
        self.n = Some(isa.n());
        self.instants_matrix = isa
            .cells()
            .iter()
            .map(|c| (isa.state(c.from).clone(), isa.state(c.to).clone(), c.instants.clone()))
            .collect();
    }

    fn fill_transitions(&mut self, t: &Transitions) {
        self.states = t.states().to_vec();
        self.alpha = Some(t.alpha().clone());
        self.transitions.clear();
        for p in 0..t.states().len() {
            for (q, w) in t.transition_row_by_index(p) {
                self.transitions.push((t.states()[p].clone(), t.states()[q].clone(), w));
            }
        }
    }

    fn fill_discrete(&mut self, m: &Hmm) {
        self.fill_transitions(m.transitions());
        self.events = m.events();
        let mut rows = Vec::new();
        for q in 0..m.states().len() {
            m.for_each_emission(q, |e, w| rows.push((m.states()[q].clone(), m.event(e), w)));
        }
        self.emissions = Some(rows);
    }

    fn fill_continuous(&mut self, m: &HmmContinuous) {
        self.fill_transitions(m.transitions());
        self.events = vec![EventId::Dummy];
        let h = m.kernel().bandwidth().to_vec();
        self.mixtures = Some(
            (1..m.states().len())
                .map(|q| (m.states()[q].clone(), m.mixture(q).to_vec(), h.clone()))
                .collect(),
        );
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Snapshot(format!("unreadable document: {e}")))?;
        let found = value
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Snapshot("missing version".into()))?;
        if found != SNAPSHOT_VERSION {
            return Err(Error::VersionMismatch {
                found,
                expected: SNAPSHOT_VERSION,
            });
        }
        let mut snap: Snapshot = serde_json::from_value(value).map_err(|e| Error::Snapshot(e.to_string()))?;
        match &mut snap.resume {
            Resumable::Pipeline(p) => p.rebuild_index()?,
            Resumable::Lookahead(f) => f.rebuild_index()?,
            Resumable::Pending(_) => {}
        }
        Ok(snap)
    }
}

/// Writes through a sibling temporary file so a crash never leaves a torn snapshot.
pub fn save_snapshot(snapshot: &Snapshot, path: &Path) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, snapshot.to_json()?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    Snapshot::from_json(&fs::read_to_string(path)?)
}
