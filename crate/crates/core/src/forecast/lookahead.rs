//! Lookahead models: automata whose states are words of future clusters.
//!
//! For instants `i ≤ n − h` the future window is fully observed and the plain
//! construction applies. The last `h` instants form the frontier: each one
//! samples the missing observation `r̂_{i+h}` from the model of the previous
//! instant and is classified on the partly estimated window. A frontier entry
//! whose word is unseen (or whose sample is the dummy event) is poisoned, and
//! so is every entry after it.
//!
//! The frontier keeps a single mutable automaton/model pair positioned at the
//! last usable entry, together with the undo records of the frontier steps,
//! so that re-anchoring on a new observation costs `O(h)` model updates.

use serde::{Deserialize, Serialize};

use super::sample::{derive_seed, inverse_cdf, rng};
use super::{forecast, forecast_slots, Forecast};
use crate::error::{Error, Result};
use crate::hmm::DUMMY_EVENT;
use crate::hmm::{Hmm, HmmUndo};
use crate::isa::{Isa, IsaStep};
use crate::plugins::{cell_center, grid_cell, LookaheadClassifier, PluginParams, StatFunction};
use crate::signal::Signal;
use crate::state::{CellId, EventId, StateId};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoisonCause {
    /// The estimated window classified into a state never seen before.
    NewState,
    /// The sampled observation was the dummy event.
    DummySample,
    /// An earlier frontier entry is poisoned.
    Inherited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum FrontierEntry {
    Ready {
        instant: u64,
        state: StateId,
        /// Cluster sampled for `r̂_{instant+h}`.
        sampled: CellId,
        /// The estimated observation: center of the sampled cluster.
        estimate: Vec<f64>,
        isa_step: IsaStep,
        undo: HmmUndo,
    },
    Poisoned {
        instant: u64,
        cause: PoisonCause,
    },
}

impl FrontierEntry {
    pub fn instant(&self) -> u64 {
        match self {
            FrontierEntry::Ready { instant, .. } | FrontierEntry::Poisoned { instant, .. } => *instant,
        }
    }

    pub fn is_poisoned(&self) -> bool {
        matches!(self, FrontierEntry::Poisoned { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookaheadFrontier {
    classifier: LookaheadClassifier,
    sigma: StatFunction,
    rho: StatFunction,
    seed: u64,
    signal: Signal,
    isa: Isa,
    hmm: Hmm,
    entries: Vec<FrontierEntry>,
}

impl LookaheadFrontier {
    /// Builds the lookahead models at the signal's last instant `n ≥ h`.
    pub fn build(signal: &Signal, params: &PluginParams, seed: u64) -> Result<Self> {
        let classifier = LookaheadClassifier::new(params)?;
        let h = classifier.horizon();
        if signal.len() < h + 1 {
            return Err(Error::InsufficientHistory {
                needed: h + 1,
                have: signal.len(),
            });
        }
        let sigma = params.stat();
        let rho = params.stat();
        let n = signal.len() - 1;

        let word0 = genuine_word(&classifier, signal, 0)?;
        let (isa, _) = Isa::start(word0)?;
        let hmm = Hmm::from_isa(&isa, signal, &sigma, &rho, classifier.grid_width())?;
        let mut frontier = Self {
            classifier,
            sigma,
            rho,
            seed,
            signal: signal.clone(),
            isa,
            hmm,
            entries: Vec::with_capacity(h),
        };
        for i in 1..=(n - h) {
            frontier.genuine_step(i)?;
        }
        for i in (n - h + 1)..=n {
            frontier.extend(i as u64)?;
        }
        Ok(frontier)
    }

    /// Re-anchors the frontier on the next genuine observation.
    pub fn advance(&mut self, r_new: &[f64]) -> Result<()> {
        self.signal.push(r_new)?;
        let h = self.horizon();
        let n = self.signal.len() - 1;
        let anchor = n - h;
        let word = genuine_word(&self.classifier, &self.signal, anchor)?;

        let first = self.entries.remove(0);
        debug_assert_eq!(first.instant(), anchor as u64);
        let reusable = matches!(&first, FrontierEntry::Ready { state, .. } if *state == word);
        if !reusable {
            for e in self.entries.drain(..).rev() {
                if let FrontierEntry::Ready { isa_step, undo, .. } = e {
                    self.hmm.undo(&undo);
                    self.isa.undo(&isa_step);
                }
            }
            if let FrontierEntry::Ready { isa_step, undo, .. } = first {
                self.hmm.undo(&undo);
                self.isa.undo(&isa_step);
            }
            self.genuine_step(anchor)?;
        }
        let next = self.entries.last().map_or(anchor as u64 + 1, |e| e.instant() + 1);
        for i in next..=n as u64 {
            self.extend(i)?;
        }
        Ok(())
    }

    fn genuine_step(&mut self, i: usize) -> Result<()> {
        let word = genuine_word(&self.classifier, &self.signal, i)?;
        let step = self.isa.push_state(word.clone())?;
        self.hmm.apply(&word, &step, self.signal.get(i))?;
        Ok(())
    }

    /// Appends the frontier entry for instant `i`.
    fn extend(&mut self, i: u64) -> Result<()> {
        if self.entries.last().is_some_and(FrontierEntry::is_poisoned) {
            self.entries.push(FrontierEntry::Poisoned {
                instant: i,
                cause: PoisonCause::Inherited,
            });
            return Ok(());
        }
        let h = self.horizon();
        let target = i + h as u64;
        let dist = forecast_slots(&self.hmm, h + 1).pop().expect("h + 1 >= 1 steps");
        let support: Vec<(usize, f64)> = dist.into_iter().enumerate().filter(|(_, p)| *p > 0.0).collect();
        let u: f64 = rng(derive_seed(self.seed, target)).random();
        let slot = inverse_cdf(&support, u).unwrap_or(DUMMY_EVENT);
        let sampled = match self.hmm.event(slot) {
            EventId::Dummy => {
                self.entries.push(FrontierEntry::Poisoned {
                    instant: i,
                    cause: PoisonCause::DummySample,
                });
                return Ok(());
            }
            EventId::Cluster(c) => c,
        };

        let n = self.signal.len() as u64 - 1;
        let width = self.classifier.grid_width();
        let mut cells = Vec::with_capacity(h);
        for k in (i + 1)..=target {
            if k <= n {
                cells.push(grid_cell(self.signal.get(k as usize), width));
            } else if k == target {
                cells.push(sampled.clone());
            } else {
                cells.push(self.estimated_cell(k).expect("earlier estimate present"));
            }
        }
        let word = self.classifier.word_of_cells(cells)?;
        if self.isa.index_of(&word).is_none() {
            self.entries.push(FrontierEntry::Poisoned {
                instant: i,
                cause: PoisonCause::NewState,
            });
            return Ok(());
        }
        let isa_step = self.isa.push_state(word.clone())?;
        let undo = self.hmm.apply(&word, &isa_step, self.signal.get(i as usize))?;
        let estimate = cell_center(&sampled, width);
        self.entries.push(FrontierEntry::Ready {
            instant: i,
            state: word,
            sampled,
            estimate,
            isa_step,
            undo,
        });
        Ok(())
    }

    fn estimated_cell(&self, k: u64) -> Option<CellId> {
        let h = self.horizon() as u64;
        self.entries.iter().find_map(|e| match e {
            FrontierEntry::Ready { instant, sampled, .. } if instant + h == k => Some(sampled.clone()),
            _ => None,
        })
    }

    pub fn horizon(&self) -> usize {
        self.classifier.horizon()
    }

    /// Present instant `n`.
    pub fn n(&self) -> u64 {
        self.signal.len() as u64 - 1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn signal(&self) -> &Signal {
        &self.signal
    }

    /// Frontier entries for instants `n − h + 1 ..= n`.
    pub fn entries(&self) -> &[FrontierEntry] {
        &self.entries
    }

    /// Estimated observations `r̂_{n+1} ..= r̂_{n+h}`; `None` where undefined.
    pub fn estimated(&self) -> Vec<Option<Vec<f64>>> {
        self.entries
            .iter()
            .map(|e| match e {
                FrontierEntry::Ready { estimate, .. } => Some(estimate.clone()),
                FrontierEntry::Poisoned { .. } => None,
            })
            .collect()
    }

    pub fn is_poisoned(&self) -> bool {
        self.entries.iter().any(FrontierEntry::is_poisoned)
    }

    /// Automaton and model at the last usable frontier entry.
    pub fn tip(&self) -> (&Isa, &Hmm) {
        (&self.isa, &self.hmm)
    }

    /// Automaton and model at instant `n − h`, built from genuine futures only.
    pub fn base(&self) -> (Isa, Hmm) {
        let mut isa = self.isa.clone();
        let mut hmm = self.hmm.clone();
        for e in self.entries.iter().rev() {
            if let FrontierEntry::Ready { isa_step, undo, .. } = e {
                hmm.undo(undo);
                isa.undo(isa_step);
            }
        }
        (isa, hmm)
    }

    /// Forecast from the lookahead model at `n`; dummy when the frontier is poisoned.
    pub fn forecast(&self, h: usize) -> Forecast {
        if self.is_poisoned() {
            Forecast::dummy(h)
        } else {
            forecast(&self.hmm, h)
        }
    }

    pub(crate) fn rebuild_index(&mut self) -> Result<()> {
        self.isa.rebuild_indexes()?;
        self.hmm.rebuild_index();
        Ok(())
    }
}

/// Word of the fully observed window following instant `i`.
fn genuine_word(classifier: &LookaheadClassifier, signal: &Signal, i: usize) -> Result<StateId> {
    let h = classifier.horizon();
    let window: Vec<&[f64]> = (i + 1..=i + h).map(|k| signal.get(k)).collect();
    classifier.classify(&window)
}

pub fn lookahead_build(signal: &Signal, params: &PluginParams, seed: u64) -> Result<LookaheadFrontier> {
    LookaheadFrontier::build(signal, params, seed)
}

pub fn lookahead_advance(frontier: &mut LookaheadFrontier, r_new: &[f64]) -> Result<()> {
    frontier.advance(r_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plugins::GridWidth;

    fn cell(k: i64) -> CellId {
        CellId::new(&[k])
    }

    fn params(h: usize) -> PluginParams {
        PluginParams {
            horizon: h,
            grid_width: GridWidth::Uniform(1.0),
            ..Default::default()
        }
    }

    #[test]
    fn alternating_signal_never_poisons() {
        let s = Signal::from_scalars(&[1.0, 5.0, 1.0, 5.0, 1.0]).unwrap();
        let f = LookaheadFrontier::build(&s, &params(1), 3).unwrap();
        assert!(!f.is_poisoned());
        match &f.entries()[0] {
            FrontierEntry::Ready {
                instant,
                state,
                sampled,
                ..
            } => {
                assert_eq!(*instant, 4);
                assert_eq!(state, &StateId::Word(vec![cell(5)]));
                assert_eq!(sampled, &cell(5));
            }
            e => panic!("unexpected {e:?}"),
        }
        assert_eq!(f.estimated(), vec![Some(vec![5.5])]);
        let fc = f.forecast(1);
        assert_eq!(fc.steps[0], vec![(EventId::Cluster(cell(5)), 1.0)]);
    }

    #[test]
    fn insufficient_history() {
        let s = Signal::from_scalars(&[1.0, 5.0]).unwrap();
        assert!(matches!(
            LookaheadFrontier::build(&s, &params(2), 0),
            Err(Error::InsufficientHistory { needed: 3, have: 2 })
        ));
        assert!(LookaheadFrontier::build(&s, &params(0), 0).is_err());
    }

    #[test]
    fn unseen_word_poisons_the_rest() {
        // Base word sequence at i ≤ 2 is "1|2", "2|3", "3|4": the frontier's
        // model sits in a new state, so sampling yields the dummy event.
        let s = Signal::from_scalars(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let f = LookaheadFrontier::build(&s, &params(2), 0).unwrap();
        assert!(f.is_poisoned());
        assert!(matches!(
            f.entries()[0],
            FrontierEntry::Poisoned {
                cause: PoisonCause::DummySample,
                ..
            }
        ));
        assert!(matches!(
            f.entries()[1],
            FrontierEntry::Poisoned {
                cause: PoisonCause::Inherited,
                ..
            }
        ));
        assert!(f.forecast(2).is_dummy);
    }

    #[test]
    fn new_state_cause() {
        // h = 1, signal 0,0,1,0,0: frontier samples r̂_5 from the model at 3,
        // whose word "0" leads to states emitting only cluster 0 → word "0" seen.
        // Use a signal where the sampled cluster forms an unseen word instead.
        let s = Signal::from_scalars(&[0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 2.0, 1.0]).unwrap();
        let f = LookaheadFrontier::build(&s, &params(2), 11).unwrap();
        // Whatever the sample, entries after a poisoned one are poisoned.
        let mut seen = false;
        for e in f.entries() {
            if seen {
                assert!(e.is_poisoned());
            }
            seen |= e.is_poisoned();
        }
    }

    #[test]
    fn base_matches_plain_construction() {
        let xs = [0.2, 1.4, 0.3, 1.1, 0.7, 1.9, 0.4, 1.2, 0.1, 1.6, 0.5];
        let s = Signal::from_scalars(&xs).unwrap();
        let p = params(2);
        let f = LookaheadFrontier::build(&s, &p, 5).unwrap();
        let (isa, hmm) = f.base();
        let c = LookaheadClassifier::new(&p).unwrap();
        let n = xs.len() - 1;
        let words: Vec<StateId> = (0..=n - 2)
            .map(|i| c.classify(&[[xs[i + 1]], [xs[i + 2]]]).unwrap())
            .collect();
        let (mut plain, _) = Isa::start(words[0].clone()).unwrap();
        for w in &words[1..] {
            plain.push_state(w.clone()).unwrap();
        }
        assert_eq!(isa, plain);
        let expected = Hmm::from_isa(&plain, &s, &p.stat(), &p.stat(), &p.grid_width).unwrap();
        assert_eq!(hmm, expected);
    }
}
