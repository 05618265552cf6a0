//! Signal generators and from-first-principles oracles shared by the
//! integration tests. Nothing here calls into the library's model code.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sigauto_core::{CellId, EventId, Signal, StateId};

pub fn random_walk(seed: u64, n: usize, d: usize, sd: f64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = Normal::new(0.0, sd).unwrap();
    let mut x = vec![0.0; d];
    let mut s = Signal::new(d);
    for _ in 0..n {
        s.push(&x).unwrap();
        for v in &mut x {
            *v += step.sample(&mut rng);
        }
    }
    s
}

pub fn cell_of(x: &[f64], w: f64) -> CellId {
    let idx: Vec<i64> = x.iter().map(|v| (v / w).floor() as i64).collect();
    CellId::new(&idx)
}

/// Labels of every prefix, computed by re-running the average from scratch.
pub fn oracle_labels(signal: &Signal, lambda: f64, w: f64) -> Vec<StateId> {
    (0..signal.len())
        .map(|i| {
            let mut ema = signal.get(0).to_vec();
            for k in 1..=i {
                for (e, x) in ema.iter_mut().zip(signal.get(k)) {
                    *e = lambda * x + (1.0 - lambda) * *e;
                }
            }
            StateId::Cell(cell_of(&ema, w))
        })
        .collect()
}

/// Instants matrix keyed by (from, to) labels, with `Bottom` before instant 0.
pub fn oracle_cells(labels: &[StateId]) -> BTreeMap<(String, String), Vec<u64>> {
    let mut cells: BTreeMap<(String, String), Vec<u64>> = BTreeMap::new();
    let mut prev = StateId::Bottom;
    for (i, q) in labels.iter().enumerate() {
        cells
            .entry((prev.to_string(), q.to_string()))
            .or_default()
            .push(i as u64);
        prev = q.clone();
    }
    cells
}

/// `None` is plain counting, `Some(δ)` the discounted sum `Σ δ^(now − i)`.
pub fn oracle_weight(delta: Option<f64>, instants: &[u64], now: u64) -> f64 {
    match delta {
        None => instants.len() as f64,
        Some(d) => instants.iter().map(|&i| d.powi((now - i) as i32)).sum(),
    }
}

/// Transition row of `from` at instant `now = labels.len() − 1`; a row with no
/// mass goes to the dummy state.
pub fn oracle_transition_row(labels: &[StateId], delta: Option<f64>, from: &StateId) -> Vec<(String, f64)> {
    let now = labels.len() as u64 - 1;
    let mut by_to: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for i in 1..labels.len() {
        if &labels[i - 1] == from {
            by_to.entry(labels[i].to_string()).or_default().push(i as u64);
        }
    }
    normalize(
        by_to
            .into_iter()
            .map(|(k, v)| (k, oracle_weight(delta, &v, now)))
            .collect(),
    )
}

pub fn oracle_emission_row(
    signal: &Signal,
    labels: &[StateId],
    w: f64,
    delta: Option<f64>,
    state: &StateId,
) -> Vec<(String, f64)> {
    let now = labels.len() as u64 - 1;
    let mut by_event: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (i, q) in labels.iter().enumerate() {
        if q == state {
            let e = EventId::Cluster(cell_of(signal.get(i), w));
            by_event.entry(event_key(&e)).or_default().push(i as u64);
        }
    }
    normalize(
        by_event
            .into_iter()
            .map(|(k, v)| (k, oracle_weight(delta, &v, now)))
            .collect(),
    )
}

pub fn event_key(e: &EventId) -> String {
    match e {
        EventId::Dummy => "dummy".into(),
        EventId::Cluster(c) => c.to_string(),
    }
}

fn normalize(mut row: Vec<(String, f64)>) -> Vec<(String, f64)> {
    let total: f64 = row.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return vec![("dummy".into(), 1.0)];
    }
    for (_, w) in &mut row {
        *w /= total;
    }
    row.retain(|(_, w)| *w > 0.0);
    row
}

/// Compares two keyed rows entry by entry.
pub fn rows_close(a: &[(String, f64)], b: &[(String, f64)], tol: f64) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.0.cmp(&y.0));
    b.sort_by(|x, y| x.0.cmp(&y.0));
    a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= tol)
}
