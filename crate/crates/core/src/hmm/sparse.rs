//! Sparse right-stochastic matrix backed by per-entry statistic accumulators.
//!
//! Entries store unnormalized statistics; each row caches their sum. Reading a
//! weight divides the entry by the row sum, so adding one instant to an entry
//! is O(1) regardless of the row length. A row that is empty, or whose sum
//! vanishes, puts all its mass on the fallback column.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::plugins::{StatAccumulator, StatFunction};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub entries: Vec<(usize, StatAccumulator)>,
    pub total: StatAccumulator,
}

/// Record of one entry update, for undoing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryUndo {
    row: usize,
    col: usize,
    created: bool,
    entry: StatAccumulator,
    total: StatAccumulator,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseStochasticMatrix {
    rows: Vec<SparseRow>,
    fallback: usize,
    #[serde(skip)]
    pos: HashMap<(usize, usize), usize>,
}

impl PartialEq for SparseStochasticMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.fallback == other.fallback
    }
}

impl SparseStochasticMatrix {
    pub fn new(fallback: usize) -> Self {
        Self {
            rows: Vec::new(),
            fallback,
            pos: HashMap::new(),
        }
    }

    pub(crate) fn from_rows(rows: Vec<SparseRow>, fallback: usize) -> Self {
        let mut m = Self {
            rows,
            fallback,
            pos: HashMap::new(),
        };
        m.rebuild_index();
        m
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.pos.clear();
        for (r, row) in self.rows.iter().enumerate() {
            for (k, (c, _)) in row.entries.iter().enumerate() {
                self.pos.insert((r, *c), k);
            }
        }
    }

    pub fn fallback(&self) -> usize {
        self.fallback
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &SparseRow {
        &self.rows[r]
    }

    pub(crate) fn push_row(&mut self) {
        self.rows.push(SparseRow::default());
    }

    pub(crate) fn pop_row(&mut self) {
        if let Some(row) = self.rows.pop() {
            let r = self.rows.len();
            for (c, _) in row.entries {
                self.pos.remove(&(r, c));
            }
        }
    }

    /// Adds `instant` (observing `obs`) to entry `(row, col)`.
    pub(crate) fn push(
        &mut self,
        row: usize,
        col: usize,
        f: &StatFunction,
        obs: &[f64],
        instant: u64,
    ) -> Result<EntryUndo> {
        let r = &mut self.rows[row];
        let (k, created) = match self.pos.get(&(row, col)) {
            Some(&k) => (k, false),
            None => {
                r.entries.push((col, StatAccumulator::new()));
                let k = r.entries.len() - 1;
                self.pos.insert((row, col), k);
                (k, true)
            }
        };
        let before = r.entries[k].1;
        let total_before = r.total;
        r.entries[k].1.push(f, obs, instant)?;
        let after = r.entries[k].1;
        r.total.absorb(f, &before, &after, obs, instant)?;
        Ok(EntryUndo {
            row,
            col,
            created,
            entry: before,
            total: total_before,
        })
    }

    pub(crate) fn undo(&mut self, u: &EntryUndo) {
        let r = &mut self.rows[u.row];
        if u.created {
            r.entries.pop();
            self.pos.remove(&(u.row, u.col));
        } else {
            let k = self.pos[&(u.row, u.col)];
            r.entries[k].1 = u.entry;
        }
        r.total = u.total;
    }

    /// Calls `visit(col, weight)` for every stored entry of a row, or once with
    /// the fallback column when the row carries no mass.
    pub fn for_each_weight(&self, r: usize, f: &StatFunction, now: u64, mut visit: impl FnMut(usize, f64)) {
        let row = &self.rows[r];
        let live = !row.entries.is_empty() && StatAccumulator::ratio(f, &row.total, &row.total, now).is_some();
        if !live {
            visit(self.fallback, 1.0);
            return;
        }
        for (c, acc) in &row.entries {
            let w = StatAccumulator::ratio(f, acc, &row.total, now).unwrap_or(0.0);
            visit(*c, w);
        }
    }

    pub fn weights(&self, r: usize, f: &StatFunction, now: u64) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.rows[r].entries.len().max(1));
        self.for_each_weight(r, f, now, |c, w| out.push((c, w)));
        out
    }

    pub fn get(&self, r: usize, c: usize, f: &StatFunction, now: u64) -> f64 {
        let mut w = 0.0;
        self.for_each_weight(r, f, now, |col, x| {
            if col == c {
                w = x;
            }
        });
        w
    }
}
