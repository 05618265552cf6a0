//! Grid clustering of the observation space into discrete events.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::params::GridWidth;
use crate::error::Result;
use crate::signal::check_coords;
use crate::state::CellId;

/// Half-open grid cell `[k·w, (k+1)·w)` per coordinate.
pub fn grid_cell(x: &[f64], width: &GridWidth) -> CellId {
    CellId(
        x.iter()
            .enumerate()
            .map(|(j, v)| (v / width.get(j)).floor() as i64)
            .collect::<SmallVec<[i64; 4]>>(),
    )
}

/// Center point of a grid cell.
pub fn cell_center(cell: &CellId, width: &GridWidth) -> Vec<f64> {
    cell.indices()
        .iter()
        .enumerate()
        .map(|(j, k)| (*k as f64 + 0.5) * width.get(j))
        .collect()
}

/// Grid clusterer that remembers every cluster it has returned, in order of
/// first appearance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clusterer {
    width: GridWidth,
    observed: Vec<CellId>,
    #[serde(skip)]
    index: HashMap<CellId, usize>,
}

impl PartialEq for Clusterer {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.observed == other.observed
    }
}

impl Clusterer {
    pub fn new(width: GridWidth) -> Self {
        Self {
            width,
            observed: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn width(&self) -> &GridWidth {
        &self.width
    }

    /// Cell of `obs` without registering it.
    pub fn cell_of(&self, obs: &[f64]) -> Result<CellId> {
        check_coords(obs)?;
        self.width.check_dim(obs.len())?;
        Ok(grid_cell(obs, &self.width))
    }

    /// Cell of `obs`, registered among the observed clusters. Returns the
    /// cluster's position in order of first appearance and whether it is new.
    pub fn cluster_of(&mut self, obs: &[f64]) -> Result<(CellId, usize, bool)> {
        let cell = self.cell_of(obs)?;
        let (pos, fresh) = self.register(cell.clone());
        Ok((cell, pos, fresh))
    }

    pub(crate) fn register(&mut self, cell: CellId) -> (usize, bool) {
        if let Some(&pos) = self.index.get(&cell) {
            return (pos, false);
        }
        let pos = self.observed.len();
        self.index.insert(cell.clone(), pos);
        self.observed.push(cell);
        (pos, true)
    }

    /// Forgets the most recently registered cluster.
    pub(crate) fn unregister_last(&mut self) {
        if let Some(cell) = self.observed.pop() {
            self.index.remove(&cell);
        }
    }

    pub fn position(&self, cell: &CellId) -> Option<usize> {
        self.index.get(cell).copied()
    }

    pub fn observed(&self) -> &[CellId] {
        &self.observed
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = self.observed.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    }
}
