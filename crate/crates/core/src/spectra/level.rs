//! Everything computed at one level: the graph family and its eigensystem.

use std::collections::BTreeMap;

use super::system::{eigensystem_from_graphs, level_graphs, EigenSystem};
use crate::error::{Error, Result};
use crate::ssgraph::IsogenyGraph;

#[derive(Clone, Debug)]
pub struct Level {
    pub p: u64,
    pub graphs: BTreeMap<u64, IsogenyGraph>,
    pub system: EigenSystem,
}

impl Level {
    pub fn build(p: u64, primes: &[u64], seed: u64) -> Result<Self> {
        let graphs = level_graphs(p, primes, seed)?;
        Self::from_graphs(graphs, seed)
    }

    pub fn from_graphs(graphs: Vec<IsogenyGraph>, seed: u64) -> Result<Self> {
        let system = eigensystem_from_graphs(&graphs, seed)?;
        Ok(Level { p: system.level, graphs: graphs.into_iter().map(|g| (g.ell, g)).collect(), system })
    }

    pub fn graph(&self, ell: u64) -> Result<&IsogenyGraph> {
        self.graphs.get(&ell).ok_or_else(|| Error::Coverage(format!("no graph for l = {ell} at level {}", self.p)))
    }

    /// Number of vertices, i.e. one more than the number of forms.
    pub fn n(&self) -> usize {
        self.system.s() + 1
    }
}
