//! Depth-bounded program slicing over a dependence graph.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::StmtId;
use crate::pdg::{DepKind, ProgramDependenceGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directions {
    /// Toward dependees.
    Backward,
    /// Toward dependents.
    Forward,
    Both,
}

impl Directions {
    pub fn backward(self) -> bool {
        matches!(self, Directions::Backward | Directions::Both)
    }

    pub fn forward(self) -> bool {
        matches!(self, Directions::Forward | Directions::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKinds {
    Control,
    Data,
    Both,
}

impl EdgeKinds {
    pub fn includes(self, kind: DepKind) -> bool {
        match self {
            EdgeKinds::Control => kind == DepKind::Control,
            EdgeKinds::Data => kind == DepKind::Data,
            EdgeKinds::Both => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("slice depth must be at least 1")]
    ZeroDepth,
    #[error("unknown value '{0}'")]
    UnknownValue(String),
}

impl FromStr for Directions {
    type Err = SliceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "backward" => Ok(Directions::Backward),
            "forward" => Ok(Directions::Forward),
            "both" | "backward+forward" | "forward+backward" => Ok(Directions::Both),
            _ => Err(SliceError::UnknownValue(s.to_string())),
        }
    }
}

impl FromStr for EdgeKinds {
    type Err = SliceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "control" => Ok(EdgeKinds::Control),
            "data" => Ok(EdgeKinds::Data),
            "both" | "control+data" | "data+control" => Ok(EdgeKinds::Both),
            _ => Err(SliceError::UnknownValue(s.to_string())),
        }
    }
}

impl fmt::Display for Directions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Directions::Backward => "backward",
            Directions::Forward => "forward",
            Directions::Both => "both",
        })
    }
}

impl fmt::Display for EdgeKinds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKinds::Control => "control",
            EdgeKinds::Data => "data",
            EdgeKinds::Both => "control+data",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SliceConfig {
    pub depth: usize,
    pub directions: Directions,
    pub edge_kinds: EdgeKinds,
    pub interprocedural: bool,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig {
            depth: 3,
            directions: Directions::Both,
            edge_kinds: EdgeKinds::Both,
            interprocedural: true,
        }
    }
}

impl SliceConfig {
    pub fn new(
        depth: usize,
        directions: Directions,
        edge_kinds: EdgeKinds,
        interprocedural: bool,
    ) -> Result<Self, SliceError> {
        if depth == 0 {
            return Err(SliceError::ZeroDepth);
        }
        Ok(SliceConfig {
            depth,
            directions,
            edge_kinds,
            interprocedural,
        })
    }

    pub fn with_depth(self, depth: usize) -> Result<Self, SliceError> {
        SliceConfig::new(
            depth,
            self.directions,
            self.edge_kinds,
            self.interprocedural,
        )
    }

    pub fn with_edge_kinds(self, edge_kinds: EdgeKinds) -> Self {
        SliceConfig { edge_kinds, ..self }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Slice {
    /// Every sliced statement with its hop distance from the nearest seed.
    pub hops: BTreeMap<StmtId, usize>,
    /// Seeds that are not nodes of the graph.
    pub missing_seeds: Vec<StmtId>,
}

impl Slice {
    pub fn ids(&self) -> BTreeSet<StmtId> {
        self.hops.keys().copied().collect()
    }

    pub fn contains(&self, id: StmtId) -> bool {
        self.hops.contains_key(&id)
    }
}

/// Breadth-first expansion from `seeds` up to `config.depth` hops.
pub fn slice(
    pdg: &ProgramDependenceGraph,
    seeds: &BTreeSet<StmtId>,
    config: &SliceConfig,
) -> Slice {
    let n = pdg.node_count;
    let mut adj: Vec<Vec<StmtId>> = vec![Vec::new(); n];
    for e in pdg
        .edges
        .iter()
        .filter(|e| config.edge_kinds.includes(e.kind))
    {
        if config.directions.forward() {
            adj[e.from].push(e.to);
        }
        if config.directions.backward() {
            adj[e.to].push(e.from);
        }
    }
    if config.interprocedural {
        for &(site, callee) in &pdg.call_edges {
            adj[site].push(callee);
            adj[callee].push(site);
        }
    }

    let mut out = Slice::default();
    let mut queue = VecDeque::new();
    for &s in seeds {
        if s < n {
            out.hops.insert(s, 0);
            queue.push_back(s);
        } else {
            out.missing_seeds.push(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let h = out.hops[&v];
        if h == config.depth {
            continue;
        }
        for &w in &adj[v] {
            if let Entry::Vacant(e) = out.hops.entry(w) {
                e.insert(h + 1);
                queue.push_back(w);
            }
        }
    }
    out
}
