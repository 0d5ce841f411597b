//! Overlay outputs and plain graph representations used for checking them.

use crate::sim::NodeId;
use rustc_hash::FxHashMap;
use std::collections::VecDeque;

/// Undirected edge with endpoints in ascending order.
pub type Edge = (NodeId, NodeId);

pub fn edge(a: NodeId, b: NodeId) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlayMode {
    /// Every edge is stored by at least one endpoint.
    Implicit,
    /// Every edge is stored by both endpoints.
    Explicit,
}

/// The neighbor identifiers each node stores after a realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlay {
    pub mode: OverlayMode,
    pub ids: Vec<NodeId>,
    /// `known[i]` belongs to the node with identifier `ids[i]`.
    pub known: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OverlayError {
    #[error("node {0} stores itself as a neighbor")]
    SelfLoop(NodeId),
    #[error("edge {0}-{1} is stored more than once")]
    MultiEdge(NodeId, NodeId),
    #[error("edge {0}-{1} is stored by only one endpoint in an explicit overlay")]
    OneSided(NodeId, NodeId),
    #[error("unknown identifier {0}")]
    UnknownId(NodeId),
}

impl Overlay {
    /// Edge set, checked for loops, duplicates and (if explicit) symmetry.
    pub fn edges(&self) -> Result<Vec<Edge>, OverlayError> {
        let mut records = Vec::new();
        for (i, list) in self.known.iter().enumerate() {
            let me = self.ids[i];
            for &v in list {
                if v == me {
                    return Err(OverlayError::SelfLoop(me));
                }
                records.push((me, v));
            }
        }
        let mut out = Vec::new();
        match self.mode {
            OverlayMode::Implicit => {
                // Both endpoints may store an edge; one node storing it twice is a multi-edge.
                records.sort_unstable();
                if let Some(w) = records.windows(2).find(|w| w[0] == w[1]) {
                    return Err(OverlayError::MultiEdge(w[0].0, w[0].1));
                }
                out.extend(records.iter().map(|&(a, b)| edge(a, b)));
                out.sort_unstable();
                out.dedup();
            }
            OverlayMode::Explicit => {
                records.sort_unstable();
                if let Some(w) = records.windows(2).find(|w| w[0] == w[1]) {
                    return Err(OverlayError::MultiEdge(w[0].0, w[0].1));
                }
                for &(a, b) in &records {
                    if records.binary_search(&(b, a)).is_err() {
                        return Err(OverlayError::OneSided(a, b));
                    }
                    if a < b {
                        out.push((a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn to_simple(&self) -> Result<SimpleGraph, OverlayError> {
        let edges = self.edges()?;
        let index: FxHashMap<NodeId, usize> = self.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut g = SimpleGraph::new(self.ids.len());
        for (a, b) in edges {
            let ia = *index.get(&a).ok_or(OverlayError::UnknownId(a))?;
            let ib = *index.get(&b).ok_or(OverlayError::UnknownId(b))?;
            g.add_edge(ia, ib);
        }
        Ok(g)
    }
}

/// Undirected graph on vertices `0..n` with adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        SimpleGraph {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
        self.m += 1;
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for (a, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out.sort_unstable();
        out
    }

    /// No loops and no parallel edges.
    pub fn is_simple(&self) -> bool {
        let mut seen = vec![usize::MAX; self.n()];
        for (a, list) in self.adj.iter().enumerate() {
            for &b in list {
                if b == a || seen[b] == a {
                    return false;
                }
                seen[b] = a;
            }
        }
        true
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.bfs(0).iter().all(|d| d.is_some())
    }

    /// Hop distances from `s`.
    pub fn bfs(&self, s: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[s] = Some(0);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_tree(&self) -> bool {
        self.n() > 0 && self.m + 1 == self.n() && self.is_connected()
    }
}
