//! Population graphs: simple, connected, undirected.
//!
//! Agents are the dense indices `0..n`. A graph caches its all-pairs hop
//! distances and diameter at construction and is immutable afterwards, so a
//! single instance can be shared by any number of concurrent trials.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a population needs at least two agents, got {0}")]
    TooSmall(usize),
    #[error("agent id {id} out of range for n = {n}")]
    BadId { id: usize, n: usize },
    #[error("edge ({u}, {v}) is a self-loop or a duplicate")]
    NotSimple { u: usize, v: usize },
    #[error("agent {unreachable} is not reachable from agent 0")]
    NotConnected { unreachable: usize },
    #[error("no simple connected {kind} graph with n = {n}, m = {m:?}")]
    Infeasible {
        kind: GraphKind,
        n: usize,
        m: Option<usize>,
    },
}

/// Generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Complete,
    Cycle,
    Path,
    Star,
    RandomConnected,
}

impl GraphKind {
    pub const ALL: [GraphKind; 5] = [
        GraphKind::Complete,
        GraphKind::Cycle,
        GraphKind::Path,
        GraphKind::Star,
        GraphKind::RandomConnected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Complete => "complete",
            GraphKind::Cycle => "cycle",
            GraphKind::Path => "path",
            GraphKind::Star => "star",
            GraphKind::RandomConnected => "random",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All-pairs hop distances and the diameter of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMetrics {
    n: usize,
    distances: Vec<u32>,
    diameter: usize,
}

impl GraphMetrics {
    /// Breadth-first search from every source.
    pub fn compute(adjacency: &[Vec<usize>]) -> Self {
        let n = adjacency.len();
        let mut distances = vec![u32::MAX; n * n];
        let mut queue = VecDeque::with_capacity(n);
        for source in 0..n {
            let row = &mut distances[source * n..(source + 1) * n];
            row[source] = 0;
            queue.push_back(source);
            while let Some(x) = queue.pop_front() {
                for &y in &adjacency[x] {
                    if row[y] == u32::MAX {
                        row[y] = row[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
        }
        let diameter = distances
            .iter()
            .copied()
            .filter(|&d| d != u32::MAX)
            .max()
            .unwrap_or(0) as usize;
        GraphMetrics {
            n,
            distances,
            diameter,
        }
    }

    /// Hop count between `u` and `v`; `u32::MAX` if disconnected.
    pub fn distance(&self, u: usize, v: usize) -> u32 {
        self.distances[u * self.n + v]
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    arcs: Vec<(usize, usize)>,
    metrics: GraphMetrics,
}

impl Graph {
    /// Validates an unordered edge list over agents `0..n`.
    ///
    /// Each pair is normalized to `(min, max)`; a pair that repeats after
    /// normalization is rejected as not simple.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooSmall(n));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(GraphError::BadId { id, n });
                }
            }
            if u == v {
                return Err(GraphError::NotSimple { u, v });
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::NotSimple {
                u: w[0].0,
                v: w[0].1,
            });
        }
        for &(u, v) in &normalized {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let metrics = GraphMetrics::compute(&adjacency);
        if let Some(unreachable) = (0..n).find(|&v| metrics.distance(0, v) == u32::MAX) {
            return Err(GraphError::NotConnected { unreachable });
        }
        let mut arcs = Vec::with_capacity(2 * normalized.len());
        for &(u, v) in &normalized {
            arcs.push((u, v));
            arcs.push((v, u));
        }
        Ok(Graph {
            adjacency,
            edges: normalized,
            arcs,
            metrics,
        })
    }

    /// Builds a member of a generator family. `m` is required for
    /// [`GraphKind::RandomConnected`] and must match the family otherwise.
    ///
    /// Random graphs take a uniform labeled spanning tree (Prüfer decoding)
    /// and add `m - (n - 1)` distinct extra edges chosen uniformly from the
    /// remaining pairs. The result is a function of `(n, m, seed)` only.
    pub fn generate(
        kind: GraphKind,
        n: usize,
        m: Option<usize>,
        seed: u64,
    ) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooSmall(n));
        }
        let infeasible = || GraphError::Infeasible { kind, n, m };
        let edges: Vec<(usize, usize)> = match kind {
            GraphKind::Complete => (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect(),
            GraphKind::Path => (1..n).map(|v| (v - 1, v)).collect(),
            GraphKind::Cycle => {
                if n < 3 {
                    return Err(infeasible());
                }
                (0..n).map(|v| (v, (v + 1) % n)).collect()
            }
            GraphKind::Star => (1..n).map(|v| (0, v)).collect(),
            GraphKind::RandomConnected => {
                let m = m.ok_or_else(infeasible)?;
                if m < n - 1 || m > n * (n - 1) / 2 {
                    return Err(infeasible());
                }
                random_connected_edges(n, m, seed)
            }
        };
        if kind != GraphKind::RandomConnected && m.is_some_and(|m| m != edges.len()) {
            return Err(infeasible());
        }
        Graph::from_edges(n, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of unordered interactable pairs.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Unordered edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// The `2m` ordered (initiator, responder) pairs.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn metrics(&self) -> &GraphMetrics {
        &self.metrics
    }

    pub fn distance(&self, u: usize, v: usize) -> usize {
        self.metrics.distance(u, v) as usize
    }

    pub fn diameter(&self) -> usize {
        self.metrics.diameter()
    }

    /// True when every edge of `self` is an edge of `other` on the same
    /// agent set, and `other` has strictly more edges.
    pub fn is_proper_subgraph_of(&self, other: &Graph) -> bool {
        self.node_count() == other.node_count()
            && self.edge_count() < other.edge_count()
            && self.edges.iter().all(|&(u, v)| other.has_edge(u, v))
    }
}

fn random_connected_edges(n: usize, m: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut present = vec![false; n * n];
    let mut edges = Vec::with_capacity(m);
    let mut add = |edges: &mut Vec<(usize, usize)>, u: usize, v: usize| {
        let (a, b) = (u.min(v), u.max(v));
        present[a * n + b] = true;
        edges.push((a, b));
    };

    if n == 2 {
        add(&mut edges, 0, 1);
    } else {
        let prufer: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
        let mut degree = vec![1usize; n];
        for &x in &prufer {
            degree[x] += 1;
        }
        for &x in &prufer {
            let leaf = (0..n).find(|&v| degree[v] == 1).expect("Prüfer leaf");
            add(&mut edges, leaf, x);
            degree[leaf] -= 1;
            degree[x] -= 1;
        }
        let mut rest = (0..n).filter(|&v| degree[v] == 1);
        let (u, v) = (rest.next().unwrap(), rest.next().unwrap());
        add(&mut edges, u, v);
    }

    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !present[u * n + v])
        .collect();
    let extra = m - edges.len();
    let (chosen, _) = candidates.partial_shuffle(&mut rng, extra);
    edges.extend_from_slice(chosen);
    edges
}
