//! Undirected graphs, truncated random walks and skip-gram context pairs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

pub type NodeId = u32;

/// Counters reported while building a [`Graph`].
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct LoadStats {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

/// Accumulates edges; direction is discarded.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
    stats: LoadStats,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str) {
        if !self.nodes.contains(name) {
            self.nodes.insert(name.to_string());
        }
    }

    pub fn add_edge(&mut self, u: &str, v: &str) {
        self.add_node(u);
        self.add_node(v);
        if u == v {
            self.stats.self_loops += 1;
            return;
        }
        let key = if u < v { (u.to_string(), v.to_string()) } else { (v.to_string(), u.to_string()) };
        if !self.edges.insert(key) {
            self.stats.duplicate_edges += 1;
        }
    }

    pub fn build(self) -> (Graph, LoadStats) {
        let names: Vec<String> = self.nodes.into_iter().collect();
        let index: BTreeMap<String, NodeId> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), i as NodeId)).collect();
        let mut adjacency = vec![Vec::new(); names.len()];
        for (u, v) in &self.edges {
            let (u, v) = (index[u.as_str()], index[v.as_str()]);
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        (Graph { names, index, adjacency }, self.stats)
    }
}

/// Simple undirected graph without self-loops. Nodes are numbered in
/// lexicographic order of their names.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Graph {
    pub fn from_edges<'a, I>(edges: I) -> (Graph, LoadStats)
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut b = GraphBuilder::new();
        for (u, v) in edges {
            b.add_edge(u, v);
        }
        b.build()
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v as usize]
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Every edge in both orientations, sorted.
    pub fn directed_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(2 * self.num_edges());
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().map(|&v| (u as NodeId, v)));
        }
        out
    }
}

/// Truncated random walks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<NodeId>>,
    /// Maximum number of vertices per walk.
    pub walk_length: usize,
    pub walks_per_node: usize,
}

impl WalkCorpus {
    pub fn num_walks(&self) -> usize {
        self.walks.len()
    }

    /// Iterator over `(center, context)` pairs for window size `window`.
    pub fn context_pairs(&self, window: usize) -> Result<ContextPairs<'_>> {
        if window == 0 {
            return Err(Error::InvalidParameter("window must be at least 1"));
        }
        Ok(ContextPairs { walks: &self.walks, window, walk: 0, center: 0, offset: 0 })
    }
}

/// Roots `walks_per_node` walks at every node. Each round visits the nodes in
/// a fresh random order. A walk has `walk_length` vertices unless it starts at
/// an isolated node, in which case it is just that node.
pub fn generate_walks(
    graph: &Graph,
    walks_per_node: usize,
    walk_length: usize,
    seed: u64,
) -> Result<WalkCorpus> {
    if walk_length == 0 {
        return Err(Error::InvalidParameter("walk length must be at least 1"));
    }
    if graph.num_nodes() == 0 {
        return Err(Error::InvalidParameter("graph has no nodes"));
    }
    let mut rng = seed::stream(seed, 0);
    let mut order: Vec<NodeId> = (0..graph.num_nodes() as NodeId).collect();
    let mut walks = Vec::with_capacity(walks_per_node * order.len());
    for _ in 0..walks_per_node {
        order.shuffle(&mut rng);
        for &start in &order {
            let mut walk = Vec::with_capacity(walk_length);
            walk.push(start);
            let mut current = start;
            while walk.len() < walk_length {
                let nbrs = graph.neighbors(current);
                if nbrs.is_empty() {
                    break;
                }
                current = nbrs[rng.random_range(0..nbrs.len())];
                walk.push(current);
            }
            walks.push(walk);
        }
    }
    Ok(WalkCorpus { walks, walk_length, walks_per_node })
}

/// For each position `j` of each walk, yields `(w[j], w[k])` for every
/// `k ≠ j` with `|k - j| ≤ window`, walking `k` left to right.
#[derive(Debug, Clone)]
pub struct ContextPairs<'a> {
    walks: &'a [Vec<NodeId>],
    window: usize,
    walk: usize,
    center: usize,
    offset: usize,
}

impl Iterator for ContextPairs<'_> {
    type Item = (NodeId, NodeId);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let walk = self.walks.get(self.walk)?;
            if self.center >= walk.len() {
                self.walk += 1;
                self.center = 0;
                self.offset = 0;
                continue;
            }
            let lo = self.center.saturating_sub(self.window);
            let hi = (self.center + self.window).min(walk.len() - 1);
            let k = lo + self.offset;
            if k > hi {
                self.center += 1;
                self.offset = 0;
                continue;
            }
            self.offset += 1;
            if k != self.center {
                return Some((walk[self.center], walk[k]));
            }
        }
    }
}
