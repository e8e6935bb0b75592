//! Simple undirected unweighted graphs.
//!
//! Nodes are dense indices `0..n`. A [`Graph`] is immutable once built; the
//! rewiring procedures in [`crate::generators`] return new values. Adjacency is
//! stored in compressed sparse row form so the integrator can sweep neighbors
//! without chasing pointers.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hop distance reported for nodes that cannot be reached.
pub const UNREACHABLE: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n_nodes: usize,
    /// Sorted, each pair stored once with `u < v`.
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Builds a simple graph, dropping self-loops and collapsing duplicate or
    /// reversed pairs.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            for index in [u, v] {
                if index >= n_nodes {
                    return Err(Error::IndexOutOfRange { index, n_nodes });
                }
            }
            if u != v {
                pairs.push((u.min(v), u.max(v)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::from_sorted_pairs(n_nodes, pairs))
    }

    fn from_sorted_pairs(n_nodes: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0usize; n_nodes];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n_nodes].to_vec();
        let mut neighbors = vec![0usize; 2 * edges.len()];
        for &(u, v) in &edges {
            neighbors[fill[u]] = v;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            fill[v] += 1;
        }
        for i in 0..n_nodes {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Graph {
            n_nodes,
            edges,
            offsets,
            neighbors,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` pairs with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n_nodes).map(|i| self.degree(i)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_nodes && v < self.n_nodes && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        self.n_nodes > 0 && self.bfs_distances(0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Hop counts from `source`; unreachable nodes get [`UNREACHABLE`].
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        self.multi_source_distances(std::slice::from_ref(&source))
    }

    /// Hop count from each node to the nearest node of `sources`.
    pub fn multi_source_distances(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.n_nodes];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == UNREACHABLE {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &v in self.neighbors(u) {
                if dist[v] == UNREACHABLE {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by their smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n_nodes];
        let mut out = Vec::new();
        for start in 0..self.n_nodes {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Subgraph induced by `nodes` (must be sorted and distinct), relabeled to
    /// `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![UNREACHABLE; self.n_nodes];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let mut pairs: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u] != UNREACHABLE && index[v] != UNREACHABLE)
            .map(|&(u, v)| {
                let (a, b) = (index[u], index[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        pairs.sort_unstable();
        Graph::from_sorted_pairs(nodes.len(), pairs)
    }

    /// Largest connected component plus the table mapping new indices to the
    /// original ones. Ties go to the component holding the smallest index.
    pub fn largest_connected_component(&self) -> Result<(Graph, Vec<usize>)> {
        if self.n_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut best: Vec<usize> = Vec::new();
        for comp in self.components() {
            if comp.len() > best.len() {
                best = comp;
            }
        }
        Ok((self.induced_subgraph(&best), best))
    }

    /// Applies a node permutation: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n_nodes {
            return Err(Error::param("permutation length differs from node count"));
        }
        Graph::new(self.n_nodes, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    /// Combinatorial Laplacian `diag(d) - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n_nodes;
        let mut l = DMatrix::zeros(n, n);
        for &(u, v) in &self.edges {
            l[(u, v)] = -1.0;
            l[(v, u)] = -1.0;
        }
        for i in 0..n {
            l[(i, i)] = self.degree(i) as f64;
        }
        l
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.n_nodes;
        let mut a = DMatrix::zeros(n, n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }
}

/// Ordered set of distinct valid node indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new(indices: Vec<usize>, n_nodes: usize) -> Result<Self> {
        let mut seen = vec![false; n_nodes];
        for &i in &indices {
            if i >= n_nodes {
                return Err(Error::IndexOutOfRange { index: i, n_nodes });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::param(format!("duplicate node {i} in node set")));
            }
        }
        Ok(NodeSet(indices))
    }

    pub fn empty() -> Self {
        NodeSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0.contains(&node)
    }

    /// Membership mask of length `n_nodes`.
    pub fn mask(&self, n_nodes: usize) -> Vec<bool> {
        let mut m = vec![false; n_nodes];
        for &i in &self.0 {
            m[i] = true;
        }
        m
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}
