//! Synthetic network families and degree-preserving rewiring.
//!
//! Every generator is a pure function of its parameters and an [`RngStream`].

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};
use crate::rng::RngStream;

/// Parameters of the configuration-model scale-free family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleFreeParams {
    /// Power-law exponent of `P(k) ∝ k^gamma`, in `[-4, -2]`.
    pub gamma: f64,
    /// Size of the configuration-model graph before LCC extraction.
    pub n_nodes: usize,
    pub lcc_min: usize,
    pub lcc_max: usize,
    pub k_min: usize,
    pub max_attempts: usize,
}

impl Default for ScaleFreeParams {
    fn default() -> Self {
        ScaleFreeParams {
            gamma: -3.0,
            n_nodes: 500,
            lcc_min: 85,
            lcc_max: 115,
            k_min: 1,
            max_attempts: 1000,
        }
    }
}

/// Samples `n` degrees from the discrete power law on `[k_min, n - 1]`, with
/// the total forced even by resampling one entry.
pub fn power_law_degrees<R: Rng>(n: usize, gamma: f64, k_min: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n < 2 || k_min == 0 || k_min > n - 1 {
        return Err(Error::param(format!("no admissible degrees for n = {n}, k_min = {k_min}")));
    }
    let support: Vec<usize> = (k_min..n).collect();
    let weights: Vec<f64> = support.iter().map(|&k| (k as f64).powf(gamma)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::param(e.to_string()))?;
    let mut degrees: Vec<usize> = (0..n).map(|_| support[dist.sample(rng)]).collect();
    while degrees.iter().sum::<usize>() % 2 == 1 {
        let slot = rng.random_range(0..n);
        degrees[slot] = support[dist.sample(rng)];
    }
    Ok(degrees)
}

/// Uniform stub matching followed by projection onto a simple graph.
pub fn configuration_model<R: Rng>(degrees: &[usize], rng: &mut R) -> Result<Graph> {
    let mut stubs: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(node, &d)| std::iter::repeat_n(node, d))
        .collect();
    if stubs.len() % 2 == 1 {
        return Err(Error::param("degree sum is odd"));
    }
    stubs.shuffle(rng);
    Graph::new(degrees.len(), stubs.chunks_exact(2).map(|p| (p[0], p[1])))
}

/// Largest component of a configuration-model power-law graph whose size falls
/// inside `[lcc_min, lcc_max]`; regenerates until accepted.
pub fn gen_scale_free(params: &ScaleFreeParams, stream: RngStream) -> Result<Graph> {
    if !(-4.0..=-2.0).contains(&params.gamma) {
        return Err(Error::param(format!("gamma = {} outside [-4, -2]", params.gamma)));
    }
    if params.lcc_min > params.lcc_max {
        return Err(Error::param("lcc window has lcc_min > lcc_max"));
    }
    let mut rng = stream.rng();
    let mut last = 0;
    for _ in 0..params.max_attempts {
        let degrees = power_law_degrees(params.n_nodes, params.gamma, params.k_min, &mut rng)?;
        let g = configuration_model(&degrees, &mut rng)?;
        let (lcc, _) = g.largest_connected_component()?;
        last = lcc.n_nodes();
        if (params.lcc_min..=params.lcc_max).contains(&last) {
            return Ok(lcc);
        }
    }
    Err(Error::Generation {
        attempts: params.max_attempts,
        reason: format!(
            "largest component never inside [{}, {}] (last size {last})",
            params.lcc_min, params.lcc_max
        ),
    })
}

/// Clique on `0..n_core` with a periphery grown one node at a time: each new
/// node links to a uniform core node with probability `p`, otherwise to a
/// uniform earlier periphery node. The first periphery node always lands on
/// the core since no periphery exists yet.
pub fn gen_core_periphery(n_core: usize, n_total: usize, p: f64, stream: RngStream) -> Result<(Graph, NodeSet)> {
    if n_core == 0 || n_core >= n_total {
        return Err(Error::param(format!("need 1 <= n_core < n_total, got {n_core}, {n_total}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p = {p} outside [0, 1]")));
    }
    let mut rng = stream.rng();
    let mut edges = Vec::with_capacity(n_core * (n_core - 1) / 2 + n_total - n_core);
    for i in 0..n_core {
        for j in i + 1..n_core {
            edges.push((i, j));
        }
    }
    for node in n_core..n_total {
        let to_core = rng.random_bool(p);
        let target = if to_core || node == n_core {
            rng.random_range(0..n_core)
        } else {
            rng.random_range(n_core..node)
        };
        edges.push((target, node));
    }
    let core = NodeSet::new((0..n_core).collect(), n_total)?;
    Ok((Graph::new(n_total, edges)?, core))
}

/// Watts–Strogatz small world: ring lattice with `k_mean / 2` neighbors per
/// side, each lattice edge rewired with probability `p_ws` to a uniform node
/// that is neither the source nor already adjacent to it.
pub fn gen_watts_strogatz(n: usize, k_mean: usize, p_ws: f64, stream: RngStream) -> Result<Graph> {
    if k_mean % 2 != 0 || k_mean >= n {
        return Err(Error::param(format!("need even k_mean < n, got k_mean = {k_mean}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&p_ws) {
        return Err(Error::param(format!("p_ws = {p_ws} outside [0, 1]")));
    }
    let mut rng = stream.rng();
    let mut adj: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for u in 0..n {
        for j in 1..=k_mean / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k_mean / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !rng.random_bool(p_ws) || !adj[u].contains(&v) {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, set)| set.iter().filter(move |&&v| u < v).map(move |&v| (u, v)));
    Graph::new(n, edges)
}

/// Circulant ring where every node links to its `k / 2` nearest nodes on each
/// side.
pub fn gen_regular_ring(n: usize, k: usize) -> Result<Graph> {
    if k % 2 != 0 || k >= n {
        return Err(Error::param(format!("need even k < n, got k = {k}, n = {n}")));
    }
    Graph::new(n, (0..n).flat_map(|u| (1..=k / 2).map(move |j| (u, (u + j) % n))))
}

/// Star with hub `0` and leaves `1..n`.
pub fn gen_star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::param("star needs at least 2 nodes"));
    }
    Graph::new(n, (1..n).map(|leaf| (0, leaf)))
}

/// Degree-preserving double-edge swaps. Each switch picks two edges on four
/// distinct nodes and exchanges one endpoint between them; swaps that would
/// create a loop or duplicate edge are rejected and resampled. Only
/// successful switches count toward `n_switches`.
pub fn criss_cross_reshuffle(g: &Graph, n_switches: usize, stream: RngStream) -> Result<Graph> {
    if n_switches == 0 {
        return Ok(g.clone());
    }
    if g.n_edges() < 2 {
        return Err(Error::param("criss-cross needs at least two edges"));
    }
    let max_attempts = 1000 * n_switches + 10_000;
    let mut rng = stream.rng();
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    let mut present: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut done = 0;
    let mut attempts = 0;
    while done < n_switches {
        if attempts == max_attempts {
            return Err(Error::Reshuffle {
                attempts,
                done,
                requested: n_switches,
            });
        }
        attempts += 1;
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[j];
        if rng.random_bool(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        if a == c || a == d || b == c || b == d {
            continue;
        }
        // (a, b), (c, d) -> (a, d), (c, b)
        let e1 = key(a, d);
        let e2 = key(c, b);
        if present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&edges[i]);
        present.remove(&edges[j]);
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
        done += 1;
    }
    Graph::new(g.n_nodes(), edges)
}
