#![allow(dead_code)]

use kpin::Graph;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree on `n` nodes plus each remaining pair with probability `p`.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random graph, not necessarily connected.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

fn dense_laplacian(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n_nodes();
    let mut l = vec![vec![0.0; n]; n];
    for &(u, v) in g.edges() {
        l[u][v] -= 1.0;
        l[v][u] -= 1.0;
        l[u][u] += 1.0;
        l[v][v] += 1.0;
    }
    l
}

/// Builds every minor `L(k,l)`, inverts `L(k,l) L(k,l)ᵀ` in full and sums
/// all entries.
pub fn functionability_oracle(g: &Graph, alpha: f64) -> Vec<f64> {
    let n = g.n_nodes();
    let l = dense_laplacian(g);
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let mut total = 0.0;
            for col in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&i| i != k).collect();
                let cols: Vec<usize> = (0..n).filter(|&j| j != col).collect();
                let minor = DMatrix::from_fn(n - 1, n - 1, |i, j| l[rows[i]][cols[j]]);
                let gram = &minor * minor.transpose();
                let inv = gram.try_inverse().expect("minor of a connected graph is invertible");
                total += inv.iter().sum::<f64>();
            }
            let d = l[k][k];
            let pre = alpha * d / (2.0 * nf * nf);
            pre * pre * total
        })
        .collect()
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[s] = Some(0);
    let mut queue = std::collections::VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dist[v].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Lists every shortest path between each unordered pair and credits each
/// interior node with its share of those paths.
pub fn betweenness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.n_nodes();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in g.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut score = vec![0.0; n];
    for s in 0..n {
        let dist = bfs(&adj, s);
        for t in s + 1..n {
            let Some(target) = dist[t] else { continue };
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let last = *path.last().unwrap();
                if last == t {
                    paths.push(path);
                    continue;
                }
                for &w in &adj[last] {
                    if dist[w] == Some(path.len()) && path.len() <= target {
                        let mut next = path.clone();
                        next.push(w);
                        stack.push(next);
                    }
                }
            }
            let count = paths.len() as f64;
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    score[v] += 1.0 / count;
                }
            }
        }
    }
    score
}

pub fn degree_sequence(g: &Graph) -> Vec<usize> {
    g.degrees()
}

/// Smallest circular distance between two angles.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}
