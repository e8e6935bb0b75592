//! Node centralities used to rank controller candidates.
//!
//! Degree and betweenness are the usual quantities. Functionability is
//!
//! ```text
//! F_k = (α d_k / 2N²)² Σ_l 1ᵀ (L(k,l) L(k,l)ᵀ)⁻¹ 1
//! ```
//!
//! with `L(k,l)` the Laplacian stripped of row `k` and column `l`. The grand
//! sum equals `‖L(k,l)⁻¹ 1‖²`, and `L(k,l)` is a column permutation of the
//! grounded Laplacian `L(k,k)` after one rank-one column replacement. Since
//! the rows of `L(k,k)` sum to minus the removed column, Sherman–Morrison
//! collapses the whole `l` sum onto a single grounded solve `L(k,k) z = 1`
//! (with `z_k = 0`):
//!
//! ```text
//! Σ_l ‖L(k,l)⁻¹ 1‖² = Σ_l Σ_i (z_i − z_l)² = 2N Σ_i (z_i − z̄)²
//! ```
//!
//! so each node costs one Cholesky factorization instead of `N` solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};

/// Frustration parameter used when none is configured.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Normwise backward-error bound accepted for grounded solves.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentralityKind {
    Degree,
    Betweenness,
    Functionability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub kind: CentralityKind,
    pub values: Vec<f64>,
}

pub fn degree_scores(g: &Graph) -> CentralityScores {
    CentralityScores {
        kind: CentralityKind::Degree,
        values: g.degrees().into_iter().map(|d| d as f64).collect(),
    }
}

/// Exact betweenness (Brandes), each unordered pair counted once, endpoints
/// excluded, no normalization.
pub fn betweenness_scores(g: &Graph) -> CentralityScores {
    let n = g.n_nodes();
    let mut total = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        order.push(s);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    order.push(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in g.neighbors(w) {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                total[w] += delta[w];
            }
        }
    }
    CentralityScores {
        kind: CentralityKind::Betweenness,
        values: total.into_iter().map(|b| b / 2.0).collect(),
    }
}

/// Laplacian with row and column `k` removed.
pub fn grounded_laplacian(g: &Graph, k: usize) -> DMatrix<f64> {
    let l = g.laplacian();
    let keep: Vec<usize> = (0..g.n_nodes()).filter(|&i| i != k).collect();
    l.select_rows(&keep).select_columns(&keep)
}

/// Solves `L(k,k) z = 1` and returns `z` re-expanded to length `N` with
/// `z_k = 0`.
fn grounded_potential(g: &Graph, k: usize) -> Result<Vec<f64>> {
    let n = g.n_nodes();
    let a = grounded_laplacian(g, k);
    let ones = DVector::from_element(n - 1, 1.0);
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("grounded Laplacian at node {k} is not positive definite")))?;
    let z = chol.solve(&ones);
    let residual = (&a * &z - &ones).amax();
    let scale = a.lp_norm(1) * z.amax() + 1.0;
    if residual / scale > SOLVE_TOLERANCE || !z.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical(format!(
            "grounded solve at node {k}: relative residual {:e}",
            residual / scale
        )));
    }
    let mut full = Vec::with_capacity(n);
    full.extend(z.iter().take(k));
    full.push(0.0);
    full.extend(z.iter().skip(k));
    Ok(full)
}

/// Functionability of every node for frustration `alpha ∈ (0, π/2]`.
///
/// Fails on disconnected graphs, whose Laplacian minors are singular.
pub fn functionability_scores(g: &Graph, alpha: f64) -> Result<CentralityScores> {
    if !(alpha > 0.0 && alpha <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::param(format!("alpha = {alpha} outside (0, pi/2]")));
    }
    let n = g.n_nodes();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if n == 1 {
        return Ok(CentralityScores {
            kind: CentralityKind::Functionability,
            values: vec![0.0],
        });
    }
    let nf = n as f64;
    let values = (0..n)
        .into_par_iter()
        .map(|k| {
            let z = grounded_potential(g, k)?;
            let mean = z.iter().sum::<f64>() / nf;
            let spread: f64 = z.iter().map(|v| (v - mean) * (v - mean)).sum();
            let grand = 2.0 * nf * spread;
            let pre = alpha * g.degree(k) as f64 / (2.0 * nf * nf);
            let value = pre * pre * grand;
            Ok(if value < 0.0 && value.abs() < 1e-12 { 0.0 } else { value })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CentralityScores {
        kind: CentralityKind::Functionability,
        values,
    })
}

/// Smallest eigenvalue of the Laplacian with the controller rows and columns
/// removed.
pub fn reduced_laplacian_min_eig(g: &Graph, controllers: &NodeSet) -> Result<f64> {
    if controllers.is_empty() {
        return Err(Error::param("reduced Laplacian needs at least one controller"));
    }
    let mask = controllers.mask(g.n_nodes());
    let keep: Vec<usize> = (0..g.n_nodes()).filter(|&i| !mask[i]).collect();
    if keep.is_empty() {
        return Err(Error::param("every node is a controller; reduced Laplacian is empty"));
    }
    let l = g.laplacian().select_rows(&keep).select_columns(&keep);
    let eig = SymmetricEigen::new(l);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
