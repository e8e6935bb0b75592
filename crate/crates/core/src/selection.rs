//! Controller placement.
//!
//! Score-based strategies reduce to a fixed preference order over nodes
//! (score descending, or ascending for `betweenness-low`, ties by index), so
//! a [`Selector`] computes that order once per graph and then answers any
//! number of `m` / core-split queries without touching the centralities again.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::centrality::{betweenness_scores, degree_scores, functionability_scores, CentralityScores};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionStrategy {
    Random,
    Degree,
    Functionability,
    BetweennessHigh,
    BetweennessLow,
}

impl SelectionStrategy {
    pub const ALL: [SelectionStrategy; 5] = [
        SelectionStrategy::Random,
        SelectionStrategy::Degree,
        SelectionStrategy::Functionability,
        SelectionStrategy::BetweennessHigh,
        SelectionStrategy::BetweennessLow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectionStrategy::Random => "random",
            SelectionStrategy::Degree => "degree",
            SelectionStrategy::Functionability => "functionability",
            SelectionStrategy::BetweennessHigh => "betweenness-high",
            SelectionStrategy::BetweennessLow => "betweenness-low",
        }
    }
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SelectionStrategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param(format!("unknown selection strategy '{s}'")))
    }
}

/// Preference order of one graph under one strategy.
#[derive(Clone, Debug)]
pub struct Selector {
    strategy: SelectionStrategy,
    n_nodes: usize,
    /// `None` for the random strategy.
    order: Option<Vec<usize>>,
}

fn rank(scores: &[f64], descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = scores[a].total_cmp(&scores[b]);
        let cmp = if descending { cmp.reverse() } else { cmp };
        cmp.then(a.cmp(&b))
    });
    order
}

impl Selector {
    /// Computes whatever centrality `strategy` needs on `g`.
    pub fn new(g: &Graph, strategy: SelectionStrategy, alpha: f64) -> Result<Self> {
        let scores = match strategy {
            SelectionStrategy::Random => None,
            SelectionStrategy::Degree => Some(degree_scores(g)),
            SelectionStrategy::Functionability => Some(functionability_scores(g, alpha)?),
            SelectionStrategy::BetweennessHigh | SelectionStrategy::BetweennessLow => Some(betweenness_scores(g)),
        };
        Ok(match scores {
            Some(s) => Selector::from_scores(strategy, &s),
            None => Selector {
                strategy,
                n_nodes: g.n_nodes(),
                order: None,
            },
        })
    }

    /// Builds a selector from precomputed scores. For `Random` the scores are
    /// only used for the node count.
    pub fn from_scores(strategy: SelectionStrategy, scores: &CentralityScores) -> Self {
        let order = match strategy {
            SelectionStrategy::Random => None,
            SelectionStrategy::BetweennessLow => Some(rank(&scores.values, false)),
            _ => Some(rank(&scores.values, true)),
        };
        Selector {
            strategy,
            n_nodes: scores.values.len(),
            order,
        }
    }

    pub fn strategy(&self) -> SelectionStrategy {
        self.strategy
    }

    /// Full preference order, best first (`None` for random).
    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    /// Picks `m` nodes among `candidates` (ascending list).
    fn pick(&self, candidates: &[usize], m: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
        match &self.order {
            None => sample(rng, candidates.len(), m).into_iter().map(|i| candidates[i]).collect(),
            Some(order) => {
                let mut allowed = vec![false; self.n_nodes];
                for &c in candidates {
                    allowed[c] = true;
                }
                order.iter().copied().filter(|&v| allowed[v]).take(m).collect()
            }
        }
    }

    /// The `m` controllers of this strategy; an empty set disables control.
    pub fn select(&self, m: usize, stream: RngStream) -> Result<NodeSet> {
        if m > self.n_nodes {
            return Err(Error::Selection(format!("m = {m} exceeds {} nodes", self.n_nodes)));
        }
        let all: Vec<usize> = (0..self.n_nodes).collect();
        let mut chosen = self.pick(&all, m, &mut stream.rng());
        chosen.sort_unstable();
        NodeSet::new(chosen, self.n_nodes)
    }

    /// `k_core` controllers from `core` and `m - k_core` from its complement,
    /// each side ranked by the strategy restricted to that side.
    pub fn select_core_split(&self, core: &NodeSet, k_core: usize, m: usize, stream: RngStream) -> Result<NodeSet> {
        let mask = core.mask(self.n_nodes);
        let core_nodes: Vec<usize> = (0..self.n_nodes).filter(|&v| mask[v]).collect();
        let rest: Vec<usize> = (0..self.n_nodes).filter(|&v| !mask[v]).collect();
        if k_core > m || k_core > core_nodes.len() || m - k_core > rest.len() {
            return Err(Error::Selection(format!(
                "cannot place {k_core} of {m} controllers in a core of {} with {} other nodes",
                core_nodes.len(),
                rest.len()
            )));
        }
        let mut rng = stream.rng();
        let mut chosen = self.pick(&core_nodes, k_core, &mut rng);
        chosen.extend(self.pick(&rest, m - k_core, &mut rng));
        chosen.sort_unstable();
        NodeSet::new(chosen, self.n_nodes)
    }
}

/// One-shot selection on `g` with the default frustration parameter.
pub fn select_controllers(g: &Graph, strategy: SelectionStrategy, m: usize, stream: RngStream) -> Result<NodeSet> {
    Selector::new(g, strategy, crate::centrality::DEFAULT_ALPHA)?.select(m, stream)
}
