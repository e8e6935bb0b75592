//! Experiment protocols: paired controlled/uncontrolled replicas, `(M, c)`
//! sweeps, core/periphery split sweeps and the γ / p scans.
//!
//! Every replica draws its randomness from a stream derived from
//! `(seed, cell index, replica index)`, and networks from
//! `(seed, replica index)`, so a plan and its seed fix every output bit
//! regardless of how many worker threads run it. Aggregation happens after
//! collection, in index order.

use std::f64::consts::TAU;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::centrality::DEFAULT_ALPHA;
use crate::dynamics::{
    check_frequency_gaps, integrate, ControlConfig, IntegrationParams, OscillatorSystem, DEFAULT_FREQ_GAP_MIN,
    DEFAULT_NEIGHBOR_DECAY,
};
use crate::error::{Error, Result};
use crate::generators::{
    criss_cross_reshuffle, gen_core_periphery, gen_regular_ring, gen_scale_free, gen_star, gen_watts_strogatz,
    ScaleFreeParams,
};
use crate::graph::{Graph, NodeSet};
use crate::io::parse_edge_list;
use crate::metrics::{
    asymptotic_order, delta_of_grid, mean_std, normalized_order, CellFlag, RowAxis, SweepResult,
    DEFAULT_BASELINE_EPSILON, DEFAULT_THRESHOLD, DEFAULT_TRANSIENT_FRACTION,
};
use crate::rng::{Domain, RngStream};
use crate::selection::{SelectionStrategy, Selector};

/// Coupling strength shipped as the default; the uncontrolled 10-node star
/// reaches a mean asymptotic order parameter above 0.9 with it.
pub const DEFAULT_COUPLING: f64 = 10.0;

/// Share of degenerate-baseline replicas above which a cell is unusable.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.2;

const MAX_OMEGA_DRAWS: usize = 10_000;

/// How many criss-cross switches to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwapCount {
    Exactly(usize),
    /// Half the edge count of the graph being rewired.
    HalfEdges,
}

impl SwapCount {
    pub fn resolve(self, n_edges: usize) -> usize {
        match self {
            SwapCount::Exactly(n) => n,
            SwapCount::HalfEdges => n_edges / 2,
        }
    }
}

impl FromStr for SwapCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("L/2") {
            return Ok(SwapCount::HalfEdges);
        }
        s.parse()
            .map(SwapCount::Exactly)
            .map_err(|_| Error::param(format!("swap count '{s}' is neither an integer nor L/2")))
    }
}

impl fmt::Display for SwapCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SwapCount::Exactly(n) => write!(f, "{n}"),
            SwapCount::HalfEdges => f.write_str("L/2"),
        }
    }
}

impl Serialize for SwapCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SwapCount::Exactly(n) => s.serialize_u64(*n as u64),
            SwapCount::HalfEdges => s.serialize_str("L/2"),
        }
    }
}

impl<'de> Deserialize<'de> for SwapCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(SwapCount::Exactly(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Where the networks of an experiment come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkSource {
    ScaleFree(ScaleFreeParams),
    CorePeriphery { n_core: usize, n_total: usize, p: f64 },
    WattsStrogatz { n: usize, k_mean: usize, p_ws: f64 },
    Star { n: usize },
    /// Circulant ring, optionally criss-crossed `switches` times per replica.
    RegularRing {
        n: usize,
        k: usize,
        #[serde(default)]
        switches: usize,
    },
    /// A fixed network read from an edge list, optionally reshuffled once.
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        reshuffle: Option<SwapCount>,
    },
}

impl NetworkSource {
    /// Whether each replica gets its own network realization.
    pub fn is_random(&self) -> bool {
        match self {
            NetworkSource::ScaleFree(_) | NetworkSource::CorePeriphery { .. } | NetworkSource::WattsStrogatz { .. } => {
                true
            }
            NetworkSource::RegularRing { switches, .. } => *switches > 0,
            NetworkSource::Star { .. } | NetworkSource::EdgeList { .. } => false,
        }
    }

    /// One realization, plus the core set for core-periphery networks.
    pub fn realize(&self, stream: RngStream) -> Result<(Graph, Option<NodeSet>)> {
        Ok(match self {
            NetworkSource::ScaleFree(params) => (gen_scale_free(params, stream)?, None),
            NetworkSource::CorePeriphery { n_core, n_total, p } => {
                let (g, core) = gen_core_periphery(*n_core, *n_total, *p, stream)?;
                (g, Some(core))
            }
            NetworkSource::WattsStrogatz { n, k_mean, p_ws } => (gen_watts_strogatz(*n, *k_mean, *p_ws, stream)?, None),
            NetworkSource::Star { n } => (gen_star(*n)?, None),
            NetworkSource::RegularRing { n, k, switches } => {
                let ring = gen_regular_ring(*n, *k)?;
                (criss_cross_reshuffle(&ring, *switches, stream)?, None)
            }
            NetworkSource::EdgeList { path, reshuffle } => {
                let g = parse_edge_list(path)?.graph;
                match reshuffle {
                    Some(swaps) => {
                        let n = swaps.resolve(g.n_edges());
                        (criss_cross_reshuffle(&g, n, stream)?, None)
                    }
                    None => (g, None),
                }
            }
        })
    }
}

/// Parameters of the oscillator dynamics shared by every replica.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsParams {
    pub coupling: f64,
    pub omega_mean: f64,
    pub omega_std: f64,
    pub freq_gap_min: f64,
    pub neighbor_decay: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub transient_fraction: f64,
    pub baseline_epsilon: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            coupling: DEFAULT_COUPLING,
            omega_mean: 1.0,
            omega_std: 0.1,
            freq_gap_min: DEFAULT_FREQ_GAP_MIN,
            neighbor_decay: DEFAULT_NEIGHBOR_DECAY,
            dt: 0.05,
            t_end: 200.0,
            record_every: 1,
            transient_fraction: DEFAULT_TRANSIENT_FRACTION,
            baseline_epsilon: DEFAULT_BASELINE_EPSILON,
        }
    }
}

impl DynamicsParams {
    pub fn integration(&self) -> IntegrationParams {
        IntegrationParams {
            dt: self.dt,
            t_end: self.t_end,
            record_every: self.record_every,
            keep_phases: false,
        }
    }
}

/// Fixed controller budget for core/periphery split sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreSplit {
    /// Total controllers `M`.
    pub m: usize,
    /// Core counts `k` to sweep; all of `0..=M` when absent.
    #[serde(default)]
    pub k_values: Option<Vec<usize>>,
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn de_m_axis<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Axis {
        Values(Vec<usize>),
        Range {
            start: usize,
            stop: usize,
            #[serde(default = "one")]
            step: usize,
        },
    }
    fn one() -> usize {
        1
    }
    Ok(match Axis::deserialize(d)? {
        Axis::Values(v) => v,
        Axis::Range { start, stop, step } => (start..=stop).step_by(step.max(1)).collect(),
    })
}

fn de_c_axis<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Axis {
        Values(Vec<f64>),
        Linspace { start: f64, stop: f64, count: usize },
    }
    Ok(match Axis::deserialize(d)? {
        Axis::Values(v) => v,
        Axis::Linspace { start, stop, count } => linspace(start, stop, count),
    })
}

/// A complete, self-describing experiment. Serialized into every result
/// sidecar so the run can be replayed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub network: NetworkSource,
    pub strategy: SelectionStrategy,
    #[serde(deserialize_with = "de_m_axis")]
    pub m_axis: Vec<usize>,
    #[serde(deserialize_with = "de_c_axis")]
    pub c_axis: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub alpha: f64,
    pub threshold: f64,
    pub dynamics: DynamicsParams,
    pub core_split: Option<CoreSplit>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            network: NetworkSource::ScaleFree(ScaleFreeParams::default()),
            strategy: SelectionStrategy::Degree,
            m_axis: (1..=30).collect(),
            c_axis: linspace(0.05, 3.0, 30),
            replicas: 100,
            seed: 0,
            alpha: DEFAULT_ALPHA,
            threshold: DEFAULT_THRESHOLD,
            dynamics: DynamicsParams::default(),
            core_split: None,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.c_axis.is_empty() {
            return Err(Error::Config("c_axis is empty".into()));
        }
        if self.core_split.is_none() && self.m_axis.is_empty() {
            return Err(Error::Config("m_axis is empty".into()));
        }
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.c_axis.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Config("control strengths must be >= 0".into()));
        }
        let d = &self.dynamics;
        if !(d.dt > 0.0 && d.t_end > 0.0) {
            return Err(Error::Config("dt and t_end must be positive".into()));
        }
        if !(d.omega_std >= 0.0) {
            return Err(Error::Config("omega_std must be >= 0".into()));
        }
        Ok(())
    }

    /// Scales the replica count, keeping at least one.
    pub fn scaled(mut self, scale: f64) -> Self {
        self.replicas = ((self.replicas as f64 * scale).round() as usize).max(1);
        self
    }

    /// Rows of the sweep and what they mean.
    pub fn rows(&self) -> (RowAxis, Vec<usize>) {
        match &self.core_split {
            Some(split) => (
                RowAxis::CoreControllers,
                split.k_values.clone().unwrap_or_else(|| (0..=split.m).collect()),
            ),
            None => (RowAxis::Controllers, self.m_axis.clone()),
        }
    }
}

/// One network of an ensemble together with its controller ranking.
#[derive(Clone, Debug)]
pub struct NetworkInstance {
    pub graph: Graph,
    pub core: Option<NodeSet>,
    pub selector: Selector,
}

impl NetworkInstance {
    pub fn new(graph: Graph, core: Option<NodeSet>, strategy: SelectionStrategy, alpha: f64) -> Result<Self> {
        let selector = Selector::new(&graph, strategy, alpha)?;
        Ok(NetworkInstance { graph, core, selector })
    }
}

/// Outcome of a single paired replica.
#[derive(Clone, Debug, PartialEq)]
pub enum ReplicaOutcome {
    Rhat(f64),
    /// Uncontrolled `R_as` at or below the baseline guard.
    Degenerate,
    Failed(String),
}

/// Aggregate of one sweep cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub mean: f64,
    pub std: f64,
    pub n_valid: usize,
    pub excluded: usize,
    pub unusable: bool,
    pub error: Option<String>,
}

impl CellStats {
    pub fn from_outcomes(outcomes: &[ReplicaOutcome]) -> Self {
        let values: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| match o {
                ReplicaOutcome::Rhat(v) => Some(*v),
                _ => None,
            })
            .collect();
        let excluded = outcomes
            .iter()
            .filter(|o| matches!(o, ReplicaOutcome::Degenerate))
            .count();
        let failure = outcomes.iter().find_map(|o| match o {
            ReplicaOutcome::Failed(msg) => Some(msg.clone()),
            _ => None,
        });
        let error = match failure {
            Some(msg) => Some(msg),
            None if values.is_empty() => Some("every replica had a degenerate baseline".into()),
            None => None,
        };
        let (mean, std) = mean_std(&values);
        let (mean, std) = if error.is_some() { (f64::NAN, f64::NAN) } else { (mean, std) };
        CellStats {
            mean,
            std,
            n_valid: values.len(),
            excluded,
            unusable: excluded as f64 > MAX_EXCLUDED_FRACTION * outcomes.len() as f64,
            error,
        }
    }
}

/// Which controllers a row of the sweep asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRow {
    Controllers(usize),
    CoreSplit { k_core: usize, m: usize },
}

/// A plan with its network ensemble realized.
pub struct Experiment {
    pub plan: ExperimentPlan,
    pub ensemble: Vec<NetworkInstance>,
}

/// Draws `N(mean, std)` frequencies until the controllers are pairwise
/// `freq_gap_min` apart.
fn draw_frequencies<R: Rng>(n: usize, controllers: &NodeSet, d: &DynamicsParams, rng: &mut R) -> Result<Vec<f64>> {
    let normal = Normal::new(d.omega_mean, d.omega_std).map_err(|e| Error::param(e.to_string()))?;
    for _ in 0..MAX_OMEGA_DRAWS {
        let omegas: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
        if check_frequency_gaps(&omegas, controllers.as_slice(), d.freq_gap_min).is_ok() {
            return Ok(omegas);
        }
    }
    Err(Error::Numerical(format!(
        "no frequency draw kept {} controllers {:e} apart",
        controllers.len(),
        d.freq_gap_min
    )))
}

/// Natural frequencies, then initial phases uniform on `[0, 2π)`.
pub fn paired_frequencies_and_phases(
    n: usize,
    controllers: &NodeSet,
    d: &DynamicsParams,
    rng: &mut impl Rng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let omegas = draw_frequencies(n, controllers, d, rng)?;
    let phases = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    Ok((omegas, phases))
}

/// Runs the uncontrolled and controlled systems from identical draws.
pub fn paired_replica(
    graph: &Graph,
    controllers: &NodeSet,
    strength: f64,
    d: &DynamicsParams,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let (omegas, phases) = paired_frequencies_and_phases(graph.n_nodes(), controllers, d, rng)?;
    let sys = OscillatorSystem::new(graph, phases, omegas, d.coupling)?;
    let params = d.integration();
    let free = integrate(&sys, None, &params)?;
    let ctl = ControlConfig {
        controllers: controllers.clone(),
        strength,
        neighbor_decay: d.neighbor_decay,
        freq_gap_min: d.freq_gap_min,
    };
    let controlled = integrate(&sys, Some(&ctl), &params)?;
    Ok((
        asymptotic_order(&free, d.transient_fraction)?,
        asymptotic_order(&controlled, d.transient_fraction)?,
    ))
}

impl Experiment {
    /// Realizes the ensemble: one network per replica for random sources,
    /// a single shared network otherwise.
    pub fn new(plan: ExperimentPlan) -> Result<Self> {
        plan.validate()?;
        let count = if plan.network.is_random() { plan.replicas } else { 1 };
        let ensemble = (0..count)
            .into_par_iter()
            .map(|r| {
                let stream = RngStream::derive(plan.seed, Domain::Network, &[r as u64]);
                let (g, core) = plan.network.realize(stream)?;
                NetworkInstance::new(g, core, plan.strategy, plan.alpha)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Experiment { plan, ensemble })
    }

    /// Runs the plan on a prebuilt ensemble.
    pub fn with_ensemble(plan: ExperimentPlan, ensemble: Vec<NetworkInstance>) -> Result<Self> {
        plan.validate()?;
        if ensemble.is_empty() {
            return Err(Error::param("empty network ensemble"));
        }
        Ok(Experiment { plan, ensemble })
    }

    fn controllers(&self, inst: &NetworkInstance, row: CellRow, stream: RngStream) -> Result<NodeSet> {
        match row {
            CellRow::Controllers(m) => inst.selector.select(m, stream),
            CellRow::CoreSplit { k_core, m } => {
                let core = inst
                    .core
                    .as_ref()
                    .ok_or_else(|| Error::Config("core split needs a core-periphery network".into()))?;
                inst.selector.select_core_split(core, k_core, m, stream)
            }
        }
    }

    /// One paired replica of the cell at `cell_index`.
    pub fn run_replica(&self, row: CellRow, strength: f64, cell_index: usize, replica: usize) -> ReplicaOutcome {
        let inst = &self.ensemble[replica % self.ensemble.len()];
        let stream = RngStream::derive(self.plan.seed, Domain::Cell, &[cell_index as u64, replica as u64]);
        let result = (|| {
            let controllers = self.controllers(inst, row, stream.child(1))?;
            let mut rng = stream.rng();
            paired_replica(&inst.graph, &controllers, strength, &self.plan.dynamics, &mut rng)
        })();
        match result {
            Ok((free, controlled)) => match normalized_order(controlled, free, self.plan.dynamics.baseline_epsilon) {
                Ok(r) => ReplicaOutcome::Rhat(r.0),
                Err(_) => ReplicaOutcome::Degenerate,
            },
            Err(e) => ReplicaOutcome::Failed(e.to_string()),
        }
    }

    /// Mean and spread of `R̂` over the plan's replicas for one cell.
    pub fn run_cell(&self, row: CellRow, strength: f64, cell_index: usize) -> CellStats {
        let outcomes: Vec<ReplicaOutcome> = (0..self.plan.replicas)
            .into_par_iter()
            .map(|r| self.run_replica(row, strength, cell_index, r))
            .collect();
        CellStats::from_outcomes(&outcomes)
    }

    /// Evaluates every `(row, c)` cell. Cell failures are recorded in the
    /// flags and leave NaN in the grid.
    pub fn run_sweep(&self) -> SweepResult {
        let (row_axis, rows) = self.plan.rows();
        let cells: Vec<CellRow> = match (&self.plan.core_split, row_axis) {
            (Some(split), RowAxis::CoreControllers) => rows
                .iter()
                .map(|&k| CellRow::CoreSplit { k_core: k, m: split.m })
                .collect(),
            _ => rows.iter().map(|&m| CellRow::Controllers(m)).collect(),
        };
        let n_cols = self.plan.c_axis.len();
        let n_cells = cells.len() * n_cols;
        let reps = self.plan.replicas;
        let outcomes: Vec<ReplicaOutcome> = (0..n_cells * reps)
            .into_par_iter()
            .map(|task| {
                let (cell, r) = (task / reps, task % reps);
                let (i, j) = (cell / n_cols, cell % n_cols);
                self.run_replica(cells[i], self.plan.c_axis[j], cell, r)
            })
            .collect();

        let mut mean_rhat = vec![vec![f64::NAN; n_cols]; cells.len()];
        let mut std_rhat = mean_rhat.clone();
        let mut n_valid = vec![vec![0; n_cols]; cells.len()];
        let mut flags = Vec::new();
        for (cell, chunk) in outcomes.chunks(reps).enumerate() {
            let (i, j) = (cell / n_cols, cell % n_cols);
            let stats = CellStats::from_outcomes(chunk);
            mean_rhat[i][j] = stats.mean;
            std_rhat[i][j] = stats.std;
            n_valid[i][j] = stats.n_valid;
            if stats.excluded > 0 || stats.error.is_some() {
                flags.push(CellFlag {
                    row: i,
                    col: j,
                    excluded: stats.excluded,
                    unusable: stats.unusable,
                    error: stats.error,
                });
            }
        }
        SweepResult {
            row_axis,
            m_axis: rows,
            c_axis: self.plan.c_axis.clone(),
            mean_rhat,
            std_rhat,
            n_valid,
            flags,
            replicas: reps,
            threshold: self.plan.threshold,
        }
    }
}

/// Single cell of `plan` at `(m, c)`, seeded as cell `cell_index`.
pub fn run_cell(plan: &ExperimentPlan, m: usize, strength: f64, cell_index: usize) -> Result<CellStats> {
    let exp = Experiment::new(plan.clone())?;
    Ok(exp.run_cell(CellRow::Controllers(m), strength, cell_index))
}

/// Full `(M, c)` synchronization map of `plan`.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<SweepResult> {
    let mut plan = plan.clone();
    plan.core_split = None;
    Ok(Experiment::new(plan)?.run_sweep())
}

/// `(k, c)` map for a core-periphery plan with a fixed controller budget.
pub fn run_core_split_sweep(plan: &ExperimentPlan) -> Result<SweepResult> {
    if plan.core_split.is_none() {
        return Err(Error::Config("core split sweep needs [core_split] m".into()));
    }
    if !matches!(plan.network, NetworkSource::CorePeriphery { .. }) {
        return Err(Error::Config("core split sweep needs a core-periphery network".into()));
    }
    Ok(Experiment::new(plan.clone())?.run_sweep())
}

/// δ distribution of one scan point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// γ for a gamma scan, p for a p scan.
    pub parameter: f64,
    pub strategy: SelectionStrategy,
    /// Controllers in the core (p scans only).
    pub k_core: Option<usize>,
    #[serde(with = "crate::metrics::nan_list")]
    pub deltas: Vec<f64>,
    #[serde(with = "crate::metrics::nan_float")]
    pub mean: f64,
    #[serde(with = "crate::metrics::nan_float")]
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanKind {
    Gamma,
    P,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub kind: ScanKind,
    pub rows: Vec<ScanRow>,
}

/// Settings shared by both scans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSpec {
    /// γ values for a gamma scan or p values for a p scan.
    pub values: Vec<f64>,
    pub strategies: Vec<SelectionStrategy>,
    /// Independent network realizations per scan point.
    pub networks: usize,
    /// Core splits whose δ is reported (p scans); `None` means all `0..=M`.
    pub k_values: Option<Vec<usize>>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            values: vec![],
            strategies: vec![
                SelectionStrategy::Random,
                SelectionStrategy::Degree,
                SelectionStrategy::Functionability,
            ],
            networks: 100,
            k_values: None,
        }
    }
}

fn scan_rows(
    kind: ScanKind,
    spec: &ScanSpec,
    template: &ExperimentPlan,
    make_source: impl Fn(f64) -> NetworkSource + Sync,
) -> Result<ScanResult> {
    if spec.networks == 0 || spec.strategies.is_empty() || spec.values.is_empty() {
        return Err(Error::Config("scan needs values, strategies and at least one network".into()));
    }
    let mut rows = Vec::new();
    for (vi, &value) in spec.values.iter().enumerate() {
        let source = make_source(value);
        let graphs = (0..spec.networks)
            .into_par_iter()
            .map(|i| source.realize(RngStream::derive(template.seed, Domain::Scan, &[vi as u64, i as u64])))
            .collect::<Result<Vec<_>>>()?;
        for &strategy in &spec.strategies {
            // deltas[i] holds one δ per reported row for network i.
            let per_network = graphs
                .iter()
                .enumerate()
                .map(|(i, (g, core))| {
                    let mut plan = template.clone();
                    plan.strategy = strategy;
                    plan.seed = RngStream::derive(template.seed, Domain::Scan, &[vi as u64, i as u64, 1]).stream;
                    let inst = NetworkInstance::new(g.clone(), core.clone(), strategy, plan.alpha)?;
                    let sweep = Experiment::with_ensemble(plan, vec![inst])?.run_sweep();
                    Ok(match kind {
                        ScanKind::Gamma => vec![sweep.delta()],
                        ScanKind::P => sweep
                            .mean_rhat
                            .iter()
                            .map(|row| delta_of_grid(std::slice::from_ref(row), sweep.threshold))
                            .collect(),
                    })
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            let reported: Vec<Option<usize>> = match kind {
                ScanKind::Gamma => vec![None],
                ScanKind::P => template.rows().1.into_iter().map(Some).collect(),
            };
            for (idx, k) in reported.into_iter().enumerate() {
                let deltas: Vec<f64> = per_network
                    .iter()
                    .map(|d| d.get(idx).copied().unwrap_or(f64::NAN))
                    .collect();
                let (mean, std) = mean_std(&deltas);
                rows.push(ScanRow {
                    parameter: value,
                    strategy,
                    k_core: k,
                    deltas,
                    mean,
                    std,
                });
            }
        }
    }
    Ok(ScanResult { kind, rows })
}

/// δ over independent scale-free realizations for each γ and strategy. Each
/// network gets its own `(M, c)` sweep with `template.replicas` frequency
/// draws per cell.
pub fn run_gamma_scan(spec: &ScanSpec, template: &ExperimentPlan) -> Result<ScanResult> {
    if spec.values.iter().any(|g| !(-4.0..=-2.0).contains(g)) {
        return Err(Error::Config("gamma values must lie in [-4, -2]".into()));
    }
    let base = match &template.network {
        NetworkSource::ScaleFree(p) => p.clone(),
        _ => ScaleFreeParams::default(),
    };
    let mut template = template.clone();
    template.core_split = None;
    scan_rows(ScanKind::Gamma, spec, &template, |gamma| {
        NetworkSource::ScaleFree(ScaleFreeParams {
            gamma,
            ..base.clone()
        })
    })
}

/// δ over independent core-periphery realizations for each p, strategy and
/// core split `k`. δ of a split is the share of the c axis with `R̂ ≤`
/// threshold.
pub fn run_p_scan(spec: &ScanSpec, template: &ExperimentPlan) -> Result<ScanResult> {
    if spec.values.iter().any(|p| !(0.5..=1.0).contains(p)) {
        return Err(Error::Config("p values must lie in [0.5, 1]".into()));
    }
    let (n_core, n_total) = match &template.network {
        NetworkSource::CorePeriphery { n_core, n_total, .. } => (*n_core, *n_total),
        _ => return Err(Error::Config("p scan needs a core-periphery network template".into())),
    };
    let m = template
        .core_split
        .as_ref()
        .ok_or_else(|| Error::Config("p scan needs [core_split] m".into()))?
        .m;
    if let Some(ks) = &spec.k_values {
        if ks.iter().any(|&k| k > m) {
            return Err(Error::Config(format!("k values must not exceed M = {m}")));
        }
    }
    let mut template = template.clone();
    if let Some(split) = &mut template.core_split {
        split.k_values = spec.k_values.clone();
    }
    scan_rows(ScanKind::P, spec, &template, |p| NetworkSource::CorePeriphery { n_core, n_total, p })
}

/// Runs `f` on a dedicated pool of `threads` workers (all cores if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}
