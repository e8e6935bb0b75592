//! Scalar diagnostics over trajectories, sweeps and graphs.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet, UNREACHABLE};

/// Cells with mean `R̂` at or below this are counted as desynchronized.
pub const DEFAULT_THRESHOLD: f64 = 0.15;
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.5;
/// Uncontrolled `R_as` below this makes `R̂` meaningless.
pub const DEFAULT_BASELINE_EPSILON: f64 = 1e-6;

/// Mean of `R(t)` over `t ≥ transient_fraction · t_end`.
pub fn asymptotic_order(traj: &Trajectory, transient_fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(Error::param(format!("transient fraction {transient_fraction} outside [0, 1)")));
    }
    let t_end = *traj.times.last().ok_or_else(|| Error::EmptyWindow("empty trajectory".into()))?;
    let cut = transient_fraction * t_end;
    let tail: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.r_series)
        .filter(|(&t, _)| t >= cut - 1e-9 * t_end.abs())
        .map(|(_, &r)| r)
        .collect();
    if tail.is_empty() {
        return Err(Error::EmptyWindow(format!("no samples after t = {cut}")));
    }
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// `R̂ = R_as(controlled) / R_as(uncontrolled)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rhat(pub f64);

pub fn normalized_order(controlled: f64, uncontrolled: f64, epsilon: f64) -> Result<Rhat> {
    if !(uncontrolled > epsilon) {
        return Err(Error::DegenerateBaseline {
            value: uncontrolled,
            epsilon,
        });
    }
    Ok(Rhat(controlled / uncontrolled))
}

/// Fraction of finite entries of `grid` that are `≤ threshold`, over the full
/// grid size.
pub fn delta_of_grid(grid: &[Vec<f64>], threshold: f64) -> f64 {
    let total: usize = grid.iter().map(Vec::len).sum();
    if total == 0 {
        return 0.0;
    }
    let hits = grid.iter().flatten().filter(|&&v| v <= threshold).count();
    hits as f64 / total as f64
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("pearson needs two equal-length samples of size >= 2"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numerical("pearson: zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Mean hop distance over unordered pairs of distinct nodes.
pub fn mean_distance(g: &Graph) -> Result<f64> {
    let n = g.n_nodes();
    if n < 2 {
        return Err(Error::param("mean distance needs at least two nodes"));
    }
    let mut total: u64 = 0;
    for s in 0..n {
        let d = g.bfs_distances(s);
        for &x in &d[s + 1..] {
            if x == UNREACHABLE {
                return Err(Error::Disconnected);
            }
            total += x as u64;
        }
    }
    Ok(total as f64 / (n * (n - 1) / 2) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerDistance {
    /// Mean over unpinned nodes of the hop count to the nearest controller.
    pub raw: f64,
    /// `raw` divided by the all-pairs mean distance.
    pub normalized: f64,
}

pub fn controller_distance_stats(g: &Graph, controllers: &NodeSet) -> Result<ControllerDistance> {
    if controllers.is_empty() || controllers.len() == g.n_nodes() {
        return Err(Error::param("need a controller set that is nonempty and not every node"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mask = controllers.mask(g.n_nodes());
    let d = g.multi_source_distances(controllers.as_slice());
    let free: Vec<usize> = (0..g.n_nodes()).filter(|&v| !mask[v]).collect();
    let raw = free.iter().map(|&v| d[v] as f64).sum::<f64>() / free.len() as f64;
    Ok(ControllerDistance {
        raw,
        normalized: raw / mean_distance(g)?,
    })
}

/// Local clustering of one node; nodes of degree < 2 count as 0.
pub fn local_clustering(g: &Graph, v: usize) -> f64 {
    let nb = g.neighbors(v);
    let k = nb.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if g.has_edge(a, b) {
                links += 1;
            }
        }
    }
    links as f64 / (k * (k - 1) / 2) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallWorld {
    pub clustering: f64,
    pub mean_distance: f64,
}

pub fn small_world_stats(g: &Graph) -> Result<SmallWorld> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let clustering = (0..g.n_nodes()).map(|v| local_clustering(g, v)).sum::<f64>() / g.n_nodes() as f64;
    Ok(SmallWorld {
        clustering,
        mean_distance: mean_distance(g)?,
    })
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// What the rows of a [`SweepResult`] count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowAxis {
    /// Total number of controllers `M`.
    Controllers,
    /// Controllers placed in the core, `k = 0..=M`, with `M` fixed.
    CoreControllers,
}

impl RowAxis {
    pub fn column_name(self) -> &'static str {
        match self {
            RowAxis::Controllers => "m",
            RowAxis::CoreControllers => "k",
        }
    }
}

/// Notes attached to a sweep cell that lost replicas or failed outright.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFlag {
    pub row: usize,
    pub col: usize,
    /// Replicas dropped for a degenerate baseline.
    pub excluded: usize,
    /// More than the tolerated share of replicas was excluded.
    pub unusable: bool,
    pub error: Option<String>,
}

/// Synchronization map: mean and spread of `R̂` over an `(M, c)` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub row_axis: RowAxis,
    pub m_axis: Vec<usize>,
    pub c_axis: Vec<f64>,
    /// `[row][col]`; NaN for cells without a valid replica.
    #[serde(with = "nan_grid")]
    pub mean_rhat: Vec<Vec<f64>>,
    #[serde(with = "nan_grid")]
    pub std_rhat: Vec<Vec<f64>>,
    pub n_valid: Vec<Vec<usize>>,
    pub flags: Vec<CellFlag>,
    pub replicas: usize,
    pub threshold: f64,
}

impl SweepResult {
    pub fn delta(&self) -> f64 {
        delta_fraction(self)
    }

    pub fn delta_at(&self, threshold: f64) -> f64 {
        delta_of_grid(&self.mean_rhat, threshold)
    }
}

/// Share of grid cells whose ensemble-mean `R̂` is at most the sweep threshold.
pub fn delta_fraction(sweep: &SweepResult) -> f64 {
    delta_of_grid(&sweep.mean_rhat, sweep.threshold)
}

/// JSON has no NaN; empty cells travel as `null`.
pub(crate) mod nan_grid {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(grid: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Vec<Option<f64>>> = grid
            .iter()
            .map(|row| row.iter().map(|v| v.is_finite().then_some(*v)).collect())
            .collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let opt = Vec::<Vec<Option<f64>>>::deserialize(d)?;
        Ok(opt
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect())
    }
}

/// Scalar counterpart of [`nan_grid`].
pub(crate) mod nan_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        v.is_finite().then_some(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// List counterpart of [`nan_grid`].
pub(crate) mod nan_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(list: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = list.iter().map(|v| v.is_finite().then_some(*v)).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt = Vec::<Option<f64>>::deserialize(d)?;
        Ok(opt.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
    }
}
