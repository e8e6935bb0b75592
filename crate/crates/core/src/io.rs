//! File formats: edge lists, result CSVs with JSON sidecars, plan files.
//!
//! CSV numbers use ten significant digits in scientific notation. The sidecar
//! next to every result CSV holds the full-precision result and the plan that
//! produced it, so a result can be read back losslessly or replayed.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::centrality::CentralityScores;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentPlan, ScanResult, ScanSpec};
use crate::graph::Graph;
use crate::metrics::{RowAxis, SweepResult, DEFAULT_THRESHOLD};

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Ten significant digits, `.` decimal separator. NaN prints as `nan`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.9e}")
    }
}

fn parse_num(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Graph read from an edge list, with the original label of every index.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    pub graph: Graph,
    pub labels: Vec<String>,
}

/// Parses `u v [w]` lines. Labels get indices in order of first appearance,
/// direction and weights are dropped, and `#` starts a comment line.
pub fn parse_edge_list_str(text: &str, origin: &Path) -> Result<EdgeList> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut pairs = Vec::new();
    let mut id = |label: &str| -> usize {
        *index.entry(label.to_string()).or_insert_with(|| {
            labels.push(label.to_string());
            labels.len() - 1
        })
    };
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg,
        };
        match tokens.len() {
            2 => {}
            3 => {
                tokens[2]
                    .parse::<f64>()
                    .map_err(|_| bad(format!("weight '{}' is not a number", tokens[2])))?;
            }
            n => return Err(bad(format!("expected 'u v [w]', found {n} fields"))),
        }
        pairs.push((id(tokens[0]), id(tokens[1])));
    }
    if labels.is_empty() {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            line: 0,
            msg: "edge list has no edges".into(),
        });
    }
    let graph = Graph::new(labels.len(), pairs)?;
    Ok(EdgeList { graph, labels })
}

pub fn parse_edge_list(path: impl AsRef<Path>) -> Result<EdgeList> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list_str(&text, path)
}

/// One `u v` line per edge. Uses `labels` when given, indices otherwise.
pub fn format_edge_list(g: &Graph, labels: Option<&[String]>) -> String {
    let mut out = String::new();
    for &(u, v) in g.edges() {
        match labels {
            Some(l) => writeln!(out, "{} {}", l[u], l[v]),
            None => writeln!(out, "{u} {v}"),
        }
        .unwrap();
    }
    out
}

pub fn write_edge_list(g: &Graph, labels: Option<&[String]>, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &format_edge_list(g, labels))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// `node,score` rows; `node` is the edge-list label when given.
pub fn centrality_csv(scores: &CentralityScores, labels: Option<&[String]>) -> String {
    let mut out = String::from("node,score\n");
    for (i, s) in scores.values.iter().enumerate() {
        match labels {
            Some(l) => writeln!(out, "{},{}", l[i], fmt_num(*s)),
            None => writeln!(out, "{i},{}", fmt_num(*s)),
        }
        .unwrap();
    }
    out
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,R\n");
    for (t, r) in traj.times.iter().zip(&traj.r_series) {
        writeln!(out, "{},{}", fmt_num(*t), fmt_num(*r)).unwrap();
    }
    out
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = format!("{},c,mean_rhat,std_rhat,n_valid_replicas\n", result.row_axis.column_name());
    for (i, m) in result.m_axis.iter().enumerate() {
        for (j, c) in result.c_axis.iter().enumerate() {
            writeln!(
                out,
                "{m},{},{},{},{}",
                fmt_num(*c),
                fmt_num(result.mean_rhat[i][j]),
                fmt_num(result.std_rhat[i][j]),
                result.n_valid[i][j]
            )
            .unwrap();
        }
    }
    out
}

pub fn scan_csv(result: &ScanResult) -> String {
    let mut out = String::from("parameter,strategy,k,mean_delta,std_delta,n_networks\n");
    for row in &result.rows {
        let k = row.k_core.map(|k| k.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{k},{},{},{}",
            fmt_num(row.parameter),
            row.strategy,
            fmt_num(row.mean),
            fmt_num(row.std),
            row.deltas.len()
        )
        .unwrap();
    }
    out
}

/// What a result file holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Sweep { result: SweepResult },
    Scan { spec: ScanSpec, result: ScanResult },
}

/// JSON stored beside a result CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub code_version: String,
    pub seed: u64,
    pub plan: ExperimentPlan,
    pub payload: Payload,
}

impl Sidecar {
    pub fn new(plan: &ExperimentPlan, payload: Payload) -> Self {
        Sidecar {
            schema_version: SCHEMA_VERSION,
            code_version: CODE_VERSION.into(),
            seed: plan.seed,
            plan: plan.clone(),
            payload,
        }
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_with_sidecar(csv_path: &Path, csv: &str, sidecar: &Sidecar) -> Result<()> {
    write_file(csv_path, csv)?;
    let mut json = serde_json::to_string_pretty(sidecar).map_err(|e| Error::Config(e.to_string()))?;
    json.push('\n');
    write_file(&sidecar_path(csv_path), &json)
}

pub fn write_results(result: &SweepResult, plan: &ExperimentPlan, path: impl AsRef<Path>) -> Result<()> {
    let sidecar = Sidecar::new(
        plan,
        Payload::Sweep {
            result: result.clone(),
        },
    );
    write_with_sidecar(path.as_ref(), &sweep_csv(result), &sidecar)
}

pub fn write_scan(result: &ScanResult, spec: &ScanSpec, plan: &ExperimentPlan, path: impl AsRef<Path>) -> Result<()> {
    let sidecar = Sidecar::new(
        plan,
        Payload::Scan {
            spec: spec.clone(),
            result: result.clone(),
        },
    );
    write_with_sidecar(path.as_ref(), &scan_csv(result), &sidecar)
}

pub fn read_sidecar(path: impl AsRef<Path>) -> Result<Sidecar> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != SCHEMA_VERSION {
        return Err(Error::Schema {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: e.to_string(),
    })
}

/// A sweep read back from disk, with its plan when a sidecar was found.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedSweep {
    pub result: SweepResult,
    pub plan: Option<ExperimentPlan>,
}

/// Reads a sweep CSV. The sidecar, when present, supplies the exact values;
/// a bare CSV is parsed on its own.
pub fn read_results(path: impl AsRef<Path>) -> Result<LoadedSweep> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    if side.exists() {
        let sidecar = read_sidecar(&side)?;
        return match sidecar.payload {
            Payload::Sweep { result } => Ok(LoadedSweep {
                result,
                plan: Some(sidecar.plan),
            }),
            Payload::Scan { .. } => Err(Error::Config(format!("{} holds a scan, not a sweep", path.display()))),
        };
    }
    Ok(LoadedSweep {
        result: parse_sweep_csv(&read_file(path)?, path)?,
        plan: None,
    })
}

pub fn parse_sweep_csv(text: &str, origin: &Path) -> Result<SweepResult> {
    let bad = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let row_axis = match cols.first() {
        Some(&"m") => RowAxis::Controllers,
        Some(&"k") => RowAxis::CoreControllers,
        _ => return Err(bad(1, format!("unexpected header '{header}'"))),
    };
    if cols.len() < 3 || cols[1] != "c" || cols[2] != "mean_rhat" {
        return Err(bad(1, format!("unexpected header '{header}'")));
    }
    let mut m_axis: Vec<usize> = Vec::new();
    let mut c_axis: Vec<f64> = Vec::new();
    let mut cells = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(bad(i + 1, format!("expected {} fields, found {}", cols.len(), fields.len())));
        }
        let m: usize = fields[0]
            .parse()
            .map_err(|_| bad(i + 1, format!("bad row value '{}'", fields[0])))?;
        let num = |k: usize| parse_num(fields[k]).ok_or_else(|| bad(i + 1, format!("bad number '{}'", fields[k])));
        let c = num(1)?;
        let mean = num(2)?;
        let std = if cols.len() > 3 { num(3)? } else { f64::NAN };
        let n_valid = match fields.get(4) {
            Some(f) => f.parse().map_err(|_| bad(i + 1, format!("bad count '{f}'")))?,
            None => 0,
        };
        if !m_axis.contains(&m) {
            m_axis.push(m);
        }
        if !c_axis.iter().any(|x| x.to_bits() == c.to_bits()) {
            c_axis.push(c);
        }
        cells.push((m, c, mean, std, n_valid));
    }
    let (rows, width) = (m_axis.len(), c_axis.len());
    if cells.len() != rows * width {
        return Err(bad(0, format!("{} cells do not fill a {rows}x{width} grid", cells.len())));
    }
    let mut mean_rhat = vec![vec![f64::NAN; width]; rows];
    let mut std_rhat = mean_rhat.clone();
    let mut n_valid = vec![vec![0; width]; rows];
    for (m, c, mean, std, n) in cells {
        let i = m_axis.iter().position(|&x| x == m).unwrap();
        let j = c_axis.iter().position(|x| x.to_bits() == c.to_bits()).unwrap();
        mean_rhat[i][j] = mean;
        std_rhat[i][j] = std;
        n_valid[i][j] = n;
    }
    let replicas = n_valid.iter().flatten().copied().max().unwrap_or(0);
    Ok(SweepResult {
        row_axis,
        m_axis,
        c_axis,
        mean_rhat,
        std_rhat,
        n_valid,
        flags: vec![],
        replicas,
        threshold: DEFAULT_THRESHOLD,
    })
}

/// Contents of a plan file: the experiment plus an optional `[scan]` table.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanFile {
    pub plan: ExperimentPlan,
    pub scan: Option<ScanSpec>,
}

pub fn parse_plan(text: &str, origin: &Path) -> Result<PlanFile> {
    let cfg = |e: toml::de::Error| Error::Config(format!("{}: {}", origin.display(), e.message()));
    let mut table: toml::Table = toml::from_str(text).map_err(cfg)?;
    let scan = match table.remove("scan") {
        Some(v) => Some(v.try_into::<ScanSpec>().map_err(cfg)?),
        None => None,
    };
    let plan: ExperimentPlan = toml::Value::Table(table).try_into().map_err(cfg)?;
    Ok(PlanFile { plan, scan })
}

pub fn load_plan(path: impl AsRef<Path>) -> Result<PlanFile> {
    let path = path.as_ref();
    parse_plan(&read_file(path)?, path)
}

pub fn save_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    write_file(path.as_ref(), text)
}
