//! Command-line surface of the `kpin` binary.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for runtime failures.
//! Every failure prints a single `kpin: ...` line on stderr.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::centrality::{betweenness_scores, degree_scores, functionability_scores, DEFAULT_ALPHA};
use crate::dynamics::{integrate, ControlConfig, OscillatorSystem};
use crate::error::{Error, Result};
use crate::experiments::{
    paired_frequencies_and_phases, run_core_split_sweep, run_gamma_scan, run_p_scan, run_sweep, with_threads,
    CoreSplit, ExperimentPlan, NetworkSource, SwapCount,
};
use crate::generators::{criss_cross_reshuffle, ScaleFreeParams};
use crate::graph::Graph;
use crate::io::{
    centrality_csv, fmt_num, load_plan, parse_edge_list, read_results, save_text, trajectory_csv, write_edge_list,
    write_results, write_scan, PlanFile,
};
use crate::metrics::{asymptotic_order, pearson, small_world_stats};
use crate::rng::{Domain, RngStream};
use crate::selection::{SelectionStrategy, Selector};

#[derive(Debug, Parser)]
#[command(name = "kpin", version, about = "Pinning control of Kuramoto oscillator networks")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed; overrides the plan file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Multiplies replica and network counts.
    #[arg(long, global = true)]
    pub scale: Option<f64>,
    /// TOML plan file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (all cores by default).
    #[arg(long, global = true, env = "KPIN_THREADS")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "KPIN_OUT", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic network as an edge list.
    Generate(GenerateArgs),
    /// Per-node centrality scores as CSV.
    Centrality(CentralityArgs),
    /// One controlled trajectory R(t) as CSV.
    Simulate(SimulateArgs),
    /// (M, c) sweep of the mean normalized order parameter.
    Sweep(SweepArgs),
    /// (k, c) sweep with k of M controllers in the core.
    CoreSweep(SweepArgs),
    /// δ over scale-free networks for several exponents.
    GammaScan(ScanArgs),
    /// δ over core-periphery networks for several core densities.
    PScan(ScanArgs),
    /// Criss-cross rewiring of an edge list.
    Reshuffle(ReshuffleArgs),
    /// Summaries of result files and graphs.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Model {
    ScaleFree,
    CorePeriphery,
    WattsStrogatz,
    Star,
    Ring,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Network model; defaults to the plan's network.
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Power-law exponent (scale-free).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Core size (core-periphery).
    #[arg(long)]
    pub n_core: Option<usize>,
    /// Core link probability (core-periphery) or rewiring probability (Watts-Strogatz).
    #[arg(long)]
    pub p: Option<f64>,
    /// Mean degree (Watts-Strogatz, ring).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value = "network.edges")]
    pub name: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScoreKind {
    Degree,
    Betweenness,
    Functionability,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "functionability")]
    pub kind: ScoreKind,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value = "centrality.csv")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Edge list; the plan's network is used when absent.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub strategy: Option<SelectionStrategy>,
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long)]
    pub coupling: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value = "trajectory.csv")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub strategy: Option<SelectionStrategy>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Total controllers for a core sweep.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Comma-separated γ or p values; overrides `[scan] values`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub strategies: Option<Vec<SelectionStrategy>>,
    #[arg(long)]
    pub networks: Option<usize>,
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReshuffleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Number of successful switches, or `L/2` for half the edge count.
    #[arg(long, default_value = "L/2")]
    pub swaps: SwapCount,
    #[arg(long, default_value = "reshuffled.edges")]
    pub name: String,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["delta", "graph"])))]
pub struct AnalyzeArgs {
    /// Sweep CSV whose δ is printed.
    #[arg(long)]
    pub delta: Option<PathBuf>,
    /// Threshold on mean R̂; defaults to the one stored with the result.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Edge list whose size, clustering, path length and
    /// degree-functionability correlation are printed.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

/// Parses the process arguments, runs, and returns the exit status.
pub fn run_from_env() -> i32 {
    run_args(std::env::args_os())
}

pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("usage error");
            eprintln!("kpin: {}", first.trim_start_matches("error: "));
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("kpin: {msg}");
            if matches!(e, Error::Config(_) | Error::InvalidParameter(_)) {
                1
            } else {
                2
            }
        }
    }
}

fn plan_file(common: &Common) -> Result<PlanFile> {
    let mut file = match &common.config {
        Some(path) => load_plan(path)?,
        None => PlanFile {
            plan: ExperimentPlan::default(),
            scan: None,
        },
    };
    if let Some(seed) = common.seed {
        file.plan.seed = seed;
    }
    if let Some(scale) = common.scale {
        if !(scale > 0.0) {
            return Err(Error::Config(format!("--scale must be positive, got {scale}")));
        }
        file.plan = file.plan.scaled(scale);
        if let Some(scan) = &mut file.scan {
            scan.networks = ((scan.networks as f64 * scale).round() as usize).max(1);
        }
    }
    Ok(file)
}

pub fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    let threads = common.threads;
    match &cli.command {
        Command::Generate(a) => generate(common, a),
        Command::Centrality(a) => with_threads(threads, || centrality(common, a))?,
        Command::Simulate(a) => simulate(common, a),
        Command::Sweep(a) => with_threads(threads, || sweep(common, a, false))?,
        Command::CoreSweep(a) => with_threads(threads, || sweep(common, a, true))?,
        Command::GammaScan(a) => with_threads(threads, || scan(common, a, true))?,
        Command::PScan(a) => with_threads(threads, || scan(common, a, false))?,
        Command::Reshuffle(a) => reshuffle(common, a),
        Command::Analyze(a) => with_threads(threads, || analyze(common, a))?,
    }
}

fn out_path(common: &Common, name: &str) -> PathBuf {
    common.out.join(name)
}

fn generate(common: &Common, a: &GenerateArgs) -> Result<()> {
    let plan = plan_file(common)?.plan;
    let need = |v: Option<usize>, what: &str| v.ok_or_else(|| Error::Config(format!("--{what} is required")));
    let source = match a.model {
        None => plan.network.clone(),
        Some(Model::ScaleFree) => {
            let mut p = ScaleFreeParams::default();
            if let Some(g) = a.gamma {
                p.gamma = g;
            }
            if let Some(n) = a.n {
                p.n_nodes = n;
            }
            NetworkSource::ScaleFree(p)
        }
        Some(Model::CorePeriphery) => NetworkSource::CorePeriphery {
            n_core: need(a.n_core, "n-core")?,
            n_total: need(a.n, "n")?,
            p: a.p.unwrap_or(0.7),
        },
        Some(Model::WattsStrogatz) => NetworkSource::WattsStrogatz {
            n: need(a.n, "n")?,
            k_mean: need(a.k, "k")?,
            p_ws: a.p.unwrap_or(0.1),
        },
        Some(Model::Star) => NetworkSource::Star { n: need(a.n, "n")? },
        Some(Model::Ring) => NetworkSource::RegularRing {
            n: need(a.n, "n")?,
            k: need(a.k, "k")?,
            switches: 0,
        },
    };
    let (g, core) = source.realize(RngStream::derive(plan.seed, Domain::Network, &[0]))?;
    let path = out_path(common, &a.name);
    write_edge_list(&g, None, &path)?;
    if let Some(core) = core {
        let list: Vec<String> = core.as_slice().iter().map(|v| v.to_string()).collect();
        save_text(path.with_extension("core"), &(list.join("\n") + "\n"))?;
    }
    println!("{} nodes, {} edges -> {}", g.n_nodes(), g.n_edges(), path.display());
    Ok(())
}

fn centrality(common: &Common, a: &CentralityArgs) -> Result<()> {
    let el = parse_edge_list(&a.graph)?;
    let scores = match a.kind {
        ScoreKind::Degree => degree_scores(&el.graph),
        ScoreKind::Betweenness => betweenness_scores(&el.graph),
        ScoreKind::Functionability => functionability_scores(&el.graph, a.alpha)?,
    };
    let path = out_path(common, &a.name);
    save_text(&path, &centrality_csv(&scores, Some(&el.labels)))?;
    println!("{} scores -> {}", scores.values.len(), path.display());
    Ok(())
}

fn load_graph(path: Option<&Path>, plan: &ExperimentPlan) -> Result<Graph> {
    match path {
        Some(p) => Ok(parse_edge_list(p)?.graph),
        None => Ok(plan
            .network
            .realize(RngStream::derive(plan.seed, Domain::Network, &[0]))?
            .0),
    }
}

fn simulate(common: &Common, a: &SimulateArgs) -> Result<()> {
    let mut plan = plan_file(common)?.plan;
    if let Some(k) = a.coupling {
        plan.dynamics.coupling = k;
    }
    if let Some(t) = a.t_end {
        plan.dynamics.t_end = t;
    }
    let strategy = a.strategy.unwrap_or(plan.strategy);
    let g = load_graph(a.graph.as_deref(), &plan)?;
    let stream = RngStream::derive(plan.seed, Domain::Misc, &[0]);
    let controllers = Selector::new(&g, strategy, plan.alpha)?.select(a.m, stream.child(1))?;
    let (omegas, phases) = paired_frequencies_and_phases(g.n_nodes(), &controllers, &plan.dynamics, &mut stream.rng())?;
    let sys = OscillatorSystem::new(&g, phases, omegas, plan.dynamics.coupling)?;
    let ctl = ControlConfig {
        controllers,
        strength: a.c,
        neighbor_decay: plan.dynamics.neighbor_decay,
        freq_gap_min: plan.dynamics.freq_gap_min,
    };
    let traj = integrate(&sys, Some(&ctl), &plan.dynamics.integration())?;
    let path = out_path(common, &a.name);
    save_text(&path, &trajectory_csv(&traj))?;
    let r_as = asymptotic_order(&traj, plan.dynamics.transient_fraction)?;
    println!("R_as = {} -> {}", fmt_num(r_as), path.display());
    Ok(())
}

fn sweep(common: &Common, a: &SweepArgs, core: bool) -> Result<()> {
    let mut plan = plan_file(common)?.plan;
    if let Some(s) = a.strategy {
        plan.strategy = s;
    }
    if let Some(r) = a.replicas {
        plan.replicas = r;
    }
    let result = if core {
        if let Some(m) = a.m {
            plan.core_split = Some(CoreSplit { m, k_values: None });
        }
        run_core_split_sweep(&plan)?
    } else {
        run_sweep(&plan)?
    };
    let default = if core { "core_sweep.csv" } else { "sweep.csv" };
    let path = out_path(common, a.name.as_deref().unwrap_or(default));
    write_results(&result, &plan, &path)?;
    for flag in &result.flags {
        if let Some(err) = &flag.error {
            eprintln!("kpin: cell ({}, {}): {err}", flag.row, flag.col);
        }
    }
    println!("delta = {} -> {}", fmt_num(result.delta()), path.display());
    Ok(())
}

fn scan(common: &Common, a: &ScanArgs, gamma: bool) -> Result<()> {
    let file = plan_file(common)?;
    let plan = file.plan;
    let mut spec = file.scan.unwrap_or_default();
    if let Some(v) = &a.values {
        spec.values = v.clone();
    }
    if let Some(s) = &a.strategies {
        spec.strategies = s.clone();
    }
    if let Some(n) = a.networks {
        spec.networks = n;
    }
    let result = if gamma {
        run_gamma_scan(&spec, &plan)?
    } else {
        run_p_scan(&spec, &plan)?
    };
    let default = if gamma { "gamma_scan.csv" } else { "p_scan.csv" };
    let path = out_path(common, a.name.as_deref().unwrap_or(default));
    write_scan(&result, &spec, &plan, &path)?;
    for row in &result.rows {
        let k = row.k_core.map(|k| format!(" k={k}")).unwrap_or_default();
        println!(
            "{} {}{k}: delta = {} +- {}",
            fmt_num(row.parameter),
            row.strategy,
            fmt_num(row.mean),
            fmt_num(row.std)
        );
    }
    Ok(())
}

fn reshuffle(common: &Common, a: &ReshuffleArgs) -> Result<()> {
    let seed = plan_file(common)?.plan.seed;
    let el = parse_edge_list(&a.graph)?;
    let n = a.swaps.resolve(el.graph.n_edges());
    let g = criss_cross_reshuffle(&el.graph, n, RngStream::derive(seed, Domain::Misc, &[1]))?;
    let path = out_path(common, &a.name);
    write_edge_list(&g, Some(&el.labels), &path)?;
    println!("{n} switches -> {}", path.display());
    Ok(())
}

fn analyze(_common: &Common, a: &AnalyzeArgs) -> Result<()> {
    if let Some(path) = &a.delta {
        let loaded = read_results(path)?;
        let t = a.threshold.unwrap_or(loaded.result.threshold);
        println!("{:?}", loaded.result.delta_at(t));
    }
    if let Some(path) = &a.graph {
        let g = parse_edge_list(path)?.graph;
        println!("nodes {}", g.n_nodes());
        println!("edges {}", g.n_edges());
        if g.is_connected() {
            let sw = small_world_stats(&g)?;
            println!("clustering {}", fmt_num(sw.clustering));
            println!("mean_distance {}", fmt_num(sw.mean_distance));
            let d = degree_scores(&g).values;
            let f = functionability_scores(&g, DEFAULT_ALPHA)?.values;
            println!("pearson_degree_functionability {}", fmt_num(pearson(&d, &f)?));
        } else {
            println!("components {}", g.components().len());
        }
    }
    Ok(())
}
