//! Kuramoto dynamics on a network, with and without pinning control.
//!
//! ```text
//! dφ_k/dt = ω_k + (K/N) Σ_j A_kj sin(φ_j − φ_k) + S_k
//! ```
//!
//! The control `S` is read from the pinned oscillators only. Each controller
//! `k` receives `h̃_k = −(c K²/4) R R̃_k cos(ψ − φ_k)`, where
//!
//! ```text
//! R̃_k e^{iψ̃_k} = (1/M) Σ_{j pinned, j ≠ k} e^{iφ_j} / (ω_j − ω_k)
//! ```
//!
//! and every other node receives `e^{-2}` times the sum of `h̃_l` over the
//! controllers adjacent to it. The resonant `j = k` term has a zero
//! denominator and is left out.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};

/// Attenuation applied to first neighbors of a controller, `e^{-2 r}` at `r = 1`.
pub const DEFAULT_NEIGHBOR_DECAY: f64 = 0.135_335_283_236_612_7;

/// Smallest admissible `|ω_j − ω_k|` between two controllers.
pub const DEFAULT_FREQ_GAP_MIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderParameter {
    pub r: f64,
    /// Phase angle in `[0, 2π)`.
    pub psi: f64,
}

impl OrderParameter {
    fn from_sums(re: f64, im: f64, n: f64) -> Self {
        let (re, im) = (re / n, im / n);
        OrderParameter {
            r: re.hypot(im).min(1.0),
            psi: wrap(im.atan2(re)),
        }
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn order_parameter(phases: &[f64]) -> OrderParameter {
    let (re, im) = phases
        .iter()
        .fold((0.0, 0.0), |(re, im), &p| (re + p.cos(), im + p.sin()));
    OrderParameter::from_sums(re, im, phases.len().max(1) as f64)
}

pub struct OscillatorSystem<'g> {
    pub graph: &'g Graph,
    pub phases: Vec<f64>,
    pub omegas: Vec<f64>,
    pub coupling: f64,
}

impl<'g> OscillatorSystem<'g> {
    pub fn new(graph: &'g Graph, phases: Vec<f64>, omegas: Vec<f64>, coupling: f64) -> Result<Self> {
        let n = graph.n_nodes();
        if phases.len() != n || omegas.len() != n {
            return Err(Error::param(format!(
                "expected {n} phases and frequencies, got {} and {}",
                phases.len(),
                omegas.len()
            )));
        }
        Ok(OscillatorSystem {
            graph,
            phases,
            omegas,
            coupling,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub controllers: NodeSet,
    /// Signal strength `c ≥ 0`.
    pub strength: f64,
    pub neighbor_decay: f64,
    pub freq_gap_min: f64,
}

impl ControlConfig {
    pub fn new(controllers: NodeSet, strength: f64) -> Self {
        ControlConfig {
            controllers,
            strength,
            neighbor_decay: DEFAULT_NEIGHBOR_DECAY,
            freq_gap_min: DEFAULT_FREQ_GAP_MIN,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.strength >= 0.0) {
            return Err(Error::param(format!("control strength {} must be >= 0", self.strength)));
        }
        if !(self.neighbor_decay > 0.0 && self.neighbor_decay <= 1.0) {
            return Err(Error::param(format!("neighbor decay {} outside (0, 1]", self.neighbor_decay)));
        }
        Ok(())
    }
}

/// Checks that every pair drawn from `nodes` is at least `min_gap` apart in
/// frequency.
pub fn check_frequency_gaps(omegas: &[f64], nodes: &[usize], min_gap: f64) -> Result<()> {
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            let gap = (omegas[i] - omegas[j]).abs();
            if !(gap >= min_gap) {
                return Err(Error::Resonance {
                    a: i,
                    b: j,
                    gap,
                    min_gap,
                });
            }
        }
    }
    Ok(())
}

/// Controller-restricted order parameters `(R̃_k, ψ̃_k)`, one per controller
/// in the order of `controllers`.
pub fn tilde_order(
    phases: &[f64],
    omegas: &[f64],
    controllers: &NodeSet,
    freq_gap_min: f64,
) -> Result<Vec<OrderParameter>> {
    let pinned = controllers.as_slice();
    if pinned.is_empty() {
        return Err(Error::param("tilde order parameter needs at least one controller"));
    }
    check_frequency_gaps(omegas, pinned, freq_gap_min)?;
    let m = pinned.len() as f64;
    Ok(pinned
        .iter()
        .map(|&k| {
            let (re, im) = pinned.iter().filter(|&&j| j != k).fold((0.0, 0.0), |(re, im), &j| {
                let w = 1.0 / (omegas[j] - omegas[k]);
                (re + w * phases[j].cos(), im + w * phases[j].sin())
            });
            let (re, im) = (re / m, im / m);
            OrderParameter {
                r: re.hypot(im),
                psi: wrap(im.atan2(re)),
            }
        })
        .collect())
}

/// Precomputed right-hand side of the (controlled) Kuramoto system.
struct VectorField<'a> {
    graph: &'a Graph,
    omegas: &'a [f64],
    coupling_per_node: f64,
    control: Option<ControlTables>,
    sin: Vec<f64>,
    cos: Vec<f64>,
}

struct ControlTables {
    pinned: Vec<usize>,
    /// Row `k`: `1 / (ω_j − ω_k)` for `j ≠ k`, zero on the diagonal.
    inv_gap: Vec<f64>,
    /// `c K² / 4`.
    gain: f64,
    decay: f64,
    /// For every unpinned node with pinned neighbors: the node and the
    /// positions of those neighbors in `pinned`.
    spill: Vec<(usize, Vec<usize>)>,
    h: Vec<f64>,
}

impl<'a> VectorField<'a> {
    fn new(graph: &'a Graph, omegas: &'a [f64], coupling: f64, ctl: Option<&ControlConfig>) -> Result<Self> {
        let n = graph.n_nodes();
        let control = match ctl {
            Some(ctl) if !ctl.controllers.is_empty() => {
                ctl.validate()?;
                let pinned = ctl.controllers.as_slice().to_vec();
                check_frequency_gaps(omegas, &pinned, ctl.freq_gap_min)?;
                let m = pinned.len();
                let mut inv_gap = vec![0.0; m * m];
                for (a, &k) in pinned.iter().enumerate() {
                    for (b, &j) in pinned.iter().enumerate() {
                        if a != b {
                            inv_gap[a * m + b] = 1.0 / (omegas[j] - omegas[k]);
                        }
                    }
                }
                let mut position = vec![usize::MAX; n];
                for (a, &k) in pinned.iter().enumerate() {
                    position[k] = a;
                }
                let spill = (0..n)
                    .filter(|&v| position[v] == usize::MAX)
                    .filter_map(|v| {
                        let near: Vec<usize> = graph
                            .neighbors(v)
                            .iter()
                            .filter(|&&u| position[u] != usize::MAX)
                            .map(|&u| position[u])
                            .collect();
                        (!near.is_empty()).then_some((v, near))
                    })
                    .collect();
                Some(ControlTables {
                    pinned,
                    inv_gap,
                    gain: ctl.strength * coupling * coupling / 4.0,
                    decay: ctl.neighbor_decay,
                    spill,
                    h: vec![0.0; m],
                })
            }
            Some(ctl) => {
                ctl.validate()?;
                None
            }
            None => None,
        };
        Ok(VectorField {
            graph,
            omegas,
            coupling_per_node: coupling / n.max(1) as f64,
            control,
            sin: vec![0.0; n],
            cos: vec![0.0; n],
        })
    }

    /// Writes the uncontrolled drift into `out` and returns the unnormalized
    /// phasor sums `(Σ cos φ, Σ sin φ)`.
    fn eval_free(&mut self, phases: &[f64], out: &mut [f64]) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &p) in phases.iter().enumerate() {
            let (s, c) = p.sin_cos();
            self.sin[i] = s;
            self.cos[i] = c;
            re += c;
            im += s;
        }
        for (k, slot) in out.iter_mut().enumerate() {
            let (mut ss, mut cc) = (0.0, 0.0);
            for &j in self.graph.neighbors(k) {
                ss += self.sin[j];
                cc += self.cos[j];
            }
            // Σ sin(φ_j − φ_k) = cos φ_k Σ sin φ_j − sin φ_k Σ cos φ_j
            *slot = self.omegas[k] + self.coupling_per_node * (self.cos[k] * ss - self.sin[k] * cc);
        }
        (re, im)
    }

    /// Adds the control signal, given the phasor sums of the current state.
    fn add_control(&mut self, sums: (f64, f64), out: &mut [f64]) {
        let Some(ctl) = self.control.as_mut() else {
            return;
        };
        let n = self.sin.len() as f64;
        // R cos(ψ − φ_k) = X cos φ_k + Y sin φ_k with (X, Y) the mean phasor.
        let (x, y) = (sums.0 / n, sums.1 / n);
        let m = ctl.pinned.len();
        let inv_m = 1.0 / m as f64;
        for a in 0..m {
            let row = &ctl.inv_gap[a * m..(a + 1) * m];
            let (mut re, mut im) = (0.0, 0.0);
            for (b, &j) in ctl.pinned.iter().enumerate() {
                re += row[b] * self.cos[j];
                im += row[b] * self.sin[j];
            }
            let tilde_r = inv_m * re.hypot(im);
            let k = ctl.pinned[a];
            let h = -ctl.gain * tilde_r * (x * self.cos[k] + y * self.sin[k]);
            ctl.h[a] = h;
            out[k] += h;
        }
        for (v, near) in &ctl.spill {
            let s: f64 = near.iter().map(|&a| ctl.h[a]).sum();
            out[*v] += ctl.decay * s;
        }
    }

    fn eval(&mut self, phases: &[f64], out: &mut [f64]) {
        let sums = self.eval_free(phases, out);
        self.add_control(sums, out);
    }
}

/// Control term `S` for the current state of `sys`.
pub fn control_signal(sys: &OscillatorSystem<'_>, ctl: &ControlConfig) -> Result<Vec<f64>> {
    let n = sys.graph.n_nodes();
    let mut field = VectorField::new(sys.graph, &sys.omegas, sys.coupling, Some(ctl))?;
    let mut free = vec![0.0; n];
    let sums = field.eval_free(&sys.phases, &mut free);
    let mut out = vec![0.0; n];
    field.add_control(sums, &mut out);
    Ok(out)
}

/// Phase velocities of the (optionally controlled) system.
pub fn rhs(sys: &OscillatorSystem<'_>, ctl: Option<&ControlConfig>) -> Result<Vec<f64>> {
    let mut field = VectorField::new(sys.graph, &sys.omegas, sys.coupling, ctl)?;
    let mut out = vec![0.0; sys.graph.n_nodes()];
    field.eval(&sys.phases, &mut out);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationParams {
    pub dt: f64,
    pub t_end: f64,
    /// Record `R(t)` every this many steps.
    pub record_every: usize,
    /// Also keep the wrapped phases at each recorded time.
    pub keep_phases: bool,
}

impl Default for IntegrationParams {
    fn default() -> Self {
        IntegrationParams {
            dt: 0.05,
            t_end: 200.0,
            record_every: 1,
            keep_phases: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub r_series: Vec<f64>,
    pub phases: Option<Vec<Vec<f64>>>,
    /// Wrapped phases at the last step.
    pub final_phases: Vec<f64>,
}

/// Classical fixed-step RK4 from the state in `sys`. `R(t)` is recorded at
/// `t = 0` and after every `record_every` steps; the number of steps is
/// `round(t_end / dt)`.
pub fn integrate(sys: &OscillatorSystem<'_>, ctl: Option<&ControlConfig>, params: &IntegrationParams) -> Result<Trajectory> {
    if !(params.dt > 0.0) || !(params.t_end > 0.0) {
        return Err(Error::param("dt and t_end must be positive"));
    }
    let every = params.record_every.max(1);
    let n = sys.graph.n_nodes();
    let steps = (params.t_end / params.dt).round().max(1.0) as usize;
    let dt = params.dt;
    let mut field = VectorField::new(sys.graph, &sys.omegas, sys.coupling, ctl)?;

    let mut phi = sys.phases.clone();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    let capacity = steps / every + 1;
    let mut times = Vec::with_capacity(capacity);
    let mut r_series = Vec::with_capacity(capacity);
    let mut snapshots = params.keep_phases.then(|| Vec::with_capacity(capacity));
    let mut record = |step: usize, phi: &[f64]| {
        times.push(step as f64 * dt);
        r_series.push(order_parameter(phi).r);
        if let Some(s) = snapshots.as_mut() {
            s.push(phi.iter().map(|&p| wrap(p)).collect());
        }
    };
    record(0, &phi);

    for step in 1..=steps {
        field.eval(&phi, &mut k1);
        for i in 0..n {
            tmp[i] = phi[i] + 0.5 * dt * k1[i];
        }
        field.eval(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = phi[i] + 0.5 * dt * k2[i];
        }
        field.eval(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = phi[i] + dt * k3[i];
        }
        field.eval(&tmp, &mut k4);
        for i in 0..n {
            phi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !phi.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        // Keep the unwrapped phases bounded without touching the flow.
        if step % 256 == 0 {
            for p in phi.iter_mut() {
                *p = wrap(*p);
            }
        }
        if step % every == 0 {
            record(step, &phi);
        }
    }
    Ok(Trajectory {
        times,
        r_series,
        phases: snapshots,
        final_phases: phi.iter().map(|&p| wrap(p)).collect(),
    })
}

/// The three bracketed terms of the untruncated control and their
/// combination `h_k = −(K²/4)(first − second − third)`, with all-node `R̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullControlTerms {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub third: Vec<f64>,
    pub h: Vec<f64>,
}

/// Untruncated first-order control term evaluated at `phases`:
///
/// ```text
/// first_k  = R R̃_k cos(ψ − ψ̃_k)
/// second_k = (1/N) Σ_l cos(φ_l − φ_k) cos(ψ̃_l − φ_l) R̃_l
/// third_k  = Σ_{l≠k} sin(φ_k − φ_l) / (ω_k − ω_l) · sin(ψ − φ_l) R
/// R̃_k e^{iψ̃_k} = (1/N) Σ_{j≠k} e^{iφ_j} / (ω_j − ω_k)
/// ```
pub fn full_control_reference(phases: &[f64], omegas: &[f64], coupling: f64, freq_gap_min: f64) -> Result<FullControlTerms> {
    let n = phases.len();
    if omegas.len() != n || n == 0 {
        return Err(Error::param("phases and frequencies must be nonempty and of equal length"));
    }
    let everyone: Vec<usize> = (0..n).collect();
    check_frequency_gaps(omegas, &everyone, freq_gap_min)?;
    let nf = n as f64;
    let OrderParameter { r, psi } = order_parameter(phases);
    let tilde: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let (re, im) = (0..n).filter(|&j| j != k).fold((0.0, 0.0), |(re, im), j| {
                let w = 1.0 / (omegas[j] - omegas[k]);
                (re + w * phases[j].cos(), im + w * phases[j].sin())
            });
            let (re, im) = (re / nf, im / nf);
            (re.hypot(im), im.atan2(re))
        })
        .collect();
    let mut first = vec![0.0; n];
    let mut second = vec![0.0; n];
    let mut third = vec![0.0; n];
    let mut h = vec![0.0; n];
    for k in 0..n {
        first[k] = r * tilde[k].0 * (psi - tilde[k].1).cos();
        second[k] = (0..n)
            .map(|l| (phases[l] - phases[k]).cos() * (tilde[l].1 - phases[l]).cos() * tilde[l].0)
            .sum::<f64>()
            / nf;
        third[k] = (0..n)
            .filter(|&l| l != k)
            .map(|l| (phases[k] - phases[l]).sin() / (omegas[k] - omegas[l]) * (psi - phases[l]).sin() * r)
            .sum();
        h[k] = -coupling * coupling / 4.0 * (first[k] - second[k] - third[k]);
    }
    Ok(FullControlTerms {
        first,
        second,
        third,
        h,
    })
}
