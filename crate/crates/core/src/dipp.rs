//! Distributed parallel pursuit: nodes exchange support estimates in
//! synchronous rounds, fuse them by voting and re-run SIPP with the fused
//! side information.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fusion::{consensus_with, expansion, Truncation};
use crate::math::{norm_on, SupportSet};
use crate::metrics::support_distortion;
use crate::network::{is_connected, NetworkTopology};
use crate::pursuit::{sipp_run, SippOptions, SippResult};
use crate::signal::Scenario;

#[derive(Clone, Debug, PartialEq)]
pub struct DippOptions {
    pub sipp: SippOptions,
    pub max_outer: usize,
    pub truncation: Truncation,
    /// Vote with the own support from one round earlier instead of the
    /// latest one.
    pub lagged_own_support: bool,
    /// End the run once a round leaves every node state unchanged.
    pub fixed_point_stop: bool,
}

impl Default for DippOptions {
    fn default() -> Self {
        DippOptions {
            sipp: SippOptions::default(),
            max_outer: 20,
            truncation: Truncation::Lexicographic,
            lagged_own_support: false,
            fixed_point_stop: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    pub result: SippResult,
    /// Support held before the latest accepted update.
    pub prev_support: SupportSet,
    pub t_si: SupportSet,
    pub j_hat: SupportSet,
    pub frozen: bool,
}

impl NodeState {
    pub fn support(&self) -> &SupportSet {
        &self.result.support
    }

    pub fn residual_norm(&self) -> f64 {
        self.result.residual_norm
    }

    fn same_as(&self, other: &NodeState) -> bool {
        self.result.support == other.result.support
            && self.result.x_hat == other.result.x_hat
            && self.prev_support == other.prev_support
            && self.t_si == other.t_si
            && self.frozen == other.frozen
    }
}

/// Per-node observables after one round.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeRound {
    pub residual_norm: f64,
    /// `d(T_p, T̂_p)` for the node's current estimate.
    pub distortion: f64,
    pub j_hat_size: usize,
    /// Fraction of `Ĵ` inside the true support (`None` for empty `Ĵ`).
    pub j_hat_precision: Option<f64>,
    /// `|T_si ∩ T_p|`.
    pub t_si_matched: usize,
    pub frozen: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    /// `rounds[k][p]`, starting with the initialization at `k = 0`.
    pub rounds: Vec<Vec<NodeRound>>,
    /// Last executed round.
    pub stop_round: usize,
    /// Support-set messages sent, one per directed edge per round.
    pub messages: u64,
    /// Indices carried by those messages (`T` per message).
    pub indices_sent: u64,
}

impl RunTrace {
    pub const CSV_HEADER: &'static str =
        "round,node,residual_norm,distortion,j_hat_size,j_hat_precision,t_si_matched,frozen";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (k, row) in self.rounds.iter().enumerate() {
            for (p, n) in row.iter().enumerate() {
                let prec = n.j_hat_precision.map_or_else(|| "nan".to_string(), crate::harness::output::fmt_num);
                let _ = writeln!(
                    out,
                    "{k},{p},{},{},{},{prec},{},{}",
                    crate::harness::output::fmt_num(n.residual_norm),
                    crate::harness::output::fmt_num(n.distortion),
                    n.j_hat_size,
                    n.t_si_matched,
                    n.frozen as u8
                );
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DippResult {
    /// Final per-node state.
    pub nodes: Vec<NodeState>,
    /// Round-0 estimates, which are plain subspace pursuit.
    pub initial: Vec<SippResult>,
    pub trace: RunTrace,
}

impl DippResult {
    pub fn rounds(&self) -> usize {
        self.trace.stop_round
    }
}

fn observe(scenario: &Scenario, states: &[NodeState]) -> Vec<NodeRound> {
    states
        .iter()
        .zip(&scenario.nodes)
        .map(|(s, node)| {
            let truth = &node.signal.support;
            NodeRound {
                residual_norm: s.residual_norm(),
                distortion: support_distortion(truth, s.support()).unwrap_or(0.0),
                j_hat_size: s.j_hat.len(),
                j_hat_precision: (!s.j_hat.is_empty())
                    .then(|| s.j_hat.intersection(truth).len() as f64 / s.j_hat.len() as f64),
                t_si_matched: s.t_si.intersection(truth).len(),
                frozen: s.frozen,
            }
        })
        .collect()
}

fn check_sizes(scenario: &Scenario, topology: &NetworkTopology) -> Result<()> {
    if topology.node_count() != scenario.nodes.len() {
        return Err(Error::invalid(format!(
            "topology has {} nodes but scenario has {}",
            topology.node_count(),
            scenario.nodes.len()
        )));
    }
    Ok(())
}

/// Round 0: SIPP with empty side information at every node.
pub fn dipp_init(scenario: &Scenario, opts: &DippOptions) -> Result<Vec<NodeState>> {
    let t = scenario.sparsity();
    scenario
        .nodes
        .par_iter()
        .map(|node| {
            let result = sipp_run(&node.y, &node.matrix, t, &SupportSet::empty(), &opts.sipp)?;
            Ok(NodeState {
                prev_support: result.support.clone(),
                result,
                t_si: SupportSet::empty(),
                j_hat: SupportSet::empty(),
                frozen: false,
            })
        })
        .collect()
}

/// Side information node `p` would build from the current states.
pub fn fuse_at(
    p: usize,
    states: &[NodeState],
    topology: &NetworkTopology,
    n: usize,
    t: usize,
    opts: &DippOptions,
) -> Result<crate::fusion::FusionOutput> {
    let received: Vec<SupportSet> = topology
        .in_neighbors(p)
        .iter()
        .map(|&q| states[q].support().clone())
        .collect();
    let own = if opts.lagged_own_support { &states[p].prev_support } else { states[p].support() };
    let j_hat = consensus_with(&received, own, t, n, opts.truncation)?;
    expansion(&j_hat, &states[p].result.x_hat, t)
}

/// One synchronous round `k >= 1`: every node receives the latest supports
/// of its in-neighbors, fuses, and re-runs SIPP. Frozen nodes keep their
/// state. A node whose residual grows keeps its previous state and freezes.
pub fn dipp_round(
    states: &[NodeState],
    topology: &NetworkTopology,
    scenario: &Scenario,
    k: usize,
    opts: &DippOptions,
) -> Result<Vec<NodeState>> {
    if k == 0 {
        return Err(Error::invalid("rounds are numbered from 1"));
    }
    check_sizes(scenario, topology)?;
    let n = scenario.config.n;
    let t = scenario.sparsity();
    (0..states.len())
        .into_par_iter()
        .map(|p| {
            let old = &states[p];
            if old.frozen {
                return Ok(old.clone());
            }
            let fused = fuse_at(p, states, topology, n, t, opts)?;
            let node = &scenario.nodes[p];
            let result = sipp_run(&node.y, &node.matrix, t, &fused.t_si, &opts.sipp)?;
            if result.residual_norm > old.residual_norm() {
                let mut kept = old.clone();
                kept.frozen = true;
                return Ok(kept);
            }
            Ok(NodeState {
                prev_support: old.result.support.clone(),
                result,
                t_si: fused.t_si,
                j_hat: fused.j_hat,
                frozen: false,
            })
        })
        .collect()
}

pub fn dipp_run(scenario: &Scenario, topology: &NetworkTopology, opts: &DippOptions) -> Result<DippResult> {
    check_sizes(scenario, topology)?;
    let init = dipp_init(scenario, opts)?;
    dipp_run_from(scenario, topology, init, opts)
}

/// Runs the outer rounds starting from round-0 states computed by
/// [`dipp_init`], so one initialization can serve several topologies.
pub fn dipp_run_from(
    scenario: &Scenario,
    topology: &NetworkTopology,
    init: Vec<NodeState>,
    opts: &DippOptions,
) -> Result<DippResult> {
    check_sizes(scenario, topology)?;
    if init.len() != scenario.nodes.len() {
        return Err(Error::invalid("initial state count does not match the scenario"));
    }
    if !is_connected(topology) {
        log::warn!("running DIPP on a network that is not strongly connected");
    }
    let t = scenario.sparsity() as u64;
    let edges = topology.edge_count() as u64;

    let mut states = init;
    let initial: Vec<SippResult> = states.iter().map(|s| s.result.clone()).collect();
    let mut trace = RunTrace { rounds: vec![observe(scenario, &states)], ..Default::default() };

    for k in 1..=opts.max_outer {
        if states.iter().all(|s| s.frozen) {
            break;
        }
        let next = dipp_round(&states, topology, scenario, k, opts)?;
        trace.stop_round = k;
        trace.messages += edges;
        trace.indices_sent += edges * t;
        trace.rounds.push(observe(scenario, &next));
        let unchanged = next.iter().zip(&states).all(|(a, b)| a.same_as(b));
        states = next;
        if unchanged && opts.fixed_point_stop {
            break;
        }
    }
    Ok(DippResult { nodes: states, initial, trace })
}

/// `‖x_{T_si^c}‖ / ‖x_{T̂^c}‖` per node for the fusion that would follow
/// `states`, skipping nodes whose support is already exact.
pub fn measure_a_co(scenario: &Scenario, topology: &NetworkTopology, states: &[NodeState], opts: &DippOptions) -> Result<Vec<f64>> {
    let n = scenario.config.n;
    let t = scenario.sparsity();
    let mut out = Vec::new();
    for (p, node) in scenario.nodes.iter().enumerate() {
        let x = &node.signal.values;
        let fused = fuse_at(p, states, topology, n, t, opts)?;
        let missed = norm_on(x, &node.signal.support.difference(states[p].support()));
        if missed > 0.0 {
            let after = norm_on(x, &node.signal.support.difference(&fused.t_si));
            out.push(after / missed);
        }
    }
    Ok(out)
}
