//! Monte-Carlo sweeps over measurement fraction, noise level and network
//! degree.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::dipp::{dipp_init, dipp_run_from, DippResult};
use crate::error::{Error, Result};
use crate::harness::config::{Algorithm, ExperimentConfig, TopologyKind};
use crate::harness::output::{fmt_num, CsvTable, SCHEMA_VERSION};
use crate::metrics::{mean_std, support_distortion, SrerAccumulator};
use crate::network::{build_complete, build_connected_watts_strogatz, build_ring, NetworkTopology};
use crate::rng::{derive_seed, stream, Domain};
use crate::signal::{gen_scenario_realization, Scenario, Smnr};

pub const CSV_COLUMNS: [&str; 23] = [
    "schema_version",
    "experiment_id",
    "algorithm",
    "topology",
    "degree_or_q",
    "p_rewire",
    "N",
    "M",
    "alpha",
    "T",
    "J",
    "I",
    "L",
    "smnr_db",
    "signal_kind",
    "trials",
    "srer_db_mean",
    "srer_db_std",
    "asce_mean",
    "asce_std",
    "outer_rounds_mean",
    "runtime_ms_mean",
    "seed",
];

/// Outcome of one algorithm on one trial (all `L` nodes).
#[derive(Clone, Debug, PartialEq)]
pub struct TrialStats {
    pub srer: SrerAccumulator,
    /// Mean support distortion over the nodes.
    pub asce: f64,
    pub outer_rounds: usize,
    pub runtime_ms: f64,
}

impl TrialStats {
    fn from_estimates<'a>(scenario: &Scenario, estimates: impl Iterator<Item = (&'a [f64], &'a crate::math::SupportSet)>) -> Result<Self> {
        let mut srer = SrerAccumulator::default();
        let mut dist = 0.0;
        for (node, (x_hat, support)) in scenario.nodes.iter().zip(estimates) {
            srer.add(&node.signal.values, x_hat);
            dist += support_distortion(&node.signal.support, support)?;
        }
        Ok(TrialStats { srer, asce: dist / scenario.nodes.len() as f64, outer_rounds: 0, runtime_ms: f64::NAN })
    }

    /// Trial SRER in dB and whether it reached the cap.
    pub fn srer_db(&self) -> (f64, bool) {
        self.srer.value().unwrap_or((f64::NAN, false))
    }
}

/// One CSV row: an algorithm (and for DIPP a degree) at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    /// `None` for SP, which does not use the network.
    pub topology: Option<TopologyKind>,
    pub degree: usize,
    pub p_rewire: f64,
    pub alpha: f64,
    pub m: usize,
    pub smnr: Smnr,
    pub trials: Vec<TrialStats>,
}

impl SweepRow {
    /// Ratio-of-sums SRER over every node of every trial.
    pub fn srer_db(&self) -> f64 {
        let mut acc = SrerAccumulator::default();
        for t in &self.trials {
            acc.merge(&t.srer);
        }
        acc.value().map(|v| v.0).unwrap_or(f64::NAN)
    }

    pub fn srer_db_std(&self) -> f64 {
        let per: Vec<f64> = self.trials.iter().map(|t| t.srer_db().0).collect();
        mean_std(&per).1
    }

    pub fn asce(&self) -> (f64, f64) {
        let per: Vec<f64> = self.trials.iter().map(|t| t.asce).collect();
        mean_std(&per)
    }

    /// Fraction of trials whose SRER reached the cap.
    pub fn capped_fraction(&self) -> f64 {
        self.trials.iter().filter(|t| t.srer_db().1).count() as f64 / self.trials.len() as f64
    }

    pub fn outer_rounds_mean(&self) -> f64 {
        self.trials.iter().map(|t| t.outer_rounds as f64).sum::<f64>() / self.trials.len() as f64
    }

    pub fn runtime_ms_mean(&self) -> f64 {
        self.trials.iter().map(|t| t.runtime_ms).sum::<f64>() / self.trials.len() as f64
    }

    fn record(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let (asce_mean, asce_std) = self.asce();
        let smnr = match self.smnr {
            Smnr::Clean => f64::INFINITY,
            Smnr::Db(v) => v,
        };
        vec![
            SCHEMA_VERSION.to_string(),
            cfg.id.clone(),
            self.algorithm.to_string(),
            self.topology.map_or("none", |t| t.as_str()).to_string(),
            self.degree.to_string(),
            fmt_num(self.p_rewire),
            cfg.n.to_string(),
            self.m.to_string(),
            fmt_num(self.alpha),
            (cfg.j + cfg.i).to_string(),
            cfg.j.to_string(),
            cfg.i.to_string(),
            cfg.l.to_string(),
            fmt_num(smnr),
            cfg.kind.to_string(),
            self.trials.len().to_string(),
            fmt_num(self.srer_db()),
            fmt_num(self.srer_db_std()),
            fmt_num(asce_mean),
            fmt_num(asce_std),
            fmt_num(self.outer_rounds_mean()),
            fmt_num(if cfg.timing { self.runtime_ms_mean() } else { f64::NAN }),
            cfg.master_seed.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&CSV_COLUMNS);
        for r in &self.rows {
            t.push(r.record(&self.config));
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.table().to_csv()
    }

    /// First row matching `algorithm` and, for DIPP, `degree`, at the given
    /// grid values.
    pub fn find(&self, algorithm: Algorithm, degree: Option<usize>, alpha: f64, smnr: Smnr) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            r.algorithm == algorithm
                && (degree.is_none() || Some(r.degree) == degree)
                && (r.alpha - alpha).abs() < 1e-12
                && r.smnr == smnr
        })
    }
}

/// Scenario of trial `trial` at grid point `(alpha_idx, smnr_idx)`.
///
/// Trials enumerate `matrix_realizations × data_realizations` with the data
/// index running fastest. All algorithms and degrees at a grid point see the
/// same scenarios.
pub fn trial_scenario(cfg: &ExperimentConfig, alpha_idx: usize, smnr_idx: usize, trial: usize) -> Result<Scenario> {
    let alpha = cfg.alphas[alpha_idx];
    let m = cfg.measurements(alpha)?;
    let mut sc = cfg.scenario(m, cfg.smnrs[smnr_idx]);
    sc.master_seed = derive_seed(cfg.master_seed, Domain::GridPoint, &[alpha_idx as u64, smnr_idx as u64]);
    let mi = (trial / cfg.data_realizations) as u64;
    let di = (trial % cfg.data_realizations) as u64;
    gen_scenario_realization(&sc, mi, di)
}

/// Network used for DIPP with the `degree_idx`-th degree in trial `trial`.
/// Small-world graphs are redrawn per trial; the draw does not depend on
/// the grid point.
pub fn trial_topology(cfg: &ExperimentConfig, degree_idx: usize, trial: usize) -> Result<NetworkTopology> {
    let axis = cfg.degree_axis();
    let d = axis[degree_idx];
    match cfg.topology {
        TopologyKind::Ring => build_ring(cfg.l, d),
        TopologyKind::Complete => build_complete(cfg.l),
        TopologyKind::WattsStrogatz => {
            let mut rng = stream(cfg.master_seed, Domain::Topology, &[degree_idx as u64, trial as u64]);
            build_connected_watts_strogatz(cfg.l, d, cfg.p_rewire, &mut rng, cfg.max_topology_draws).map(|(t, _)| t)
        }
    }
}

struct TrialOut {
    sp: TrialStats,
    dipp: Vec<TrialStats>,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_trial(cfg: &ExperimentConfig, alpha_idx: usize, smnr_idx: usize, trial: usize) -> Result<TrialOut> {
    let scenario = trial_scenario(cfg, alpha_idx, smnr_idx, trial)?;
    let start = Instant::now();
    let init = dipp_init(&scenario, &cfg.dipp)?;
    let init_ms = elapsed_ms(start);
    let mut sp = TrialStats::from_estimates(&scenario, init.iter().map(|s| (&s.result.x_hat[..], &s.result.support)))?;
    sp.runtime_ms = init_ms;
    let mut dipp = Vec::new();
    if cfg.algorithms.contains(&Algorithm::Dipp) {
        for degree_idx in 0..cfg.degree_axis().len() {
            let topology = trial_topology(cfg, degree_idx, trial)?;
            let start = Instant::now();
            let res: DippResult = dipp_run_from(&scenario, &topology, init.clone(), &cfg.dipp)?;
            let mut stats =
                TrialStats::from_estimates(&scenario, res.nodes.iter().map(|s| (&s.result.x_hat[..], &s.result.support)))?;
            stats.outer_rounds = res.rounds();
            stats.runtime_ms = init_ms + elapsed_ms(start);
            dipp.push(stats);
        }
    }
    Ok(TrialOut { sp, dipp })
}

fn sweep_inner(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let degrees = cfg.degree_axis();
    let p_rewire = if cfg.topology == TopologyKind::WattsStrogatz { cfg.p_rewire } else { 0.0 };
    let mut rows = Vec::new();
    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
        let m = cfg.measurements(alpha)?;
        for (si, &smnr) in cfg.smnrs.iter().enumerate() {
            log::info!("grid point alpha={alpha} smnr={smnr}: {} trials", cfg.trials());
            let outs: Vec<TrialOut> =
                (0..cfg.trials()).into_par_iter().map(|tr| run_trial(cfg, ai, si, tr)).collect::<Result<_>>()?;
            let row = |algorithm, topology, degree, p_rewire, trials| SweepRow {
                algorithm,
                topology,
                degree,
                p_rewire,
                alpha,
                m,
                smnr,
                trials,
            };
            if cfg.algorithms.contains(&Algorithm::Sp) {
                rows.push(row(Algorithm::Sp, None, 0, 0.0, outs.iter().map(|o| o.sp.clone()).collect()));
            }
            if cfg.algorithms.contains(&Algorithm::Dipp) {
                for (di, &d) in degrees.iter().enumerate() {
                    let trials = outs.iter().map(|o| o.dipp[di].clone()).collect();
                    rows.push(row(Algorithm::Dipp, Some(cfg.topology), d, p_rewire, trials));
                }
            }
        }
    }
    Ok(rows)
}

/// Runs every grid point. Trials run in parallel and are merged in trial
/// order, so the result does not depend on the number of workers.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let rows = if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.threads)))?;
        pool.install(|| sweep_inner(cfg))?
    } else {
        sweep_inner(cfg)?
    };
    Ok(SweepResult { config: cfg.clone(), rows })
}

/// Runs the sweep and writes the CSV to `path`.
pub fn run_sweep_to_file(cfg: &ExperimentConfig, path: &Path) -> Result<SweepResult> {
    let res = run_sweep(cfg)?;
    std::fs::write(path, res.to_csv())?;
    Ok(res)
}
