use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dipp::analysis::bounds::{convergence_root, CVariant};
use dipp::dipp::dipp_run;
use dipp::harness::analyze::{analyze_bounds, bounds_table, preset as bounds_preset};
use dipp::harness::config::{ExperimentConfig, TopologyKind};
use dipp::harness::output::fmt_num;
use dipp::harness::sweep::{run_sweep, trial_scenario, trial_topology};
use dipp::network::{build_complete, build_connected_watts_strogatz, build_ring};
use dipp::rng::{stream, Domain};
use dipp::signal::dump_scenario;
use dipp::{Error, Result};

#[derive(Parser)]
#[command(name = "dipp", version, about = "Distributed parallel pursuit experiments")]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one scenario realization as text.
    Generate {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Trial index within the first grid point.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a single grid point and print its CSV rows.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Also write the per-round trace of the first trial.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the full grid and write the results CSV.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Evaluate the recovery bounds.
    Analyze {
        /// Named set of rows, e.g. worked-examples.
        #[arg(long)]
        preset: Option<String>,
        /// Comma-separated RIP constants.
        #[arg(long, value_delimiter = ',')]
        delta: Vec<f64>,
        /// Comma-separated fusion ratios for the distributed bound.
        #[arg(long = "a-co", value_delimiter = ',')]
        a_co: Vec<f64>,
        #[arg(long = "c-variant")]
        c_variant: Option<String>,
        /// Write CSV here instead of printing aligned text.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Export a network as an edge list.
    Topology {
        #[arg(long, default_value = "ring")]
        kind: String,
        #[arg(long, default_value_t = 10)]
        nodes: usize,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long = "p-rewire", default_value_t = 0.3)]
        p_rewire: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Config file or preset plus per-key overrides.
#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in grid: full or desk.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long = "matrix-realizations")]
    matrix_realizations: Option<String>,
    #[arg(long = "data-realizations")]
    data_realizations: Option<String>,
    #[arg(long)]
    timing: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long = "J")]
    j: Option<String>,
    #[arg(long = "I")]
    i: Option<String>,
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    signal: Option<String>,
    #[arg(long)]
    topology: Option<String>,
    #[arg(long = "p-rewire")]
    p_rewire: Option<String>,
    #[arg(long = "max-draws")]
    max_draws: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "smnr-db")]
    smnr_db: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    #[arg(long = "max-outer")]
    max_outer: Option<String>,
    #[arg(long = "max-inner")]
    max_inner: Option<String>,
    #[arg(long)]
    truncation: Option<String>,
    #[arg(long = "lagged-own-support")]
    lagged_own_support: Option<String>,
    #[arg(long = "fixed-point-stop")]
    fixed_point_stop: Option<String>,
}

impl ExperimentArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs = [
            ("id", &self.id),
            ("seed", &self.seed),
            ("output", &self.output),
            ("algorithms", &self.algorithms),
            ("matrix_realizations", &self.matrix_realizations),
            ("data_realizations", &self.data_realizations),
            ("timing", &self.timing),
            ("threads", &self.threads),
            ("N", &self.n),
            ("M", &self.m),
            ("J", &self.j),
            ("I", &self.i),
            ("L", &self.l),
            ("signal", &self.signal),
            ("topology", &self.topology),
            ("p_rewire", &self.p_rewire),
            ("max_draws", &self.max_draws),
            ("alpha", &self.alpha),
            ("smnr_db", &self.smnr_db),
            ("degree", &self.degree),
            ("max_outer", &self.max_outer),
            ("max_inner", &self.max_inner),
            ("truncation", &self.truncation),
            ("lagged_own_support", &self.lagged_own_support),
            ("fixed_point_stop", &self.fixed_point_stop),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect()
    }

    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let mut cfg = ExperimentConfig::default();
                let map = dipp::harness::config::parse_ini(&text)?;
                cfg.apply(map.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
                cfg
            }
            (None, Some(name)) => ExperimentConfig::preset(name)?,
            (None, None) => ExperimentConfig::default(),
        };
        cfg.apply(self.overrides())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate { exp, trial, out } => {
            let cfg = exp.resolve()?;
            if trial >= cfg.trials() {
                return Err(Error::Config(format!("trial {trial} out of range 0..{}", cfg.trials())));
            }
            let s = trial_scenario(&cfg, 0, 0, trial)?;
            emit(&dump_scenario(&s), out.as_deref())
        }
        Command::Run { exp, trace } => {
            let cfg = exp.resolve()?;
            if cfg.alphas.len() != 1 || cfg.smnrs.len() != 1 || cfg.degree_axis().len() != 1 {
                return Err(Error::Config("run takes a single alpha, smnr_db and degree; use sweep for grids".into()));
            }
            if let Some(path) = trace {
                let s = trial_scenario(&cfg, 0, 0, 0)?;
                let res = dipp_run(&s, &trial_topology(&cfg, 0, 0)?, &cfg.dipp)?;
                fs::write(path, res.trace.to_csv())?;
            }
            let res = run_sweep(&cfg)?;
            emit(&res.to_csv(), cfg.output.as_deref())
        }
        Command::Sweep { exp } => {
            let cfg = exp.resolve()?;
            let res = run_sweep(&cfg)?;
            emit(&res.to_csv(), cfg.output.as_deref())
        }
        Command::Analyze { preset, delta, a_co, c_variant, csv } => {
            let variant = c_variant.as_deref().map(str::parse::<CVariant>).transpose()?;
            let mut rows = match preset.as_deref() {
                Some(name) => bounds_preset(name)?,
                None => Vec::new(),
            };
            rows.extend(analyze_bounds(&delta, &a_co, variant)?);
            let table = bounds_table(&rows);
            match csv {
                Some(p) => fs::write(p, table.to_csv())?,
                None => {
                    print!("{}", table.to_aligned());
                    println!("convergence root r = {}", fmt_num(convergence_root()));
                }
            }
            Ok(())
        }
        Command::Topology { kind, nodes, degree, p_rewire, seed, out } => {
            let topo = match kind.parse::<TopologyKind>()? {
                TopologyKind::Ring => build_ring(nodes, degree)?,
                TopologyKind::Complete => build_complete(nodes)?,
                TopologyKind::WattsStrogatz => {
                    let mut rng = stream(seed, Domain::Topology, &[0, 0]);
                    build_connected_watts_strogatz(nodes, degree, p_rewire, &mut rng, 1000)?.0
                }
            };
            emit(&topo.to_edge_list(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
