//! Experiment configuration files.
//!
//! Grammar, one statement per line:
//!
//! ```text
//! # comment            (also ';')
//! [section]            experiment | scenario | network | sweep | dipp
//! key = value          value lists are comma separated
//! ```
//!
//! Keys are unique across sections; the section only groups them. A key
//! outside any section or in the wrong section is an error, as is an
//! unknown or repeated key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dipp::DippOptions;
use crate::error::{Error, Result};
use crate::signal::{ScenarioConfig, SignalKind, Smnr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Sp,
    Dipp,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Sp => "sp",
            Algorithm::Dipp => "dipp",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sp" => Ok(Algorithm::Sp),
            "dipp" => Ok(Algorithm::Dipp),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyKind {
    /// Directed circulant graph `C_d`: node `p` hears from the `d` nodes
    /// that precede it.
    Ring,
    Complete,
    WattsStrogatz,
}

impl TopologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Ring => "ring",
            TopologyKind::Complete => "complete",
            TopologyKind::WattsStrogatz => "watts_strogatz",
        }
    }
}

impl FromStr for TopologyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ring" => Ok(TopologyKind::Ring),
            "complete" => Ok(TopologyKind::Complete),
            "watts_strogatz" | "ws" => Ok(TopologyKind::WattsStrogatz),
            other => Err(Error::Config(format!("unknown topology '{other}'"))),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub n: usize,
    pub j: usize,
    pub i: usize,
    pub l: usize,
    pub kind: SignalKind,
    pub alphas: Vec<f64>,
    pub smnrs: Vec<Smnr>,
    pub topology: TopologyKind,
    /// Ring degrees or small-world `q` values; ignored for complete graphs.
    pub degrees: Vec<usize>,
    pub p_rewire: f64,
    pub max_topology_draws: usize,
    pub algorithms: Vec<Algorithm>,
    pub matrix_realizations: usize,
    pub data_realizations: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub dipp: DippOptions,
    /// Record wall-clock runtimes. Off by default so output is reproducible.
    pub timing: bool,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            id: "experiment".into(),
            n: 1000,
            j: 15,
            i: 5,
            l: 10,
            kind: SignalKind::Gaussian,
            alphas: vec![0.16],
            smnrs: vec![Smnr::Db(20.0)],
            topology: TopologyKind::Ring,
            degrees: vec![4],
            p_rewire: 0.3,
            max_topology_draws: 1000,
            algorithms: vec![Algorithm::Sp, Algorithm::Dipp],
            matrix_realizations: 10,
            data_realizations: 10,
            master_seed: 1,
            output: None,
            dipp: DippOptions::default(),
            timing: false,
            threads: 0,
        }
    }
}

/// `(section, key)` pairs accepted in config files.
const KEYS: &[(&str, &str)] = &[
    ("experiment", "id"),
    ("experiment", "seed"),
    ("experiment", "output"),
    ("experiment", "algorithms"),
    ("experiment", "matrix_realizations"),
    ("experiment", "data_realizations"),
    ("experiment", "timing"),
    ("experiment", "threads"),
    ("scenario", "N"),
    ("scenario", "M"),
    ("scenario", "J"),
    ("scenario", "I"),
    ("scenario", "L"),
    ("scenario", "signal"),
    ("network", "topology"),
    ("network", "p_rewire"),
    ("network", "max_draws"),
    ("sweep", "alpha"),
    ("sweep", "smnr_db"),
    ("sweep", "degree"),
    ("dipp", "max_outer"),
    ("dipp", "max_inner"),
    ("dipp", "truncation"),
    ("dipp", "lagged_own_support"),
    ("dipp", "fixed_point_stop"),
];

/// Raw `key = value` pairs of a config file, keyed by the bare key.
pub fn parse_ini(text: &str) -> Result<BTreeMap<String, String>> {
    let mut section: Option<String> = None;
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| err("unterminated section header".into()))?.trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected 'key = value'".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.as_deref().ok_or_else(|| err(format!("key '{key}' before any section")))?;
        match KEYS.iter().find(|(_, k)| *k == key) {
            None => return Err(err(format!("unknown key '{key}'"))),
            Some((s, _)) if *s != sec => return Err(err(format!("key '{key}' belongs in [{s}], not [{sec}]"))),
            _ => {}
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(err(format!("duplicate key '{key}'")));
        }
    }
    Ok(out)
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_one(key, s)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean '{v}' for {key}"))),
    }
}

fn parse_smnrs(v: &str) -> Result<Vec<Smnr>> {
    v.split(',').map(|s| s.trim().parse()).collect()
}

impl ExperimentConfig {
    /// Applies one `key = value` setting. Used for both file entries and
    /// command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "id" => {
                if v.is_empty() || v.contains([',', '\n', '"']) {
                    return Err(Error::Config(format!("invalid experiment id '{v}'")));
                }
                self.id = v.to_string();
            }
            "seed" => self.master_seed = parse_one(key, v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "algorithms" => self.algorithms = parse_list(key, v)?,
            "matrix_realizations" => self.matrix_realizations = parse_one(key, v)?,
            "data_realizations" => self.data_realizations = parse_one(key, v)?,
            "timing" => self.timing = parse_bool(key, v)?,
            "threads" => self.threads = parse_one(key, v)?,
            "N" => self.n = parse_one(key, v)?,
            // a single M sets one α = M / N, so N has to be known already
            "M" => self.alphas = vec![parse_one::<usize>(key, v)? as f64 / self.n as f64],
            "J" => self.j = parse_one(key, v)?,
            "I" => self.i = parse_one(key, v)?,
            "L" => self.l = parse_one(key, v)?,
            "signal" => self.kind = v.parse()?,
            "topology" => self.topology = v.parse()?,
            "p_rewire" => self.p_rewire = parse_one(key, v)?,
            "max_draws" => self.max_topology_draws = parse_one(key, v)?,
            "alpha" => self.alphas = parse_list(key, v)?,
            "smnr_db" => self.smnrs = parse_smnrs(v)?,
            "degree" => self.degrees = parse_list(key, v)?,
            "max_outer" => self.dipp.max_outer = parse_one(key, v)?,
            "max_inner" => self.dipp.sipp.max_inner = parse_one(key, v)?,
            "truncation" => self.dipp.truncation = v.parse()?,
            "lagged_own_support" => self.dipp.lagged_own_support = parse_bool(key, v)?,
            "fixed_point_stop" => {
                let b = parse_bool(key, v)?;
                self.dipp.fixed_point_stop = b;
                self.dipp.sipp.fixed_point_stop = b;
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies settings in an order where `M` comes after `N`.
    pub fn apply<'a>(&mut self, settings: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        let (m, rest): (Vec<_>, Vec<_>) = settings.into_iter().partition(|(k, _)| *k == "M");
        for (k, v) in rest.into_iter().chain(m) {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Parses a config file on top of the defaults.
    pub fn from_ini(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let map = parse_ini(text)?;
        cfg.apply(map.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.n == 0 || self.l == 0 {
            return cfg_err("N and L must be positive".into());
        }
        if self.alphas.is_empty() || self.smnrs.is_empty() {
            return cfg_err("alpha and smnr_db need at least one value".into());
        }
        if self.algorithms.is_empty() {
            return cfg_err("no algorithms selected".into());
        }
        if self.matrix_realizations == 0 || self.data_realizations == 0 {
            return cfg_err("trials must be at least 1".into());
        }
        if self.uses_degrees() && self.degrees.is_empty() {
            return cfg_err("degree needs at least one value".into());
        }
        if !(0.0..=1.0).contains(&self.p_rewire) {
            return cfg_err(format!("p_rewire = {} outside [0, 1]", self.p_rewire));
        }
        for &a in &self.alphas {
            let m = self.measurements(a)?;
            self.scenario(m, self.smnrs[0]).validate().map_err(|e| Error::Config(format!("alpha = {a}: {e}")))?;
        }
        for &d in self.degrees.iter().filter(|_| self.uses_degrees()) {
            if d == 0 || d >= self.l {
                return cfg_err(format!("degree {d} must lie in 1..{}", self.l));
            }
        }
        if self.dipp.sipp.max_inner == 0 {
            return cfg_err("max_inner must be at least 1".into());
        }
        Ok(())
    }

    fn uses_degrees(&self) -> bool {
        self.topology != TopologyKind::Complete && self.algorithms.contains(&Algorithm::Dipp)
    }

    /// `M = αN`, which must be an integer.
    pub fn measurements(&self, alpha: f64) -> Result<usize> {
        let m = alpha * self.n as f64;
        let rounded = m.round();
        if !(alpha > 0.0 && alpha < 1.0) || (m - rounded).abs() > 1e-9 * self.n as f64 {
            return Err(Error::Config(format!("alpha = {alpha} does not give an integer M for N = {}", self.n)));
        }
        Ok(rounded as usize)
    }

    /// Degree values of the sweep; complete graphs use `L - 1`.
    pub fn degree_axis(&self) -> Vec<usize> {
        match self.topology {
            TopologyKind::Complete => vec![self.l - 1],
            _ => self.degrees.clone(),
        }
    }

    pub fn trials(&self) -> usize {
        self.matrix_realizations * self.data_realizations
    }

    pub fn scenario(&self, m: usize, smnr: Smnr) -> ScenarioConfig {
        ScenarioConfig {
            n: self.n,
            m,
            j: self.j,
            i: self.i,
            l: self.l,
            smnr,
            kind: self.kind,
            master_seed: self.master_seed,
        }
    }

    /// Full grid: `α ∈ {0.10, 0.12, ..., 0.30}` over
    /// `C_1, C_2, C_4, C_9` with 100 × 100 trials.
    pub fn full_grid() -> Self {
        ExperimentConfig {
            id: "full".into(),
            n: 1000,
            j: 15,
            i: 5,
            l: 10,
            alphas: (5..=15).map(|k| k as f64 * 0.02).collect(),
            degrees: vec![1, 2, 4, 9],
            matrix_realizations: 100,
            data_realizations: 100,
            ..ExperimentConfig::default()
        }
    }

    /// [`Self::full_grid`] with 10 × 10 trials.
    pub fn desk_grid() -> Self {
        ExperimentConfig {
            id: "desk".into(),
            matrix_realizations: 10,
            data_realizations: 10,
            ..Self::full_grid()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "full" => Ok(Self::full_grid()),
            "desk" => Ok(Self::desk_grid()),
            other => Err(Error::Config(format!("unknown preset '{other}'"))),
        }
    }
}
