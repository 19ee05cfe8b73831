//! Correlated sparse-signal ensemble, measurement matrices and noise.
//!
//! Each node `p` observes `y_p = A_p x_p + e_p` where the support of `x_p` is
//! a common part `J` shared by all nodes plus a disjoint individual part
//! `I_p`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::{DenseMatrix, SupportSet};
use crate::rng::{self, Domain, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalKind {
    Gaussian,
    Binary,
}

impl SignalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::Gaussian => "gaussian",
            SignalKind::Binary => "binary",
        }
    }
}

impl FromStr for SignalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(SignalKind::Gaussian),
            "binary" => Ok(SignalKind::Binary),
            other => Err(Error::Config(format!("unknown signal kind '{other}'"))),
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Signal-to-measurement-noise ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smnr {
    Clean,
    Db(f64),
}

impl FromStr for Smnr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("clean") || s.eq_ignore_ascii_case("inf") {
            return Ok(Smnr::Clean);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Smnr::Db(v)),
            _ => Err(Error::Config(format!("invalid smnr '{s}'"))),
        }
    }
}

impl fmt::Display for Smnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smnr::Clean => f.write_str("clean"),
            Smnr::Db(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub m: usize,
    /// Size of the common support part.
    pub j: usize,
    /// Size of each individual support part.
    pub i: usize,
    pub l: usize,
    pub smnr: Smnr,
    pub kind: SignalKind,
    pub master_seed: u64,
}

impl ScenarioConfig {
    pub fn sparsity(&self) -> usize {
        self.j + self.i
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.sparsity();
        if self.n == 0 || self.m == 0 {
            return Err(Error::invalid("N and M must be positive"));
        }
        if self.m >= self.n {
            return Err(Error::invalid(format!("M = {} must be smaller than N = {}", self.m, self.n)));
        }
        if t == 0 {
            return Err(Error::invalid("sparsity J + I must be at least 1"));
        }
        if t > self.n {
            return Err(Error::invalid(format!("J + I = {t} exceeds N = {}", self.n)));
        }
        if self.m < t {
            return Err(Error::invalid(format!("M = {} is smaller than the sparsity {t}", self.m)));
        }
        if self.l == 0 {
            return Err(Error::invalid("L must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignal {
    pub values: Vec<f64>,
    pub support: SupportSet,
    pub common_part: SupportSet,
    pub individual_part: SupportSet,
}

impl SparseSignal {
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeData {
    pub signal: SparseSignal,
    pub matrix: DenseMatrix,
    pub noise: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub common: SupportSet,
    pub nodes: Vec<NodeData>,
}

impl Scenario {
    pub fn sparsity(&self) -> usize {
        self.config.sparsity()
    }
}

/// Uniform `k`-subset of `pool` by partial Fisher-Yates.
pub fn sample_subset(pool: &[usize], k: usize, rng: &mut Rng) -> Result<SupportSet> {
    if k > pool.len() {
        return Err(Error::invalid(format!("cannot sample {k} of {} indices", pool.len())));
    }
    let mut v = pool.to_vec();
    for i in 0..k {
        let j = rng.gen_range(i..v.len());
        v.swap(i, j);
    }
    v.truncate(k);
    Ok(SupportSet::from_indices(v))
}

/// Uniform size-`j` common support over `{0..n}`.
pub fn gen_common_support(n: usize, j: usize, rng: &mut Rng) -> Result<SupportSet> {
    let pool: Vec<usize> = (0..n).collect();
    sample_subset(&pool, j, rng)
}

/// Uniform size-`i` individual support over `{0..n} \ common`.
pub fn gen_individual_support(n: usize, common: &SupportSet, i: usize, rng: &mut Rng) -> Result<SupportSet> {
    let pool = common.complement(n).into_vec();
    sample_subset(&pool, i, rng)
}

/// Draws `J` and one `I_p` per node from a single generator.
pub fn gen_supports(cfg: &ScenarioConfig, rng: &mut Rng) -> Result<(SupportSet, Vec<SupportSet>)> {
    if cfg.j + cfg.i > cfg.n {
        return Err(Error::invalid(format!("J + I = {} exceeds N = {}", cfg.j + cfg.i, cfg.n)));
    }
    let common = gen_common_support(cfg.n, cfg.j, rng)?;
    let individual = (0..cfg.l)
        .map(|_| gen_individual_support(cfg.n, &common, cfg.i, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok((common, individual))
}

pub fn gen_signal(
    n: usize,
    common: &SupportSet,
    individual: &SupportSet,
    kind: SignalKind,
    rng: &mut Rng,
) -> Result<SparseSignal> {
    common.check_bound(n)?;
    individual.check_bound(n)?;
    if !common.intersection(individual).is_empty() {
        return Err(Error::invalid("common and individual supports overlap"));
    }
    let support = common.union(individual);
    let mut values = vec![0.0; n];
    for k in support.iter() {
        values[k] = match kind {
            SignalKind::Gaussian => StandardNormal.sample(rng),
            SignalKind::Binary => 1.0,
        };
    }
    Ok(SparseSignal {
        values,
        support,
        common_part: common.clone(),
        individual_part: individual.clone(),
    })
}

/// `M x N` matrix with i.i.d. `N(0, 1/M)` entries and unit-norm columns.
pub fn gen_matrix(m: usize, n: usize, rng: &mut Rng) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    let sd = 1.0 / (m as f64).sqrt();
    let mut a = DenseMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let v: f64 = StandardNormal.sample(rng);
            a.set(i, j, v * sd);
        }
    }
    for j in 0..n {
        let mut norm = a.column_norm(j);
        while norm == 0.0 {
            for i in 0..m {
                let v: f64 = StandardNormal.sample(rng);
                a.set(i, j, v * sd);
            }
            norm = a.column_norm(j);
        }
        a.scale_column(j, 1.0 / norm);
    }
    Ok(a)
}

/// Per-entry noise variance for expected signal energy `T`.
pub fn noise_variance(t: usize, m: usize, smnr: Smnr) -> f64 {
    match smnr {
        Smnr::Clean => 0.0,
        Smnr::Db(db) => t as f64 / (10f64.powf(db / 10.0) * m as f64),
    }
}

/// White Gaussian noise calibrated to the expected signal energy `T`,
/// which is the same for Gaussian and unit binary nonzeros.
pub fn gen_noise(t: usize, m: usize, smnr: Smnr, rng: &mut Rng) -> Vec<f64> {
    let var = noise_variance(t, m, smnr);
    if var == 0.0 {
        return vec![0.0; m];
    }
    let sd = var.sqrt();
    (0..m)
        .map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            v * sd
        })
        .collect()
}

/// Scenario for matrix realization `matrix_id` and data realization `data_id`.
///
/// Matrices depend only on `(master_seed, matrix_id, node)`, so every data
/// realization of one matrix realization shares the same `A_p`.
pub fn gen_scenario_realization(cfg: &ScenarioConfig, matrix_id: u64, data_id: u64) -> Result<Scenario> {
    cfg.validate()?;
    let seed = cfg.master_seed;
    let t = cfg.sparsity();
    let mut rng_j = rng::stream(seed, Domain::CommonSupport, &[matrix_id, data_id]);
    let common = gen_common_support(cfg.n, cfg.j, &mut rng_j)?;
    let nodes = (0..cfg.l as u64)
        .map(|p| {
            let mut rng_a = rng::stream(seed, Domain::Matrix, &[matrix_id, p]);
            let matrix = gen_matrix(cfg.m, cfg.n, &mut rng_a)?;
            let mut rng_i = rng::stream(seed, Domain::IndividualSupport, &[matrix_id, data_id, p]);
            let individual = gen_individual_support(cfg.n, &common, cfg.i, &mut rng_i)?;
            let mut rng_x = rng::stream(seed, Domain::Signal, &[matrix_id, data_id, p]);
            let signal = gen_signal(cfg.n, &common, &individual, cfg.kind, &mut rng_x)?;
            let mut rng_e = rng::stream(seed, Domain::Noise, &[matrix_id, data_id, p]);
            let noise = gen_noise(t, cfg.m, cfg.smnr, &mut rng_e);
            let mut y = matrix.mul_sparse(&signal.values, &signal.support);
            for (yi, ei) in y.iter_mut().zip(&noise) {
                *yi += ei;
            }
            Ok(NodeData { signal, matrix, noise, y })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario { config: cfg.clone(), common, nodes })
}

pub fn gen_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    gen_scenario_realization(cfg, 0, 0)
}

const DUMP_MAGIC: &str = "dipp-scenario v1";

/// Writes a scenario as plain text.
///
/// Layout: one header line
/// `dipp-scenario v1 N=.. M=.. J=.. I=.. L=.. smnr=.. kind=.. seed=..`,
/// then `common <indices>`, then per node the labeled lines
/// `node <p>`, `individual <indices>`, `x <N values>`,
/// `A <M*N values, row-major>`, `e <M values>`, `y <M values>`.
/// Values use the shortest representation that parses back bit-exactly.
pub fn dump_scenario(s: &Scenario) -> String {
    let c = &s.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{DUMP_MAGIC} N={} M={} J={} I={} L={} smnr={} kind={} seed={}",
        c.n, c.m, c.j, c.i, c.l, c.smnr, c.kind, c.master_seed
    );
    let ints = |v: &SupportSet| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    let reals = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "common {}", ints(&s.common));
    for (p, node) in s.nodes.iter().enumerate() {
        let _ = writeln!(out, "node {p}");
        let _ = writeln!(out, "individual {}", ints(&node.signal.individual_part));
        let _ = writeln!(out, "x {}", reals(&node.signal.values));
        let _ = writeln!(out, "A {}", reals(node.matrix.data()));
        let _ = writeln!(out, "e {}", reals(&node.noise));
        let _ = writeln!(out, "y {}", reals(&node.y));
    }
    out
}

pub fn load_scenario(text: &str) -> Result<Scenario> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };

    let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
    let rest = header
        .strip_prefix(DUMP_MAGIC)
        .ok_or_else(|| perr(hl, "missing scenario header"))?;
    let mut fields = std::collections::HashMap::new();
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| perr(hl, "malformed header field"))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| perr(hl, &format!("missing header field {k}")));
    let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| perr(hl, &format!("bad value for {k}"))) };
    let config = ScenarioConfig {
        n: num("N")?,
        m: num("M")?,
        j: num("J")?,
        i: num("I")?,
        l: num("L")?,
        smnr: get("smnr")?.parse()?,
        kind: get("kind")?.parse()?,
        master_seed: get("seed")?.parse().map_err(|_| perr(hl, "bad seed"))?,
    };

    let mut labeled = |label: &str| -> Result<(usize, Vec<String>)> {
        let (ln, line) = lines.next().ok_or_else(|| perr(usize::MAX - 1, &format!("missing '{label}' line")))?;
        let mut toks = line.split_whitespace();
        if toks.next() != Some(label) {
            return Err(perr(ln, &format!("expected '{label}'")));
        }
        Ok((ln, toks.map(str::to_string).collect()))
    };
    fn parse_all<T: FromStr>(ln: usize, toks: &[String], len: Option<usize>) -> Result<Vec<T>> {
        let v = toks
            .iter()
            .map(|t| t.parse::<T>())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|_| Error::Parse { line: ln + 1, msg: "unparsable number".into() })?;
        if let Some(n) = len {
            if v.len() != n {
                return Err(Error::Parse { line: ln + 1, msg: format!("expected {n} values, got {}", v.len()) });
            }
        }
        Ok(v)
    }

    let (ln, toks) = labeled("common")?;
    let common = SupportSet::from_sorted(parse_all(ln, &toks, Some(config.j))?)?;
    let mut nodes = Vec::with_capacity(config.l);
    for p in 0..config.l {
        let (ln, toks) = labeled("node")?;
        if parse_all::<usize>(ln, &toks, Some(1))?[0] != p {
            return Err(perr(ln, "nodes out of order"));
        }
        let (ln, toks) = labeled("individual")?;
        let individual = SupportSet::from_sorted(parse_all(ln, &toks, Some(config.i))?)?;
        let (ln, toks) = labeled("x")?;
        let values: Vec<f64> = parse_all(ln, &toks, Some(config.n))?;
        let (ln, toks) = labeled("A")?;
        let matrix = DenseMatrix::new(config.m, config.n, parse_all(ln, &toks, Some(config.m * config.n))?)?;
        let (ln, toks) = labeled("e")?;
        let noise = parse_all(ln, &toks, Some(config.m))?;
        let (ln, toks) = labeled("y")?;
        let y = parse_all(ln, &toks, Some(config.m))?;
        let support = common.union(&individual);
        nodes.push(NodeData {
            signal: SparseSignal { values, support, common_part: common.clone(), individual_part: individual },
            matrix,
            noise,
            y,
        });
    }
    Ok(Scenario { config, common, nodes })
}
