//! Tables of the recovery-bound constants and coefficients.

use crate::analysis::bounds::{bound_constants, dipp_bound, sipp_bound, CVariant, LStarMode};
use crate::error::{Error, Result};
use crate::harness::output::{fmt_num, CsvTable};

pub const BOUND_COLUMNS: [&str; 14] = [
    "label",
    "kind",
    "delta",
    "c_variant",
    "a_co",
    "a",
    "b",
    "c",
    "rate",
    "feasible",
    "support_si",
    "support_noise",
    "signal_si",
    "signal_noise",
];

/// One evaluated bound. DIPP rows have no side-information terms.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub label: String,
    pub kind: &'static str,
    pub delta: f64,
    pub variant: CVariant,
    pub a_co: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `a` for SIPP, `a_co·b/(1-a)` for DIPP.
    pub rate: f64,
    pub feasible: bool,
    pub support_si: Option<f64>,
    pub support_noise: f64,
    pub signal_si: Option<f64>,
    pub signal_noise: f64,
}

impl BoundReport {
    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), fmt_num);
        vec![
            self.label.clone(),
            self.kind.to_string(),
            fmt_num(self.delta),
            self.variant.to_string(),
            opt(self.a_co),
            fmt_num(self.a),
            fmt_num(self.b),
            fmt_num(self.c),
            fmt_num(self.rate),
            (self.feasible as u8).to_string(),
            opt(self.support_si),
            fmt_num(self.support_noise),
            opt(self.signal_si),
            fmt_num(self.signal_noise),
        ]
    }
}

pub fn sipp_report(label: &str, delta: f64, variant: CVariant) -> Result<BoundReport> {
    let k = bound_constants(delta, variant)?;
    let s = sipp_bound(&k, LStarMode::Finite);
    Ok(BoundReport {
        label: label.to_string(),
        kind: "sipp",
        delta,
        variant,
        a_co: None,
        a: k.a,
        b: k.b,
        c: k.c,
        rate: k.a,
        feasible: s.feasible,
        support_si: Some(s.support_si),
        support_noise: s.support_noise,
        signal_si: Some(s.signal_si),
        signal_noise: s.signal_noise,
    })
}

pub fn dipp_report(label: &str, delta: f64, a_co: f64, variant: CVariant) -> Result<BoundReport> {
    let k = bound_constants(delta, variant)?;
    let d = dipp_bound(&k, a_co)?;
    Ok(BoundReport {
        label: label.to_string(),
        kind: "dipp",
        delta,
        variant,
        a_co: Some(a_co),
        a: k.a,
        b: k.b,
        c: k.c,
        rate: d.rate,
        feasible: d.feasible,
        support_si: None,
        support_noise: d.support_noise,
        signal_si: None,
        signal_noise: d.signal_noise,
    })
}

/// A SIPP row for every `δ` and a DIPP row for every `(δ, a_co)`. Without an
/// explicit variant SIPP rows use the squared and DIPP rows the linear
/// noise constant.
pub fn analyze_bounds(delta_grid: &[f64], a_co_grid: &[f64], variant: Option<CVariant>) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for &d in delta_grid {
        if !(0.0..1.0).contains(&d) {
            return Err(Error::Config(format!("delta = {d} outside [0, 1)")));
        }
        out.push(sipp_report("grid", d, variant.unwrap_or(CVariant::Squared))?);
        for &a_co in a_co_grid {
            out.push(dipp_report("grid", d, a_co, variant.unwrap_or(CVariant::Linear))?);
        }
    }
    Ok(out)
}

/// The four worked examples: SIPP at `δ_3T = 0.17` and `0.23`, DIPP at
/// `(0.17, a_co = 0.27)` and `(0.23, a_co = 1.61e-4)`.
pub fn worked_examples() -> Vec<BoundReport> {
    vec![
        sipp_report("example1", 0.17, CVariant::Squared),
        sipp_report("example2", 0.23, CVariant::Squared),
        dipp_report("example3", 0.17, 0.27, CVariant::Linear),
        dipp_report("example4", 0.23, 1.61e-4, CVariant::Linear),
    ]
    .into_iter()
    .map(|r| r.expect("example constants are valid"))
    .collect()
}

pub fn preset(name: &str) -> Result<Vec<BoundReport>> {
    match name {
        "worked-examples" => Ok(worked_examples()),
        other => Err(Error::Config(format!("unknown analysis preset '{other}'"))),
    }
}

pub fn bounds_table(rows: &[BoundReport]) -> CsvTable {
    let mut t = CsvTable::new(&BOUND_COLUMNS);
    for r in rows {
        t.push(r.record());
    }
    t
}
