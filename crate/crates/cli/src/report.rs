//! Report emission: a per-vertex diagnostics table, a per-edge continuity
//! table and a JSON summary, all with full-precision scalars.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use prolong_core::bundle::{ExtensionResult, InvariantCheck};
use prolong_core::numfmt::{full_precision, Real};
use prolong_core::rectifier::RectifyStatus;

use crate::config::{Mode, ScenarioConfig};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const SUMMARY_FILE: &str = "summary.json";

const DIAGNOSTICS_HEADER: &str = "vertex,x,y,distance_to_z,in_z,in_w,passed,initial_defect,final_defect,iterations,\
status,equivariance_defect,injectivity_margin,isometry_defect,restriction_defect,k2,k0";

fn opt_real(v: Option<f64>) -> String {
    v.map(full_precision).unwrap_or_default()
}

fn status_text(s: RectifyStatus) -> &'static str {
    match s {
        RectifyStatus::Converged => "converged",
        RectifyStatus::Diverged => "diverged",
        RectifyStatus::MaxIter => "max_iter",
    }
}

pub fn diagnostics_csv(result: &ExtensionResult) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for d in &result.diagnostics {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            d.vertex,
            opt_real(d.x),
            opt_real(d.y),
            full_precision(d.distance_to_z),
            d.in_z,
            d.in_w,
            d.passed,
            opt_real(d.initial_defect),
            opt_real(d.final_defect),
            d.iterations.map(|i| i.to_string()).unwrap_or_default(),
            d.status.map(status_text).unwrap_or_default(),
            full_precision(d.equivariance_defect),
            full_precision(d.injectivity_margin),
            opt_real(d.isometry_defect),
            opt_real(d.restriction_defect),
            opt_real(d.k2),
            opt_real(d.k0),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn edges_csv(result: &ExtensionResult) -> String {
    let mut out = String::from("a,b,modulus\n");
    for e in &result.edge_moduli {
        writeln!(out, "{},{},{}", e.a, e.b, full_precision(e.modulus)).expect("writing to a String cannot fail");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: Real,
    pub relation: prolong_core::bundle::Relation,
    pub limit: Real,
    pub passed: bool,
}

impl From<&InvariantCheck> for CheckRecord {
    fn from(c: &InvariantCheck) -> Self {
        Self {
            name: c.name.clone(),
            value: Real(c.value),
            relation: c.relation,
            limit: Real(c.limit),
            passed: c.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRecord {
    pub k2: Real,
    pub k0: Real,
}

/// Structured summary of one scenario run. Contains no timings or paths, so
/// repeated runs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub mode: Mode,
    pub strict: bool,
    pub exit_code: i32,
    pub passed: bool,
    pub degenerate: bool,
    pub vertex_count: usize,
    pub z_size: usize,
    pub w_size: usize,
    pub radius: Real,
    pub bounds: Option<BoundsRecord>,
    pub max_iterations: usize,
    pub max_edge_modulus: Real,
    pub checks: Vec<CheckRecord>,
}

impl Summary {
    pub fn new(config: &ScenarioConfig, result: &ExtensionResult, exit_code: i32) -> Self {
        Self {
            scenario: config.name.clone(),
            mode: config.mode,
            strict: config.strict,
            exit_code,
            passed: exit_code == 0,
            degenerate: result.is_degenerate(),
            vertex_count: result.vertex_count,
            z_size: result.z_size,
            w_size: result.w.len(),
            radius: Real(result.radius),
            bounds: result.bounds.map(|b| BoundsRecord { k2: Real(b.k2), k0: Real(b.k0) }),
            max_iterations: result.max_iterations(),
            max_edge_modulus: Real(result.edge_moduli.iter().map(|e| e.modulus).fold(0.0, f64::max)),
            checks: result.checks.iter().map(CheckRecord::from).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summaries always serialize");
        s.push('\n');
        s
    }
}

pub fn write_reports(dir: &Path, result: &ExtensionResult, summary: &Summary) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(DIAGNOSTICS_FILE), diagnostics_csv(result))?;
    std::fs::write(dir.join(EDGES_FILE), edges_csv(result))?;
    std::fs::write(dir.join(SUMMARY_FILE), summary.to_json())
}
