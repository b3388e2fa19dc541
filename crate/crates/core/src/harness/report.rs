//! Convergence and simulation reports with CSV / JSON emission.
//!
//! Emission is deterministic: identical inputs produce byte-identical
//! documents. Wall time is measured for operators' convenience but excluded
//! from the serialized forms so that reruns diff clean.

use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// One (t, h) comparison cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub t: f64,
    pub h: f64,
    pub discrete_norm: f64,
    pub continuous_norm: f64,
    pub abs_error: f64,
    /// Least-squares order over this row's t-group; absent with < 3 steps
    /// or when any error in the group vanishes.
    pub fitted_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub scenario: String,
    pub kind: String,
    pub n0: usize,
    pub n_env: usize,
    /// Largest operator norm among the limit coefficients, when they exist.
    pub coefficient_norm: Option<f64>,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub wall_time: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
}

/// One evolved-observable summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub t: f64,
    /// Time step for the discrete mode; absent for the limit semigroup.
    pub h: Option<f64>,
    pub observable: usize,
    pub norm: f64,
    pub trace_re: f64,
    pub trace_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<SimulationRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

// f64 Display is the shortest decimal that round-trips.
fn push_f64(out: &mut String, x: f64) {
    write!(out, "{x}").unwrap();
}

/// Render a convergence report. CSV columns are exactly
/// `t,h,discrete_norm,continuous_norm,abs_error,fitted_order` with
/// `fitted_order` left empty when absent.
pub fn emit_report(r: &ConvergenceReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serialization");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::from("t,h,discrete_norm,continuous_norm,abs_error,fitted_order\n");
            for row in &r.rows {
                push_f64(&mut out, row.t);
                out.push(',');
                push_f64(&mut out, row.h);
                out.push(',');
                push_f64(&mut out, row.discrete_norm);
                out.push(',');
                push_f64(&mut out, row.continuous_norm);
                out.push(',');
                push_f64(&mut out, row.abs_error);
                out.push(',');
                if let Some(order) = row.fitted_order {
                    push_f64(&mut out, order);
                }
                out.push('\n');
            }
            out
        }
    }
}

/// Render a simulation report; CSV columns
/// `t,h,observable,norm,trace_re,trace_im` with `h` empty in qsde mode.
pub fn emit_simulation(r: &SimulationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serialization");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::from("t,h,observable,norm,trace_re,trace_im\n");
            for row in &r.rows {
                push_f64(&mut out, row.t);
                out.push(',');
                if let Some(h) = row.h {
                    push_f64(&mut out, h);
                }
                write!(out, ",{},", row.observable).unwrap();
                push_f64(&mut out, row.norm);
                out.push(',');
                push_f64(&mut out, row.trace_re);
                out.push(',');
                push_f64(&mut out, row.trace_im);
                out.push('\n');
            }
            out
        }
    }
}
