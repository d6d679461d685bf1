//! Trace CSV and JSON report writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fenchel_duo::{RunOutput, TraceRecord};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: &str = "k,alpha,primal,dual,gap_bound,true_gap,residual,t_ms";

/// 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            fmt_float(r.alpha),
            fmt_float(r.primal),
            fmt_float(r.dual),
            fmt_float(r.gap_bound),
            fmt_float(r.true_gap),
            fmt_opt(r.residual),
            fmt_float(r.t_ms)
        );
    }
    out
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_file(path, &text)
}

/// The run summary document. Non-finite values serialize as `null`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunSummary {
    pub algorithm: String,
    pub rule: String,
    pub mode: String,
    pub policy: String,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub final_alpha: Option<f64>,
    pub final_primal: Option<f64>,
    pub final_dual: Option<f64>,
    pub final_gap_bound: Option<f64>,
    pub final_true_gap: Option<f64>,
    pub max_residual: Option<f64>,
    pub primal_certificate: Option<Vec<f64>>,
    pub dual_certificate: Option<Vec<f64>>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

impl RunSummary {
    pub fn new(run: &RunOutput, mode: &str, policy: &str, seed: u64) -> Self {
        let last = run.last();
        let pick = |f: fn(&TraceRecord) -> f64| last.map(f);
        let max_residual = run.trace.iter().filter_map(|r| r.residual).reduce(f64::max);
        RunSummary {
            algorithm: run.algorithm.name().into(),
            rule: run.rule.clone(),
            mode: mode.into(),
            policy: policy.into(),
            seed,
            iterations: run.trace.len(),
            converged: run.converged,
            final_alpha: pick(|r| r.alpha),
            final_primal: pick(|r| r.primal),
            final_dual: pick(|r| r.dual),
            final_gap_bound: pick(|r| r.gap_bound),
            final_true_gap: pick(|r| r.true_gap),
            max_residual,
            primal_certificate: run.primal_point.clone(),
            dual_certificate: run.dual_point.clone(),
            error: run.error.as_ref().map(|e| e.to_string()),
            warnings: run.warnings.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_17_digits() {
        for x in [0.1, 1.0 / 3.0, 2.0 / 102.0, 1e-300, -7.25e12] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(
                mantissa.chars().filter(|c| c.is_ascii_digit()).count(),
                17,
                "{s}"
            );
        }
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_rows_follow_header() {
        let r = TraceRecord {
            k: 1,
            alpha: 1.0,
            gamma: None,
            primal: 0.5,
            dual: f64::NEG_INFINITY,
            gap_bound: 1.0,
            bound_plain: 1.0,
            bound_sharpened: None,
            true_gap: f64::INFINITY,
            residual: None,
            t_ms: 0.0,
        };
        let csv = trace_csv(&[r]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(
            lines[1],
            "1,1.0000000000000000e0,5.0000000000000000e-1,-inf,1.0000000000000000e0,inf,,0.0000000000000000e0"
        );
    }
}
