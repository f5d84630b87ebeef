//! Report artifacts: the per-row CSV and the run summary JSON.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use midec_core::bounds::{BoundReport, BoundRow, ViolationKind};

pub const CSV_HEADER: &str = "index,time,exact_mi,empirical_mi,ci_halfwidth,thm_bound,\
thm_bound_sharp,regularity_bound,sobolev_lower,contraction_coeff,cov_opnorm,cov_bound";

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Writes the report rows with a fixed column set; inapplicable columns are
/// left empty, infinities are written as `inf`.
pub fn write_csv(path: &Path, rows: &[BoundRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.index,
            fmt(r.time),
            fmt_opt(r.exact_mi),
            fmt_opt(r.empirical_mi),
            fmt_opt(r.ci_halfwidth),
            fmt_opt(r.thm_bound),
            fmt_opt(r.thm_bound_sharp),
            fmt_opt(r.regularity_bound),
            fmt_opt(r.sobolev_lower),
            fmt_opt(r.contraction_coeff),
            fmt_opt(r.cov_opnorm),
            fmt_opt(r.cov_bound),
        ));
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Serialize)]
struct ViolationOut {
    index: u64,
    kind: &'static str,
    margin: f64,
}

#[derive(Serialize)]
struct Summary {
    n_rows: usize,
    n_violations: usize,
    violations: Vec<ViolationOut>,
    oracle_call_count: u64,
}

fn kind_name(k: ViolationKind) -> &'static str {
    match k {
        ViolationKind::ExactAboveTheorem => "exact_above_theorem",
        ViolationKind::EmpiricalAboveTheorem => "empirical_above_theorem",
        ViolationKind::CovAboveBound => "cov_above_bound",
    }
}

/// Serializes the run summary (row/violation counts plus the total oracle
/// call count) as pretty JSON.
pub fn write_summary(path: &Path, report: &BoundReport, oracle_calls: u64) -> Result<()> {
    let summary = Summary {
        n_rows: report.rows.len(),
        n_violations: report.violations.len(),
        violations: report
            .violations
            .iter()
            .map(|v| ViolationOut {
                index: report.rows[v.row].index,
                kind: kind_name(v.kind),
                margin: v.margin,
            })
            .collect(),
        oracle_call_count: oracle_calls,
    };
    let mut f = std::fs::File::create(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    Ok(())
}
