use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};
use crate::expansion::RemainderPart;

use super::{RateReport, StudyConfig};

fn errors_csv(report: &RateReport) -> String {
    let mut s = String::from("nu,t,norm,value\n");
    for row in &report.rows {
        let Ok(d) = &row.data else { continue };
        for (ni, norm) in report.norms.iter().enumerate() {
            for (t, v) in report.t_eval.iter().zip(&d.errors[ni]) {
                let _ = writeln!(s, "{},{},{},{}", row.nu, t, norm, v);
            }
        }
    }
    s
}

fn remainder_csv(report: &RateReport) -> String {
    let mut s = String::from("nu,t,norm,value,part\n");
    for row in &report.rows {
        let Ok(d) = &row.data else { continue };
        for (ri, norm) in report.remainder_norms.iter().enumerate() {
            for (pi, part) in RemainderPart::ALL.iter().enumerate() {
                for (t, v) in report.t_eval.iter().zip(&d.remainder[ri][pi]) {
                    let _ = writeln!(s, "{},{},{},{},{}", row.nu, t, norm, v, part.label());
                }
            }
        }
    }
    s
}

fn rates_json(report: &RateReport) -> String {
    let rates: Vec<_> = report
        .rates
        .iter()
        .map(|r| {
            json!({
                "norm": r.norm,
                "slope": r.fit.map(|f| f.slope),
                "intercept": r.fit.map(|f| f.intercept),
                "r_squared": r.fit.map(|f| f.r_squared),
                "theory": r.theory,
                "comparison": r.comparison,
                "pass": r.pass,
                "super_convergent": r.super_convergent,
                "monotone": r.monotone,
                "rows": r.rows,
            })
        })
        .collect();
    let bc: Vec<_> = report
        .rows
        .iter()
        .filter_map(|r| r.data.as_ref().ok().map(|d| json!({"nu": r.nu, "normal": d.bc_residual.0, "curl": d.bc_residual.1})))
        .collect();
    let failed: Vec<_> = report
        .rows
        .iter()
        .filter_map(|r| r.data.as_ref().err().map(|e| json!({"nu": r.nu, "error": e})))
        .collect();
    let doc = json!({
        "family": report.family,
        "exact_regime": report.exact_regime,
        "pass": report.pass,
        "rates": rates,
        "remainder_check": report.remainder_check,
        "remainder_bc_residuals": bc,
        "failed_rows": failed,
        "warnings": report.warnings,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json");
    s.push('\n');
    s
}

/// Write `errors.csv`, `remainder.csv`, `rates.json` and `run_meta.json`
/// into `dir`. The first three are byte-stable for a given configuration;
/// `run_meta.json` records the wall time and worker count.
pub fn export_report(
    report: &RateReport,
    config: &StudyConfig,
    dir: &Path,
    wall_time_s: f64,
    jobs: usize,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    let meta = json!({
        "config": config,
        "crate": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": wall_time_s,
        "jobs": jobs,
    });
    let files = [
        ("errors.csv", errors_csv(report)),
        ("remainder.csv", remainder_csv(report)),
        ("rates.json", rates_json(report)),
        ("run_meta.json", serde_json::to_string_pretty(&meta).expect("json") + "\n"),
    ];
    let mut out = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        out.push(p);
    }
    Ok(out)
}
