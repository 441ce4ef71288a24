//! Machine-readable campaign reports: CSV with one row per check, plus an
//! optional JSON mirror. Rows are written in campaign order and all numbers
//! come from deterministic computations, so reruns with the same seed are
//! byte-identical.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub check_id: String,
    pub instance_id: String,
    pub instances: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub max_ratio: f64,
    pub g: usize,
    pub params_json: String,
    pub refinement_factor: f64,
    pub pass: bool,
}

pub const CSV_HEADER: &str = "check_id,instance_id,lhs,rhs,ratio,G,params_json,refinement_factor,pass";

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn format_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

pub fn to_csv(reports: &[RatioReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            csv_quote(&r.check_id),
            csv_quote(&r.instance_id),
            format_num(r.lhs),
            format_num(r.rhs),
            format_num(r.max_ratio),
            r.g,
            csv_quote(&r.params_json),
            format_num(r.refinement_factor),
            if r.pass { "PASS" } else { "FAIL" },
        ));
    }
    out
}

/// Write the CSV (and a JSON mirror alongside when requested).
pub fn emit(reports: &[RatioReport], path: &Path, json_mirror: bool) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(to_csv(reports).as_bytes())?;
    if json_mirror {
        let mirror = path.with_extension("json");
        let mut jf = std::fs::File::create(mirror)?;
        jf.write_all(serde_json::to_string_pretty(reports)?.as_bytes())?;
        jf.write_all(b"\n")?;
    }
    Ok(())
}
