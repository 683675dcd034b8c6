//! CSV body and JSON sidecar. Floats are written in Rust's shortest
//! round-trip form, so identical configurations give identical files.

use std::fs;

use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::{RunSummary, Status, Table};

pub fn write_outputs(config: &ExperimentConfig, table: &Table) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&config.output)?;
    let name = config.mode.name();
    let csv_path = config.output.join(format!("{name}.csv"));
    let meta_path = config.output.join(format!("{name}.meta.json"));

    let mut w = csv::Writer::from_path(&csv_path)?;
    let mut header: Vec<&str> = table.columns.clone();
    header.extend(["status", "message"]);
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec: Vec<String> = row.values.iter().map(|v| format_float(*v)).collect();
        rec.push(row.status.as_str().to_string());
        rec.push(row.message.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;

    let count = |s: Status| table.rows.iter().filter(|r| r.status == s).count();
    let summary = RunSummary {
        mode: config.mode,
        csv: csv_path,
        meta: meta_path.clone(),
        rows: table.rows.len(),
        ok: count(Status::Ok),
        warned: count(Status::Warned),
        failed: count(Status::Failed),
    };
    let meta = json!({
        "library": { "name": "qd-emission", "version": qd_emission::VERSION },
        "runner": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config": config,
        "columns": header,
        "points": table.points,
        "summary": { "rows": summary.rows, "ok": summary.ok, "warned": summary.warned, "failed": summary.failed },
        "results": table.extra,
    });
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(summary)
}

/// Shortest round-trip decimal; `NaN`, `inf` and `-inf` for non-finite values.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::NAN), "NaN");
    }
}
