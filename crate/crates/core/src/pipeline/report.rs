//! Run artifacts on disk.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::ForecastReport;
use crate::error::Result;

/// Writes `predictions.csv`, `metrics.json`, `manifest.json`,
/// `modes/mode_<k>.csv` and, when present, `loss_trace.csv` into `dir`.
pub fn write_report(report: &ForecastReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut csv = String::from("index,actual,predicted,abs_error\n");
    for (k, (a, p)) in report.actual.iter().zip(&report.predicted).enumerate() {
        let _ = writeln!(csv, "{},{a},{p},{}", report.first_index + k, (a - p).abs());
    }
    fs::write(dir.join("predictions.csv"), csv)?;

    let metrics = serde_json::to_string_pretty(&report.metrics.to_json())?;
    fs::write(dir.join("metrics.json"), metrics + "\n")?;
    let manifest = serde_json::to_string_pretty(&report.manifest)?;
    fs::write(dir.join("manifest.json"), manifest + "\n")?;

    let modes_dir = dir.join("modes");
    if modes_dir.exists() {
        fs::remove_dir_all(&modes_dir)?;
    }
    if !report.modes.is_empty() {
        fs::create_dir_all(&modes_dir)?;
        for (k, mode) in report.modes.iter().enumerate() {
            let mut text = String::from("index,value\n");
            for (i, v) in mode.iter().enumerate() {
                let _ = writeln!(text, "{i},{v}");
            }
            fs::write(modes_dir.join(format!("mode_{k}.csv")), text)?;
        }
    }

    if let Some(trace) = &report.loss_trace {
        let mut text = String::from("epoch,loss\n");
        for (e, l) in trace.iter().enumerate() {
            let _ = writeln!(text, "{e},{l}");
        }
        fs::write(dir.join("loss_trace.csv"), text)?;
    }
    Ok(())
}
