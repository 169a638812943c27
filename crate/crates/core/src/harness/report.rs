use std::fs;
use std::path::{Path, PathBuf};

use super::MonteCarloReport;
use crate::{Error, Result};

pub const REPORT_FILES: [&str; 4] = [
    "replications.csv",
    "summary.csv",
    "selection_proportions.csv",
    "config.json",
];

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn write_rows(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the four report files into `output_dir`, creating it if needed.
/// Returns the written paths in [`REPORT_FILES`] order.
pub fn write_report(report: &MonteCarloReport, output_dir: &Path) -> Result<Vec<PathBuf>> {
    let config = report.config.resolved()?;
    fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    let paths: Vec<PathBuf> = REPORT_FILES.iter().map(|f| output_dir.join(f)).collect();
    let p = config.scenario.p;

    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.replication.to_string(),
                r.method.to_string(),
                r.status.clone(),
                r.att.map(fmt_f64).unwrap_or_default(),
                r.n_pairs.to_string(),
                r.selected_count().to_string(),
                r.selected.iter().map(|&s| if s { '1' } else { '0' }).collect(),
            ]
        })
        .collect();
    write_rows(
        &paths[0],
        &[
            "replication",
            "method",
            "status",
            "att",
            "n_pairs",
            "n_selected",
            "selected",
        ],
        rows,
    )?;

    let te = config.scenario.true_te;
    let rows = report
        .summary
        .iter()
        .map(|s| {
            vec![
                s.method.to_string(),
                (s.successes + s.failures).to_string(),
                s.successes.to_string(),
                s.failures.to_string(),
                fmt_f64(s.mean_att),
                fmt_f64(s.bias),
                fmt_f64(s.variance),
                fmt_f64(te),
                fmt_f64(s.mean_selected),
            ]
        })
        .collect();
    write_rows(
        &paths[1],
        &[
            "method",
            "replications",
            "successes",
            "failures",
            "mean_att",
            "bias",
            "variance",
            "true_te",
            "mean_selected",
        ],
        rows,
    )?;

    let mut rows = Vec::with_capacity(report.selection_proportions.len() * p);
    for (method, props) in &report.selection_proportions {
        for (j, v) in props.iter().enumerate() {
            rows.push(vec![
                method.to_string(),
                format!("X{}", j + 1),
                j.to_string(),
                fmt_f64(*v),
            ]);
        }
    }
    write_rows(
        &paths[2],
        &["method", "variable", "index", "proportion"],
        rows,
    )?;

    let mut json = serde_json::to_string_pretty(&config)?;
    json.push('\n');
    fs::write(&paths[3], json).map_err(|e| Error::io(&paths[3], e))?;
    Ok(paths)
}
