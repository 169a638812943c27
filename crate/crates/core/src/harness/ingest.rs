use std::fs::File;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};

use crate::oaenet::Dataset;
use crate::penalized_glm::design::standardize_named;
use crate::{Error, Result};

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || ["na", "nan", "null"].contains(&c.to_ascii_lowercase().as_str())
}

/// Reads a CSV with a header row. `treatment_column` must hold 0/1 values,
/// `outcome_column` numbers; every other column is a numeric covariate.
/// Covariates are standardized. Row numbers in errors count data rows from 1.
pub fn ingest_dataset(
    path: &Path,
    treatment_column: &str,
    outcome_column: &str,
) -> Result<Dataset> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(csv_err)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let t_col = find(treatment_column)?;
    let y_col = find(outcome_column)?;
    let covariates: Vec<usize> = (0..header.len()).filter(|&c| c != t_col && c != y_col).collect();
    if covariates.is_empty() {
        return Err(Error::Dimension("no covariate columns".into()));
    }

    let mut values = Vec::new();
    let mut a = Vec::new();
    let mut y = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(csv_err)?;
        let number = |c: usize| -> Result<f64> {
            let cell = &record[c];
            if is_missing(cell) {
                return Err(Error::MissingValue {
                    row,
                    column: header[c].clone(),
                });
            }
            cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: header[c].clone(),
                value: cell.to_string(),
            })
        };
        for &c in &covariates {
            values.push(number(c)?);
        }
        let t = number(t_col)?;
        a.push(match t {
            v if v == 0.0 => 0,
            v if v == 1.0 => 1,
            _ => {
                return Err(Error::NonBinaryTreatment {
                    row,
                    value: record[t_col].to_string(),
                })
            }
        });
        y.push(number(y_col)?);
    }
    let n = a.len();
    let x = Array2::from_shape_vec((n, covariates.len()), values)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    let names = covariates.iter().map(|&c| header[c].clone()).collect();
    let x = standardize_named(x, names)?;
    Dataset::new(x, a, Array1::from_vec(y))
}

/// Writes covariates, treatment and outcome as CSV with full float precision,
/// so that [`ingest_dataset`] reads back the same values.
pub fn write_dataset_csv(
    path: &Path,
    x: ArrayView2<f64>,
    column_names: &[String],
    a: &[u8],
    y: &[f64],
) -> Result<()> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = column_names.iter().map(String::as_str).collect();
    header.extend(["treatment", "outcome"]);
    w.write_record(&header).map_err(wrap)?;
    for (i, row) in x.rows().into_iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        rec.push(a[i].to_string());
        rec.push(format!("{}", y[i]));
        w.write_record(&rec).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
