use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Covariate matrix with the column statistics needed to undo standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    values: Array2<f64>,
    column_names: Vec<String>,
    standardized: bool,
    column_means: Array1<f64>,
    column_scales: Array1<f64>,
    constant_columns: Vec<bool>,
}

fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("X{j}")).collect()
}

fn validate(values: &Array2<f64>) -> Result<()> {
    let (n, p) = values.dim();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    if p == 0 {
        return Err(Error::Dimension("design matrix has no columns".into()));
    }
    for ((row, column), v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, column });
        }
    }
    Ok(())
}

/// Centers every column to mean 0 and scales it to unit sample standard
/// deviation (n - 1 denominator). Constant columns become all-zero, keep
/// scale 1 and are flagged.
pub fn standardize(values: Array2<f64>) -> Result<DesignMatrix> {
    let p = values.ncols();
    standardize_named(values, default_names(p))
}

pub(crate) fn standardize_named(
    mut values: Array2<f64>,
    column_names: Vec<String>,
) -> Result<DesignMatrix> {
    validate(&values)?;
    let (n, p) = values.dim();
    check_names(&column_names, p)?;
    let mut means = Array1::zeros(p);
    let mut scales = Array1::ones(p);
    let mut constant = vec![false; p];
    for (j, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n as f64;
        col.mapv_inplace(|v| v - mean);
        let ss: f64 = col.iter().map(|v| v * v).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        means[j] = mean;
        if sd <= 1e-12 * mean.abs().max(1.0) {
            constant[j] = true;
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| v / sd);
            scales[j] = sd;
        }
    }
    Ok(DesignMatrix {
        values,
        column_names,
        standardized: true,
        column_means: means,
        column_scales: scales,
        constant_columns: constant,
    })
}

fn check_names(names: &[String], p: usize) -> Result<()> {
    if names.len() != p {
        return Err(Error::Dimension(format!(
            "{} column names for {} columns",
            names.len(),
            p
        )));
    }
    Ok(())
}

impl DesignMatrix {
    /// Wraps a raw matrix without standardizing it.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        validate(&values)?;
        let (n, p) = values.dim();
        let means = values.sum_axis(Axis(0)) / n as f64;
        Ok(DesignMatrix {
            values,
            column_names: default_names(p),
            standardized: false,
            column_means: means,
            column_scales: Array1::ones(p),
            constant_columns: vec![false; p],
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        check_names(&names, self.ncols())?;
        self.column_names = names;
        Ok(self)
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn column_means(&self) -> &Array1<f64> {
        &self.column_means
    }

    pub fn column_scales(&self) -> &Array1<f64> {
        &self.column_scales
    }

    pub fn constant_columns(&self) -> &[bool] {
        &self.constant_columns
    }

    /// Maps standardized values back to the original units.
    pub fn unstandardized(&self) -> Array2<f64> {
        let mut out = self.values.clone();
        if self.standardized {
            for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
                let (m, s) = (self.column_means[j], self.column_scales[j]);
                col.mapv_inplace(|v| v * s + m);
            }
        }
        out
    }

    /// Sub-design over the given columns, keeping their statistics.
    pub fn select_columns(&self, columns: &[usize]) -> Result<DesignMatrix> {
        if columns.is_empty() {
            return Err(Error::Dimension("column selection is empty".into()));
        }
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.ncols()) {
            return Err(Error::Dimension(format!(
                "column index {bad} out of range for {} columns",
                self.ncols()
            )));
        }
        Ok(DesignMatrix {
            values: self.values.select(Axis(1), columns),
            column_names: columns.iter().map(|&j| self.column_names[j].clone()).collect(),
            standardized: self.standardized,
            column_means: columns.iter().map(|&j| self.column_means[j]).collect(),
            column_scales: columns.iter().map(|&j| self.column_scales[j]).collect(),
            constant_columns: columns.iter().map(|&j| self.constant_columns[j]).collect(),
        })
    }
}
