//! Feature tables, their CSV form, and z-score standardization.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::registry::{feature_names, FEATURE_COUNT};
use super::LingError;

/// Rows of feature vectors keyed by transcript id, columns in registry order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn row(&self, id: &str) -> Option<&[f64]> {
        self.ids.iter().position(|x| x == id).map(|i| self.rows[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Writes `id` plus the 110 feature columns. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_feature_csv<W: std::io::Write>(w: W, table: &FeatureTable) -> Result<(), LingError> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| LingError::Table(e.to_string());
    let mut header = vec!["id"];
    header.extend(feature_names());
    out.write_record(&header).map_err(err)?;
    for (id, row) in table.ids.iter().zip(&table.rows) {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(id.clone());
        rec.extend(row.iter().map(|v| format!("{v:?}")));
        out.write_record(&rec).map_err(err)?;
    }
    out.flush().map_err(|e| LingError::Table(e.to_string()))
}

pub fn read_feature_csv(path: &Path) -> Result<FeatureTable, LingError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| LingError::Table(format!("{}: {e}", path.display())))?;
    let header = rdr.headers().map_err(|e| LingError::Table(e.to_string()))?.clone();
    let expected: Vec<&str> = std::iter::once("id").chain(feature_names()).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(LingError::Table(format!("{}: header does not match the feature registry", path.display())));
    }
    let mut table = FeatureTable::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| LingError::Table(e.to_string()))?;
        let row = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| LingError::Table(format!("row {}: {e}", i + 2)))?;
        table.ids.push(rec[0].to_string());
        table.rows.push(row);
    }
    Ok(table)
}

/// Per-column mean and population standard deviation fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, LingError> {
        let Some(first) = rows.first() else {
            return Err(LingError::Table("cannot fit a standardizer on zero rows".into()));
        };
        let d = first.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(LingError::Table("ragged feature rows".into()));
        }
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        let mut column = Vec::with_capacity(rows.len());
        for j in 0..d {
            column.clear();
            column.extend(rows.iter().map(|r| r[j]));
            mean[j] = crate::stats::mean(&column);
            std[j] = crate::stats::population_std(&column);
        }
        Ok(Self { mean, std })
    }

    /// Zero-variance columns map to 0.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(self.mean.iter().zip(&self.std)).map(|(x, (m, s))| if *s > 0.0 { (x - m) / s } else { 0.0 }).collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

const _: () = assert!(FEATURE_COUNT == 110);
