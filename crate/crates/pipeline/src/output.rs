//! Tidy CSV outputs.

use std::path::Path;

use crate::error::{PipelineError, Result};
use crate::io::{create_writer, Table};
use crate::quantiles::summarize_quantiles;

/// Formats a float so that parsing it back yields the same value.
pub fn fmt(v: f64) -> String {
    v.to_string()
}

/// Quantiles per key, written long: key columns, then `quantile,value`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub key_columns: Vec<String>,
    pub levels: Vec<f64>,
    pub rows: Vec<(Vec<String>, Vec<f64>)>,
}

impl QuantileTable {
    pub fn new(key_columns: &[&str], levels: &[f64]) -> Self {
        QuantileTable {
            key_columns: key_columns.iter().map(|s| s.to_string()).collect(),
            levels: levels.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Summarizes `values` (one per trajectory) under `key`.
    pub fn push(&mut self, key: Vec<String>, values: &[f64]) -> Result<()> {
        debug_assert_eq!(key.len(), self.key_columns.len());
        let q = summarize_quantiles(values, &self.levels)?;
        self.rows.push((key, q));
        Ok(())
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.iter().all(|(_, q)| q.windows(2).all(|w| w[0] <= w[1]))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = create_writer(path)?;
        let mut header = self.key_columns.clone();
        header.extend(["quantile".to_string(), "value".to_string()]);
        w.write_record(&header).map_err(|e| PipelineError::csv(path, e))?;
        for (key, values) in &self.rows {
            for (level, value) in self.levels.iter().zip(values) {
                let mut record = key.clone();
                record.push(fmt(*level));
                record.push(fmt(*value));
                w.write_record(&record).map_err(|e| PipelineError::csv(path, e))?;
            }
        }
        w.flush().map_err(|e| PipelineError::io(path, e))
    }

    /// Reads a table written by [`QuantileTable::write`], checking that every
    /// key carries the same levels and that values never decrease across them.
    pub fn read(path: &Path) -> Result<Self> {
        let table = Table::open(path)?;
        table.require(&["quantile", "value"])?;
        let headers = table.headers();
        let key_columns: Vec<String> = headers[..headers.len() - 2].to_vec();
        let mut out = QuantileTable { key_columns: key_columns.clone(), levels: Vec::new(), rows: Vec::new() };
        table.for_each_row(|row| {
            let key = key_columns.iter().map(|c| row.str(c).map(String::from)).collect::<Result<Vec<_>>>()?;
            let level = row.number("quantile")?;
            let value = row.number("value")?;
            if out.rows.last().is_none_or(|(k, _)| *k != key) {
                if out.rows.last().is_some_and(|(_, v)| v.len() != out.levels.len()) {
                    return Err(row.error("quantile", "previous key has missing quantile levels"));
                }
                out.rows.push((key, Vec::new()));
            }
            let first_key = out.rows.len() == 1;
            let values = &mut out.rows.last_mut().expect("pushed").1;
            // the first key defines the levels
            if first_key {
                if out.levels.last().is_some_and(|l| *l >= level) {
                    return Err(row.error("quantile", "levels must increase"));
                }
                out.levels.push(level);
            } else if out.levels.get(values.len()) != Some(&level) {
                return Err(row.error("quantile", format!("unexpected level {level}")));
            }
            if values.last().is_some_and(|v| *v > value) {
                return Err(row.error("value", "value decreases across quantile levels"));
            }
            values.push(value);
            Ok(())
        })?;
        if out.rows.last().is_some_and(|(_, v)| v.len() != out.levels.len()) {
            return Err(PipelineError::Input {
                file: path.to_path_buf(),
                message: "last key has missing quantile levels".into(),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2.5e-9, 123456.789, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn table_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        let mut t = QuantileTable::new(&["country", "period"], &[0.1, 0.5, 0.9]);
        t.push(vec!["A".into(), "2010-2015".into()], &[1.0 / 3.0, 0.2, 0.7, 0.9]).unwrap();
        t.push(vec!["A".into(), "2015-2020".into()], &[5.0]).unwrap();
        t.write(&path).unwrap();
        assert_eq!(QuantileTable::read(&path).unwrap(), t);
    }

    #[test]
    fn read_rejects_decreasing_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        std::fs::write(&path, "k,quantile,value\na,0.1,2\na,0.9,1\n").unwrap();
        let err = QuantileTable::read(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
