//! Field CSVs, JSON reports, and cleanup of partial output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use hypstab_core::Field;

use crate::error::{CliError, Result};

/// Tracks the files written into an output directory so that a failed run
/// leaves nothing behind.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Rows are time samples, columns space samples; the first row holds the
    /// `x` nodes and the first column the `t` nodes.
    pub fn write_field(&mut self, name: &str, field: &Field) -> Result<()> {
        let path = self.path(name);
        self.written.push(path.clone());
        let csv_err = |source| CliError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        let mut header = vec!["t\\x".to_string()];
        header.extend(field.x_nodes().iter().map(f64::to_string));
        w.write_record(&header).map_err(csv_err)?;
        for (k, t) in field.t_nodes().iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(field.row(k).iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    /// Columns `t` followed by one column per named series.
    pub fn write_columns(&mut self, name: &str, t: &[f64], columns: &[(String, Vec<f64>)]) -> Result<()> {
        let path = self.path(name);
        self.written.push(path.clone());
        let csv_err = |source| CliError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        let mut header = vec!["t".to_string()];
        header.extend(columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header).map_err(csv_err)?;
        for (k, tk) in t.iter().enumerate() {
            let mut rec = vec![tk.to_string()];
            rec.extend(columns.iter().map(|(_, c)| c[k].to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.path(name);
        self.written.push(path.clone());
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(&path, e.into()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    /// Removes everything written so far, and the directory if it was new.
    pub fn discard(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// The values of data row `row` (row 0 is the first time sample) of a field
/// CSV written by [`Artifacts::write_field`].
pub fn read_field_row(path: &Path, row: usize) -> Result<Vec<f64>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let rec = r
        .records()
        .nth(row)
        .ok_or_else(|| CliError::Scenario(format!("{}: no data row {row}", path.display())))?
        .map_err(csv_err)?;
    rec.iter()
        .skip(1)
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| CliError::Scenario(format!("{}: row {row}: {s:?}: {e}", path.display())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use hypstab_core::Grid;

    #[test]
    fn test_field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let grid = Grid::uniform(1.0, 1.0, 3, 5).unwrap();
        let f = grid.tabulate(|t, x| (t + 0.1) * x.sin() / 3.0);
        let mut a = Artifacts::create(&out).unwrap();
        a.write_field("f.csv", &f).unwrap();
        let row = read_field_row(&out.join("f.csv"), 2).unwrap();
        assert_eq!(row, f.row(2).to_vec());
        a.discard();
        assert!(!out.exists());
    }
}
