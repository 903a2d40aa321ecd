//! CSV and JSON-descriptor serialization of [`GriddedDistribution`].
//!
//! CSV layout: header `x, re@ω_0, im@ω_0, re@ω_1, im@ω_1, …`, then one row per
//! x-column holding `x_i` followed by the real/imaginary pair of every sample.
//! The descriptor is `{"grid": …, "threshold": …, "data_path": "…"}` with
//! `data_path` relative to the descriptor's directory.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid2, GriddedDistribution, SupportError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionDescriptor {
    pub grid: Grid2,
    pub threshold: f64,
    pub data_path: PathBuf,
}

fn csv_err(e: csv::Error) -> SupportError {
    SupportError::Io(e.to_string())
}

pub fn write_csv(f: &GriddedDistribution, path: &Path) -> Result<(), SupportError> {
    let grid = f.grid();
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["x".to_string()];
    for k in 0..grid.n_omega {
        let w = grid.omega(k);
        header.push(format!("re@{w}"));
        header.push(format!("im@{w}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..grid.n_x {
        let mut row = Vec::with_capacity(1 + 2 * grid.n_omega);
        row.push(grid.x(i).to_string());
        for z in f.column(i) {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(grid: Grid2, threshold: f64, path: &Path) -> Result<GriddedDistribution, SupportError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut values = Vec::with_capacity(grid.n_x * grid.n_omega);
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| SupportError::Io(format!("{s:?}: {e}")));
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 1 + 2 * grid.n_omega {
            return Err(SupportError::ShapeMismatch { expected: 1 + 2 * grid.n_omega, got: rec.len() });
        }
        for k in 0..grid.n_omega {
            values.push(Complex64::new(parse(&rec[1 + 2 * k])?, parse(&rec[2 + 2 * k])?));
        }
    }
    GriddedDistribution::new(grid, values, threshold)
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the descriptor path.
pub fn write_distribution(f: &GriddedDistribution, dir: &Path, stem: &str) -> Result<PathBuf, SupportError> {
    fs::create_dir_all(dir)?;
    let data_name = format!("{stem}.csv");
    write_csv(f, &dir.join(&data_name))?;
    let desc = DistributionDescriptor { grid: *f.grid(), threshold: f.threshold(), data_path: data_name.into() };
    let json_path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&desc).map_err(|e| SupportError::Io(e.to_string()))?;
    fs::write(&json_path, text)?;
    Ok(json_path)
}

pub fn read_distribution(descriptor: &Path) -> Result<GriddedDistribution, SupportError> {
    let text = fs::read_to_string(descriptor)?;
    let desc: DistributionDescriptor = serde_json::from_str(&text).map_err(|e| SupportError::Io(e.to_string()))?;
    let base = descriptor.parent().unwrap_or(Path::new("."));
    let grid = Grid2::new(
        desc.grid.x_min,
        desc.grid.x_max,
        desc.grid.n_x,
        desc.grid.omega_min,
        desc.grid.omega_max,
        desc.grid.n_omega,
    )?;
    read_csv(grid, desc.threshold, &base.join(&desc.data_path))
}
