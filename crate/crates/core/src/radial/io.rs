//! CSV samples (`r, v, u` or `r, V`) with JSON metadata for eigenpairs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{RadialEigenpair, RadialError, RadialGrid, RadialPotential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenpairMeta {
    pub omega: f64,
    pub mass: f64,
    pub n_dim: u32,
    pub node_count: usize,
    pub grid: RadialGrid,
    pub residual: Option<f64>,
    pub data_path: PathBuf,
}

fn csv_err(e: csv::Error) -> RadialError {
    RadialError::Io(e.to_string())
}

fn json_err(e: serde_json::Error) -> RadialError {
    RadialError::Io(e.to_string())
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the JSON path.
pub fn write_eigenpair(
    pair: &RadialEigenpair,
    residual: Option<f64>,
    dir: &Path,
    stem: &str,
) -> Result<PathBuf, RadialError> {
    fs::create_dir_all(dir)?;
    let data_name = format!("{stem}.csv");
    let mut w = csv::Writer::from_path(dir.join(&data_name)).map_err(csv_err)?;
    w.write_record(["r", "v", "u"]).map_err(csv_err)?;
    for i in 0..pair.v.len() {
        w.write_record([pair.grid.r(i).to_string(), pair.v[i].to_string(), pair.u[i].to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    let meta = EigenpairMeta {
        omega: pair.omega,
        mass: pair.mass,
        n_dim: pair.n_dim,
        node_count: pair.node_count,
        grid: pair.grid,
        residual,
        data_path: data_name.into(),
    };
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(&meta).map_err(json_err)?)?;
    Ok(json_path)
}

pub fn read_eigenpair(meta_path: &Path) -> Result<RadialEigenpair, RadialError> {
    let meta: EigenpairMeta = serde_json::from_str(&fs::read_to_string(meta_path)?).map_err(json_err)?;
    let grid = RadialGrid::new(meta.grid.r_max, meta.grid.n_r)?;
    let base = meta_path.parent().unwrap_or(Path::new("."));
    let mut r = csv::Reader::from_path(base.join(&meta.data_path)).map_err(csv_err)?;
    let (mut v, mut u) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let parse = |k: usize| {
            rec.get(k)
                .ok_or_else(|| RadialError::Io("short record".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| RadialError::Io(e.to_string()))
        };
        v.push(parse(1)?);
        u.push(parse(2)?);
    }
    if v.len() != grid.len() {
        return Err(RadialError::Io(format!("expected {} rows, found {}", grid.len(), v.len())));
    }
    Ok(RadialEigenpair { omega: meta.omega, mass: meta.mass, n_dim: meta.n_dim, grid, v, u, node_count: meta.node_count })
}

/// Writes `r, V(r)` samples on `grid`.
pub fn write_potential(v: &RadialPotential, grid: &RadialGrid, path: &Path) -> Result<(), RadialError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["r", "V"]).map_err(csv_err)?;
    for (i, x) in v.sample(grid).iter().enumerate() {
        w.write_record([grid.r(i).to_string(), x.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
