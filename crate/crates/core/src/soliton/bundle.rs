//! Wave bundle directory:
//!
//! - `wave.json`: mass, frequencies, amplitudes, frame, grid, potential.
//! - `profiles.csv`: `r, v0, u0, v1, u1`.
//! - `nonlinearity.csv`: `tau, f`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MultiFrequencyWave, NonlinearityTable, SolitonError, SpinorFrame};
use crate::radial::{RadialEigenpair, RadialGrid, RadialPotential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveMeta {
    pub mass: f64,
    pub n_dim: u32,
    pub omega: [f64; 2],
    pub node_counts: [usize; 2],
    pub amplitudes: [Complex64; 4],
    pub frame: SpinorFrame,
    pub grid: RadialGrid,
    pub potential: RadialPotential,
    pub interpolation: String,
}

fn io<E: std::fmt::Display>(e: E) -> SolitonError {
    SolitonError::Io(e.to_string())
}

pub fn write_bundle(dir: &Path, wave: &MultiFrequencyWave, table: &NonlinearityTable) -> Result<(), SolitonError> {
    fs::create_dir_all(dir)?;
    let meta = WaveMeta {
        mass: wave.mass,
        n_dim: wave.ground.n_dim,
        omega: wave.omegas(),
        node_counts: [wave.ground.node_count, wave.excited.node_count],
        amplitudes: wave.amplitudes,
        frame: wave.frame,
        grid: wave.grid(),
        potential: wave.potential.clone(),
        interpolation: table.rule.clone(),
    };
    fs::write(dir.join("wave.json"), serde_json::to_string_pretty(&meta).map_err(io)?)?;

    let mut w = csv::Writer::from_path(dir.join("profiles.csv")).map_err(io)?;
    w.write_record(["r", "v0", "u0", "v1", "u1"]).map_err(io)?;
    let (g, e) = (&wave.ground, &wave.excited);
    for i in 0..g.v.len() {
        w.write_record([
            wave.grid().r(i).to_string(),
            g.v[i].to_string(),
            g.u[i].to_string(),
            e.v[i].to_string(),
            e.u[i].to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("nonlinearity.csv")).map_err(io)?;
    w.write_record(["tau", "f"]).map_err(io)?;
    for (t, f) in table.knots.iter().zip(&table.values) {
        w.write_record([t.to_string(), f.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn read_columns(path: &Path, width: usize) -> Result<Vec<Vec<f64>>, SolitonError> {
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let mut cols = vec![Vec::new(); width];
    for rec in r.records() {
        let rec = rec.map_err(io)?;
        if rec.len() != width {
            return Err(SolitonError::Io(format!("{}: expected {width} columns", path.display())));
        }
        for (k, col) in cols.iter_mut().enumerate() {
            col.push(rec[k].trim().parse::<f64>().map_err(io)?);
        }
    }
    Ok(cols)
}

pub fn read_bundle(dir: &Path) -> Result<(MultiFrequencyWave, NonlinearityTable), SolitonError> {
    let meta: WaveMeta = serde_json::from_str(&fs::read_to_string(dir.join("wave.json"))?).map_err(io)?;
    let cols = read_columns(&dir.join("profiles.csv"), 5)?;
    if cols[0].len() != meta.grid.len() {
        return Err(SolitonError::Io(format!("profiles.csv has {} rows, grid has {}", cols[0].len(), meta.grid.len())));
    }
    let pair = |k: usize, j: usize| RadialEigenpair {
        omega: meta.omega[j],
        mass: meta.mass,
        n_dim: meta.n_dim,
        grid: meta.grid,
        v: cols[k].clone(),
        u: cols[k + 1].clone(),
        node_count: meta.node_counts[j],
    };
    let wave = MultiFrequencyWave::new(pair(1, 0), pair(3, 1), meta.amplitudes, meta.frame, meta.potential.clone())?;
    let t = read_columns(&dir.join("nonlinearity.csv"), 2)?;
    let table = NonlinearityTable::from_knots(t[0].clone(), t[1].clone())?;
    Ok((wave, table))
}
