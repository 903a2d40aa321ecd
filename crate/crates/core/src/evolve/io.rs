//! Trajectory files.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "SLTRAJ01"
//! model      u32      0 = nls, 1 = nlkg, 2 = synthetic
//! has_ut     u32      0 or 1
//! L          f64
//! n_x        u64
//! dt         f64
//! stride     u64
//! n_snap     u64
//! n_cons     u64      0 or n_snap
//! times      n_snap × f64
//! conserved  n_cons × f64
//! u          n_snap × n_x × (re f64, im f64)
//! ut         same as u, present iff has_ut = 1
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{EvolveError, Model, PeriodicGrid, SpectrumProbe, Trajectory1D};

const MAGIC: &[u8; 8] = b"SLTRAJ01";

pub fn write_trajectory(traj: &Trajectory1D, path: &Path) -> Result<(), EvolveError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let model = match traj.model {
        Model::Nls => 0u32,
        Model::Nlkg => 1,
        Model::Synthetic => 2,
    };
    w.write_all(MAGIC)?;
    w.write_all(&model.to_le_bytes())?;
    w.write_all(&(traj.ut.is_some() as u32).to_le_bytes())?;
    w.write_all(&traj.grid.l.to_le_bytes())?;
    w.write_all(&(traj.grid.n_x as u64).to_le_bytes())?;
    w.write_all(&traj.dt.to_le_bytes())?;
    w.write_all(&(traj.stride as u64).to_le_bytes())?;
    w.write_all(&(traj.times.len() as u64).to_le_bytes())?;
    w.write_all(&(traj.conserved.len() as u64).to_le_bytes())?;
    for x in traj.times.iter().chain(&traj.conserved) {
        w.write_all(&x.to_le_bytes())?;
    }
    let fields = std::iter::once(&traj.u).chain(traj.ut.as_ref());
    for field in fields {
        for snap in field {
            for z in snap {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], EvolveError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            EvolveError::Io(format!("truncated trajectory file at byte {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, EvolveError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<usize, EvolveError> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| EvolveError::Io(format!("count {v} too large")))
    }
    fn f64(&mut self) -> Result<f64, EvolveError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn field(&mut self, n_snap: usize, n_x: usize) -> Result<Vec<Vec<Complex64>>, EvolveError> {
        (0..n_snap)
            .map(|_| (0..n_x).map(|_| Ok(Complex64::new(self.f64()?, self.f64()?))).collect())
            .collect()
    }
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory1D, EvolveError> {
    let buf = fs::read(path)?;
    let mut c = Cursor { buf: &buf, pos: 0 };
    if c.take(8)? != MAGIC {
        return Err(EvolveError::Io(format!("{}: not a trajectory file", path.display())));
    }
    let model = match c.u32()? {
        0 => Model::Nls,
        1 => Model::Nlkg,
        2 => Model::Synthetic,
        k => return Err(EvolveError::Io(format!("unknown model tag {k}"))),
    };
    let has_ut = c.u32()? == 1;
    let l = c.f64()?;
    let n_x = c.u64()?;
    let grid = PeriodicGrid::new(l, n_x)?;
    let dt = c.f64()?;
    let stride = c.u64()?;
    let n_snap = c.u64()?;
    let n_cons = c.u64()?;
    let times = (0..n_snap).map(|_| c.f64()).collect::<Result<Vec<_>, _>>()?;
    let conserved = (0..n_cons).map(|_| c.f64()).collect::<Result<Vec<_>, _>>()?;
    let u = c.field(n_snap, n_x)?;
    let ut = if has_ut { Some(c.field(n_snap, n_x)?) } else { None };
    if c.pos != buf.len() {
        return Err(EvolveError::Io(format!("{} trailing bytes", buf.len() - c.pos)));
    }
    Ok(Trajectory1D { model, grid, dt, stride, times, u, ut, conserved })
}

fn csv_err(e: csv::Error) -> EvolveError {
    EvolveError::Io(e.to_string())
}

/// Long format: `t, x, re, im`.
pub fn write_trajectory_csv(traj: &Trajectory1D, path: &Path) -> Result<(), EvolveError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "x", "re", "im"]).map_err(csv_err)?;
    let xs = traj.grid.nodes();
    for (t, snap) in traj.times.iter().zip(&traj.u) {
        for (x, z) in xs.iter().zip(snap) {
            w.write_record([t.to_string(), x.to_string(), z.re.to_string(), z.im.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per ω: `omega, re_<j>, im_<j>, ...` for each probe index `j`.
pub fn write_spectrum_csv(spec: &SpectrumProbe, path: &Path) -> Result<(), EvolveError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["omega".to_string()];
    for p in &spec.probes {
        header.push(format!("re_{}", p.index));
        header.push(format!("im_{}", p.index));
    }
    w.write_record(&header).map_err(csv_err)?;
    for (k, om) in spec.omega.iter().enumerate() {
        let mut row = vec![om.to_string()];
        for p in &spec.probes {
            row.push(p.values[k].re.to_string());
            row.push(p.values[k].im.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
