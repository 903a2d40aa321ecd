//! Staggered-grid matrix discretization of the radial Dirac operator.
//!
//! With `P = r^k v` on the nodes `r_i = iΔr` and `Q = r^k u` on the half
//! nodes `r_{i+1/2}`, `k = (n−1)/2`, the system becomes
//!
//! ```text
//! ωP =  (m−V)P + Q' + (k/r)Q
//! ωQ = −(m−V)Q − P' + (k/r)P
//! ```
//!
//! which discretizes to a symmetric tridiagonal matrix in the interleaved
//! ordering `Q_{1/2}, P_1, Q_{3/2}, …, P_{N−1}, Q_{N−1/2}` with `P_0 = P_N = 0`.
//! `k/r` is taken at the half nodes on both rows: `P/r → v(0)` does not vanish
//! at the origin, so averaging `P/r` over `P_0, P_1` would lose an order.

use super::{RadialError, RadialGrid, RadialPotential};
use crate::numeric::{richardson_even, SymTridiagonal};

fn staggered(v: &RadialPotential, m: f64, n_dim: u32, grid: &RadialGrid) -> SymTridiagonal {
    let h = grid.dr();
    let k = (n_dim as f64 - 1.0) / 2.0;
    let n = grid.n_r;
    let mut d = Vec::with_capacity(2 * n - 1);
    let mut e = Vec::with_capacity(2 * n - 2);
    for j in 0..n {
        let rh = (j as f64 + 0.5) * h;
        d.push(-(m - v.eval(rh)));
        if j + 1 < n {
            let r1 = (j + 1) as f64 * h;
            // Q_{j+1/2} – P_{j+1}
            e.push(-1.0 / h + k / (2.0 * rh));
            d.push(m - v.eval(r1));
            // P_{j+1} – Q_{j+3/2}
            e.push(1.0 / h + k / (2.0 * (rh + h)));
        }
    }
    SymTridiagonal { d, e }
}

/// Eigenvalues of the staggered matrix inside the gap `(0, m)`, ascending.
pub fn dirac_matrix_levels(
    v: &RadialPotential,
    m: f64,
    n_dim: u32,
    grid: &RadialGrid,
) -> Result<Vec<f64>, RadialError> {
    if !(m > 0.0) {
        return Err(RadialError::BadMass(m));
    }
    if n_dim < 1 {
        return Err(RadialError::BadDimension);
    }
    let grid = RadialGrid::new(grid.r_max, grid.n_r)?;
    let t = staggered(v, m, n_dim, &grid);
    let first = t.count_below(0.0);
    let last = t.count_below(m);
    Ok((first..last).map(|k| t.eigenvalue(k, 0.0, m, 1e-16)).collect())
}

/// Richardson extrapolation of the `count` lowest gap eigenvalues over
/// `levels` successive halvings of `Δr`.
pub fn dirac_matrix_levels_extrapolated(
    v: &RadialPotential,
    m: f64,
    n_dim: u32,
    grid: &RadialGrid,
    count: usize,
    levels: usize,
) -> Result<Vec<f64>, RadialError> {
    let mut table: Vec<Vec<f64>> = Vec::new();
    for l in 0..levels.max(1) {
        let vals = dirac_matrix_levels(v, m, n_dim, &grid.refined(1 << l))?;
        if vals.len() < count {
            return Err(RadialError::NoEigenvalue { lo: 0.0, hi: m });
        }
        table.push(vals[..count].to_vec());
    }
    Ok((0..count).map(|k| richardson_even(&table.iter().map(|t| t[k]).collect::<Vec<_>>())).collect())
}
