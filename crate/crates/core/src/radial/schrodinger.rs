use serde::{Deserialize, Serialize};

use super::{node_count, RadialError, RadialGrid, RadialPotential, SchrodingerEigenpair};
use crate::numeric::{richardson_even, trapezoid, SymTridiagonal};

/// Finite-difference settings for `−(1/2m)Δ − W` acting on `χ = rφ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerSolver {
    pub r_max: f64,
    /// Intervals on the coarsest level; each further level halves `Δr`.
    pub n_r: usize,
    pub levels: usize,
}

impl SchrodingerSolver {
    /// Box of radius `40/√m` with `Δr = 0.04/√m` on the coarsest level.
    pub fn for_mass(m: f64) -> Self {
        Self { r_max: 40.0 / m.sqrt(), n_r: 1000, levels: 3 }
    }

    fn grid(&self, level: usize) -> RadialGrid {
        RadialGrid { r_max: self.r_max, n_r: self.n_r << level }
    }
}

fn matrix(w: &RadialPotential, m: f64, grid: &RadialGrid) -> SymTridiagonal {
    let h = grid.dr();
    let kin = 1.0 / (m * h * h);
    let d = (1..grid.n_r).map(|i| kin - w.eval(grid.r(i))).collect();
    let e = vec![-0.5 * kin; grid.n_r - 2];
    SymTridiagonal { d, e }
}

fn level_energy(t: &SymTridiagonal, k: usize) -> f64 {
    let (lo, hi) = t.bounds();
    t.eigenvalue(k, lo, hi, 1e-16)
}

/// Richardson-extrapolated energies of the lowest `count` s-levels.
pub fn schrodinger_levels(
    w: &RadialPotential,
    m: f64,
    count: usize,
    solver: &SchrodingerSolver,
) -> Result<Vec<f64>, RadialError> {
    if !(m > 0.0) {
        return Err(RadialError::BadMass(m));
    }
    RadialGrid::new(solver.r_max, solver.n_r)?;
    let per_level: Vec<Vec<f64>> = (0..solver.levels.max(1))
        .map(|l| {
            let t = matrix(w, m, &solver.grid(l));
            (0..count).map(|k| level_energy(&t, k)).collect()
        })
        .collect();
    Ok((0..count)
        .map(|k| richardson_even(&per_level.iter().map(|v| v[k]).collect::<Vec<_>>()))
        .collect())
}

/// Bound state of `−(1/2m)Δ − W` in three dimensions with `node_count` nodes.
pub fn schrodinger_eigen(
    w: &RadialPotential,
    m: f64,
    node_count_wanted: usize,
    solver: &SchrodingerSolver,
) -> Result<SchrodingerEigenpair, RadialError> {
    let energies = schrodinger_levels(w, m, node_count_wanted + 1, solver)?;
    let energy = energies[node_count_wanted];
    let finest = solver.grid(solver.levels.max(1) - 1);
    let t = matrix(w, m, &finest);
    let raw = level_energy(&t, node_count_wanted);
    if !(energy < 0.0) || !(raw < 0.0) {
        return Err(RadialError::NoBoundState { nodes: node_count_wanted, energy });
    }
    let interior = t.eigenvector(raw, 4);
    let h = finest.dr();
    let mut chi = Vec::with_capacity(finest.len());
    chi.push(0.0);
    chi.extend_from_slice(&interior);
    chi.push(0.0);

    let peak = chi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tail_start = (0.95 * finest.n_r as f64) as usize;
    let tail = chi[tail_start..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if tail > 1e-10 * peak {
        return Err(RadialError::NoDecay(tail / peak));
    }

    let norm = trapezoid(&chi.iter().map(|c| c * c).collect::<Vec<_>>(), h).sqrt();
    let mut phi: Vec<f64> = chi
        .iter()
        .enumerate()
        .map(|(i, c)| if i == 0 { 0.0 } else { c / (norm * finest.r(i)) })
        .collect();
    // quadratic extrapolation of χ/r; exact for χ = c₁r + c₂r² + c₃r³
    phi[0] = 3.0 * phi[1] - 3.0 * phi[2] + phi[3];
    if phi[0] < 0.0 {
        phi.iter_mut().for_each(|p| *p = -*p);
    }
    let nodes = node_count(&chi[1..finest.n_r]);
    if nodes != node_count_wanted {
        return Err(RadialError::NoBoundState { nodes: node_count_wanted, energy });
    }
    Ok(SchrodingerEigenpair { energy, grid: finest, phi, node_count: nodes })
}

/// Gaussian well tuned so that `E₀ = −1` and `E₁ = −1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedPotential {
    pub potential: RadialPotential,
    pub depth: f64,
    pub width: f64,
    pub e0: f64,
    pub e1: f64,
    pub iterations: usize,
}

const TARGETS: [f64; 2] = [-1.0, -0.5];

fn tuning_residual(m: f64, p: [f64; 2], solver: &SchrodingerSolver) -> Result<[f64; 2], RadialError> {
    let w = RadialPotential::gaussian(p[0], p[1]);
    let e = schrodinger_levels(&w, m, 2, solver)?;
    // a level pushed into the continuum counts as E = 0 to keep the map continuous
    Ok([e[0].min(0.0) - TARGETS[0], e[1].min(0.0) - TARGETS[1]])
}

fn fd_jacobian(m: f64, p: [f64; 2], r: [f64; 2], solver: &SchrodingerSolver) -> Result<[[f64; 2]; 2], RadialError> {
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        let mut q = p;
        let step = 1e-5 * p[c];
        q[c] += step;
        let rq = tuning_residual(m, q, solver)?;
        for row in 0..2 {
            j[row][c] = (rq[row] - r[row]) / step;
        }
    }
    Ok(j)
}

fn solve2(j: &[[f64; 2]; 2], r: [f64; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([(-r[0] * j[1][1] + r[1] * j[0][1]) / det, (-r[1] * j[0][0] + r[0] * j[1][0]) / det])
}

fn norm_inf(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Tunes `W(r) = A·exp(−r²/σ²)` by Broyden's method with a finite-difference
/// initial Jacobian and backtracking.
pub fn tune_potential(m: f64, solver: &SchrodingerSolver) -> Result<TunedPotential, RadialError> {
    if !(m > 0.0) {
        return Err(RadialError::BadMass(m));
    }
    let tol = 1e-9;
    let max_iter = 60;
    let mut p = [1.5, 5.0 / m.sqrt()];
    let mut r = tuning_residual(m, p, solver)?;
    let mut j = fd_jacobian(m, p, r, solver)?;
    let mut iterations = 0;
    while norm_inf(r) > tol {
        if iterations >= max_iter {
            return Err(RadialError::RootFindFailed { iterations, residuals: r, params: p });
        }
        iterations += 1;
        let dx = match solve2(&j, r) {
            Some(d) => d,
            None => return Err(RadialError::RootFindFailed { iterations, residuals: r, params: p }),
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let q = [p[0] + lambda * dx[0], p[1] + lambda * dx[1]];
            if q[0] > 0.0 && q[1] > 0.0 {
                let rq = tuning_residual(m, q, solver)?;
                if norm_inf(rq) < norm_inf(r) {
                    accepted = Some((q, rq));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((q, rq)) => {
                let s = [q[0] - p[0], q[1] - p[1]];
                let y = [rq[0] - r[0], rq[1] - r[1]];
                let js = [j[0][0] * s[0] + j[0][1] * s[1], j[1][0] * s[0] + j[1][1] * s[1]];
                let ss = s[0] * s[0] + s[1] * s[1];
                for row in 0..2 {
                    for c in 0..2 {
                        j[row][c] += (y[row] - js[row]) * s[c] / ss;
                    }
                }
                p = q;
                r = rq;
            }
            // the secant model went stale: rebuild it from finite differences
            None => j = fd_jacobian(m, p, r, solver)?,
        }
    }
    Ok(TunedPotential {
        potential: RadialPotential::gaussian(p[0], p[1]),
        depth: p[0],
        width: p[1],
        e0: r[0] + TARGETS[0],
        e1: r[1] + TARGETS[1],
        iterations,
    })
}
