//! Radial Schrödinger and Dirac eigenproblems.
//!
//! Schrödinger levels of `−(1/2m)Δ − W` (s-waves in three dimensions) are
//! computed from a tridiagonal finite-difference matrix with Sturm-count
//! bisection and Richardson extrapolation. Dirac levels of the radial system
//!
//! ```text
//! ω v =  u' + (n−1)/r · u + (m − V) v
//! ω u = −v' − (m − V) u
//! ```
//!
//! are found by shooting ([`dirac_eigen`]) and cross-checked against a
//! staggered-grid matrix discretization ([`dirac_matrix_levels`]).

mod dirac;
mod io;
mod matrix;
pub mod ode;
mod schrodinger;

pub use dirac::{
    check_rho_monotone, dirac_eigen, eigen_residual, nonrelativistic_seed, overlap, scale_to_dirac_potential,
    DiracSolver, EigenResidual, RhoReport,
};
pub(crate) use dirac::{centered_derivative, Parity};
pub use io::{read_eigenpair, write_eigenpair, write_potential, EigenpairMeta};
pub use matrix::{dirac_matrix_levels, dirac_matrix_levels_extrapolated};
pub use schrodinger::{schrodinger_eigen, schrodinger_levels, tune_potential, SchrodingerSolver, TunedPotential};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::lagrange4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error("radial grid needs r_max > 0 and at least 4 intervals (r_max = {r_max}, n_r = {n_r})")]
    BadGrid { r_max: f64, n_r: usize },
    #[error("invalid potential: {0}")]
    BadPotential(String),
    #[error("mass must be positive, got {0}")]
    BadMass(f64),
    #[error("frequency {omega} outside (0, m = {m})")]
    FrequencyOutOfGap { omega: f64, m: f64 },
    #[error("no bound state with {nodes} node(s): level energy {energy}")]
    NoBoundState { nodes: usize, energy: f64 },
    #[error("unsupported node count {0}")]
    UnsupportedNodeCount(usize),
    #[error("no eigenvalue in [{lo}, {hi}]")]
    NoEigenvalue { lo: f64, hi: f64 },
    #[error("eigenvalues found in [{lo}, {hi}] have node counts {found:?}, wanted {wanted}")]
    NodeMismatch { lo: f64, hi: f64, found: Vec<usize>, wanted: usize },
    #[error("root finding failed after {iterations} iterations; residuals {residuals:?} at (A, sigma) = {params:?}")]
    RootFindFailed { iterations: usize, residuals: [f64; 2], params: [f64; 2] },
    #[error("eigenfunction does not decay at r_max: |boundary|/max = {0:e}")]
    NoDecay(f64),
    #[error("dimension n must be >= 1")]
    BadDimension,
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for RadialError {
    fn from(e: std::io::Error) -> Self {
        RadialError::Io(e.to_string())
    }
}

/// Uniform nodes `r_i = i·Δr`, `i = 0..=n_r`, with `Δr = r_max/n_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n_r: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_r: usize) -> Result<Self, RadialError> {
        if !(r_max > 0.0) || !r_max.is_finite() || n_r < 4 {
            return Err(RadialError::BadGrid { r_max, n_r });
        }
        Ok(Self { r_max, n_r })
    }

    /// Same extent, `Δr` divided by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self { r_max: self.r_max, n_r: self.n_r * factor }
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    pub fn len(&self) -> usize {
        self.n_r + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_r).map(|i| self.r(i)).collect()
    }

    /// Radial measure weights `r^{n−1}` at the nodes.
    pub fn measure(&self, n_dim: u32) -> Vec<f64> {
        self.nodes().iter().map(|r| r.powi(n_dim as i32 - 1)).collect()
    }
}

/// Spherically symmetric potential as a function of `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RadialPotential {
    /// `A·exp(−r²/σ²)`.
    Gaussian { depth: f64, width: f64 },
    /// `Z/r`; singular at the origin, used as an analytic test case.
    Coulomb { charge: f64 },
    Constant { value: f64 },
    /// `c·W(√c · r)`.
    Scaled { base: Box<RadialPotential>, factor: f64 },
    /// Samples on a uniform grid starting at `r = 0`, cubic interpolation.
    Tabulated { dr: f64, values: Vec<f64> },
}

impl RadialPotential {
    pub fn gaussian(depth: f64, width: f64) -> Self {
        RadialPotential::Gaussian { depth, width }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialPotential::Gaussian { depth, width } => depth * (-(r / width).powi(2)).exp(),
            RadialPotential::Coulomb { charge } => charge / r,
            RadialPotential::Constant { value } => *value,
            RadialPotential::Scaled { base, factor } => factor * base.eval(factor.sqrt() * r),
            RadialPotential::Tabulated { dr, values } => lagrange4(values, 0.0, *dr, r),
        }
    }

    /// Coefficient `V₂` of `V(r) = V(0) + V₂ r² + O(r⁴)` near the origin.
    pub fn curvature_at_origin(&self) -> f64 {
        match self {
            RadialPotential::Gaussian { depth, width } => -depth / (width * width),
            RadialPotential::Constant { .. } => 0.0,
            RadialPotential::Coulomb { .. } => 0.0,
            RadialPotential::Scaled { base, factor } => factor * factor * base.curvature_at_origin(),
            RadialPotential::Tabulated { dr, values } => {
                if values.len() < 3 {
                    0.0
                } else {
                    // even extension: V(h) = V0 + V2 h², V(2h) = V0 + 4 V2 h²
                    (values[1] - values[0]) / (dr * dr)
                }
            }
        }
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.eval(r)).collect()
    }

    pub fn tabulate(&self, grid: &RadialGrid) -> RadialPotential {
        RadialPotential::Tabulated { dr: grid.dr(), values: self.sample(grid) }
    }

    /// Positive, strictly decreasing, and negligible at `r_max`, checked on
    /// the grid nodes. Values below `1e-300` count as underflowed zeros.
    pub fn validate(&self, grid: &RadialGrid) -> Result<(), RadialError> {
        let v = self.sample(grid);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(RadialError::BadPotential("non-finite sample".into()));
        }
        if !(v[0] > 0.0) {
            return Err(RadialError::BadPotential(format!("V(0) = {} is not positive", v[0])));
        }
        for i in 1..v.len() {
            if v[i] < 0.0 {
                return Err(RadialError::BadPotential(format!("negative at r = {}", grid.r(i))));
            }
            if v[i] >= v[i - 1] && v[i - 1] > 1e-300 {
                return Err(RadialError::BadPotential(format!("not strictly decreasing at r = {}", grid.r(i))));
            }
        }
        let tail = *v.last().unwrap_or(&0.0);
        if tail > 1e-6 * v[0] {
            return Err(RadialError::BadPotential(format!("V(r_max)/V(0) = {:e} does not vanish", tail / v[0])));
        }
        Ok(())
    }
}

/// Level of `−(1/2m)Δ − W` in three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerEigenpair {
    pub energy: f64,
    pub grid: RadialGrid,
    /// `φ(r_i)`, normalized in `L²(r² dr)`, with `φ(0) > 0`.
    pub phi: Vec<f64>,
    pub node_count: usize,
}

impl SchrodingerEigenpair {
    pub fn eval(&self, r: f64) -> f64 {
        lagrange4(&self.phi, 0.0, self.grid.dr(), r)
    }
}

/// Eigenpair `(ω; v, u)` of the radial Dirac system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialEigenpair {
    pub omega: f64,
    pub mass: f64,
    pub n_dim: u32,
    pub grid: RadialGrid,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub node_count: usize,
}

fn count_sign_changes(values: &[f64], floor: f64) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for &x in values {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            count += 1;
        }
        last = x;
    }
    count
}

pub(crate) fn node_count(values: &[f64]) -> usize {
    let peak = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    count_sign_changes(values, 1e-10 * peak)
}

#[cfg(test)]
mod tests;
