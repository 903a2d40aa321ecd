//! One-dimensional periodic NLS/NLKG evolution, time spectra at probe
//! points, modulus variance, and the nonlinear Dirac residual of an
//! assembled multifrequency wave.
//!
//! Conventions: the spatial DFT uses `e^{−ikx}`; the time transform is
//! `ũ(ω) = ∫ e^{iωt} u dt`, so `u ∝ e^{−iω₀t}` peaks at `ω = ω₀`.

mod dynamics;
mod io;
mod residual;
mod spectrum;

pub use dynamics::{evolve_nlkg, evolve_nls, modulus_variance, nlkg_energy, nls_mass, EvolveOptions, Splitting};
pub use io::{read_trajectory, write_spectrum_csv, write_trajectory, write_trajectory_csv};
pub use residual::{dirac_residual, ResidualAtTime, ResidualOptions, ResidualReport};
pub use spectrum::{
    spectrum_variance_coupling, time_spectrum, CouplingReport, ProbeSpectrum, SpectrumOptions, SpectrumProbe, Window,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error("grid needs L > 0 and an even number of points >= 4 (L = {l}, n_x = {n_x})")]
    BadGrid { l: f64, n_x: usize },
    #[error("initial data has {got} points, grid has {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("time step must be positive and T >= 0 (dt = {dt}, T = {t})")]
    BadTime { dt: f64, t: f64 },
    #[error("dt = {dt} exceeds the stability guard 0.5·dx = {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("blow-up: max |u| = {max_abs:e} at t = {t}")]
    BlowUp { t: f64, max_abs: f64 },
    #[error("mass must be positive, got {0}")]
    BadMass(f64),
    #[error("need at least 16 snapshots for a spectrum, have {0}")]
    TooFewSnapshots(usize),
    #[error("probe index {0} outside the grid")]
    BadProbe(usize),
    #[error("invalid nonlinearity: {0}")]
    BadAlpha(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for EvolveError {
    fn from(e: std::io::Error) -> Self {
        EvolveError::Io(e.to_string())
    }
}

/// Periodic box `[−L, L)` with `n_x` points `x_j = −L + j·2L/n_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    pub l: f64,
    pub n_x: usize,
}

impl PeriodicGrid {
    pub fn new(l: f64, n_x: usize) -> Result<Self, EvolveError> {
        if !(l > 0.0) || !l.is_finite() || n_x < 4 || n_x % 2 != 0 {
            return Err(EvolveError::BadGrid { l, n_x });
        }
        Ok(Self { l, n_x })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.n_x as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_x as i64;
        let k0 = std::f64::consts::PI / self.l;
        (0..n).map(|j| k0 * if j < n / 2 { j } else { j - n } as f64).collect()
    }

    /// Index of the node nearest to `x`.
    pub fn index_of(&self, x: f64) -> usize {
        (((x + self.l) / self.dx()).round() as i64).rem_euclid(self.n_x as i64) as usize
    }
}

/// Nonlinear coefficient `α(τ)` and its primitive `G(τ) = ∫₀^τ α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Alpha {
    Zero,
    /// `coef·τ^exponent`.
    Power { coef: f64, exponent: f64 },
    /// Piecewise linear through `(tau_i, values_i)`, constant beyond the ends.
    Table { tau: Vec<f64>, values: Vec<f64> },
}

impl Alpha {
    pub fn validate(&self) -> Result<(), EvolveError> {
        match self {
            Alpha::Zero => Ok(()),
            Alpha::Power { coef, exponent } => {
                if coef.is_finite() && *exponent > 0.0 {
                    Ok(())
                } else {
                    Err(EvolveError::BadAlpha(format!("coef = {coef}, exponent = {exponent}")))
                }
            }
            Alpha::Table { tau, values } => {
                if tau.len() < 2 || tau.len() != values.len() || tau.windows(2).any(|w| !(w[1] > w[0])) {
                    Err(EvolveError::BadAlpha("table knots must be strictly increasing".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        match self {
            Alpha::Zero => 0.0,
            Alpha::Power { coef, exponent } => coef * tau.powf(*exponent),
            Alpha::Table { tau: t, values } => {
                let n = t.len();
                if tau <= t[0] {
                    return values[0];
                }
                if tau >= t[n - 1] {
                    return values[n - 1];
                }
                let k = t.partition_point(|&x| x <= tau) - 1;
                let s = (tau - t[k]) / (t[k + 1] - t[k]);
                values[k] + s * (values[k + 1] - values[k])
            }
        }
    }

    pub fn primitive(&self, tau: f64) -> f64 {
        match self {
            Alpha::Zero => 0.0,
            Alpha::Power { coef, exponent } => coef * tau.powf(exponent + 1.0) / (exponent + 1.0),
            Alpha::Table { tau: t, values } => {
                // exact integral of the piecewise-linear interpolant from 0
                let integrate_to = |x: f64| {
                    let mut acc = 0.0;
                    let mut prev = 0.0f64;
                    let mut fprev = self.eval(0.0);
                    for (&tk, _) in t.iter().zip(values) {
                        if tk <= prev {
                            continue;
                        }
                        let end = tk.min(x);
                        let fend = self.eval(end);
                        acc += 0.5 * (fprev + fend) * (end - prev);
                        prev = end;
                        fprev = fend;
                        if end >= x {
                            return acc;
                        }
                    }
                    acc + fprev * (x - prev)
                };
                integrate_to(tau)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Nls,
    Nlkg,
    Synthetic,
}

/// Snapshots `u(x_j, t_k)` at uniform times, plus `∂_t u` for NLKG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory1D {
    pub model: Model,
    pub grid: PeriodicGrid,
    pub dt: f64,
    pub stride: usize,
    pub times: Vec<f64>,
    pub u: Vec<Vec<Complex64>>,
    pub ut: Option<Vec<Vec<Complex64>>>,
    /// Mass (NLS) or energy (NLKG) at each snapshot; empty for synthetic data.
    pub conserved: Vec<f64>,
}

impl Trajectory1D {
    /// Samples a closed-form field at the given uniform times.
    pub fn from_fn(grid: PeriodicGrid, t0: f64, tau: f64, count: usize, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let times: Vec<f64> = (0..count).map(|k| t0 + k as f64 * tau).collect();
        let u = times.iter().map(|&t| grid.nodes().iter().map(|&x| f(x, t)).collect()).collect();
        Self { model: Model::Synthetic, grid, dt: tau, stride: 1, times, u, ut: None, conserved: Vec::new() }
    }

    pub fn snapshot_interval(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn probe_series(&self, j: usize) -> Vec<Complex64> {
        self.u.iter().map(|s| s[j]).collect()
    }

    /// `max_k |Q(t_k) − Q(0)| / |Q(0)|` of the conserved quantity.
    pub fn relative_drift(&self) -> f64 {
        let Some(&q0) = self.conserved.first() else { return 0.0 };
        let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
        self.conserved.iter().map(|q| (q - q0).abs() / scale).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests;
