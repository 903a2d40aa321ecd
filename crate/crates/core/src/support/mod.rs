//! Support calculus for distributions sampled on a uniform `(x, ω)` grid.
//!
//! The continuous objects are compactly supported in `ω` and continuous in
//! `x`; here `x` is one-dimensional and every column `x_i` carries a finite
//! vector of complex samples along `ω`. A sample belongs to the support when
//! its modulus exceeds the distribution's threshold.
//!
//! Edge functions take values in the extended reals and are stored as `f64`
//! with `±INFINITY`: an empty column has `a = +∞` and `b = −∞`.

mod io;
mod suite;

pub use io::{read_distribution, write_distribution, DistributionDescriptor};
pub use suite::{
    chain_violations, envelope_laws_suite, envelope_on, envelope_refinement, random_columns, random_pair_suite,
    refinement_pair, resolved_distribution, sandwich_violations, superadditivity_violations, ula_violations,
    EnvelopeLawsReport, PairSuiteReport, RefinementLevel, RefinementReport,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SupportError {
    #[error("grid needs at least two points per axis (got n_x = {n_x}, n_omega = {n_w})")]
    TooFewPoints { n_x: usize, n_w: usize },
    #[error("grid axis must be increasing: [{min}, {max}]")]
    EmptyAxis { min: f64, max: f64 },
    #[error("support threshold must be finite and nonnegative, got {0}")]
    BadThreshold(f64),
    #[error("value array has {got} entries, grid expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("distributions live on different grids")]
    GridMismatch,
    #[error("omega axis [{min}, {max}] is not symmetric about zero")]
    AsymmetricOmega { min: f64, max: f64 },
    #[error("edge function and x-axis differ in length ({x} vs {values})")]
    EdgeLength { x: usize, values: usize },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for SupportError {
    fn from(e: std::io::Error) -> Self {
        SupportError::Io(e.to_string())
    }
}

/// Uniform tensor grid over `[x_min, x_max] × [ω_min, ω_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
}

impl Grid2 {
    pub fn new(
        x_min: f64,
        x_max: f64,
        n_x: usize,
        omega_min: f64,
        omega_max: f64,
        n_omega: usize,
    ) -> Result<Self, SupportError> {
        if n_x < 2 || n_omega < 2 {
            return Err(SupportError::TooFewPoints { n_x, n_w: n_omega });
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(SupportError::EmptyAxis { min: x_min, max: x_max });
        }
        if !(omega_max > omega_min) || !omega_min.is_finite() || !omega_max.is_finite() {
            return Err(SupportError::EmptyAxis { min: omega_min, max: omega_max });
        }
        Ok(Self { x_min, x_max, n_x, omega_min, omega_max, n_omega })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn d_omega(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n_omega - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.omega_min + k as f64 * self.d_omega()
    }

    pub fn x_axis(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn omega_axis(&self) -> Vec<f64> {
        (0..self.n_omega).map(|k| self.omega(k)).collect()
    }

    /// Grid of the partial convolution: same x-axis, ω-extent doubled.
    pub fn convolution_grid(&self) -> Grid2 {
        Grid2 {
            omega_min: 2.0 * self.omega_min,
            omega_max: 2.0 * self.omega_max,
            n_omega: 2 * self.n_omega - 1,
            ..*self
        }
    }

    /// Grids compare equal when they describe the same sample points up to
    /// floating-point noise in the endpoints.
    pub fn same_as(&self, other: &Grid2) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        self.n_x == other.n_x
            && self.n_omega == other.n_omega
            && close(self.x_min, other.x_min)
            && close(self.x_max, other.x_max)
            && close(self.omega_min, other.omega_min)
            && close(self.omega_max, other.omega_max)
    }
}

/// Complex samples `f(x_i, ω_k)`, stored column by column (`i` major).
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedDistribution {
    grid: Grid2,
    values: Vec<Complex64>,
    threshold: f64,
}

impl GriddedDistribution {
    pub fn new(grid: Grid2, values: Vec<Complex64>, threshold: f64) -> Result<Self, SupportError> {
        let expected = grid.n_x * grid.n_omega;
        if values.len() != expected {
            return Err(SupportError::ShapeMismatch { expected, got: values.len() });
        }
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(SupportError::BadThreshold(threshold));
        }
        Ok(Self { grid, values, threshold })
    }

    pub fn zeros(grid: Grid2) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.n_x * grid.n_omega], threshold: 0.0 }
    }

    /// Samples a function of `(x, ω)` on the grid.
    pub fn from_fn(grid: Grid2, threshold: f64, f: impl Fn(f64, f64) -> Complex64) -> Result<Self, SupportError> {
        let mut values = Vec::with_capacity(grid.n_x * grid.n_omega);
        for i in 0..grid.n_x {
            let x = grid.x(i);
            for k in 0..grid.n_omega {
                values.push(f(x, grid.omega(k)));
            }
        }
        Self::new(grid, values, threshold)
    }

    /// Threshold relative to the largest modulus: `rel · max |f|`.
    pub fn with_relative_threshold(mut self, rel: f64) -> Result<Self, SupportError> {
        let peak = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let thr = rel * peak;
        if !(thr >= 0.0) || !thr.is_finite() {
            return Err(SupportError::BadThreshold(thr));
        }
        self.threshold = thr;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.values[i * self.grid.n_omega + k]
    }

    pub fn set(&mut self, i: usize, k: usize, z: Complex64) {
        self.values[i * self.grid.n_omega + k] = z;
    }

    pub fn column(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n_omega;
        &self.values[i * n..(i + 1) * n]
    }

    /// First and last ω-indices of above-threshold samples in column `i`.
    pub fn column_edges(&self, i: usize) -> Option<(usize, usize)> {
        let col = self.column(i);
        let first = col.iter().position(|z| z.norm() > self.threshold)?;
        let last = col.iter().rposition(|z| z.norm() > self.threshold)?;
        Some((first, last))
    }
}

/// A function on the grid's x-axis with values in `ℝ ∪ {±∞}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFunction {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl EdgeFunction {
    pub fn new(x: Vec<f64>, values: Vec<f64>) -> Result<Self, SupportError> {
        if x.len() != values.len() {
            return Err(SupportError::EdgeLength { x: x.len(), values: values.len() });
        }
        Ok(Self { x, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn stencil(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(self.values.len() - 1);
        lo..=hi
    }

    fn map_stencil(&self, fold: impl Fn(f64, f64) -> f64, init: f64) -> EdgeFunction {
        let values = (0..self.values.len())
            .map(|i| self.stencil(i).map(|j| self.values[j]).fold(init, &fold))
            .collect();
        EdgeFunction { x: self.x.clone(), values }
    }

    /// Oscillation `max − min` over the three-point stencil; `+∞` when the
    /// stencil touches an infinite value.
    pub fn oscillation(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|i| {
                let (lo, hi) = self
                    .stencil(i)
                    .map(|j| self.values[j])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                if lo.is_finite() && hi.is_finite() {
                    hi - lo
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }

    pub fn add(&self, other: &EdgeFunction) -> Result<EdgeFunction, SupportError> {
        if self.len() != other.len() {
            return Err(SupportError::EdgeLength { x: self.len(), values: other.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(EdgeFunction { x: self.x.clone(), values })
    }
}

/// Lower semicontinuous envelope: minimum over `{i−1, i, i+1}`.
pub fn lower_envelope(mu: &EdgeFunction) -> EdgeFunction {
    if mu.is_empty() {
        return mu.clone();
    }
    mu.map_stencil(f64::min, f64::INFINITY)
}

/// Upper semicontinuous envelope: maximum over `{i−1, i, i+1}`.
pub fn upper_envelope(mu: &EdgeFunction) -> EdgeFunction {
    if mu.is_empty() {
        return mu.clone();
    }
    mu.map_stencil(f64::max, f64::NEG_INFINITY)
}

/// Per-column infimum `a` and supremum `b` of the ω-support.
pub fn support_edges(f: &GriddedDistribution) -> (EdgeFunction, EdgeFunction) {
    let grid = f.grid();
    let x = grid.x_axis();
    let mut a = Vec::with_capacity(grid.n_x);
    let mut b = Vec::with_capacity(grid.n_x);
    for i in 0..grid.n_x {
        match f.column_edges(i) {
            Some((lo, hi)) => {
                a.push(grid.omega(lo));
                b.push(grid.omega(hi));
            }
            None => {
                a.push(f64::INFINITY);
                b.push(f64::NEG_INFINITY);
            }
        }
    }
    (EdgeFunction { x: x.clone(), values: a }, EdgeFunction { x, values: b })
}

/// Indices of the columns that meet the support.
pub fn sigma(f: &GriddedDistribution) -> Vec<usize> {
    (0..f.grid().n_x).filter(|&i| f.column_edges(i).is_some()).collect()
}

/// Convolution along ω, column by column, scaled by `Δω`.
///
/// The output lives on [`Grid2::convolution_grid`], so output index
/// `k_f + k_g` corresponds to `ω_f + ω_g` with no wraparound. Samples at or
/// below an input's threshold are treated as zero. The output threshold bounds
/// what the discarded sub-threshold samples could have contributed.
pub fn partial_convolution(
    f: &GriddedDistribution,
    g: &GriddedDistribution,
) -> Result<GriddedDistribution, SupportError> {
    if !f.grid().same_as(g.grid()) {
        return Err(SupportError::GridMismatch);
    }
    let grid = *f.grid();
    let out_grid = grid.convolution_grid();
    let n_w = grid.n_omega;
    let n_out = out_grid.n_omega;
    let dw = grid.d_omega();
    let zero = Complex64::new(0.0, 0.0);
    let mut values = vec![zero; grid.n_x * n_out];

    let clip = |z: Complex64, thr: f64| if z.norm() > thr { z } else { zero };

    for i in 0..grid.n_x {
        let (Some((f_lo, f_hi)), Some((g_lo, g_hi))) = (f.column_edges(i), g.column_edges(i)) else {
            continue;
        };
        let fc = f.column(i);
        let gc = g.column(i);
        let out = &mut values[i * n_out..(i + 1) * n_out];
        for kf in f_lo..=f_hi {
            let a = clip(fc[kf], f.threshold);
            if a == zero {
                continue;
            }
            for kg in g_lo..=g_hi {
                let b = clip(gc[kg], g.threshold);
                out[kf + kg] += a * b;
            }
        }
        for z in out.iter_mut() {
            *z *= dw;
        }
    }

    let sup = |d: &GriddedDistribution| d.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let thr = if f.threshold == 0.0 && g.threshold == 0.0 {
        0.0
    } else {
        dw * n_w as f64 * (f.threshold * sup(g) + g.threshold * sup(f) + f.threshold * g.threshold)
    };
    GriddedDistribution::new(out_grid, values, thr)
}

/// `f♯(x, ω) = conj f(x, −ω)`; needs an ω-axis symmetric about zero.
pub fn sharp(f: &GriddedDistribution) -> Result<GriddedDistribution, SupportError> {
    let grid = *f.grid();
    let tol = 1e-12 * grid.omega_max.abs().max(grid.omega_min.abs());
    if (grid.omega_min + grid.omega_max).abs() > tol {
        return Err(SupportError::AsymmetricOmega { min: grid.omega_min, max: grid.omega_max });
    }
    let n_w = grid.n_omega;
    let mut values = Vec::with_capacity(f.values.len());
    for i in 0..grid.n_x {
        let col = f.column(i);
        values.extend((0..n_w).map(|k| col[n_w - 1 - k].conj()));
    }
    GriddedDistribution::new(grid, values, f.threshold)
}

/// Per-column data of the partial Titchmarsh check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TitchmarshReport {
    pub x: Vec<f64>,
    /// `a_{f∗g}` and `a_f + a_g` in ω units.
    pub a_conv: Vec<f64>,
    pub a_sum: Vec<f64>,
    pub b_conv: Vec<f64>,
    pub b_sum: Vec<f64>,
    /// `a_{f∗g}^U` against `a_f^U + a_g^U`, and the mirror for `b` with lower envelopes.
    pub a_conv_upper: Vec<f64>,
    pub a_upper_sum: Vec<f64>,
    pub b_conv_lower: Vec<f64>,
    pub b_lower_sum: Vec<f64>,
    /// Absolute envelope discrepancies (zero off `Σ`).
    pub a_envelope_discrepancy: Vec<f64>,
    pub b_envelope_discrepancy: Vec<f64>,
    /// `osc₁(a_f) + osc₁(a_g)` and the analogue for `b`.
    pub a_oscillation_bound: Vec<f64>,
    pub b_oscillation_bound: Vec<f64>,
    /// Columns where the index edges failed to add exactly.
    pub index_failures: Vec<usize>,
    pub max_a_envelope_discrepancy: f64,
    pub max_b_envelope_discrepancy: f64,
    pub columnwise_exact: bool,
    pub envelope_within_oscillation: bool,
    pub pass: bool,
}

/// Verifies that support edges add under partial convolution, columnwise in
/// index arithmetic and at the level of semicontinuous envelopes.
pub fn check_titchmarsh_partial(
    f: &GriddedDistribution,
    g: &GriddedDistribution,
) -> Result<TitchmarshReport, SupportError> {
    let conv = partial_convolution(f, g)?;
    let grid = *f.grid();

    let mut index_failures = Vec::new();
    for i in 0..grid.n_x {
        let expected = match (f.column_edges(i), g.column_edges(i)) {
            (Some((fa, fb)), Some((ga, gb))) => Some((fa + ga, fb + gb)),
            _ => None,
        };
        if conv.column_edges(i) != expected {
            index_failures.push(i);
        }
    }

    let (af, bf) = support_edges(f);
    let (ag, bg) = support_edges(g);
    let (ac, bc) = support_edges(&conv);
    let a_sum = af.add(&ag)?;
    let b_sum = bf.add(&bg)?;

    let ac_u = upper_envelope(&ac);
    let a_u_sum = upper_envelope(&af).add(&upper_envelope(&ag))?;
    let bc_l = lower_envelope(&bc);
    let b_l_sum = lower_envelope(&bf).add(&lower_envelope(&bg))?;

    let osc_a: Vec<f64> = af.oscillation().iter().zip(ag.oscillation()).map(|(p, q)| p + q).collect();
    let osc_b: Vec<f64> = bf.oscillation().iter().zip(bg.oscillation()).map(|(p, q)| p + q).collect();

    let diff = |p: &[f64], q: &[f64]| -> Vec<f64> {
        p.iter()
            .zip(q)
            .map(|(&u, &v)| if u.is_finite() && v.is_finite() { (u - v).abs() } else if u == v { 0.0 } else { f64::INFINITY })
            .collect()
    };
    let da = diff(&ac_u.values, &a_u_sum.values);
    let db = diff(&bc_l.values, &b_l_sum.values);

    // Rounding slack for sums of grid coordinates.
    let slack = 1e-9 * (1.0 + grid.omega_max.abs().max(grid.omega_min.abs()));
    let within = |d: &[f64], osc: &[f64]| d.iter().zip(osc).all(|(&d, &o)| d <= o + slack);
    let envelope_within_oscillation = within(&da, &osc_a) && within(&db, &osc_b);

    let finite_max = |d: &[f64]| d.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let columnwise_exact = index_failures.is_empty();
    Ok(TitchmarshReport {
        x: grid.x_axis(),
        max_a_envelope_discrepancy: finite_max(&da),
        max_b_envelope_discrepancy: finite_max(&db),
        a_conv: ac.values,
        a_sum: a_sum.values,
        b_conv: bc.values,
        b_sum: b_sum.values,
        a_conv_upper: ac_u.values,
        a_upper_sum: a_u_sum.values,
        b_conv_lower: bc_l.values,
        b_lower_sum: b_l_sum.values,
        a_envelope_discrepancy: da,
        b_envelope_discrepancy: db,
        a_oscillation_bound: osc_a,
        b_oscillation_bound: osc_b,
        index_failures,
        columnwise_exact,
        envelope_within_oscillation,
        pass: columnwise_exact && envelope_within_oscillation,
    })
}

#[cfg(test)]
mod tests;
