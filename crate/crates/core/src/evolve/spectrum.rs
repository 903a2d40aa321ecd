//! Windowed time spectra at probe points.
//!
//! With `N` snapshots `u_k = u(x, t₀ + kτ)`, the transform at
//! `ω_j = 2πj/(Nτ)` is `ũ(ω_j) = τ·e^{iω_j t₀}·Σ_k w_k u_k e^{2πijk/N}`,
//! i.e. a Riemann sum for `∫ e^{iωt} w(t) u dt`. The ω-axis keeps
//! `|j| < N/2`, so it is symmetric and the Nyquist bin is dropped.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{EvolveError, Trajectory1D};
use crate::support::{Grid2, GriddedDistribution};

pub const MIN_SNAPSHOTS: usize = 16;
const PARSEVAL_TOL: f64 = 1e-8;
const SINGLE_BIN_VARIANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            // periodic Hann: a bin-centred tone occupies exactly three bins
            Window::Hann => {
                (0..n).map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())).collect()
            }
            Window::Rectangular => vec![1.0; n],
        }
    }

    /// Half-width in bins of the response to a bin-centred tone.
    pub fn lobe_bins(self) -> f64 {
        match self {
            Window::Hann => 1.0,
            Window::Rectangular => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub window: Window,
    /// Use only the last `span` snapshots.
    pub span: Option<usize>,
    /// Support threshold relative to each probe's peak modulus.
    pub threshold_rel: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { window: Window::Hann, span: None, threshold_rel: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpectrum {
    pub index: usize,
    pub x: f64,
    pub values: Vec<Complex64>,
    pub peak_omega: f64,
    /// Raw support edges at the relative threshold.
    pub a: f64,
    pub b: f64,
    /// Edges moved inward by the window's main-lobe half-width.
    pub a_line: f64,
    pub b_line: f64,
    /// `b_line − a_line ≤` one bin.
    pub single_bin: bool,
    /// Relative Parseval defect of the unwindowed transform.
    pub parseval_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumProbe {
    pub window: Window,
    pub omega: Vec<f64>,
    pub bin: f64,
    pub t0: f64,
    pub probes: Vec<ProbeSpectrum>,
    /// Spectra over `(x-probes, ω)` when the probes are uniformly spaced.
    pub distribution: Option<GriddedDistribution>,
}

impl SpectrumProbe {
    pub fn parseval_ok(&self) -> bool {
        self.probes.iter().all(|p| p.parseval_error <= PARSEVAL_TOL)
    }

    pub fn all_single_bin(&self) -> bool {
        self.probes.iter().all(|p| p.single_bin)
    }
}

pub fn time_spectrum(
    traj: &Trajectory1D,
    probes: &[usize],
    opts: SpectrumOptions,
) -> Result<SpectrumProbe, EvolveError> {
    let total = traj.len();
    let n = opts.span.map_or(total, |s| s.min(total));
    if n < MIN_SNAPSHOTS {
        return Err(EvolveError::TooFewSnapshots(n));
    }
    if let Some(&bad) = probes.iter().find(|&&j| j >= traj.grid.n_x) {
        return Err(EvolveError::BadProbe(bad));
    }
    let first = total - n;
    let tau = traj.snapshot_interval();
    let t0 = traj.times[first];
    let bin = 2.0 * std::f64::consts::PI / (n as f64 * tau);
    let half = ((n - 1) / 2) as i64;
    let js: Vec<i64> = (-half..=half).collect();
    let omega: Vec<f64> = js.iter().map(|&j| j as f64 * bin).collect();
    let w = opts.window.weights(n);
    let ifft = FftPlanner::new().plan_fft_inverse(n);

    let mut out = Vec::with_capacity(probes.len());
    for &p in probes {
        let series: Vec<Complex64> = traj.u[first..].iter().map(|s| s[p]).collect();

        let mut raw = series.clone();
        ifft.process(&mut raw);
        let energy: f64 = series.iter().map(|z| z.norm_sqr()).sum();
        let spec_energy: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        let parseval_error = if energy > 0.0 { (spec_energy - energy).abs() / energy } else { spec_energy };

        let mut buf: Vec<Complex64> = series.iter().zip(&w).map(|(z, wk)| z * wk).collect();
        ifft.process(&mut buf);
        let values: Vec<Complex64> = js
            .iter()
            .zip(&omega)
            .map(|(&j, &om)| tau * Complex64::from_polar(1.0, om * t0) * buf[j.rem_euclid(n as i64) as usize])
            .collect();

        let peak = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let kpeak = values.iter().position(|z| z.norm() == peak).unwrap_or(0);
        let thr = opts.threshold_rel * peak;
        let (a, b) = if peak > 0.0 {
            let lo = values.iter().position(|z| z.norm() > thr).unwrap_or(kpeak);
            let hi = values.iter().rposition(|z| z.norm() > thr).unwrap_or(kpeak);
            (omega[lo], omega[hi])
        } else {
            (f64::INFINITY, f64::NEG_INFINITY)
        };
        let lobe = opts.window.lobe_bins() * bin;
        let (a_line, b_line) = if a <= b && b - a >= 2.0 * lobe { (a + lobe, b - lobe) } else { (a, b) };
        let single_bin = a <= b && b_line - a_line <= bin * (1.0 + 1e-9);
        out.push(ProbeSpectrum {
            index: p,
            x: traj.grid.x(p),
            values,
            peak_omega: omega[kpeak],
            a,
            b,
            a_line,
            b_line,
            single_bin,
            parseval_error,
        });
    }

    let distribution = gridded(&out, &omega, opts.threshold_rel);
    Ok(SpectrumProbe { window: opts.window, omega, bin, t0, probes: out, distribution })
}

fn gridded(probes: &[ProbeSpectrum], omega: &[f64], rel: f64) -> Option<GriddedDistribution> {
    if probes.len() < 2 || omega.len() < 2 {
        return None;
    }
    let dx = probes[1].x - probes[0].x;
    let uniform = dx > 0.0
        && probes.windows(2).all(|p| ((p[1].x - p[0].x) - dx).abs() <= 1e-9 * dx.abs());
    if !uniform {
        return None;
    }
    let grid = Grid2::new(
        probes[0].x,
        probes[probes.len() - 1].x,
        probes.len(),
        omega[0],
        omega[omega.len() - 1],
        omega.len(),
    )
    .ok()?;
    let values = probes.iter().flat_map(|p| p.values.iter().copied()).collect();
    GriddedDistribution::new(grid, values, 0.0).ok()?.with_relative_threshold(rel).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    /// Every probe spectrum is single-bin.
    pub applicable: bool,
    pub max_variance: f64,
    pub pass: bool,
}

/// If all probe spectra are single-bin, the modulus variance at those
/// probes must be at most `1e-6`.
pub fn spectrum_variance_coupling(spectrum: &SpectrumProbe, variance: &[f64]) -> CouplingReport {
    let applicable = spectrum.all_single_bin();
    let max_variance = spectrum.probes.iter().map(|p| variance[p.index]).fold(0.0, f64::max);
    CouplingReport { applicable, max_variance, pass: !applicable || max_variance <= SINGLE_BIN_VARIANCE }
}
