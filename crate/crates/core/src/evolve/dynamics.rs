//! Split-step Fourier steppers.
//!
//! NLS: `i∂_t u = −∂²_x u + α(|u|²)u`, Strang splitting with the exact
//! phase rotation `e^{−iα(|u|²)Δt/2}` around the exact linear multiplier
//! `e^{−ik²Δt}`. [`Splitting::Yoshida4`] composes three such steps with
//! the triple-jump weights for fourth order.
//!
//! NLKG: `∂²_t u = ∂²_x u − m²u − α(|u|²)u`, kick-drift-kick where the drift
//! is the exact Fourier rotation at `ω_k = √(k² + m²)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{Alpha, EvolveError, Model, PeriodicGrid, Trajectory1D};

const BLOW_UP: f64 = 1e6;
const CFL: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    #[default]
    Strang,
    /// `S(w₁Δt)S(w₀Δt)S(w₁Δt)` with `w₁ = 1/(2 − 2^{1/3})`, `w₀ = 1 − 2w₁`.
    Yoshida4,
}

impl Splitting {
    fn weights(self) -> Vec<f64> {
        match self {
            Splitting::Strang => vec![1.0],
            Splitting::Yoshida4 => {
                let w1 = 1.0 / (2.0 - 2f64.cbrt());
                vec![w1, 1.0 - 2.0 * w1, w1]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Store every `stride`-th step.
    pub stride: usize,
    /// NLS only; NLKG always uses kick-drift-kick.
    #[serde(default)]
    pub splitting: Splitting,
}

impl EvolveOptions {
    /// Step count: `⌈T/Δt⌉` rounded up to a multiple of the stride, so the
    /// last step is stored.
    pub fn steps(&self) -> usize {
        let raw = (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize;
        let s = self.stride.max(1);
        raw.div_ceil(s) * s
    }

    fn check(&self) -> Result<(), EvolveError> {
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) || !self.dt.is_finite() || !self.t_final.is_finite() {
            return Err(EvolveError::BadTime { dt: self.dt, t: self.t_final });
        }
        Ok(())
    }
}

struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    fn new(grid: &PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n_x);
        let inv = planner.plan_fft_inverse(grid.n_x);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { fwd, inv, k: grid.wavenumbers(), scratch: vec![Complex64::new(0.0, 0.0); len] }
    }

    fn forward(&mut self, u: &mut [Complex64]) {
        self.fwd.process_with_scratch(u, &mut self.scratch);
    }

    fn inverse(&mut self, u: &mut [Complex64]) {
        self.inv.process_with_scratch(u, &mut self.scratch);
        let s = 1.0 / u.len() as f64;
        u.iter_mut().for_each(|z| *z *= s);
    }

    fn derivative(&mut self, u: &[Complex64]) -> Vec<Complex64> {
        let mut w = u.to_vec();
        self.forward(&mut w);
        let n = w.len();
        for (j, z) in w.iter_mut().enumerate() {
            // the Nyquist mode has no well-defined odd derivative
            *z *= if j == n / 2 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, self.k[j]) };
        }
        self.inverse(&mut w);
        w
    }
}

fn max_abs(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn guard(u: &[Complex64], t: f64) -> Result<(), EvolveError> {
    let m = max_abs(u);
    if !(m <= BLOW_UP) {
        return Err(EvolveError::BlowUp { t, max_abs: m });
    }
    Ok(())
}

/// `∫|u|² dx` by the periodic rectangle rule.
pub fn nls_mass(grid: &PeriodicGrid, u: &[Complex64]) -> f64 {
    grid.dx() * u.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `∫ |∂_t u|² + |∂_x u|² + m²|u|² + G(|u|²) dx` with a spectral `∂_x`.
pub fn nlkg_energy(grid: &PeriodicGrid, m: f64, alpha: &Alpha, u: &[Complex64], ut: &[Complex64]) -> f64 {
    let mut sp = Spectral::new(grid);
    energy_with(&mut sp, grid, m, alpha, u, ut)
}

fn energy_with(sp: &mut Spectral, grid: &PeriodicGrid, m: f64, alpha: &Alpha, u: &[Complex64], ut: &[Complex64]) -> f64 {
    let ux = sp.derivative(u);
    let mut acc = 0.0;
    for j in 0..u.len() {
        let tau = u[j].norm_sqr();
        acc += ut[j].norm_sqr() + ux[j].norm_sqr() + m * m * tau + alpha.primitive(tau);
    }
    grid.dx() * acc
}

fn check_shape(grid: &PeriodicGrid, u: &[Complex64]) -> Result<(), EvolveError> {
    if u.len() != grid.n_x {
        return Err(EvolveError::ShapeMismatch { expected: grid.n_x, got: u.len() });
    }
    Ok(())
}

pub fn evolve_nls(
    grid: PeriodicGrid,
    u0: &[Complex64],
    alpha: &Alpha,
    opts: EvolveOptions,
) -> Result<Trajectory1D, EvolveError> {
    check_shape(&grid, u0)?;
    opts.check()?;
    alpha.validate()?;
    let steps = opts.steps();
    let stride = opts.stride.max(1);
    let mut sp = Spectral::new(&grid);
    let stages: Vec<(f64, Vec<Complex64>)> = opts
        .splitting
        .weights()
        .into_iter()
        .map(|w| {
            let h = w * opts.dt;
            (0.5 * h, sp.k.iter().map(|k| Complex64::from_polar(1.0, -k * k * h)).collect())
        })
        .collect();
    let nonlinear = |u: &mut [Complex64], half: f64| {
        for z in u.iter_mut() {
            *z *= Complex64::from_polar(1.0, -alpha.eval(z.norm_sqr()) * half);
        }
    };

    let mut u = u0.to_vec();
    guard(&u, 0.0)?;
    let mut traj = Trajectory1D {
        model: Model::Nls,
        grid,
        dt: opts.dt,
        stride,
        times: vec![0.0],
        u: vec![u.clone()],
        ut: None,
        conserved: vec![nls_mass(&grid, &u)],
    };
    for step in 1..=steps {
        for (half, lin) in &stages {
            nonlinear(&mut u, *half);
            sp.forward(&mut u);
            u.iter_mut().zip(lin).for_each(|(z, l)| *z *= l);
            sp.inverse(&mut u);
            nonlinear(&mut u, *half);
        }
        let t = step as f64 * opts.dt;
        guard(&u, t)?;
        if step % stride == 0 {
            traj.times.push(t);
            traj.conserved.push(nls_mass(&grid, &u));
            traj.u.push(u.clone());
        }
    }
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
pub fn evolve_nlkg(
    grid: PeriodicGrid,
    u0: &[Complex64],
    v0: &[Complex64],
    m: f64,
    alpha: &Alpha,
    opts: EvolveOptions,
) -> Result<Trajectory1D, EvolveError> {
    check_shape(&grid, u0)?;
    check_shape(&grid, v0)?;
    opts.check()?;
    alpha.validate()?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(EvolveError::BadMass(m));
    }
    let limit = CFL * grid.dx();
    if opts.dt > limit {
        return Err(EvolveError::Cfl { dt: opts.dt, limit });
    }
    let steps = opts.steps();
    let stride = opts.stride.max(1);
    let dt = opts.dt;
    let mut sp = Spectral::new(&grid);
    let rot: Vec<(f64, f64, f64)> = sp
        .k
        .iter()
        .map(|k| {
            let w = (k * k + m * m).sqrt();
            ((w * dt).cos(), (w * dt).sin(), w)
        })
        .collect();
    let kick = |u: &[Complex64], v: &mut [Complex64]| {
        for (z, vz) in u.iter().zip(v.iter_mut()) {
            *vz -= 0.5 * dt * alpha.eval(z.norm_sqr()) * z;
        }
    };

    let mut u = u0.to_vec();
    let mut v = v0.to_vec();
    guard(&u, 0.0)?;
    let e0 = energy_with(&mut sp, &grid, m, alpha, &u, &v);
    let mut traj = Trajectory1D {
        model: Model::Nlkg,
        grid,
        dt,
        stride,
        times: vec![0.0],
        u: vec![u.clone()],
        ut: Some(vec![v.clone()]),
        conserved: vec![e0],
    };
    for step in 1..=steps {
        kick(&u, &mut v);
        sp.forward(&mut u);
        sp.forward(&mut v);
        for j in 0..u.len() {
            let (c, s, w) = rot[j];
            let (a, b) = (u[j], v[j]);
            u[j] = c * a + (s / w) * b;
            v[j] = -w * s * a + c * b;
        }
        sp.inverse(&mut u);
        sp.inverse(&mut v);
        kick(&u, &mut v);
        let t = step as f64 * dt;
        guard(&u, t)?;
        if step % stride == 0 {
            traj.times.push(t);
            traj.conserved.push(energy_with(&mut sp, &grid, m, alpha, &u, &v));
            traj.u.push(u.clone());
            if let Some(ut) = traj.ut.as_mut() {
                ut.push(v.clone());
            }
        }
    }
    Ok(traj)
}

/// Per grid point: time variance of `|u|²` over the snapshots divided by
/// the squared time mean. Points whose mean is below `1e-12` of the
/// largest mean report 0.
pub fn modulus_variance(traj: &Trajectory1D) -> Vec<f64> {
    let n = traj.grid.n_x;
    let count = traj.u.len();
    if count == 0 {
        return vec![0.0; n];
    }
    let mut mean = vec![0.0; n];
    for s in &traj.u {
        for j in 0..n {
            mean[j] += s[j].norm_sqr();
        }
    }
    mean.iter_mut().for_each(|x| *x /= count as f64);
    let mut var = vec![0.0; n];
    for s in &traj.u {
        for j in 0..n {
            var[j] += (s[j].norm_sqr() - mean[j]).powi(2);
        }
    }
    let floor = 1e-12 * mean.iter().fold(0.0f64, |a, &b| a.max(b));
    (0..n)
        .map(|j| if mean[j] > floor && mean[j] > 0.0 { var[j] / count as f64 / (mean[j] * mean[j]) } else { 0.0 })
        .collect()
}
