//! Four-frequency spinor waves built from two radial Dirac eigenpairs, and
//! inversion of their scalar density into a nonlinearity.
//!
//! With `Dirac` matrices in the standard representation, the blocks are
//!
//! ```text
//! φ_j = [ v_j n_j ; i u_j σ_r n_j ],      χ_j = [ −i u_j σ_r m_j ; v_j m_j ],
//! ψ(x,t) = a₀φ₀e^{−iω₀t} + a₁φ₁e^{−iω₁t} + b₀χ₀e^{iω₀t} + b₁χ₁e^{iω₁t},
//! ```
//!
//! and the density of interest is `F = ψ*βψ`.

mod bundle;
pub mod pchip;
pub mod sphere;

pub use bundle::{read_bundle, write_bundle, WaveMeta};
pub use sphere::sphere_quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::trapezoid;
use crate::radial::{centered_derivative, Parity, RadialEigenpair, RadialGrid, RadialPotential};

pub type Spinor2 = [Complex64; 2];
pub type Spinor4 = [Complex64; 4];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolitonError {
    #[error("frame is not orthonormal: defect {0:e}")]
    NotOrthonormal(f64),
    #[error("frequencies must satisfy 0 < ω₀ < ω₁ < m (ω₀ = {omega0}, ω₁ = {omega1}, m = {m})")]
    FrequencyOrder { omega0: f64, omega1: f64, m: f64 },
    #[error("profiles live on different grids, masses or dimensions")]
    Incompatible,
    #[error("spinor assembly needs n = 3, got {0}")]
    Dimension(u32),
    #[error("expected a profile of kind {0:?}")]
    WrongKind(ProfileKind),
    #[error("{what} is not strictly monotone at node {index} (r = {radius})")]
    NonMonotoneInput { what: &'static str, index: usize, radius: f64 },
    #[error("F has no samples above the noise floor")]
    EmptyTable,
    #[error("charge conjugate deviates from the closed form by {0:e}")]
    ChargeConjugationMismatch(f64),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for SolitonError {
    fn from(e: std::io::Error) -> Self {
        SolitonError::Io(e.to_string())
    }
}

fn norm2(s: &Spinor2) -> f64 {
    (s[0].norm_sqr() + s[1].norm_sqr()).sqrt()
}

fn inner2(a: &Spinor2, b: &Spinor2) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// `σ_r s = (x̂·σ) s`.
pub fn sigma_r(dir: [f64; 3], s: &Spinor2) -> Spinor2 {
    let [x, y, z] = dir;
    [s[0] * z + s[1] * Complex64::new(x, -y), s[0] * Complex64::new(x, y) - s[1] * z]
}

/// `a*βb` with `β = diag(1, 1, −1, −1)`.
pub fn beta_product(a: &Spinor4, b: &Spinor4) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] - a[2].conj() * b[2] - a[3].conj() * b[3]
}

/// `iγ²K`: `ψ ↦ (ψ̄₃, −ψ̄₂, −ψ̄₁, ψ̄₀)`.
pub fn charge_conjugation(psi: &Spinor4) -> Spinor4 {
    [psi[3].conj(), -psi[2].conj(), -psi[1].conj(), psi[0].conj()]
}

/// The `χ`-frame vector produced by charge conjugation of a `φ` block with
/// frame `n`: `m = (−n̄₁, n̄₀)`.
pub fn conjugate_frame_vector(n: &Spinor2) -> Spinor2 {
    [-n[1].conj(), n[0].conj()]
}

/// Unit 2-spinors `n₀, n₁` for the `φ` blocks and `m₀, m₁` for the `χ` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorFrame {
    pub n0: Spinor2,
    pub n1: Spinor2,
    pub m0: Spinor2,
    pub m1: Spinor2,
}

impl SpinorFrame {
    /// `n₀ = m₀ = (1, 0)`, `n₁ = m₁ = (0, 1)`.
    pub fn canonical() -> Self {
        let e0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let e1 = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        Self { n0: e0, n1: e1, m0: e0, m1: e1 }
    }

    pub fn new(n0: Spinor2, n1: Spinor2, m0: Spinor2, m1: Spinor2) -> Result<Self, SolitonError> {
        let f = Self { n0, n1, m0, m1 };
        let defect = f.orthonormality_defect();
        if defect > 1e-14 {
            return Err(SolitonError::NotOrthonormal(defect));
        }
        Ok(f)
    }

    /// Accepts any frame; used to exhibit what orthogonality buys.
    pub fn new_unchecked(n0: Spinor2, n1: Spinor2, m0: Spinor2, m1: Spinor2) -> Self {
        Self { n0, n1, m0, m1 }
    }

    pub fn orthonormality_defect(&self) -> f64 {
        [
            (norm2(&self.n0) - 1.0).abs(),
            (norm2(&self.n1) - 1.0).abs(),
            (norm2(&self.m0) - 1.0).abs(),
            (norm2(&self.m1) - 1.0).abs(),
            inner2(&self.n0, &self.n1).norm(),
            inner2(&self.m0, &self.m1).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Phi,
    Chi,
}

/// Radial pair plus frame vector; assembles to 4-spinors along any direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spinor4Profile {
    pub kind: ProfileKind,
    pub grid: RadialGrid,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub frame: Spinor2,
}

impl Spinor4Profile {
    pub fn from_pair(kind: ProfileKind, pair: &RadialEigenpair, frame: Spinor2) -> Self {
        Self { kind, grid: pair.grid, v: pair.v.clone(), u: pair.u.clone(), frame }
    }

    /// 4-spinor at node `i` along unit direction `dir`.
    pub fn at(&self, i: usize, dir: [f64; 3]) -> Spinor4 {
        let sr = sigma_r(dir, &self.frame);
        let (v, u) = (self.v[i], self.u[i]);
        match self.kind {
            ProfileKind::Phi => [self.frame[0] * v, self.frame[1] * v, I * u * sr[0], I * u * sr[1]],
            ProfileKind::Chi => [-I * u * sr[0], -I * u * sr[1], self.frame[0] * v, self.frame[1] * v],
        }
    }

    pub fn assemble(&self, dir: [f64; 3]) -> Vec<Spinor4> {
        (0..self.v.len()).map(|i| self.at(i, dir)).collect()
    }

    /// `(D_m − βV)` in radial form, returned as a profile of the same kind:
    /// for `φ`, `(v, u) ↦ (u' + 2u/r + (m−V)v, −v' − (m−V)u)`; for `χ`,
    /// `(v, u) ↦ (−u' − 2u/r − (m−V)v, v' + (m−V)u)`. Derivatives are
    /// centered differences using the parity of `v` (even) and `u` (odd).
    pub fn apply_linear(&self, potential: &RadialPotential, m: f64) -> Spinor4Profile {
        let h = self.grid.dr();
        let dv = centered_derivative(&self.v, h, Parity::Even);
        let du = centered_derivative(&self.u, h, Parity::Odd);
        let n = self.v.len();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for i in 0..n {
            let r = self.grid.r(i);
            let mm = m - potential.eval(r);
            let radial = if i == 0 { 2.0 * du[0] } else { 2.0 * self.u[i] / r };
            let div = du[i] + radial + mm * self.v[i];
            let grad = dv[i] + mm * self.u[i];
            match self.kind {
                ProfileKind::Phi => {
                    a[i] = div;
                    b[i] = -grad;
                }
                ProfileKind::Chi => {
                    a[i] = -div;
                    b[i] = grad;
                }
            }
        }
        Spinor4Profile { kind: self.kind, grid: self.grid, v: a, u: b, frame: self.frame }
    }

    fn scaled_combination(&self, other: &Spinor4Profile, c: f64) -> Spinor4Profile {
        Spinor4Profile {
            kind: self.kind,
            grid: self.grid,
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + c * b).collect(),
            u: self.u.iter().zip(&other.u).map(|(a, b)| a + c * b).collect(),
            frame: self.frame,
        }
    }
}

/// Radial `L²(r²dr)` norm of `(v, u)` times `√(4π)`, i.e. the `L²(ℝ³)` norm
/// of the assembled spinor for a unit frame vector.
pub fn profile_norm(p: &Spinor4Profile) -> f64 {
    let dens: Vec<f64> = (0..p.v.len()).map(|i| (p.v[i].powi(2) + p.u[i].powi(2)) * p.grid.r(i).powi(2)).collect();
    (4.0 * std::f64::consts::PI * trapezoid(&dens, p.grid.dr())).sqrt()
}

/// Residual of `∓ω·p = (D_m − βV)p` in `L²(ℝ³)`; the sign is `+` for `φ` and
/// `−` for `χ` blocks.
pub fn block_eigen_residual(p: &Spinor4Profile, potential: &RadialPotential, m: f64, omega: f64) -> f64 {
    let lin = p.apply_linear(potential, m);
    let sign = match p.kind {
        ProfileKind::Phi => 1.0,
        ProfileKind::Chi => -1.0,
    };
    profile_norm(&lin.scaled_combination(p, -sign * omega))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeConjugation {
    pub chi: Spinor4Profile,
    /// Max over grid and directions of `|iγ²Kφ − χ_template|`.
    pub max_deviation: f64,
}

/// Applies `iγ²K` to a `φ` block and checks the result against the `χ`
/// template with `m = (−n̄₁, n̄₀)` to `1e-12`.
pub fn charge_conjugate(phi: &Spinor4Profile) -> Result<ChargeConjugation, SolitonError> {
    if phi.kind != ProfileKind::Phi {
        return Err(SolitonError::WrongKind(ProfileKind::Phi));
    }
    let chi = Spinor4Profile {
        kind: ProfileKind::Chi,
        grid: phi.grid,
        v: phi.v.clone(),
        u: phi.u.clone(),
        frame: conjugate_frame_vector(&phi.frame),
    };
    let scale = phi.v.iter().chain(&phi.u).fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut dev = 0.0f64;
    for (dir, _) in sphere_quadrature(4, 8) {
        for i in 0..phi.v.len() {
            let c = charge_conjugation(&phi.at(i, dir));
            let t = chi.at(i, dir);
            for k in 0..4 {
                dev = dev.max((c[k] - t[k]).norm() / scale);
            }
        }
    }
    if dev > 1e-12 {
        return Err(SolitonError::ChargeConjugationMismatch(dev));
    }
    Ok(ChargeConjugation { chi, max_deviation: dev })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaPair {
    pub left: String,
    pub right: String,
    /// `|∫ p_i*βp_j d³x|`.
    pub integrated: f64,
    /// `max |p_i*βp_j|` over grid and quadrature directions.
    pub pointwise: f64,
    /// `integrated ≤ 1e-12·‖p_i‖‖p_j‖`.
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub norms: Vec<f64>,
    pub pairs: Vec<BetaPair>,
    /// `χ_j*βφ_j` (same index) vanishes pointwise to machine precision.
    pub block_identity: bool,
    pub pass: bool,
}

fn label(p: &Spinor4Profile, idx: usize) -> String {
    match p.kind {
        ProfileKind::Phi => format!("phi{idx}"),
        ProfileKind::Chi => format!("chi{idx}"),
    }
}

/// Cross `β`-inner products of assembled blocks. `profiles[k]` carries level
/// index `levels[k]`; directions come from a product rule on the sphere.
pub fn beta_orthogonality_report(profiles: &[Spinor4Profile], levels: &[usize]) -> BetaReport {
    let quad = sphere_quadrature(8, 16);
    let four_pi = 4.0 * std::f64::consts::PI;
    let norms: Vec<f64> = profiles.iter().map(profile_norm).collect();
    let mut pairs = Vec::new();
    let mut block_identity = true;
    for a in 0..profiles.len() {
        for b in (a + 1)..profiles.len() {
            let (p, q) = (&profiles[a], &profiles[b]);
            let grid = p.grid;
            let mut pointwise = 0.0f64;
            let mut radial = vec![Complex64::new(0.0, 0.0); p.v.len()];
            for (dir, w) in &quad {
                for i in 0..p.v.len() {
                    let z = beta_product(&p.at(i, *dir), &q.at(i, *dir));
                    pointwise = pointwise.max(z.norm());
                    radial[i] += z * *w * grid.r(i).powi(2);
                }
            }
            let re: Vec<f64> = radial.iter().map(|z| z.re).collect();
            let im: Vec<f64> = radial.iter().map(|z| z.im).collect();
            let integrated =
                four_pi * Complex64::new(trapezoid(&re, grid.dr()), trapezoid(&im, grid.dr())).norm();
            let ok = integrated <= 1e-12 * norms[a] * norms[b];
            let same_level = levels[a] == levels[b] && p.kind != q.kind;
            if same_level && pointwise > 1e-14 * norms[a].max(1.0) * norms[b].max(1.0) {
                block_identity = false;
            }
            pairs.push(BetaPair { left: label(p, levels[a]), right: label(q, levels[b]), integrated, pointwise, ok });
        }
    }
    let pass = block_identity && pairs.iter().all(|p| p.ok);
    BetaReport { norms, pairs, block_identity, pass }
}

/// `ψ = a₀φ₀e^{−iω₀t} + a₁φ₁e^{−iω₁t} + b₀χ₀e^{iω₀t} + b₁χ₁e^{iω₁t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiFrequencyWave {
    pub mass: f64,
    pub potential: RadialPotential,
    /// `(a₀, a₁, b₀, b₁)`.
    pub amplitudes: [Complex64; 4],
    pub frame: SpinorFrame,
    pub ground: RadialEigenpair,
    pub excited: RadialEigenpair,
}

impl MultiFrequencyWave {
    pub fn new(
        ground: RadialEigenpair,
        excited: RadialEigenpair,
        amplitudes: [Complex64; 4],
        frame: SpinorFrame,
        potential: RadialPotential,
    ) -> Result<Self, SolitonError> {
        if ground.grid != excited.grid || ground.mass != excited.mass || ground.n_dim != excited.n_dim {
            return Err(SolitonError::Incompatible);
        }
        if ground.n_dim != 3 {
            return Err(SolitonError::Dimension(ground.n_dim));
        }
        let m = ground.mass;
        if !(0.0 < ground.omega && ground.omega < excited.omega && excited.omega < m) {
            return Err(SolitonError::FrequencyOrder { omega0: ground.omega, omega1: excited.omega, m });
        }
        Ok(Self { mass: m, potential, amplitudes, frame, ground, excited })
    }

    pub fn grid(&self) -> RadialGrid {
        self.ground.grid
    }

    pub fn omegas(&self) -> [f64; 2] {
        [self.ground.omega, self.excited.omega]
    }

    /// `[φ₀, φ₁, χ₀, χ₁]`.
    pub fn blocks(&self) -> [Spinor4Profile; 4] {
        [
            Spinor4Profile::from_pair(ProfileKind::Phi, &self.ground, self.frame.n0),
            Spinor4Profile::from_pair(ProfileKind::Phi, &self.excited, self.frame.n1),
            Spinor4Profile::from_pair(ProfileKind::Chi, &self.ground, self.frame.m0),
            Spinor4Profile::from_pair(ProfileKind::Chi, &self.excited, self.frame.m1),
        ]
    }

    /// Frequencies `ν_k` with block `k` carrying `e^{−iν_k t}`.
    pub fn block_frequencies(&self) -> [f64; 4] {
        let [w0, w1] = self.omegas();
        [w0, w1, -w0, -w1]
    }

    /// Complex coefficient `c_k(t)` of block `k` at time `t`.
    pub fn coefficients(&self, t: f64) -> [Complex64; 4] {
        let nu = self.block_frequencies();
        std::array::from_fn(|k| self.amplitudes[k] * Complex64::from_polar(1.0, -nu[k] * t))
    }

    pub fn psi(&self, blocks: &[Spinor4Profile; 4], i: usize, dir: [f64; 3], t: f64) -> Spinor4 {
        let c = self.coefficients(t);
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (k, b) in blocks.iter().enumerate() {
            let s = b.at(i, dir);
            for j in 0..4 {
                out[j] += c[k] * s[j];
            }
        }
        out
    }

    /// `(|a₀|²−|b₀|²)(v₀²−u₀²) + (|a₁|²−|b₁|²)(v₁²−u₁²)`.
    pub fn density_closed_form(&self) -> Vec<f64> {
        let [a0, a1, b0, b1] = self.amplitudes;
        let c0 = a0.norm_sqr() - b0.norm_sqr();
        let c1 = a1.norm_sqr() - b1.norm_sqr();
        (0..self.ground.v.len())
            .map(|i| {
                let (g, e) = (&self.ground, &self.excited);
                c0 * (g.v[i].powi(2) - g.u[i].powi(2)) + c1 * (e.v[i].powi(2) - e.u[i].powi(2))
            })
            .collect()
    }
}

pub const DENSITY_TIMES: [f64; 3] = [0.0, 0.37, 1.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub closed_form: Vec<f64>,
    /// `max |F|` over the grid.
    pub scale: f64,
    /// Max over grid, directions and sample times of `|ψ*βψ − F|`.
    pub max_deviation: f64,
    /// Max over grid and directions of the spread of `ψ*βψ` across times.
    pub time_spread: f64,
    /// Radius at which `max_deviation` is attained.
    pub worst_radius: f64,
    pub consistent: bool,
}

/// Closed-form `F(r)` plus a direct evaluation of `ψ*βψ` at the sample
/// times on a spherical product grid of directions.
pub fn density_f(wave: &MultiFrequencyWave) -> DensityReport {
    let f = wave.density_closed_form();
    let scale = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let blocks = wave.blocks();
    let mut max_deviation = 0.0f64;
    let mut time_spread = 0.0f64;
    let mut worst_radius = 0.0;
    for (dir, _) in sphere_quadrature(4, 8) {
        for i in 0..f.len() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &t in &DENSITY_TIMES {
                let p = wave.psi(&blocks, i, dir, t);
                let d = beta_product(&p, &p).re;
                lo = lo.min(d);
                hi = hi.max(d);
                if (d - f[i]).abs() > max_deviation {
                    max_deviation = (d - f[i]).abs();
                    worst_radius = wave.grid().r(i);
                }
            }
            time_spread = time_spread.max(hi - lo);
        }
    }
    let consistent = max_deviation <= 1e-12 * scale && time_spread <= 1e-12 * scale;
    DensityReport { closed_form: f, scale, max_deviation, time_spread, worst_radius, consistent }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub pass: bool,
    pub first_violation_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveReport {
    pub f_positive: Condition,
    pub f_decreasing: Condition,
    pub v0_positive: Condition,
    /// `|a₀|² − |b₀|²`.
    pub amplitude_margin: f64,
    pub amplitude_ok: bool,
    pub pass: bool,
}

/// Noise floor for monotonicity checks: `1e-12·max|F|`.
pub fn noise_floor(f: &[f64]) -> f64 {
    1e-12 * f.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Positivity and strict decrease of `F`, positivity of `v₀`, and
/// `|a₀|² > |b₀|²`, with the radius of the first violation of each.
pub fn validate_wave(wave: &MultiFrequencyWave) -> WaveReport {
    let f = wave.density_closed_form();
    let grid = wave.grid();
    let floor = noise_floor(&f);
    let fmax = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let pos_bad = if fmax <= 0.0 { Some(0) } else { f.iter().position(|&x| x <= 0.0 && x.abs() >= floor) };
    let f_positive = Condition { pass: pos_bad.is_none(), first_violation_radius: pos_bad.map(|i| grid.r(i)) };

    let dec_bad = if fmax <= 0.0 { Some(0) } else { (0..f.len() - 1).find(|&i| f[i] > floor && f[i + 1] >= f[i]) };
    let f_decreasing =
        Condition { pass: dec_bad.is_none(), first_violation_radius: dec_bad.map(|i| grid.r(i + 1)) };

    let v = &wave.ground.v;
    let vfloor = 1e-12 * v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let v_bad = if v[0] <= 0.0 { Some(0) } else { v.iter().position(|&x| x <= -vfloor) };
    let v0_positive = Condition { pass: v_bad.is_none(), first_violation_radius: v_bad.map(|i| grid.r(i)) };

    let [a0, _, b0, _] = wave.amplitudes;
    let amplitude_margin = a0.norm_sqr() - b0.norm_sqr();
    let amplitude_ok = amplitude_margin > 0.0;
    let pass = f_positive.pass && f_decreasing.pass && v0_positive.pass && amplitude_ok;
    WaveReport { f_positive, f_decreasing, v0_positive, amplitude_margin, amplitude_ok, pass }
}

/// Where an evaluation of the table landed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extension {
    Inside,
    /// `τ < 0`: constant continuation `f = 0`.
    Below,
    /// `τ > F(0)`: constant continuation `f = V(0)`.
    Above,
}

/// Monotone tabulated `f` with `f(F(r_i)) = V(r_i)` at every knot. Slopes
/// are a function of the knots, so `(τ, f)` pairs fully describe the table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearityTable {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
    pub rule: String,
}

impl NonlinearityTable {
    /// Builds from strictly increasing knots starting at `τ = 0, f = 0`.
    pub fn from_knots(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, SolitonError> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(SolitonError::EmptyTable);
        }
        for i in 1..knots.len() {
            if !(knots[i] > knots[i - 1]) {
                return Err(SolitonError::NonMonotoneInput { what: "tau", index: i, radius: f64::NAN });
            }
            if !(values[i] > values[i - 1]) {
                return Err(SolitonError::NonMonotoneInput { what: "f", index: i, radius: f64::NAN });
            }
        }
        if knots[0] != 0.0 || values[0] != 0.0 {
            return Err(SolitonError::NonMonotoneInput { what: "f(0)", index: 0, radius: 0.0 });
        }
        let slopes = pchip::slopes(&knots, &values);
        Ok(Self { knots, values, slopes, rule: pchip::RULE.to_string() })
    }

    pub fn tau_max(&self) -> f64 {
        *self.knots.last().unwrap_or(&0.0)
    }

    pub fn eval_flagged(&self, tau: f64) -> (f64, Extension) {
        if tau < 0.0 {
            (0.0, Extension::Below)
        } else if tau > self.tau_max() {
            (*self.values.last().unwrap_or(&0.0), Extension::Above)
        } else {
            (pchip::eval(&self.knots, &self.values, &self.slopes, tau), Extension::Inside)
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.eval_flagged(tau).0
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_knots(self.knots.clone(), self.values.iter().map(|v| v * factor).collect())
            .unwrap_or_else(|_| self.clone())
    }
}

/// Inverts `f(F(r_i)) = V(r_i)` over the nodes where `F` exceeds the noise
/// floor; prepends `(0, 0)`.
pub fn build_nonlinearity(
    f: &[f64],
    v: &[f64],
    grid: &RadialGrid,
) -> Result<NonlinearityTable, SolitonError> {
    let floor = noise_floor(f);
    let last = f.iter().position(|&x| x <= floor).unwrap_or(f.len());
    if last == 0 {
        return Err(SolitonError::EmptyTable);
    }
    for i in 1..last {
        if !(f[i] < f[i - 1]) {
            return Err(SolitonError::NonMonotoneInput { what: "F", index: i, radius: grid.r(i) });
        }
        if !(v[i] < v[i - 1]) {
            return Err(SolitonError::NonMonotoneInput { what: "V", index: i, radius: grid.r(i) });
        }
    }
    // the remaining tail must stay below the floor, otherwise F is not monotone
    if let Some(k) = (last..f.len()).find(|&k| f[k] > floor) {
        return Err(SolitonError::NonMonotoneInput { what: "F", index: k, radius: grid.r(k) });
    }
    if !(v[last - 1] > 0.0) {
        return Err(SolitonError::NonMonotoneInput { what: "V", index: last - 1, radius: grid.r(last - 1) });
    }
    let mut knots = vec![0.0];
    let mut values = vec![0.0];
    for i in (0..last).rev() {
        knots.push(f[i]);
        values.push(v[i]);
    }
    NonlinearityTable::from_knots(knots, values)
}

#[cfg(test)]
mod tests;
