use serde::{Deserialize, Serialize};

use super::ode::Rk45;
use super::{node_count, RadialEigenpair, RadialError, RadialGrid, RadialPotential, SchrodingerEigenpair};
use crate::numeric::{refine_root, trapezoid};

/// `V(r) = (m−ω)·W(√(m−ω)·r)`.
pub fn scale_to_dirac_potential(w: &RadialPotential, m: f64, omega: f64) -> Result<RadialPotential, RadialError> {
    if !(omega > 0.0 && omega < m) {
        return Err(RadialError::FrequencyOutOfGap { omega, m });
    }
    Ok(RadialPotential::Scaled { base: Box::new(w.clone()), factor: m - omega })
}

/// `v̂(r) = φ(√(m−ω)·r)` and `û = −∂_r v̂/(2m)` on `grid`.
pub fn nonrelativistic_seed(
    phi: &SchrodingerEigenpair,
    m: f64,
    omega: f64,
    grid: &RadialGrid,
) -> Result<(Vec<f64>, Vec<f64>), RadialError> {
    if !(omega > 0.0 && omega < m) {
        return Err(RadialError::FrequencyOutOfGap { omega, m });
    }
    let s = (m - omega).sqrt();
    let v: Vec<f64> = grid.nodes().iter().map(|&r| phi.eval(s * r)).collect();
    let dv = centered_derivative(&v, grid.dr(), Parity::Even);
    let u = dv.iter().map(|d| -d / (2.0 * m)).collect();
    Ok((v, u))
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Parity {
    Even,
    Odd,
}

/// Second-order derivative on uniform nodes from `r = 0`, using the parity
/// of the function to form the centered stencil at the origin.
pub(crate) fn centered_derivative(f: &[f64], h: f64, parity: Parity) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    d[0] = match parity {
        Parity::Even => 0.0,
        Parity::Odd => f[1] / h,
    };
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

/// Shooting settings for the radial Dirac eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracSolver {
    pub grid: RadialGrid,
    pub n_dim: u32,
    pub rtol: f64,
    pub scan_points: usize,
}

impl DiracSolver {
    pub fn new(grid: RadialGrid) -> Self {
        Self { grid, n_dim: 3, rtol: 1e-12, scan_points: 64 }
    }

    /// Grid sized for the potential scaled from a unit-width Schrödinger well:
    /// `r_max = 160` and `Δr = 0.1` at `m = 1`, `ω = 0.95`, stretched as
    /// `1/√(m(m−ω))`.
    pub fn for_regime(m: f64, omega: f64) -> Self {
        let r_max = 160.0 * (0.05 / (m * (m - omega))).sqrt();
        Self::new(RadialGrid { r_max, n_r: 1600 })
    }
}

struct Shooter<'a> {
    v: &'a RadialPotential,
    m: f64,
    n_dim: u32,
    grid: RadialGrid,
    rtol: f64,
    v2: f64,
}

type Profile = (Vec<f64>, Vec<f64>);

impl<'a> Shooter<'a> {
    fn rhs(&self, omega: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        let k = (self.n_dim - 1) as f64;
        move |r: f64, y: &[f64; 2]| {
            let mm = self.m - self.v.eval(r);
            [-(omega + mm) * y[1], (omega - mm) * y[0] - k * y[1] / r]
        }
    }

    fn series_start(&self, omega: f64, r: f64) -> [f64; 2] {
        let n = self.n_dim as f64;
        let m0 = self.m - self.v.eval(0.0);
        let m2 = -self.v2;
        let c = (omega - m0) / n;
        let v2 = -(omega + m0) * c / 2.0;
        let c3 = ((omega - m0) * v2 - m2) / (n + 2.0);
        [1.0 + v2 * r * r, c * r + c3 * r * r * r]
    }

    fn tail_start(&self, omega: f64) -> [f64; 2] {
        let r = self.grid.r_max;
        let mm = self.m - self.v.eval(r);
        let lambda = (mm * mm - omega * omega).max(0.0).sqrt();
        let k = (self.n_dim - 1) as f64;
        [1.0, (lambda + k / (2.0 * r)) / (mm + omega)]
    }

    /// Index of the matching node: the classical turning point
    /// `V(r) = m − ω`, kept away from both ends.
    fn match_index(&self, omega: f64) -> usize {
        let n = self.grid.n_r;
        let threshold = self.m - omega;
        let mut idx = n / 4;
        if self.v.eval(0.0) > threshold {
            idx = (0..=n).rev().find(|&i| self.v.eval(self.grid.r(i)) >= threshold).unwrap_or(n / 4);
        }
        idx.clamp(n / 20 + 2, n - n / 20 - 2)
    }

    fn outward(&self, omega: f64, i_match: usize, store: bool) -> Result<([f64; 2], Profile), RadialError> {
        let f = self.rhs(omega);
        let h = self.grid.dr();
        let r_s = 1e-4 * h.min(1.0);
        let mut y = self.series_start(omega, r_s);
        let mut rk = Rk45::new(self.rtol, h / 4.0);
        let mut vs = Vec::new();
        let mut us = Vec::new();
        if store {
            vs.push(1.0);
            us.push(0.0);
        }
        let mut r = r_s;
        for i in 1..=i_match {
            let r_next = self.grid.r(i);
            rk.integrate(&f, r, r_next, &mut y).map_err(|_| RadialError::NoEigenvalue { lo: omega, hi: omega })?;
            r = r_next;
            if store {
                vs.push(y[0]);
                us.push(y[1]);
            }
        }
        Ok((y, (vs, us)))
    }

    fn inward(&self, omega: f64, i_match: usize, store: bool) -> Result<([f64; 2], Profile), RadialError> {
        let f = self.rhs(omega);
        let h = self.grid.dr();
        let mut y = self.tail_start(omega);
        let mut rk = Rk45::new(self.rtol, h / 4.0);
        let n = self.grid.n_r;
        let mut vs = Vec::new();
        let mut us = Vec::new();
        if store {
            vs.push(y[0]);
            us.push(y[1]);
        }
        for i in (i_match..n).rev() {
            rk.integrate(&f, self.grid.r(i + 1), self.grid.r(i), &mut y)
                .map_err(|_| RadialError::NoEigenvalue { lo: omega, hi: omega })?;
            if store {
                vs.push(y[0]);
                us.push(y[1]);
            }
            let size = y[0].abs().max(y[1].abs());
            if size > 1e150 {
                y = [y[0] / size, y[1] / size];
                vs.iter_mut().chain(us.iter_mut()).for_each(|x| *x /= size);
            }
        }
        vs.reverse();
        us.reverse();
        Ok((y, (vs, us)))
    }

    fn miss(&self, omega: f64, i_match: usize) -> f64 {
        let (Ok((o, _)), Ok((i, _))) = (self.outward(omega, i_match, false), self.inward(omega, i_match, false)) else {
            return f64::NAN;
        };
        let no = o[0].hypot(o[1]);
        let ni = i[0].hypot(i[1]);
        (o[0] * i[1] - o[1] * i[0]) / (no * ni)
    }

    fn profile(&self, omega: f64, i_match: usize) -> Result<Profile, RadialError> {
        let (yo, (mut v, mut u)) = self.outward(omega, i_match, true)?;
        let (yi, (vi, ui)) = self.inward(omega, i_match, true)?;
        let scale = (yo[0] * yi[0] + yo[1] * yi[1]) / (yi[0] * yi[0] + yi[1] * yi[1]);
        v.extend(vi[1..].iter().map(|x| x * scale));
        u.extend(ui[1..].iter().map(|x| x * scale));
        let w = self.grid.measure(self.n_dim);
        let dens: Vec<f64> = (0..v.len()).map(|i| (v[i] * v[i] + u[i] * u[i]) * w[i]).collect();
        let mut norm = trapezoid(&dens, self.grid.dr()).sqrt();
        if v[0] < 0.0 {
            norm = -norm;
        }
        v.iter_mut().chain(u.iter_mut()).for_each(|x| *x /= norm);
        Ok((v, u))
    }
}

/// Eigenpair of the radial Dirac system with `node_count` nodes of `v`,
/// nearest to `omega_guess`.
pub fn dirac_eigen(
    v: &RadialPotential,
    m: f64,
    omega_guess: f64,
    node_count_wanted: usize,
    solver: &DiracSolver,
) -> Result<RadialEigenpair, RadialError> {
    if !(m > 0.0) {
        return Err(RadialError::BadMass(m));
    }
    if !(omega_guess > 0.0 && omega_guess < m) {
        return Err(RadialError::FrequencyOutOfGap { omega: omega_guess, m });
    }
    if solver.n_dim < 1 {
        return Err(RadialError::BadDimension);
    }
    let grid = RadialGrid::new(solver.grid.r_max, solver.grid.n_r)?;
    let shooter =
        Shooter { v, m, n_dim: solver.n_dim, grid, rtol: solver.rtol, v2: v.curvature_at_origin() };
    let i_match = shooter.match_index(omega_guess);
    let floor = 1e-6 * m;
    let ceil = m * (1.0 - 1e-6);
    let mut widen = 1.0;
    let mut found_nodes = Vec::new();
    let (mut lo, mut hi);
    loop {
        lo = (omega_guess * (1.0 - 0.1 * widen)).max(floor);
        hi = (omega_guess * (1.0 + 0.1 * widen)).min(ceil);
        let k = solver.scan_points.max(2);
        let omegas: Vec<f64> = (0..k).map(|j| lo + (hi - lo) * j as f64 / (k - 1) as f64).collect();
        let misses: Vec<f64> = omegas.iter().map(|&w| shooter.miss(w, i_match)).collect();
        let mut best: Option<(f64, Profile, usize)> = None;
        for j in 0..k - 1 {
            let (a, b) = (misses[j], misses[j + 1]);
            if !(a.is_finite() && b.is_finite()) || a.signum() == b.signum() {
                continue;
            }
            let Some(root) = refine_root(|w| shooter.miss(w, i_match), omegas[j], omegas[j + 1], 1e-15 * m, 300)
            else {
                continue;
            };
            let prof = shooter.profile(root, i_match)?;
            let nodes = node_count(&prof.0);
            found_nodes.push(nodes);
            if nodes == node_count_wanted
                && best.as_ref().is_none_or(|(w, _, _)| (root - omega_guess).abs() < (w - omega_guess).abs())
            {
                best = Some((root, prof, nodes));
            }
        }
        if let Some((omega, (vv, uu), nodes)) = best {
            return Ok(RadialEigenpair { omega, mass: m, n_dim: solver.n_dim, grid, v: vv, u: uu, node_count: nodes });
        }
        if lo <= floor && hi >= ceil {
            break;
        }
        widen *= 2.0;
    }
    if found_nodes.is_empty() {
        Err(RadialError::NoEigenvalue { lo, hi })
    } else {
        found_nodes.sort_unstable();
        found_nodes.dedup();
        Err(RadialError::NodeMismatch { lo, hi, found: found_nodes, wanted: node_count_wanted })
    }
}

/// Discrete residual of the radial system for a computed eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    /// `‖discretized RHS − ω(v,u)‖` in `L²(rⁿ⁻¹dr)`.
    pub l2: f64,
    /// `10·Δr²·m`.
    pub bound: f64,
    /// `max(|v(r_max)|, |u(r_max)|)`.
    pub boundary: f64,
    pub within: bool,
}

/// Centered second-order residual of
/// `ωv = u' + (n−1)u/r + (m−V)v`, `ωu = −v' − (m−V)u` on the grid.
pub fn eigen_residual(pair: &RadialEigenpair, v_pot: &RadialPotential) -> EigenResidual {
    let (rv, ru) = residual_components(pair, v_pot);
    let w = pair.grid.measure(pair.n_dim);
    let dens: Vec<f64> = (0..rv.len()).map(|i| (rv[i] * rv[i] + ru[i] * ru[i]) * w[i]).collect();
    let l2 = trapezoid(&dens, pair.grid.dr()).sqrt();
    let bound = 10.0 * pair.grid.dr().powi(2) * pair.mass;
    let n = pair.v.len() - 1;
    let boundary = pair.v[n].abs().max(pair.u[n].abs());
    EigenResidual { l2, bound, boundary, within: l2 <= bound }
}

pub(crate) fn residual_components(pair: &RadialEigenpair, v_pot: &RadialPotential) -> (Vec<f64>, Vec<f64>) {
    let h = pair.grid.dr();
    let k = (pair.n_dim - 1) as f64;
    let dv = centered_derivative(&pair.v, h, Parity::Even);
    let du = centered_derivative(&pair.u, h, Parity::Odd);
    let n = pair.v.len();
    let mut rv = vec![0.0; n];
    let mut ru = vec![0.0; n];
    for i in 0..n {
        let r = pair.grid.r(i);
        let mm = pair.mass - v_pot.eval(r);
        let radial = if i == 0 { k * du[0] } else { k * pair.u[i] / r };
        rv[i] = du[i] + radial + mm * pair.v[i] - pair.omega * pair.v[i];
        ru[i] = -dv[i] - mm * pair.u[i] - pair.omega * pair.u[i];
    }
    (rv, ru)
}

/// `∫(v_a v_b + u_a u_b) rⁿ⁻¹ dr` by the trapezoid rule.
pub fn overlap(a: &RadialEigenpair, b: &RadialEigenpair) -> f64 {
    let w = a.grid.measure(a.n_dim);
    let dens: Vec<f64> = (0..a.v.len().min(b.v.len())).map(|i| (a.v[i] * b.v[i] + a.u[i] * b.u[i]) * w[i]).collect();
    trapezoid(&dens, a.grid.dr())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoReport {
    /// `ρ = v² − u²` strictly decreasing wherever above the noise floor.
    pub monotone: bool,
    pub v_positive: bool,
    pub first_violation_radius: Option<f64>,
    pub pass: bool,
}

/// Checks that `ρ = v² − u²` decreases strictly and `v > 0`; values below
/// `1e-12·ρ(0)` are treated as noise.
pub fn check_rho_monotone(pair: &RadialEigenpair) -> RhoReport {
    let rho: Vec<f64> = pair.v.iter().zip(&pair.u).map(|(v, u)| v * v - u * u).collect();
    let vmax = pair.v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let floor = 1e-12 * rho[0].abs().max(vmax * vmax);
    let mut first = None;
    let mut monotone = rho[0] > floor;
    if !monotone {
        first = Some(0.0);
    }
    for i in 0..rho.len() - 1 {
        if !monotone {
            break;
        }
        if rho[i] > floor && rho[i + 1] >= rho[i] {
            monotone = false;
            first = Some(pair.grid.r(i + 1));
        }
    }
    let vfloor = 1e-12 * vmax;
    let bad_v = pair.v.iter().position(|&x| x < -vfloor || (x <= vfloor && pair.v[0] <= vfloor));
    let v_positive = bad_v.is_none() && pair.v[0] > 0.0;
    if first.is_none() {
        first = bad_v.map(|i| pair.grid.r(i));
    }
    RhoReport { monotone, v_positive, first_violation_radius: first, pass: monotone && v_positive }
}
