//! Seeded randomized suites for the support calculus.
//!
//! Envelopes for the chain `a ≤ a^U ≤ b`, `a ≤ b^L ≤ b` are taken of the
//! edge functions restricted to `Σ_f`: just outside `Σ_f` one has `a = +∞`,
//! so the unrestricted `a^U` is `+∞` at every boundary point of `Σ_f`.
//! The chain also needs the samples to resolve the support: the supports
//! of neighbouring columns must overlap, which is the discrete form of the
//! semicontinuity of `a_f` and `b_f`. [`resolved_distribution`] draws such
//! data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_titchmarsh_partial, lower_envelope, support_edges, upper_envelope, EdgeFunction, Grid2, GriddedDistribution,
    SupportError,
};

fn sample(rng: &mut ChaCha8Rng, real: bool) -> Complex64 {
    let r = rng.random_range(0.1..=1.0);
    if real {
        Complex64::new(r, 0.0)
    } else {
        Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
    }
}

/// Random compact-support columns: each column is empty with probability
/// 0.15, otherwise holds samples of modulus in `[0.1, 1]` between two random
/// indices, with interior holes. Endpoint samples are never zero.
pub fn random_columns(rng: &mut ChaCha8Rng, grid: Grid2, real: bool) -> GriddedDistribution {
    let mut f = GriddedDistribution::zeros(grid);
    for i in 0..grid.n_x {
        if rng.random_bool(0.15) {
            continue;
        }
        let lo = rng.random_range(0..grid.n_omega);
        let hi = rng.random_range(lo..grid.n_omega);
        for k in lo..=hi {
            if k == lo || k == hi || !rng.random_bool(0.2) {
                f.set(i, k, sample(rng, real));
            }
        }
    }
    f
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairSuiteReport {
    pub seed: u64,
    pub pairs: usize,
    /// Pairs whose columnwise index edges failed to add exactly.
    pub index_failures: usize,
    /// Pairs whose envelope discrepancy exceeded the stencil oscillation.
    pub envelope_failures: usize,
    pub pass: bool,
}

/// Columnwise Titchmarsh on `pairs` seeded random pairs; even pairs are
/// nonnegative real, odd pairs carry random phases.
pub fn random_pair_suite(seed: u64, pairs: usize) -> Result<PairSuiteReport, SupportError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut index_failures, mut envelope_failures) = (0, 0);
    for p in 0..pairs {
        let n_x = rng.random_range(2..=24);
        let n_w = rng.random_range(2..=48);
        let grid = Grid2::new(-1.0, 1.0, n_x, -2.0, 2.0, n_w)?;
        let real = p % 2 == 0;
        let f = random_columns(&mut rng, grid, real);
        let g = random_columns(&mut rng, grid, real);
        let report = check_titchmarsh_partial(&f, &g)?;
        index_failures += usize::from(!report.columnwise_exact);
        envelope_failures += usize::from(!report.envelope_within_oscillation);
    }
    Ok(PairSuiteReport {
        seed,
        pairs,
        index_failures,
        envelope_failures,
        pass: index_failures == 0 && envelope_failures == 0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub n_x: usize,
    pub n_omega: usize,
    pub max_a_discrepancy: f64,
    pub max_b_discrepancy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementReport {
    pub levels: Vec<RefinementLevel>,
    /// Successive ratios of `max(a, b)` discrepancies.
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
}

/// Fixed test pair with continuous edges on `x ∈ [−1, 1]`:
/// `f` occupies `ω ∈ [sin 2x, 1.5 + 0.3 cos 3x]`, `g` occupies
/// `ω ∈ [0.5x − sin 2x, 1 − x²]`, both with smooth positive profiles.
pub fn refinement_pair(grid: Grid2) -> Result<(GriddedDistribution, GriddedDistribution), SupportError> {
    let f = GriddedDistribution::from_fn(grid, 0.0, |x, w| {
        let (lo, hi) = ((2.0 * x).sin(), 1.5 + 0.3 * (3.0 * x).cos());
        if w >= lo && w <= hi {
            Complex64::new(1.0 + 0.5 * (x + w).cos(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;
    let g = GriddedDistribution::from_fn(grid, 0.0, |x, w| {
        let (lo, hi) = (0.5 * x - (2.0 * x).sin(), 1.0 - x * x);
        if w >= lo && w <= hi {
            Complex64::from_polar(0.5 + 0.25 * (x * w).sin().abs(), x - w)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;
    Ok((f, g))
}

/// Envelope-level discrepancy `|a_{f∗g}^U − (a_f^U + a_g^U)|` (and the
/// mirror for `b^L`) on [`refinement_pair`], halving `Δx` and `Δω` per level.
pub fn envelope_refinement(base_n_x: usize, base_n_omega: usize, levels: usize) -> Result<RefinementReport, SupportError> {
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let s = 1usize << l;
        let n_x = (base_n_x - 1) * s + 1;
        let n_w = (base_n_omega - 1) * s + 1;
        let grid = Grid2::new(-1.0, 1.0, n_x, -2.0, 2.0, n_w)?;
        let (f, g) = refinement_pair(grid)?;
        let r = check_titchmarsh_partial(&f, &g)?;
        out.push(RefinementLevel {
            n_x,
            n_omega: n_w,
            max_a_discrepancy: r.max_a_envelope_discrepancy,
            max_b_discrepancy: r.max_b_envelope_discrepancy,
        });
    }
    let worst = |l: &RefinementLevel| l.max_a_discrepancy.max(l.max_b_discrepancy);
    let ratios: Vec<f64> = out.windows(2).map(|w| worst(&w[0]) / worst(&w[1])).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RefinementReport { levels: out, ratios, min_ratio })
}

/// Random distribution whose support resolves a closed region: `Σ_f` is a
/// union of index intervals and, inside each, neighbouring columns have
/// overlapping ω-supports.
pub fn resolved_distribution(rng: &mut ChaCha8Rng, grid: Grid2) -> GriddedDistribution {
    let mut f = GriddedDistribution::zeros(grid);
    let n_w = grid.n_omega as i64;
    let mut prev: Option<(i64, i64)> = None;
    for i in 0..grid.n_x {
        if rng.random_bool(0.1) {
            prev = None;
            continue;
        }
        let (lo, hi) = match prev {
            None => {
                let lo = rng.random_range(0..n_w);
                (lo, rng.random_range(lo..n_w))
            }
            Some((plo, phi)) => {
                // overlap with [plo, phi]: lo ≤ phi and hi ≥ plo
                let lo = rng.random_range((plo - 3).max(0)..=phi);
                let hi = rng.random_range(lo.max(plo)..=(phi + 3).min(n_w - 1));
                (lo, hi)
            }
        };
        for k in lo..=hi {
            if k == lo || k == hi || !rng.random_bool(0.2) {
                f.set(i, k as usize, sample(rng, false));
            }
        }
        prev = Some((lo, hi));
    }
    f
}

/// Stencil envelope of `μ` restricted to the indices where `keep` holds;
/// other indices keep their value.
pub fn envelope_on(mu: &EdgeFunction, keep: &[bool], upper: bool) -> EdgeFunction {
    let n = mu.len();
    let values = (0..n)
        .map(|i| {
            if !keep[i] {
                return mu.values[i];
            }
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            let it = (lo..=hi).filter(|&j| keep[j]).map(|j| mu.values[j]);
            if upper {
                it.fold(f64::NEG_INFINITY, f64::max)
            } else {
                it.fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    EdgeFunction { x: mu.x.clone(), values }
}

/// Violations of `a ≤ a^U ≤ b` and `a ≤ b^L ≤ b` on `Σ_f`, envelopes of the
/// restrictions to `Σ_f`.
pub fn chain_violations(a: &EdgeFunction, b: &EdgeFunction) -> usize {
    let keep: Vec<bool> = a.values.iter().map(|v| *v < f64::INFINITY).collect();
    let au = envelope_on(a, &keep, true);
    let bl = envelope_on(b, &keep, false);
    (0..a.len())
        .filter(|&i| keep[i])
        .filter(|&i| {
            let (a, b, au, bl) = (a.values[i], b.values[i], au.values[i], bl.values[i]);
            !(a <= au && au <= b && a <= bl && bl <= b)
        })
        .count()
}

/// `μ^L ≤ μ ≤ μ^U` at every point.
pub fn sandwich_violations(mu: &EdgeFunction) -> usize {
    let (l, u) = (lower_envelope(mu), upper_envelope(mu));
    (0..mu.len()).filter(|&i| !(l.values[i] <= mu.values[i] && mu.values[i] <= u.values[i])).count()
}

/// `(μ+ν)^L ≥ μ^L + ν^L` and `(μ+ν)^U ≤ μ^U + ν^U` for finite `μ, ν`.
pub fn superadditivity_violations(mu: &EdgeFunction, nu: &EdgeFunction) -> Result<usize, SupportError> {
    let s = mu.add(nu)?;
    let lo = lower_envelope(mu).add(&lower_envelope(nu))?;
    let hi = upper_envelope(mu).add(&upper_envelope(nu))?;
    let (sl, su) = (lower_envelope(&s), upper_envelope(&s));
    Ok((0..mu.len()).filter(|&i| !(sl.values[i] >= lo.values[i] && su.values[i] <= hi.values[i])).count())
}

/// `(a^U)^L ≥ a` and `(b^L)^U ≤ b` pointwise.
pub fn ula_violations(a: &EdgeFunction, b: &EdgeFunction) -> usize {
    let aul = lower_envelope(&upper_envelope(a));
    let blu = upper_envelope(&lower_envelope(b));
    (0..a.len()).filter(|&i| !(aul.values[i] >= a.values[i] && blu.values[i] <= b.values[i])).count()
}

fn random_edge(rng: &mut ChaCha8Rng, n: usize, infinite: bool) -> EdgeFunction {
    let values = (0..n)
        .map(|_| {
            if infinite && rng.random_bool(0.1) {
                if rng.random_bool(0.5) {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                rng.random_range(-10.0..10.0)
            }
        })
        .collect();
    EdgeFunction { x: (0..n).map(|i| i as f64).collect(), values }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeLawsReport {
    pub seed: u64,
    pub cases: usize,
    pub sandwich_violations: usize,
    pub superadditivity_violations: usize,
    pub chain_violations: usize,
    pub ula_violations: usize,
    pub pass: bool,
}

/// Each case draws an extended-real `μ` (sandwich, a-u-l-a), a finite pair
/// (superadditivity), and edge functions of a [`resolved_distribution`]
/// (sandwich, chain, a-u-l-a).
pub fn envelope_laws_suite(seed: u64, cases: usize) -> Result<EnvelopeLawsReport, SupportError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sw, mut sup, mut chain, mut ula) = (0, 0, 0, 0);
    for _ in 0..cases {
        let n = rng.random_range(1..=40);
        let mu = random_edge(&mut rng, n, true);
        sw += sandwich_violations(&mu);
        ula += ula_violations(&mu, &mu);
        let (p, q) = (random_edge(&mut rng, n, false), random_edge(&mut rng, n, false));
        sup += superadditivity_violations(&p, &q)?;

        let n_x = rng.random_range(2..=40);
        let n_w = rng.random_range(2..=40);
        let grid = Grid2::new(-1.0, 1.0, n_x, -1.0, 1.0, n_w)?;
        let f = resolved_distribution(&mut rng, grid);
        let (a, b) = support_edges(&f);
        sw += sandwich_violations(&a) + sandwich_violations(&b);
        chain += chain_violations(&a, &b);
        ula += ula_violations(&a, &b);
    }
    Ok(EnvelopeLawsReport {
        seed,
        cases,
        sandwich_violations: sw,
        superadditivity_violations: sup,
        chain_violations: chain,
        ula_violations: ula,
        pass: sw + sup + chain + ula == 0,
    })
}
