//! Algebraic nonlinearities `α(τ) = ±(A(τ)/B(τ))^{1/N}`, their growth
//! exponent `κ`, and polynomial certificates `𝓜(τ, w) = Σ_j M_j(τ) w^j`
//! vanishing on `w = τ α(τ)`.
//!
//! Degrees and `κ` are exact (integers and rationals). Positivity of `A/B`
//! on `τ ≥ 0` is checked numerically from polynomial roots with tolerance
//! [`ROOT_TOL`].

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Imaginary-part and sign tolerance for the numerical root analysis.
pub const ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum NonlinearityError {
    #[error("root order N must be positive")]
    ZeroRootOrder,
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i32),
    #[error("denominator vanishes at tau = {0} >= 0")]
    DenominatorVanishes(f64),
    #[error("A/B is negative at tau = {0} but N is even")]
    NegativeRadicand(f64),
    #[error("alpha(0) = A(0)/B(0) must vanish, got {0}")]
    NonzeroAtOrigin(f64),
    #[error("growth needs deg A > deg B (got {a:?} <= {b:?})")]
    NoGrowth { a: Option<usize>, b: Option<usize> },
    #[error("kappa must be positive")]
    NonPositiveKappa,
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("certificate degree condition fails at j = {0}")]
    DegreeCondition(usize),
    #[error("certificate has a vanishing leading polynomial M_J")]
    ZeroLeading,
}

/// Real polynomial with ascending coefficients; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial {
    fn from(c: Vec<f64>) -> Self {
        Polynomial::new(c)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    /// `c·τ^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` stands for the degree `−∞` of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// `Σ |c_k| |t|^k`, the natural magnitude scale of an evaluation.
    pub fn eval_abs(&self, t: f64) -> f64 {
        let t = t.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c.abs())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Polynomial, i: usize| p.coeffs.get(i).copied().unwrap_or(0.0);
        Polynomial::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    /// All complex roots via the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<num_complex::Complex64> {
        let Some(d) = self.degree() else { return Vec::new() };
        if d == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[d];
        let mut m = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            m[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        m.complex_eigenvalues().iter().copied().collect()
    }

    /// Real roots (imaginary part below [`ROOT_TOL`] relative), sorted.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self
            .roots()
            .into_iter()
            .filter(|z| z.im.abs() <= ROOT_TOL * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect();
        r.sort_by(|a, b| a.total_cmp(b));
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_i32(s: i32) -> Result<Self, NonlinearityError> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(NonlinearityError::BadSign(s)),
        }
    }
}

/// `α(τ) = sign · (A(τ)/B(τ))^{1/N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicNonlinearity {
    pub numerator: Polynomial,
    pub denominator: Polynomial,
    pub root_order: u32,
    pub sign: Sign,
}

impl AlgebraicNonlinearity {
    pub fn new(a: Polynomial, b: Polynomial, root_order: u32, sign: Sign) -> Result<Self, NonlinearityError> {
        let alpha = Self { numerator: a, denominator: b, root_order, sign };
        alpha.validate()?;
        Ok(alpha)
    }

    /// Pure-root family `±A^{1/N}`.
    pub fn pure_root(a: Polynomial, root_order: u32, sign: Sign) -> Result<Self, NonlinearityError> {
        Self::new(a, Polynomial::one(), root_order, sign)
    }

    fn test_points(&self) -> Vec<f64> {
        let mut roots: Vec<f64> = self
            .numerator
            .real_roots()
            .into_iter()
            .chain(self.denominator.real_roots())
            .filter(|&r| r >= 0.0)
            .collect();
        roots.sort_by(|a, b| a.total_cmp(b));
        let mut pts = vec![0.0];
        let mut prev = 0.0;
        for &r in &roots {
            pts.push(0.5 * (prev + r));
            prev = r;
        }
        pts.push(prev + 1.0);
        pts.push(2.0 * prev + 1e3);
        // dense sample guards against roots the eigen-solver misplaced
        pts.extend((0..=200).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 200.0) * (1.0 + prev)));
        pts
    }

    pub fn validate(&self) -> Result<(), NonlinearityError> {
        if self.root_order == 0 {
            return Err(NonlinearityError::ZeroRootOrder);
        }
        let b = &self.denominator;
        if b.is_zero() {
            return Err(NonlinearityError::DenominatorVanishes(0.0));
        }
        for r in b.real_roots() {
            if r >= -ROOT_TOL {
                return Err(NonlinearityError::DenominatorVanishes(r.max(0.0)));
            }
        }
        if self.root_order % 2 == 0 {
            for t in self.test_points() {
                let ratio = self.numerator.eval(t) / b.eval(t);
                let scale = self.numerator.eval_abs(t) / b.eval(t).abs();
                if ratio < -ROOT_TOL * scale.max(1.0) {
                    return Err(NonlinearityError::NegativeRadicand(t));
                }
            }
        }
        Ok(())
    }

    /// Enforces `α(0) = 0`, i.e. `A(0) = 0`.
    pub fn require_vanishing_at_zero(&self) -> Result<(), NonlinearityError> {
        let v = self.numerator.eval(0.0) / self.denominator.eval(0.0);
        if v != 0.0 {
            return Err(NonlinearityError::NonzeroAtOrigin(v));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<f64, NonlinearityError> {
        let ratio = self.numerator.eval(t) / self.denominator.eval(t);
        let n = self.root_order;
        let root = if ratio >= 0.0 {
            ratio.powf(1.0 / n as f64)
        } else if n % 2 == 1 {
            -(-ratio).powf(1.0 / n as f64)
        } else {
            return Err(NonlinearityError::NegativeRadicand(t));
        };
        Ok(self.sign.value() * root)
    }

    /// Largest modulus among the real and complex roots of `A` and `B`.
    pub fn root_scale(&self) -> f64 {
        self.numerator
            .roots()
            .into_iter()
            .chain(self.denominator.roots())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `κ = (deg A − deg B)/N`.
pub fn kappa_of(alpha: &AlgebraicNonlinearity) -> Result<BigRational, NonlinearityError> {
    let a = alpha.numerator.degree();
    let b = alpha.denominator.degree();
    match (a, b) {
        (Some(da), Some(db)) if da > db => {
            if alpha.root_order == 0 {
                return Err(NonlinearityError::ZeroRootOrder);
            }
            Ok(BigRational::new(BigInt::from(da - db), BigInt::from(alpha.root_order)))
        }
        _ => Err(NonlinearityError::NoGrowth { a, b }),
    }
}

/// Log-log slope of `|α|` between `τ/10` and `τ`.
pub fn fitted_growth_exponent(alpha: &AlgebraicNonlinearity, tau: f64) -> Result<f64, NonlinearityError> {
    let hi = alpha.eval(tau)?.abs().ln();
    let lo = alpha.eval(tau / 10.0)?.abs().ln();
    Ok((hi - lo) / 10f64.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KappaClass {
    Admissible,
    Critical,
    Inadmissible,
}

/// Compares `κ` with the critical exponent `2/(n−2)` (no restriction for `n ≤ 2`).
pub fn classify_kappa(n: u32, kappa: &BigRational) -> Result<KappaClass, NonlinearityError> {
    if n == 0 {
        return Err(NonlinearityError::BadDimension);
    }
    if !kappa.is_positive() {
        return Err(NonlinearityError::NonPositiveKappa);
    }
    if n <= 2 {
        return Ok(KappaClass::Admissible);
    }
    let critical = BigRational::new(BigInt::from(2), BigInt::from(n - 2));
    Ok(match kappa.cmp(&critical) {
        std::cmp::Ordering::Less => KappaClass::Admissible,
        std::cmp::Ordering::Equal => KappaClass::Critical,
        std::cmp::Ordering::Greater => KappaClass::Inadmissible,
    })
}

/// Polynomials `M_0 … M_J` with `Σ_j M_j(τ) (τα(τ))^j ≡ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub polys: Vec<Polynomial>,
}

impl Certificate {
    pub fn new(polys: Vec<Polynomial>) -> Result<Self, NonlinearityError> {
        let c = Self { polys };
        c.validate()?;
        Ok(c)
    }

    pub fn order(&self) -> usize {
        self.polys.len().saturating_sub(1)
    }

    /// `M_J ≢ 0` and `deg M_0 > deg M_j + j` for `1 ≤ j ≤ J` (with `deg 0 = −∞`).
    pub fn validate(&self) -> Result<(), NonlinearityError> {
        match self.polys.last() {
            Some(p) if !p.is_zero() && self.polys.len() >= 2 => {}
            _ => return Err(NonlinearityError::ZeroLeading),
        }
        // degrees shifted by one so that −∞ maps to 0 and comparisons stay in usize
        let d0 = self.polys[0].degree().map_or(0, |d| d + 1);
        for (j, p) in self.polys.iter().enumerate().skip(1) {
            if let Some(dj) = p.degree() {
                if d0 <= dj + 1 + j {
                    return Err(NonlinearityError::DegreeCondition(j));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, w: f64) -> f64 {
        self.polys.iter().rev().fold(0.0, |acc, p| acc * w + p.eval(t))
    }

    /// `Σ_j |M_j|(|t|) |w|^j`.
    pub fn eval_abs(&self, t: f64, w: f64) -> f64 {
        let w = w.abs();
        self.polys.iter().rev().fold(0.0, |acc, p| acc * w + p.eval_abs(t))
    }
}

/// `M_0 = −(±τ)^N A`, `M_N = B`, all other `M_j ≡ 0`.
pub fn build_certificate(alpha: &AlgebraicNonlinearity) -> Result<Certificate, NonlinearityError> {
    let n = alpha.root_order as usize;
    if n == 0 {
        return Err(NonlinearityError::ZeroRootOrder);
    }
    let sign_pow = if n % 2 == 0 { 1.0 } else { alpha.sign.value() };
    let m0 = alpha.numerator.mul(&Polynomial::monomial(-sign_pow, n));
    let mut polys = vec![Polynomial::zero(); n + 1];
    polys[0] = m0;
    polys[n] = alpha.denominator.clone();
    let cert = Certificate { polys };
    match cert.validate() {
        Err(NonlinearityError::DegreeCondition(_)) => Err(NonlinearityError::NoGrowth {
            a: alpha.numerator.degree(),
            b: alpha.denominator.degree(),
        }),
        other => other.map(|_| cert),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    /// `max_τ Σ_j |M_j(τ)| |w(τ)|^j` over the samples.
    pub scale: f64,
    pub tau_max: f64,
    pub samples: usize,
    pub worst_tau: f64,
}

impl ResidualReport {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_residual / self.scale
        } else {
            self.max_residual
        }
    }
}

/// Evaluates `𝓜(τ, τα(τ))` on the given samples.
pub fn certificate_residual(
    cert: &Certificate,
    alpha: &AlgebraicNonlinearity,
    taus: &[f64],
) -> Result<ResidualReport, NonlinearityError> {
    let mut report = ResidualReport {
        max_residual: 0.0,
        scale: 0.0,
        tau_max: taus.iter().copied().fold(0.0, f64::max),
        samples: taus.len(),
        worst_tau: 0.0,
    };
    for &t in taus {
        let w = t * alpha.eval(t)?;
        let r = cert.eval(t, w).abs();
        report.scale = report.scale.max(cert.eval_abs(t, w));
        if r > report.max_residual || (r.is_nan() && !report.max_residual.is_nan()) {
            report.max_residual = r;
            report.worst_tau = t;
        }
    }
    Ok(report)
}

/// Default verification samples: `10⁴` points on `[0, 10³·max(1, root scale)]`.
pub fn default_samples(alpha: &AlgebraicNonlinearity) -> Vec<f64> {
    uniform_samples(1e3 * alpha.root_scale().max(1.0), 10_000)
}

pub fn uniform_samples(tau_max: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count).map(|i| tau_max * i as f64 / (count - 1) as f64).collect()
}

/// `κ` as a float, for reports.
pub fn kappa_f64(k: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    k.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
pub(crate) fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
