//! Exponent arithmetic of the regularity bootstrap, in exact rationals.
//!
//! Starting from `u ∈ L^q` with `q = q₀`, the nonlinear term lies in `L^P`
//! with `P = q/(1+2κ)`; Sobolev embedding of `W^{2,P}` then yields `L^Q` with
//! `1/Q = 1/P − 2/n`, or any `Q ≤ ∞` once `1/P < 2/n`. The iteration is
//! `q ← Q` until `L^∞` is reached.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::nonlinearity::{classify_kappa, KappaClass, NonlinearityError};

#[derive(Debug, Error, PartialEq)]
pub enum BootstrapError {
    #[error(transparent)]
    Kappa(#[from] NonlinearityError),
    #[error("a bootstrap step needs n >= 2 (got {0})")]
    NoStepInDimension(u32),
    #[error("exponent q = {0} is below 2")]
    ExponentBelowTwo(BigRational),
    #[error("max_iter must be at least 1")]
    ZeroIterations,
    #[error("gain bound is only defined for admissible or critical kappa (got {0:?})")]
    NoGain(KappaClass),
    #[error("bootstrap is trivial in dimension 1")]
    TrivialDimension,
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ser_rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_rationals<S: Serializer>(qs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(|q| q.to_string()))
}

fn ser_opt_rational<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_str("inf"),
    }
}

/// `(n, κ, q)`; `q` is finite here, `L^∞` is represented by a `Done` outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapState {
    pub n: u32,
    #[serde(serialize_with = "ser_rational")]
    pub kappa: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub q: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    /// `n = 1`: nothing to bootstrap.
    Done,
    Start(BigRational),
}

/// `q₀ = 2 + 4κ` for `n = 2`, `2n/(n−2)` for `n ≥ 3`.
pub fn initial_exponent(n: u32, kappa: &BigRational) -> Result<Initial, BootstrapError> {
    if n == 0 {
        return Err(NonlinearityError::BadDimension.into());
    }
    if !kappa.is_positive() {
        return Err(NonlinearityError::NonPositiveKappa.into());
    }
    Ok(match n {
        1 => Initial::Done,
        2 => Initial::Start(r(2, 1) + r(4, 1) * kappa),
        _ => Initial::Start(r(2 * n as i64, n as i64 - 2)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    /// `1/P < 2/n`: any `Q`, in particular `∞`.
    Done { p: BigRational },
    /// `Q = q`: the recursion sits at a fixed point.
    Stalled { p: BigRational },
    /// Finite `Q ≠ q`. `borderline` marks `1/P = 2/n`, where the embedding
    /// gives every finite `Q` and the step takes `Q = 2q`.
    Next { p: BigRational, q_next: BigRational, borderline: bool },
}

pub fn step(state: &BootstrapState) -> Result<StepOutcome, BootstrapError> {
    let BootstrapState { n, kappa, q } = state;
    if *n < 2 {
        return Err(BootstrapError::NoStepInDimension(*n));
    }
    if *q < r(2, 1) {
        return Err(BootstrapError::ExponentBelowTwo(q.clone()));
    }
    let one = BigRational::one();
    let p = q / (&one + r(2, 1) * kappa);
    let inv_p = p.recip();
    let two_over_n = r(2, *n as i64);
    if inv_p < two_over_n {
        return Ok(StepOutcome::Done { p });
    }
    let inv_q = &inv_p - &two_over_n;
    if inv_q.is_zero() {
        return Ok(StepOutcome::Next { p, q_next: q * r(2, 1), borderline: true });
    }
    assert!(inv_q.is_positive(), "1/Q must be positive when 1/P >= 2/n");
    let q_next = inv_q.recip();
    if &q_next == q {
        return Ok(StepOutcome::Stalled { p });
    }
    Ok(StepOutcome::Next { p, q_next, borderline: false })
}

/// Lower bound on `1/q − 1/Q` valid along the whole trace.
pub fn gain_lower_bound(n: u32, kappa: &BigRational) -> Result<BigRational, BootstrapError> {
    let class = classify_kappa(n, kappa)?;
    if class == KappaClass::Inadmissible {
        return Err(BootstrapError::NoGain(class));
    }
    match n {
        1 => Err(BootstrapError::TrivialDimension),
        2 => Ok(BigRational::one() - r(2, 1) * kappa / (r(2, 1) + r(4, 1) * kappa)),
        _ => Ok(r(2, n as i64) - kappa * r(n as i64 - 2, n as i64)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BootstrapStatus {
    /// `L^∞` reached.
    Done,
    /// Fixed point `Q = q`.
    Stalled,
    MaxIter,
    /// `Q` dropped below 2, leaving the range of the induction hypothesis.
    Regressed,
}

impl fmt::Display for BootstrapStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BootstrapStatus::Done => "Done",
            BootstrapStatus::Stalled => "Stalled",
            BootstrapStatus::MaxIter => "MaxIter",
            BootstrapStatus::Regressed => "Regressed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    #[serde(serialize_with = "ser_rational")]
    pub q: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub p: BigRational,
    /// `None` is `Q = ∞`.
    #[serde(serialize_with = "ser_opt_rational")]
    pub q_next: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapTrace {
    pub n: u32,
    #[serde(serialize_with = "ser_rational")]
    pub kappa: BigRational,
    pub class: KappaClass,
    /// Exponents `q` visited, in order.
    #[serde(serialize_with = "ser_rationals")]
    pub states: Vec<BigRational>,
    pub steps: Vec<StepRecord>,
    pub status: BootstrapStatus,
    #[serde(serialize_with = "ser_opt_gain")]
    pub gain_bound: Option<BigRational>,
    /// `⌈(1/q₀)/gain⌉ + 1` for admissible κ.
    pub step_bound: Option<usize>,
}

fn ser_opt_gain<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

impl BootstrapTrace {
    /// CSV with columns `step,q,P,Q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,q,P,Q\n");
        for s in &self.steps {
            let qn = s.q_next.as_ref().map_or("inf".to_string(), |q| q.to_string());
            out.push_str(&format!("{},{},{},{}\n", s.step, s.q, s.p, qn));
        }
        out
    }

    pub fn states_f64(&self) -> Vec<f64> {
        self.states.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

fn ceil_ratio(x: &BigRational) -> usize {
    x.ceil().to_integer().to_usize().unwrap_or(usize::MAX)
}

/// Iterates [`step`] from [`initial_exponent`].
pub fn run(n: u32, kappa: &BigRational, max_iter: usize) -> Result<BootstrapTrace, BootstrapError> {
    if max_iter == 0 {
        return Err(BootstrapError::ZeroIterations);
    }
    let class = classify_kappa(n, kappa)?;
    let q0 = match initial_exponent(n, kappa)? {
        Initial::Done => {
            return Ok(BootstrapTrace {
                n,
                kappa: kappa.clone(),
                class,
                states: Vec::new(),
                steps: Vec::new(),
                status: BootstrapStatus::Done,
                gain_bound: None,
                step_bound: Some(0),
            })
        }
        Initial::Start(q0) => q0,
    };
    let gain_bound = gain_lower_bound(n, kappa).ok();
    let step_bound = match (&gain_bound, class) {
        (Some(g), KappaClass::Admissible) => Some(ceil_ratio(&(q0.recip() / g)) + 1),
        _ => None,
    };

    let mut trace = BootstrapTrace {
        n,
        kappa: kappa.clone(),
        class,
        states: Vec::new(),
        steps: Vec::new(),
        status: BootstrapStatus::MaxIter,
        gain_bound,
        step_bound,
    };
    let mut q = q0;
    for i in 0..max_iter {
        trace.states.push(q.clone());
        let state = BootstrapState { n, kappa: kappa.clone(), q: q.clone() };
        match step(&state)? {
            StepOutcome::Done { p } => {
                trace.steps.push(StepRecord { step: i, q, p, q_next: None });
                trace.status = BootstrapStatus::Done;
                return Ok(trace);
            }
            StepOutcome::Stalled { p } => {
                trace.steps.push(StepRecord { step: i, q: q.clone(), p, q_next: Some(q) });
                trace.status = BootstrapStatus::Stalled;
                return Ok(trace);
            }
            StepOutcome::Next { p, q_next, .. } => {
                trace.steps.push(StepRecord { step: i, q, p, q_next: Some(q_next.clone()) });
                if q_next < r(2, 1) {
                    trace.status = BootstrapStatus::Regressed;
                    return Ok(trace);
                }
                q = q_next;
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_exponents() {
        assert_eq!(initial_exponent(3, &r(1, 2)).unwrap(), Initial::Start(r(6, 1)));
        assert_eq!(initial_exponent(2, &r(1, 1)).unwrap(), Initial::Start(r(6, 1)));
        assert_eq!(initial_exponent(1, &r(5, 1)).unwrap(), Initial::Done);
        assert_eq!(initial_exponent(5, &r(1, 7)).unwrap(), Initial::Start(r(10, 3)));
        assert!(initial_exponent(3, &r(0, 1)).is_err());
    }

    #[test]
    fn single_step_done() {
        let s = BootstrapState { n: 3, kappa: r(1, 2), q: r(6, 1) };
        assert_eq!(step(&s).unwrap(), StepOutcome::Done { p: r(3, 1) });
    }

    #[test]
    fn two_step_trace() {
        let s = BootstrapState { n: 3, kappa: r(9, 5), q: r(6, 1) };
        assert_eq!(step(&s).unwrap(), StepOutcome::Next { p: r(30, 23), q_next: r(10, 1), borderline: false });
        let s = BootstrapState { q: r(10, 1), ..s };
        assert_eq!(step(&s).unwrap(), StepOutcome::Done { p: r(50, 23) });
        let t = run(3, &r(9, 5), 64).unwrap();
        assert_eq!(t.states, vec![r(6, 1), r(10, 1)]);
        assert_eq!(t.status, BootstrapStatus::Done);
    }

    #[test]
    fn critical_stalls() {
        let s = BootstrapState { n: 4, kappa: r(1, 1), q: r(4, 1) };
        assert_eq!(step(&s).unwrap(), StepOutcome::Stalled { p: r(4, 3) });
        let t = run(4, &r(1, 1), 64).unwrap();
        assert_eq!(t.states, vec![r(4, 1)]);
        assert_eq!(t.status, BootstrapStatus::Stalled);
        assert_eq!(t.class, KappaClass::Critical);
    }

    #[test]
    fn two_dimensions_finish_at_once() {
        let t = run(2, &r(3, 1), 8).unwrap();
        assert_eq!(t.states, vec![r(14, 1)]);
        assert_eq!(t.steps[0].p, r(2, 1));
        assert_eq!(t.status, BootstrapStatus::Done);
    }

    #[test]
    fn gain_bounds() {
        assert_eq!(gain_lower_bound(3, &r(9, 5)).unwrap(), r(1, 15));
        assert_eq!(gain_lower_bound(4, &r(1, 1)).unwrap(), r(0, 1));
        assert!(gain_lower_bound(2, &r(1000, 1)).unwrap() >= r(1, 2));
        assert!(matches!(gain_lower_bound(3, &r(3, 1)), Err(BootstrapError::NoGain(KappaClass::Inadmissible))));
    }

    #[test]
    fn borderline_step_takes_finite_q() {
        // n = 3, κ = 1/2, q = 9: P = 9/2, 1/P = 2/9 < 2/3 → done; pick data with 1/P = 2/n:
        // n = 4, κ = 1/2, q = 4: P = 2, 1/P = 1/2 = 2/4.
        let s = BootstrapState { n: 4, kappa: r(1, 2), q: r(4, 1) };
        assert_eq!(step(&s).unwrap(), StepOutcome::Next { p: r(2, 1), q_next: r(8, 1), borderline: true });
        let t = run(4, &r(1, 2), 8).unwrap();
        assert_eq!(t.states, vec![r(4, 1), r(8, 1)]);
        assert_eq!(t.status, BootstrapStatus::Done);
    }

    #[test]
    fn inadmissible_regresses_or_runs_out() {
        let t = run(3, &r(3, 1), 64).unwrap();
        assert_eq!(t.status, BootstrapStatus::Regressed);
        assert!(t.step_bound.is_none());
        let t = run(3, &r(21, 10), 2).unwrap();
        assert_eq!(t.status, BootstrapStatus::MaxIter);
    }

    #[test]
    fn dimension_one_is_trivial() {
        let t = run(1, &r(50, 1), 1).unwrap();
        assert!(t.states.is_empty());
        assert_eq!(t.status, BootstrapStatus::Done);
        assert!(step(&BootstrapState { n: 1, kappa: r(1, 1), q: r(2, 1) }).is_err());
        assert!(run(3, &r(1, 1), 0).is_err());
    }

    #[test]
    fn csv_and_json_export() {
        let t = run(3, &r(9, 5), 64).unwrap();
        assert_eq!(t.to_csv(), "step,q,P,Q\n0,6,30/23,10\n1,10,50/23,inf\n");
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["states"], serde_json::json!(["6", "10"]));
        assert_eq!(v["status"], "Done");
        assert_eq!(v["gain_bound"], "1/15");
    }
}
