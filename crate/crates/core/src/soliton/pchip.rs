//! Shape-preserving piecewise-cubic Hermite interpolation on strictly
//! increasing knots.
//!
//! Knot slopes come from the derivative of the quartic through the five
//! nearest knots (fourth-order on smooth data), then pass through the
//! Fritsch–Carlson limiter so each interval stays monotone.

pub const RULE: &str = "hermite-cubic/5pt-slopes/fritsch-carlson";

fn lagrange_derivative(xs: &[f64], ys: &[f64], at: usize) -> f64 {
    // d/dx of the interpolating polynomial at xs[at]
    let x0 = xs[at];
    let mut d = 0.0;
    for j in 0..xs.len() {
        if j == at {
            let s: f64 = (0..xs.len()).filter(|&k| k != at).map(|k| 1.0 / (x0 - xs[k])).sum();
            d += ys[j] * s;
        } else {
            let mut l = 1.0 / (xs[j] - xs[at]);
            for k in 0..xs.len() {
                if k != j && k != at {
                    l *= (x0 - xs[k]) / (xs[j] - xs[k]);
                }
            }
            d += ys[j] * l;
        }
    }
    d
}

/// Limited slopes for strictly increasing `x`.
pub fn slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n.saturating_sub(5));
            let hi = (lo + 5).min(n);
            lagrange_derivative(&x[lo..hi], &y[lo..hi], i - lo)
        })
        .collect();
    for i in 0..n {
        let left = if i > 0 { Some(delta[i - 1]) } else { None };
        let right = delta.get(i).copied();
        let bad = [left, right].iter().flatten().any(|&s| s == 0.0 || s.signum() != d[i].signum());
        if bad {
            d[i] = 0.0;
        }
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            d[k] = 0.0;
            d[k + 1] = 0.0;
            continue;
        }
        let a = d[k] / delta[k];
        let b = d[k + 1] / delta[k];
        let s = a * a + b * b;
        if s > 9.0 {
            let t = 3.0 / s.sqrt();
            d[k] = t * a * delta[k];
            d[k + 1] = t * b * delta[k];
        }
    }
    d
}

/// Evaluates the Hermite cubic; `t` must lie within `[x_0, x_{n−1}]`.
pub fn eval(x: &[f64], y: &[f64], d: &[f64], t: f64) -> f64 {
    let n = x.len();
    if n == 1 {
        return y[0];
    }
    let k = match x.binary_search_by(|p| p.total_cmp(&t)) {
        Ok(i) => return y[i],
        Err(i) => i.clamp(1, n - 1) - 1,
    };
    let h = x[k + 1] - x[k];
    let s = (t - x[k]) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y[k] + h10 * h * d[k] + h01 * y[k + 1] + h11 * h * d[k + 1]
}
