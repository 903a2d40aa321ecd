//! Small numerical kernels shared by the radial solvers and the wave builder.

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Cubic Lagrange interpolation on uniform samples `y_i = y(x0 + i·h)`.
///
/// Uses the four nodes surrounding `x`; outside the table the end value is
/// returned for `x < x0` and zero beyond the last node (profiles decay).
pub fn lagrange4(y: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = y.len();
    if n == 0 {
        return 0.0;
    }
    let s = (x - x0) / h;
    if s <= 0.0 {
        return y[0];
    }
    if s >= (n - 1) as f64 {
        return if s - (n - 1) as f64 <= 1e-12 { y[n - 1] } else { 0.0 };
    }
    if n < 4 {
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        return y[i] * (1.0 - t) + y[i + 1] * t;
    }
    let i = (s.floor() as usize).clamp(1, n - 3) - 1;
    let t = s - i as f64;
    let (y0, y1, y2, y3) = (y[i], y[i + 1], y[i + 2], y[i + 3]);
    let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3
}

/// Refines a bracketed root with the Illinois variant of regula falsi,
/// falling back to bisection when the update stalls.
pub fn refine_root(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < tol {
            return Some(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol {
            return Some(0.5 * (a + b));
        }
    }
    Some(0.5 * (a + b))
}

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`
/// (`e[i]` couples rows `i` and `i+1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let off = if i == 0 { 0.0 } else { self.e[i - 1] * self.e[i - 1] };
            q = self.d[i] - x - if i == 0 { 0.0 } else { off / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.d[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.d.len() {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 } + self.e.get(i).map_or(0.0, |v| v.abs());
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
    pub fn eigenvalue(&self, k: usize, lo: f64, hi: f64, tol: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T − σ I) x = rhs` by the Thomas algorithm with partial
    /// regularization of tiny pivots.
    pub fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut denom = self.d[0] - sigma;
        let guard = |v: f64| if v.abs() < 1e-300 { 1e-300 } else { v };
        denom = guard(denom);
        if n > 1 {
            c[0] = self.e[0] / denom;
        }
        y[0] = rhs[0] / denom;
        for i in 1..n {
            denom = guard(self.d[i] - sigma - self.e[i - 1] * c[i - 1]);
            if i < n - 1 {
                c[i] = self.e[i] / denom;
            }
            y[i] = (rhs[i] - self.e[i - 1] * y[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        y
    }

    /// Eigenvector for an eigenvalue estimate by inverse iteration.
    pub fn eigenvector(&self, lambda: f64, iterations: usize) -> Vec<f64> {
        let n = self.d.len();
        let shift = lambda + 1e-10 * (1.0 + lambda.abs());
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64).collect();
        for _ in 0..iterations {
            x = self.solve_shifted(shift, &x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut x {
                *v /= norm;
            }
        }
        x
    }
}

/// Classical Richardson table for a sequence computed with steps `h, h/2, h/4, …`
/// whose error expands in even powers of `h`.
pub fn richardson_even(values: &[f64]) -> f64 {
    let mut table = values.to_vec();
    let mut factor = 4.0;
    for level in 1..values.len() {
        for i in (level..values.len()).rev() {
            table[i] = table[i] + (table[i] - table[i - 1]) / (factor - 1.0);
        }
        factor *= 4.0;
    }
    *table.last().unwrap_or(&f64::NAN)
}
