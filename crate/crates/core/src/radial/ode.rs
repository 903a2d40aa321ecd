//! Adaptive Dormand–Prince 5(4) integrator for small real systems.

/// Step-size controller state carried across calls so that node-to-node
/// integration does not restart from a tiny step each time.
#[derive(Debug, Clone, Copy)]
pub struct Rk45 {
    pub rtol: f64,
    /// Absolute floor relative to the running solution magnitude.
    pub atol: f64,
    pub h: f64,
    pub max_steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error weights: fifth-order minus embedded fourth-order
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepLimit;

impl Rk45 {
    pub fn new(rtol: f64, h0: f64) -> Self {
        Self { rtol, atol: 1e-300, h: h0, max_steps: 1_000_000 }
    }

    /// Advances `y` from `x0` to `x1` (either direction).
    pub fn integrate<const N: usize>(
        &mut self,
        f: &impl Fn(f64, &[f64; N]) -> [f64; N],
        x0: f64,
        x1: f64,
        y: &mut [f64; N],
    ) -> Result<(), StepLimit> {
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let span = (x1 - x0).abs();
        if span == 0.0 {
            return Ok(());
        }
        let mut x = x0;
        let mut h = self.h.abs().min(span).max(span * 1e-12);
        let mut k1 = f(x, y);
        let mut steps = 0;
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= span * 1e-14 {
                break;
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h } * dir;
            let stage = |coef: &[(f64, &[f64; N])]| {
                let mut out = *y;
                for (c, k) in coef {
                    for i in 0..N {
                        out[i] += hs * c * k[i];
                    }
                }
                out
            };
            let k2 = f(x + C2 * hs, &stage(&[(A21, &k1)]));
            let k3 = f(x + C3 * hs, &stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * hs, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(x + C5 * hs, &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(x + hs, &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(x + hs, &y_new);
            let scale = y.iter().chain(y_new.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
            let mut err = 0.0f64;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err = err.max(e.abs());
            }
            let tol = self.atol + self.rtol * scale;
            let ratio = err / tol;
            if ratio <= 1.0 || hs.abs() <= span * 1e-12 {
                x = if last { x1 } else { x + hs };
                *y = y_new;
                k1 = k7;
                if !last {
                    self.h = h;
                }
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if ratio <= 1.0 && last {
                break;
            }
            steps += 1;
            if steps > self.max_steps {
                return Err(StepLimit);
            }
        }
        Ok(())
    }
}
