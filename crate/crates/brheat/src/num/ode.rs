//! Adaptive Dormand-Prince 5(4) integrator over fixed-size state vectors.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeControl {
    /// Relative tolerance on the local error.
    pub rtol: f64,
    /// Absolute tolerance floor.
    pub atol: f64,
    /// Hard cap on the step size (defaults to unbounded).
    pub h_max: f64,
    /// Abort after this many accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for OdeControl {
    fn default() -> Self {
        OdeControl { rtol: 1e-10, atol: 1e-12, h_max: f64::INFINITY, max_steps: 20_000_000 }
    }
}

// Dormand-Prince coefficients. The last stage row doubles as the 5th
// order weights (FSAL).
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
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One trial step. Returns (y5, local error vector, k7) where k7 is
/// the FSAL derivative at the new point.
pub(crate) fn dopri5_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    let k2 = rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = rhs(
        t + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y5 = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs(t + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err, k7)
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], ctrl: &OdeControl) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = ctrl.atol + ctrl.rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        s += r * r;
    }
    (s / N as f64).sqrt()
}

/// Integrate from `t0` to `t_end`, reporting the state at every time in
/// `t_out` (must be ascending, within [t0, t_end]; steps land on each
/// output time exactly, no interpolation).
pub fn integrate_path<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_out: &[f64],
    ctrl: &OdeControl,
) -> Result<Vec<[f64; N]>> {
    if t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("output times must be ascending".into()));
    }
    if let Some(&first) = t_out.first() {
        if first < t0 {
            return Err(Error::InvalidInput("output before start time".into()));
        }
    }
    let t_end = *t_out.last().unwrap_or(&t0);
    let mut out = Vec::with_capacity(t_out.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(t_out.iter().map(|_| y0).collect());
    }
    let mut h = (span * 1e-4).min(ctrl.h_max);
    let mut next_out = 0;
    while next_out < t_out.len() && t_out[next_out] <= t {
        out.push(y);
        next_out += 1;
    }
    let mut steps = 0;
    while next_out < t_out.len() {
        if steps >= ctrl.max_steps {
            return Err(Error::OdeFailed(format!(
                "step budget {} exhausted at t = {t:.6e} (span {span:.3e}); likely stiff, consider a larger tolerance or shorter horizon",
                ctrl.max_steps
            )));
        }
        steps += 1;
        let target = t_out[next_out];
        let mut h_try = h.min(ctrl.h_max).min(target - t);
        if h_try <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            h_try = 16.0 * f64::EPSILON * t.abs().max(1.0);
        }
        let (y5, errv, k7) = dopri5_step(&rhs, t, &y, &k1, h_try);
        let err = error_norm(&errv, &y, &y5, ctrl);
        if err <= 1.0 {
            t += h_try;
            y = y5;
            k1 = k7;
            if t >= target {
                out.push(y);
                next_out += 1;
                while next_out < t_out.len() && t_out[next_out] <= t {
                    out.push(y);
                    next_out += 1;
                }
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h_try * factor).min(ctrl.h_max);
        if !h.is_finite() || h <= f64::MIN_POSITIVE * 1e4 {
            return Err(Error::OdeFailed(format!("step size collapsed at t = {t:.6e}")));
        }
    }
    Ok(out)
}

/// Endpoint-only convenience wrapper.
pub fn integrate_to<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    ctrl: &OdeControl,
) -> Result<[f64; N]> {
    Ok(integrate_path(rhs, t0, y0, &[t_end], ctrl)?.pop().expect("one output requested"))
}
