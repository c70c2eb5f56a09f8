//! Numerical kernels: quadrature, Bessel functions, ODE integration,
//! shape preserving interpolation, root bracketing.

pub mod bessel;
pub mod ode;
pub mod pchip;
pub mod quad;

use crate::{Error, Result};

/// Bisection on a bracketing interval.
///
/// `f(a)` and `f(b)` must have opposite signs.  Iterates until the
/// bracket width falls below `tol` (absolute, caller scales it).
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidInput(format!(
            "bisect: no sign change on [{lo}, {hi}] (f: {flo}, {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
