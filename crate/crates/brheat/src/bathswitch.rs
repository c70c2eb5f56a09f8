//! Isochoric bath switching: when D jumps (linearly over a window tau)
//! at fixed frequency, the position and momentum variances at the end
//! of the window are exact mixtures of the old and new steady states.
//! The mixing fractions alpha (position sector) and beta (momentum
//! sector) have closed forms built from a single exponential-average
//! function; their average defines the regenerator loss mu fed to the
//! efficiency module.

use crate::core::{Oscillator, SecondMoments};
use crate::dynamics::fundamental_constant;
use crate::num::quad::integrate;
use crate::{Error, Result};

/// Memory fractions of a switching window and the resulting loss
/// parameter mu_neq = 1 - (alpha + beta)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationSummary {
    pub alpha_q: f64,
    pub beta_p: f64,
    pub mu_neq: f64,
}

impl DissipationSummary {
    /// Requires 0 <= beta <= alpha <= 1 up to 1e-12 of rounding slack;
    /// stores values clamped into [0, 1].
    pub fn new(alpha_q: f64, beta_p: f64) -> Result<Self> {
        let tol = 1e-12;
        if !(alpha_q >= -tol && alpha_q <= 1.0 + tol && beta_p >= -tol && beta_p <= alpha_q + tol) {
            return Err(Error::InvalidInput(format!(
                "memory fractions outside 0 <= beta <= alpha <= 1: alpha={alpha_q}, beta={beta_p}"
            )));
        }
        let a = alpha_q.clamp(0.0, 1.0);
        let b = beta_p.clamp(0.0, a);
        Ok(DissipationSummary { alpha_q: a, beta_p: b, mu_neq: 1.0 - 0.5 * (a + b) })
    }
}

/// E(z) = (1 - e^{-2z})/(2z), the mean of e^{-2 z t} over t in [0, 1];
/// E(0) = 1.
fn exp_mean(z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    -(-2.0 * z).exp_m1() / (2.0 * z)
}

/// mbar e^{-2 mbar} (sinh h / h)^2 with h^2 passed signed (negative
/// means the trigonometric branch), arranged to never overflow even
/// though sinh(h) alone would.
fn echo_term(mbar: f64, h2: f64) -> f64 {
    if h2 > 1e-8 {
        let h = h2.sqrt();
        let g = (h - mbar).exp() * (-(-2.0 * h).exp_m1()) / (2.0 * h);
        mbar * g * g
    } else if h2 < -1e-8 {
        let w = (-h2).sqrt();
        let s = w.sin() / w;
        mbar * (-2.0 * mbar).exp() * s * s
    } else {
        let s = 1.0 + h2 * (1.0 / 3.0 + h2 * (2.0 / 45.0 + h2 / 315.0));
        mbar * (-2.0 * mbar).exp() * s
    }
}

/// M_n(z) = integral of t^n e^{-2 z t} over [0, 1].
fn power_exp_mean(n: usize, z: f64) -> f64 {
    if z < 1.0 {
        let mut term = 1.0;
        let mut sum = 1.0 / (n as f64 + 1.0);
        for k in 1..200 {
            term *= -2.0 * z / k as f64;
            let add = term / ((n + k + 1) as f64);
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-30) {
                break;
            }
        }
        sum
    } else {
        let e = (-2.0 * z).exp();
        let mut m = exp_mean(z);
        for j in 1..=n {
            m = (j as f64 * m - e) / (2.0 * z);
        }
        m
    }
}

/// Symmetric divided difference (E(y) - E(x))/(x - y) at x = mbar + h,
/// y = mbar - h, with h^2 signed.  Always positive, which is what makes
/// alpha > beta.  Near-confluent arguments go through the Taylor form
/// in h^2; complex-conjugate pairs (underdamped) use the explicitly
/// real expression.
fn exp_mean_slope(mbar: f64, h2: f64) -> f64 {
    let sep = 2.0 * h2.abs().sqrt();
    if sep <= 0.02 * (1.0 + mbar) {
        let m1 = power_exp_mean(1, mbar);
        let m3 = power_exp_mean(3, mbar);
        let m5 = power_exp_mean(5, mbar);
        let m7 = power_exp_mean(7, mbar);
        return 2.0 * (m1 + h2 * (2.0 / 3.0 * m3 + h2 * (2.0 / 15.0 * m5 + h2 * 4.0 / 315.0 * m7)));
    }
    if h2 > 0.0 {
        let h = h2.sqrt();
        (exp_mean(mbar - h) - exp_mean(mbar + h)) / (2.0 * h)
    } else {
        let w = (-h2).sqrt();
        let p = 1.0 - (-2.0 * mbar).exp() * (2.0 * w).cos();
        let q = (-2.0 * mbar).exp() * (2.0 * w).sin();
        (p * w - q * mbar) / (2.0 * w * (mbar * mbar + w * w))
    }
}

/// Closed-form memory fractions for a linear noise switch of window
/// tau at fixed (kappa, omega); continuous through critical damping.
pub fn alpha_beta_closed(kappa: f64, omega: f64, tau: f64) -> Result<DissipationSummary> {
    if !(kappa > 0.0 && omega > 0.0 && tau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need kappa, omega, tau > 0, got {kappa}, {omega}, {tau}"
        )));
    }
    let mbar = kappa * tau;
    let h2 = (kappa * kappa - omega * omega) * tau * tau;
    let beta = exp_mean(mbar) - echo_term(mbar, h2);
    let alpha = beta + 2.0 * mbar * exp_mean_slope(mbar, h2);
    DissipationSummary::new(alpha, beta)
}

/// Memory fractions from direct quadrature of the fundamental-matrix
/// averages over the trailing window [t - tau, t]:
/// alpha(t) averages u^2 + m^2 w^2 v^2, beta(t) averages
/// udot^2/w^2 + m^2 vdot^2.  At t = tau this reproduces the closed
/// forms; beyond it both decay to zero.
pub fn alpha_beta_quadrature(kappa: f64, omega: f64, tau: f64, t: f64) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && omega > 0.0 && tau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need kappa, omega, tau > 0, got {kappa}, {omega}, {tau}"
        )));
    }
    if !(t >= tau) {
        return Err(Error::InvalidInput(format!("window not yet full: t = {t} < tau = {tau}")));
    }
    // u, m w v, udot/w, m vdot are all mass-free combinations.
    let osc = Oscillator::new(1.0, kappa)?;
    let fa = |s: f64| {
        let f = fundamental_constant(&osc, omega, s).expect("s >= 0");
        f.u * f.u + omega * omega * f.v * f.v
    };
    let fb = |s: f64| {
        let f = fundamental_constant(&osc, omega, s).expect("s >= 0");
        f.udot * f.udot / (omega * omega) + f.vdot * f.vdot
    };
    let alpha = integrate(fa, t - tau, t, 1e-11, 1e-16 * tau)?.value / tau;
    let beta = integrate(fb, t - tau, t, 1e-11, 1e-16 * tau)?.value / tau;
    Ok((alpha, beta))
}

/// Window-averaged moments as the exact two-state mixture: when the
/// bath is switched between stationary states of the same oscillator
/// at the same frequency, the time average of q^2 (p^2) over the
/// window is the alpha (beta) blend of the two plateaus.  The cross
/// moment vanishes in both plateaus and averages to zero at this
/// level of description.
pub fn interp_moments(
    initial: &SecondMoments,
    final_state: &SecondMoments,
    summary: &DissipationSummary,
) -> SecondMoments {
    SecondMoments {
        q2: summary.alpha_q * initial.q2 + (1.0 - summary.alpha_q) * final_state.q2,
        qp: 0.0,
        p2: summary.beta_p * initial.p2 + (1.0 - summary.beta_p) * final_state.p2,
    }
}

/// Which asymptotic family of the closed forms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingRegime {
    Overdamped,
    Underdamped,
}

/// Limiting forms: overdamped alpha = E(w^2 tau/2k), beta = E(2 k tau);
/// underdamped alpha = 1 - k tau (1 - sinc^2), beta = 1 - k tau
/// (1 + sinc^2) with sinc = sin(w tau)/(w tau).  Quoted accuracy ~1%
/// for kappa/omega beyond ~30 (or below ~1/30) with kappa tau <~ 0.1
/// on the underdamped side.
pub fn asymptotic_summary(
    kappa: f64,
    omega: f64,
    tau: f64,
    regime: DampingRegime,
) -> Result<DissipationSummary> {
    if !(kappa > 0.0 && omega > 0.0 && tau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need kappa, omega, tau > 0, got {kappa}, {omega}, {tau}"
        )));
    }
    let (alpha, beta) = match regime {
        DampingRegime::Overdamped => {
            (exp_mean(omega * omega * tau / (2.0 * kappa)), exp_mean(2.0 * kappa * tau))
        }
        DampingRegime::Underdamped => {
            let s = (omega * tau).sin() / (omega * tau);
            (1.0 - kappa * tau * (1.0 - s * s), 1.0 - kappa * tau * (1.0 + s * s))
        }
    };
    DissipationSummary::new(alpha, beta).map_err(|_| {
        Error::OutOfRange(format!(
            "asymptotic form left [0,1] at kappa={kappa}, omega={omega}, tau={tau}; outside its validity range"
        ))
    })
}
