//! Propagation of the Gaussian state under time-dependent omega(t) and
//! D(t): closed-form fundamental matrices where the homogeneous
//! equation is solvable (constant frequency, linear and exponential
//! ramps of omega^2), quadrature-based variance propagation on top of
//! them, and a direct ODE integrator for the moment system as the
//! all-purpose cross-check.

use crate::core::{Oscillator, SecondMoments};
use crate::num::ode::{integrate_path, OdeControl};
use crate::num::pchip::Pchip;
use crate::num::quad::integrate_vec;
use crate::{Error, Result};

/// Columns of the homogeneous solution matrix at one instant:
/// q(t) = u q0 + v p0, p(t) = m udot q0 + m vdot p0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix {
    pub u: f64,
    pub v: f64,
    pub udot: f64,
    pub vdot: f64,
}

impl FundamentalMatrix {
    pub fn identity(mass: f64) -> Self {
        FundamentalMatrix { u: 1.0, v: 0.0, udot: 0.0, vdot: 1.0 / mass }
    }

    /// The 2x2 matrix in (q, p) coordinates.
    pub fn matrix(&self, mass: f64) -> [[f64; 2]; 2] {
        [[self.u, self.v], [mass * self.udot, mass * self.vdot]]
    }

    /// m (u vdot - v udot); equals e^{-2 kappa t} for a true solution.
    pub fn wronskian(&self, mass: f64) -> f64 {
        mass * (self.u * self.vdot - self.v * self.udot)
    }
}

/// Which evaluation path produced a fundamental matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionRoute {
    Closed,
    Numeric,
}

/// Frequency protocol omega(t).  Ramps are parametrized by the initial
/// frequency, a dimensionless rate r, and the ramp duration tau_r:
/// linear means omega^2(t) = omega0^2 (1 + r t/tau_r), exponential
/// means omega^2(t) = omega0^2 exp(r t/tau_r).  Outside [0, tau_r] the
/// schedule continues at its boundary value.
#[derive(Debug, Clone)]
pub enum FrequencySchedule {
    Constant { omega0: f64 },
    LinearRamp { omega0: f64, rate: f64, ramp_duration: f64 },
    ExponentialRamp { omega0: f64, rate: f64, ramp_duration: f64 },
    Tabulated(Pchip),
}

impl FrequencySchedule {
    pub fn constant(omega0: f64) -> Result<Self> {
        if !(omega0 > 0.0) {
            return Err(Error::InvalidInput(format!("frequency must be positive, got {omega0}")));
        }
        Ok(FrequencySchedule::Constant { omega0 })
    }

    pub fn linear_ramp(omega0: f64, rate: f64, ramp_duration: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !(ramp_duration > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bad linear ramp: omega0={omega0}, rate={rate}, ramp_duration={ramp_duration}"
            )));
        }
        // omega^2 stays positive on [0, tau_r] iff 1 + r > 0.
        if 1.0 + rate <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "linear ramp reaches omega^2 <= 0 (rate {rate} <= -1)"
            )));
        }
        Ok(FrequencySchedule::LinearRamp { omega0, rate, ramp_duration })
    }

    pub fn exponential_ramp(omega0: f64, rate: f64, ramp_duration: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !(ramp_duration > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bad exponential ramp: omega0={omega0}, rate={rate}, ramp_duration={ramp_duration}"
            )));
        }
        Ok(FrequencySchedule::ExponentialRamp { omega0, rate, ramp_duration })
    }

    pub fn tabulated(ts: Vec<f64>, omegas: Vec<f64>) -> Result<Self> {
        if omegas.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidInput("tabulated frequencies must be positive".into()));
        }
        Ok(FrequencySchedule::Tabulated(Pchip::new(ts, omegas)?))
    }

    pub fn omega(&self, t: f64) -> f64 {
        match self {
            FrequencySchedule::Constant { omega0 } => *omega0,
            FrequencySchedule::LinearRamp { omega0, rate, ramp_duration } => {
                let s = t.clamp(0.0, *ramp_duration);
                omega0 * (1.0 + rate * s / ramp_duration).sqrt()
            }
            FrequencySchedule::ExponentialRamp { omega0, rate, ramp_duration } => {
                let s = t.clamp(0.0, *ramp_duration);
                omega0 * (0.5 * rate * s / ramp_duration).exp()
            }
            FrequencySchedule::Tabulated(p) => p.eval(t),
        }
    }

    pub fn omega_sq(&self, t: f64) -> f64 {
        match self {
            FrequencySchedule::Tabulated(p) => {
                let w = p.eval(t);
                w * w
            }
            FrequencySchedule::Constant { omega0 } => omega0 * omega0,
            FrequencySchedule::LinearRamp { omega0, rate, ramp_duration } => {
                let s = t.clamp(0.0, *ramp_duration);
                omega0 * omega0 * (1.0 + rate * s / ramp_duration)
            }
            FrequencySchedule::ExponentialRamp { omega0, rate, ramp_duration } => {
                let s = t.clamp(0.0, *ramp_duration);
                omega0 * omega0 * (rate * s / ramp_duration).exp()
            }
        }
    }

    /// d omega/dt; zero outside the ramp window where the schedule is
    /// flat.
    pub fn omega_dot(&self, t: f64) -> f64 {
        match self {
            FrequencySchedule::Constant { .. } => 0.0,
            FrequencySchedule::LinearRamp { omega0, rate, ramp_duration } => {
                if t < 0.0 || t > *ramp_duration {
                    return 0.0;
                }
                omega0 * omega0 * rate / (2.0 * ramp_duration * self.omega(t))
            }
            FrequencySchedule::ExponentialRamp { rate, ramp_duration, .. } => {
                if t < 0.0 || t > *ramp_duration {
                    return 0.0;
                }
                self.omega(t) * 0.5 * rate / ramp_duration
            }
            FrequencySchedule::Tabulated(p) => p.deriv(t),
        }
    }

    /// Time span over which the schedule actually varies, if any.
    pub fn duration(&self) -> Option<f64> {
        match self {
            FrequencySchedule::Constant { .. } => None,
            FrequencySchedule::LinearRamp { ramp_duration, .. }
            | FrequencySchedule::ExponentialRamp { ramp_duration, .. } => Some(*ramp_duration),
            FrequencySchedule::Tabulated(p) => Some(p.range().1),
        }
    }
}

/// Noise-strength protocol D(t), same clamping convention as the
/// frequency schedule.  D = 0 is allowed (noise-free propagation).
#[derive(Debug, Clone)]
pub enum DiffusionSchedule {
    Constant { d0: f64 },
    LinearRamp { d0: f64, d1: f64, ramp_duration: f64 },
    Tabulated(Pchip),
}

impl DiffusionSchedule {
    pub fn constant(d0: f64) -> Result<Self> {
        if !(d0 >= 0.0) {
            return Err(Error::InvalidInput(format!("noise strength must be non-negative, got {d0}")));
        }
        Ok(DiffusionSchedule::Constant { d0 })
    }

    pub fn linear_ramp(d0: f64, d1: f64, ramp_duration: f64) -> Result<Self> {
        if !(d0 >= 0.0) || !(d1 >= 0.0) || !(ramp_duration > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bad noise ramp: d0={d0}, d1={d1}, ramp_duration={ramp_duration}"
            )));
        }
        Ok(DiffusionSchedule::LinearRamp { d0, d1, ramp_duration })
    }

    pub fn tabulated(ts: Vec<f64>, ds: Vec<f64>) -> Result<Self> {
        if ds.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::InvalidInput("tabulated noise strengths must be non-negative".into()));
        }
        Ok(DiffusionSchedule::Tabulated(Pchip::new(ts, ds)?))
    }

    pub fn d(&self, t: f64) -> f64 {
        match self {
            DiffusionSchedule::Constant { d0 } => *d0,
            DiffusionSchedule::LinearRamp { d0, d1, ramp_duration } => {
                let s = t.clamp(0.0, *ramp_duration);
                d0 + (d1 - d0) * s / ramp_duration
            }
            DiffusionSchedule::Tabulated(p) => p.eval(t),
        }
    }

    pub fn d_dot(&self, t: f64) -> f64 {
        match self {
            DiffusionSchedule::Constant { .. } => 0.0,
            DiffusionSchedule::LinearRamp { d0, d1, ramp_duration } => {
                if t < 0.0 || t > *ramp_duration {
                    0.0
                } else {
                    (d1 - d0) / ramp_duration
                }
            }
            DiffusionSchedule::Tabulated(p) => p.deriv(t),
        }
    }

    /// Time span over which the schedule actually varies, if any.
    pub fn duration(&self) -> Option<f64> {
        match self {
            DiffusionSchedule::Constant { .. } => None,
            DiffusionSchedule::LinearRamp { ramp_duration, .. } => Some(*ramp_duration),
            DiffusionSchedule::Tabulated(p) => Some(p.range().1),
        }
    }
}

/// cosh-like and sinh-like pair for q'' + 2k q' + w^2 q = 0 written in
/// the single variable s = k^2 - w^2: C = cosh(sqrt(s) t) and
/// S = sinh(sqrt(s) t)/sqrt(s), which continue through s <= 0 as
/// cos/sin and meet at the critical point via the series.
fn cosh_sinh_like(s: f64, t: f64) -> (f64, f64) {
    let st2 = s * t * t;
    if st2.abs() < 1e-4 {
        // C = 1 + s t^2/2 + s^2 t^4/24 + s^3 t^6/720, S/t likewise;
        // next omitted term is below 1e-18 at |s t^2| = 1e-4.
        let c = 1.0 + st2 * (0.5 + st2 * (1.0 / 24.0 + st2 / 720.0));
        let sl = t * (1.0 + st2 * (1.0 / 6.0 + st2 * (1.0 / 120.0 + st2 / 5040.0)));
        (c, sl)
    } else if s > 0.0 {
        let h = s.sqrt();
        (f64::cosh(h * t), f64::sinh(h * t) / h)
    } else {
        let w = (-s).sqrt();
        (f64::cos(w * t), f64::sin(w * t) / w)
    }
}

/// Fundamental matrix at constant frequency, all damping regimes in
/// one expression through the cosh/cos pair.
pub fn fundamental_constant(osc: &Oscillator, omega: f64, t: f64) -> Result<FundamentalMatrix> {
    if !(omega > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("need omega > 0 and t >= 0, got {omega}, {t}")));
    }
    let k = osc.kappa;
    let s = k * k - omega * omega;
    let (c, sl) = cosh_sinh_like(s, t);
    let e = (-k * t).exp();
    Ok(FundamentalMatrix {
        u: e * (c + k * sl),
        v: e * sl / osc.mass,
        udot: -omega * omega * e * sl,
        vdot: e * (c - k * sl) / osc.mass,
    })
}

/// Homogeneous system for both columns at once:
/// y = [u, udot, v, vdot].
fn homogeneous_rhs<'a>(
    osc: &'a Oscillator,
    sched: &'a FrequencySchedule,
) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + 'a {
    let k2 = 2.0 * osc.kappa;
    move |t, y| {
        let w2 = sched.omega_sq(t);
        [y[1], -k2 * y[1] - w2 * y[0], y[3], -k2 * y[3] - w2 * y[2]]
    }
}

fn fundamental_numeric(osc: &Oscillator, sched: &FrequencySchedule, t: f64) -> Result<FundamentalMatrix> {
    let y0 = [1.0, 0.0, 0.0, 1.0 / osc.mass];
    let ctrl = OdeControl { rtol: 1e-12, atol: 1e-14, ..OdeControl::default() };
    let y = crate::num::ode::integrate_to(homogeneous_rhs(osc, sched), 0.0, y0, t, &ctrl)?;
    Ok(FundamentalMatrix { u: y[0], udot: y[1], v: y[2], vdot: y[3] })
}

/// Builds u, v from any independent solution pair (f+, f-) of the
/// homogeneous equation, given values and derivatives at 0 and t.
fn assemble_from_pair(mass: f64, f0: [f64; 4], ft: [f64; 4]) -> Option<FundamentalMatrix> {
    let [fp0, fpd0, fm0, fmd0] = f0;
    let [fpt, fpdt, fmt, fmdt] = ft;
    let w0 = fp0 * fmd0 - fm0 * fpd0;
    if !w0.is_finite() || w0.abs() < 1e-280 {
        return None;
    }
    let m = FundamentalMatrix {
        u: (fmd0 * fpt - fpd0 * fmt) / w0,
        udot: (fmd0 * fpdt - fpd0 * fmdt) / w0,
        v: (fp0 * fmt - fm0 * fpt) / (mass * w0),
        vdot: (fp0 * fmdt - fm0 * fpdt) / (mass * w0),
    };
    [m.u, m.v, m.udot, m.vdot].iter().all(|x| x.is_finite()).then_some(m)
}

/// Fundamental matrix for omega^2(t) = omega0^2 (1 + r t/tau_r) via
/// order 1/3 Bessel functions; falls back to direct integration where
/// the closed form leaves its validated domain (r <= 0, kappa >=
/// omega0, or Bessel arguments out of range).
pub fn fundamental_linear_ramp(osc: &Oscillator, sched: &FrequencySchedule, t: f64) -> Result<FundamentalMatrix> {
    Ok(fundamental_linear_ramp_with_route(osc, sched, t)?.0)
}

pub fn fundamental_linear_ramp_with_route(
    osc: &Oscillator,
    sched: &FrequencySchedule,
    t: f64,
) -> Result<(FundamentalMatrix, SolutionRoute)> {
    let FrequencySchedule::LinearRamp { omega0, rate, ramp_duration } = sched else {
        return Err(Error::InvalidInput("schedule is not a linear ramp".into()));
    };
    let (w0, r, tau_r) = (*omega0, *rate, *ramp_duration);
    if !(0.0..=tau_r).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} outside the ramp [0, {tau_r}]")));
    }
    let closed = || -> Option<FundamentalMatrix> {
        if r <= 0.0 || osc.kappa >= w0 {
            return None;
        }
        let a = (1.0 - osc.kappa * osc.kappa / (w0 * w0)) * tau_r / r;
        let b = w0 * w0 * r / tau_r;
        let zeta_max = 2.0 / 3.0 * b.sqrt() * (t + a).powf(1.5);
        if zeta_max > 1e4 {
            return None;
        }
        let f_pair = |tt: f64| -> Option<[f64; 4]> {
            let ta = tt + a;
            let zeta = 2.0 / 3.0 * b.sqrt() * ta.powf(1.5);
            let e = (-osc.kappa * tt).exp();
            let sq = ta.sqrt();
            let mut out = [0.0; 4];
            for (i, nu) in [(0usize, 1.0 / 3.0), (2usize, -1.0 / 3.0)] {
                let jv = crate::num::bessel::j(nu, zeta).ok()?;
                let jd = crate::num::bessel::j_deriv(nu, zeta).ok()?;
                out[i] = e * sq * jv;
                out[i + 1] = e * (-osc.kappa * sq * jv + 0.5 * jv / sq + b.sqrt() * ta * jd);
            }
            Some(out)
        };
        assemble_from_pair(osc.mass, f_pair(0.0)?, f_pair(t)?)
    };
    match closed() {
        Some(m) => Ok((m, SolutionRoute::Closed)),
        None => Ok((fundamental_numeric(osc, sched, t)?, SolutionRoute::Numeric)),
    }
}

/// Fundamental matrix for omega^2(t) = omega0^2 exp(r t/tau_r) via
/// Bessel functions of order kappa/|lambda|, lambda = r/(2 tau_r).
/// Near-integer orders switch the second solution to Y; anything
/// outside the validated Bessel domain falls back to integration.
pub fn fundamental_exponential_ramp(osc: &Oscillator, sched: &FrequencySchedule, t: f64) -> Result<FundamentalMatrix> {
    Ok(fundamental_exponential_ramp_with_route(osc, sched, t)?.0)
}

pub fn fundamental_exponential_ramp_with_route(
    osc: &Oscillator,
    sched: &FrequencySchedule,
    t: f64,
) -> Result<(FundamentalMatrix, SolutionRoute)> {
    let FrequencySchedule::ExponentialRamp { omega0, rate, ramp_duration } = sched else {
        return Err(Error::InvalidInput("schedule is not an exponential ramp".into()));
    };
    let (w0, r, tau_r) = (*omega0, *rate, *ramp_duration);
    if !(0.0..=tau_r).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} outside the ramp [0, {tau_r}]")));
    }
    if r == 0.0 {
        return Ok((fundamental_constant(osc, w0, t)?, SolutionRoute::Closed));
    }
    let lambda = 0.5 * r / tau_r;
    let alpha = osc.kappa / lambda.abs();
    let z = |tt: f64| (w0 / lambda.abs()) * (lambda * tt).exp();
    let closed = || -> Option<FundamentalMatrix> {
        if alpha > 200.0 || z(0.0) > 1e4 || z(t) > 1e4 {
            return None;
        }
        let second_is_y = (alpha - alpha.round()).abs() < 1e-9;
        let f_pair = |tt: f64| -> Option<[f64; 4]> {
            let zz = z(tt);
            let e = (-osc.kappa * tt).exp();
            let (fp, fpd) = {
                let jv = crate::num::bessel::j(alpha, zz).ok()?;
                let jd = crate::num::bessel::j_deriv(alpha, zz).ok()?;
                (e * jv, e * (-osc.kappa * jv + lambda * zz * jd))
            };
            let (fm, fmd) = if second_is_y {
                let yv = crate::num::bessel::y(alpha, zz).ok()?;
                let yd = crate::num::bessel::y_deriv(alpha, zz).ok()?;
                (e * yv, e * (-osc.kappa * yv + lambda * zz * yd))
            } else {
                let jv = crate::num::bessel::j(-alpha, zz).ok()?;
                let jd = crate::num::bessel::j_deriv(-alpha, zz).ok()?;
                (e * jv, e * (-osc.kappa * jv + lambda * zz * jd))
            };
            Some([fp, fpd, fm, fmd])
        };
        assemble_from_pair(osc.mass, f_pair(0.0)?, f_pair(t)?)
    };
    match closed() {
        Some(m) => Ok((m, SolutionRoute::Closed)),
        None => Ok((fundamental_numeric(osc, sched, t)?, SolutionRoute::Numeric)),
    }
}

/// J_nu(x) for real order within the validated window.
pub fn bessel_j_real_order(nu: f64, x: f64) -> Result<f64> {
    if !(nu.abs() <= 200.0) || !(0.0..=1e4).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "Bessel evaluation validated only for |nu| <= 200, 0 <= x <= 1e4 (got nu={nu}, x={x})"
        )));
    }
    crate::num::bessel::j(nu, x)
}

/// Fundamental matrix for any schedule kind, dispatching to the
/// matching closed form and otherwise integrating.
pub fn fundamental_matrix(osc: &Oscillator, sched: &FrequencySchedule, t: f64) -> Result<FundamentalMatrix> {
    match sched {
        FrequencySchedule::Constant { omega0 } => fundamental_constant(osc, *omega0, t),
        FrequencySchedule::LinearRamp { .. } => fundamental_linear_ramp(osc, sched, t),
        FrequencySchedule::ExponentialRamp { .. } => fundamental_exponential_ramp(osc, sched, t),
        FrequencySchedule::Tabulated(_) => fundamental_numeric(osc, sched, t),
    }
}

/// V(t) = M(t) V0 M(t)^T plus the accumulated noise, evaluated by
/// adaptive quadrature over closed-form matrices.
///
/// Constant frequency uses the time-translation-invariant convolution
/// of M(s) N(t-s); time-dependent schedules use the general
/// M(t) [V0 + int M^{-1} N M^{-T}] M(t)^T with M from the ramp closed
/// forms (or a dense numerically-built table when those do not apply),
/// which is well-conditioned only while 4 kappa t stays moderate.
pub fn propagate_variance(
    osc: &Oscillator,
    omega: &FrequencySchedule,
    v0: &SecondMoments,
    d_sched: &DiffusionSchedule,
    t: f64,
) -> Result<SecondMoments> {
    v0.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(*v0);
    }
    // Component scales for the quadrature's absolute floor: the larger
    // of the initial state and the steady state fed by max D.
    let d_max = [0.0, 0.25 * t, 0.5 * t, 0.75 * t, t]
        .iter()
        .map(|&s| d_sched.d(s))
        .fold(0.0f64, f64::max);
    let w_min = (0..=8).map(|i| omega.omega(t * i as f64 / 8.0)).fold(f64::INFINITY, f64::min);
    let (m, k) = (osc.mass, osc.kappa);
    let p2_sc = v0.p2.max(if k > 0.0 { d_max / (2.0 * k) } else { 0.0 }).max(1e-300);
    let q2_sc = v0.q2.max(p2_sc / (m * m * w_min * w_min)).max(1e-300);
    // Product form would underflow when both scales bottom out.
    let qp_sc = q2_sc.sqrt() * p2_sc.sqrt();
    let rtol = 1e-9;

    if let FrequencySchedule::Constant { omega0 } = omega {
        let w = *omega0;
        let mt = fundamental_constant(osc, w, t)?;
        let f = |s: f64| -> [f64; 3] {
            let g = fundamental_constant(osc, w, s).expect("s in [0,t]");
            let dd = 2.0 * d_sched.d(t - s);
            [dd * g.v * g.v / q2_sc, dd * g.v * m * g.vdot / qp_sc, dd * m * m * g.vdot * g.vdot / p2_sc]
        };
        let (noise, _err) = integrate_vec::<3, _>(f, 0.0, t, rtol, 1e-14)?;
        let free = congruence(&mt, m, v0);
        return finish(SecondMoments {
            q2: free.q2 + noise[0] * q2_sc,
            qp: free.qp + noise[1] * qp_sc,
            p2: free.p2 + noise[2] * p2_sc,
        });
    }

    if 4.0 * k * t > 600.0 {
        return Err(Error::OutOfRange(format!(
            "4 kappa t = {:.1} overflows the bracket integral; use moment_ode_integrate",
            4.0 * k * t
        )));
    }
    // One reusable evaluator for M(t').
    enum Route<'a> {
        Ramp(&'a FrequencySchedule),
        Table(Box<[Pchip; 4]>),
    }
    let route = match omega {
        FrequencySchedule::LinearRamp { .. } | FrequencySchedule::ExponentialRamp { .. } => {
            // Probe once: if the closed form does not hold at t it will
            // not hold at interior points either, so build a table.
            let probe = match omega {
                FrequencySchedule::LinearRamp { .. } => fundamental_linear_ramp_with_route(osc, omega, t)?,
                _ => fundamental_exponential_ramp_with_route(osc, omega, t)?,
            };
            if probe.1 == SolutionRoute::Closed {
                Route::Ramp(omega)
            } else {
                Route::Table(matrix_table(osc, omega, t)?)
            }
        }
        _ => Route::Table(matrix_table(osc, omega, t)?),
    };
    let m_at = |s: f64| -> Result<FundamentalMatrix> {
        match &route {
            Route::Ramp(FrequencySchedule::LinearRamp { .. }) => fundamental_linear_ramp(osc, omega, s),
            Route::Ramp(_) => fundamental_exponential_ramp(osc, omega, s),
            Route::Table(ps) => Ok(FundamentalMatrix {
                u: ps[0].eval(s),
                udot: ps[1].eval(s),
                v: ps[2].eval(s),
                vdot: ps[3].eval(s),
            }),
        }
    };
    let mt = m_at(t)?;
    // Bracket integrand M^{-1} N M^{-T} = 2 D e^{4 kappa t'} *
    // [[v^2, -u v], [-u v, u^2]], scaled against exp overflow by the
    // guard above.
    let f = |s: f64| -> [f64; 3] {
        let g = m_at(s).expect("s in [0,t]");
        let dd = 2.0 * d_sched.d(s) * (4.0 * k * s).exp();
        [dd * g.v * g.v / q2_sc, -dd * g.u * g.v / qp_sc, dd * g.u * g.u / p2_sc]
    };
    let (br, _err) = integrate_vec::<3, _>(f, 0.0, t, rtol, 1e-14)?;
    let inner = SecondMoments {
        q2: v0.q2 + br[0] * q2_sc,
        qp: v0.qp + br[1] * qp_sc,
        p2: v0.p2 + br[2] * p2_sc,
    };
    finish(congruence(&mt, m, &inner))
}

/// M V M^T for symmetric V in (q, p) coordinates.
fn congruence(f: &FundamentalMatrix, mass: f64, v: &SecondMoments) -> SecondMoments {
    let m = f.matrix(mass);
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    SecondMoments {
        q2: a * a * v.q2 + 2.0 * a * b * v.qp + b * b * v.p2,
        qp: a * c * v.q2 + (a * d + b * c) * v.qp + b * d * v.p2,
        p2: c * c * v.q2 + 2.0 * c * d * v.qp + d * d * v.p2,
    }
}

fn finish(v: SecondMoments) -> Result<SecondMoments> {
    v.validate()?;
    Ok(v)
}

/// Dense table of the numerically integrated fundamental matrix on
/// [0, t], interpolated per component.
fn matrix_table(osc: &Oscillator, sched: &FrequencySchedule, t: f64) -> Result<Box<[Pchip; 4]>> {
    let cycles = (sched.omega(0.0).max(sched.omega(t)) + osc.kappa) * t;
    let n = ((64.0 * cycles) as usize).clamp(2048, 16384);
    let ts: Vec<f64> = (0..=n).map(|i| t * i as f64 / n as f64).collect();
    let ctrl = OdeControl { rtol: 1e-12, atol: 1e-14, ..OdeControl::default() };
    let y0 = [1.0, 0.0, 0.0, 1.0 / osc.mass];
    let path = integrate_path(homogeneous_rhs(osc, sched), 0.0, y0, &ts, &ctrl)?;
    let col = |j: usize| -> Result<Pchip> {
        Pchip::new(ts.clone(), path.iter().map(|y| y[j]).collect())
    };
    Ok(Box::new([col(0)?, col(1)?, col(2)?, col(3)?]))
}

/// Moment trajectory from direct integration of
/// d<q^2>/dt = 2<qp>/m, d<qp>/dt = <p^2>/m - m w^2 <q^2> - 2k <qp>,
/// d<p^2>/dt = -2 m w^2 <qp> - 4k <p^2> + 2D.
pub fn moment_ode_integrate(
    osc: &Oscillator,
    omega: &FrequencySchedule,
    d_sched: &DiffusionSchedule,
    v0: &SecondMoments,
    t_span: (f64, f64),
    n_out: usize,
    ctrl: &OdeControl,
) -> Result<Trajectory> {
    v0.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) || n_out < 2 {
        return Err(Error::InvalidInput(format!(
            "need t1 > t0 and at least 2 output samples, got ({t0}, {t1}) x {n_out}"
        )));
    }
    let (m, k) = (osc.mass, osc.kappa);
    let rhs = |t: f64, y: &[f64; 3]| -> [f64; 3] {
        let w2 = omega.omega_sq(t);
        let dd = d_sched.d(t);
        [
            2.0 * y[1] / m,
            y[2] / m - m * w2 * y[0] - 2.0 * k * y[1],
            -2.0 * m * w2 * y[1] - 4.0 * k * y[2] + 2.0 * dd,
        ]
    };
    let ts: Vec<f64> = (0..n_out)
        .map(|i| t0 + (t1 - t0) * i as f64 / (n_out - 1) as f64)
        .collect();
    let path = integrate_path(rhs, t0, [v0.q2, v0.qp, v0.p2], &ts, ctrl).map_err(|e| {
        Error::OdeFailed(format!(
            "moment system integration failed ({e}); if stiff, bound steps by kappa dt <~ 1 via h_max = {:.3e}",
            if k > 0.0 { 1.0 / k } else { f64::INFINITY }
        ))
    })?;
    Trajectory::new(osc, omega, d_sched, ts, path)
}

/// Immutable dense-output moment history with the driving schedules
/// sampled on the same grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    ts: Vec<f64>,
    moments: Vec<SecondMoments>,
    omega: Vec<f64>,
    d: Vec<f64>,
    interp: [Pchip; 3],
}

impl Trajectory {
    fn new(
        osc: &Oscillator,
        omega: &FrequencySchedule,
        d_sched: &DiffusionSchedule,
        ts: Vec<f64>,
        path: Vec<[f64; 3]>,
    ) -> Result<Self> {
        let _ = osc;
        let moments: Vec<SecondMoments> = path
            .iter()
            .map(|y| SecondMoments { q2: y[0], qp: y[1], p2: y[2] })
            .collect();
        let interp = [
            Pchip::new(ts.clone(), path.iter().map(|y| y[0]).collect())?,
            Pchip::new(ts.clone(), path.iter().map(|y| y[1]).collect())?,
            Pchip::new(ts.clone(), path.iter().map(|y| y[2]).collect())?,
        ];
        let omega_s = ts.iter().map(|&t| omega.omega(t)).collect();
        let d_s = ts.iter().map(|&t| d_sched.d(t)).collect();
        Ok(Trajectory { ts, moments, omega: omega_s, d: d_s, interp })
    }

    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    pub fn moments(&self) -> &[SecondMoments] {
        &self.moments
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn noise(&self) -> &[f64] {
        &self.d
    }

    pub fn last(&self) -> SecondMoments {
        *self.moments.last().expect("trajectory is never empty")
    }

    /// Interpolated state between grid points (clamped outside).
    pub fn sample(&self, t: f64) -> SecondMoments {
        SecondMoments {
            q2: self.interp[0].eval(t),
            qp: self.interp[1].eval(t),
            p2: self.interp[2].eval(t),
        }
    }

    /// CSV rows `t,q2,qp,p2,omega,D` at 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q2,qp,p2,omega,D\n");
        for i in 0..self.ts.len() {
            let m = &self.moments[i];
            out.push_str(&format!(
                "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e}\n",
                self.ts[i], m.q2, m.qp, m.p2, self.omega[i], self.d[i]
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{steady_state_moments, Oscillator};

    fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ]
    }

    #[test]
    fn constant_identity_at_zero_and_undamped_form() {
        let osc = Oscillator::new(1.3, 0.0).unwrap();
        let f = fundamental_constant(&osc, 2.0, 0.0).unwrap();
        assert_eq!((f.u, f.v, f.udot), (1.0, 0.0, 0.0));
        assert_eq!(f.vdot, 1.0 / 1.3);
        let t = 0.77;
        let f = fundamental_constant(&osc, 2.0, t).unwrap();
        assert!((f.u - (2.0 * t).cos()).abs() < 1e-15);
        assert!((f.v - (2.0 * t).sin() / (1.3 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn constant_matches_direct_integration() {
        // Overdamped, underdamped, and exactly critical.
        for (k, w) in [(2.0, 1.0), (0.3, 1.5), (1.0, 1.0)] {
            let osc = Oscillator::new(0.9, k).unwrap();
            let sched = FrequencySchedule::constant(w).unwrap();
            for t in [0.4, 1.0, 3.7] {
                let a = fundamental_constant(&osc, w, t).unwrap();
                let b = fundamental_numeric(&osc, &sched, t).unwrap();
                for (x, y) in [(a.u, b.u), (a.v, b.v), (a.udot, b.udot), (a.vdot, b.vdot)] {
                    assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()), "k={k} w={w} t={t}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn wronskian_identity_all_regimes() {
        // Error budget scales with the operands: deep overdamping makes
        // e^{-2 kappa t} a cancellation between O(1) products, so the
        // identity is only meaningful relative to their size.
        for (k, w) in [(0.0, 1.0), (0.2, 1.0), (1.0, 1.0), (5.0, 0.3), (1.0, 1.0 + 1e-9)] {
            let osc = Oscillator::new(1.7, k).unwrap();
            for t in [0.0, 0.3, 2.0, 8.0] {
                let f = fundamental_constant(&osc, w, t).unwrap();
                let want = (-2.0 * k * t).exp();
                let ops = 1.7 * (f.u * f.vdot).abs().max((f.v * f.udot).abs());
                assert!(
                    (f.wronskian(1.7) - want).abs() < 1e-13 * ops.max(want),
                    "k={k} w={w} t={t}"
                );
            }
        }
    }

    #[test]
    fn critical_branch_is_continuous() {
        let t = 1.9;
        let m = 1.0;
        let at = |w: f64| fundamental_constant(&Oscillator::new(m, 1.0).unwrap(), w, t).unwrap();
        let mid = at(1.0);
        for w in [1.0 - 1e-8, 1.0 + 1e-8] {
            let f = at(w);
            for (x, y) in [(f.u, mid.u), (f.v, mid.v), (f.udot, mid.udot), (f.vdot, mid.vdot)] {
                assert!((x - y).abs() < 1e-7 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn constant_semigroup_property() {
        let osc = Oscillator::new(1.1, 0.6).unwrap();
        let w = 1.4;
        for (t1, t2) in [(0.3, 0.9), (1.0, 2.2), (0.05, 0.05)] {
            let a = fundamental_constant(&osc, w, t1).unwrap().matrix(osc.mass);
            let b = fundamental_constant(&osc, w, t2).unwrap().matrix(osc.mass);
            let c = fundamental_constant(&osc, w, t1 + t2).unwrap().matrix(osc.mass);
            let ab = mat_mul(a, b);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((ab[i][j] - c[i][j]).abs() < 1e-10 * (1.0 + c[i][j].abs()));
                }
            }
        }
    }

    #[test]
    fn linear_ramp_frozen_point() {
        let osc = Oscillator::new(1.0, 0.3).unwrap();
        let sched = FrequencySchedule::linear_ramp(1.0, 0.8, 2.0).unwrap();
        let (f, route) = fundamental_linear_ramp_with_route(&osc, &sched, 1.3).unwrap();
        assert_eq!(route, SolutionRoute::Closed);
        let want = [
            (f.u, 0.33631749296925195905),
            (f.v, 0.61741552649040167399),
            (f.udot, -0.80511446022199909008),
            (f.vdot, -0.11502273252647700545),
        ];
        for (got, w) in want {
            assert!(((got - w) / w).abs() < 1e-12, "got {got:.17e}, want {w:.17e}");
        }
    }

    #[test]
    fn linear_ramp_slow_rate_approaches_constant() {
        let osc = Oscillator::new(1.0, 0.4).unwrap();
        let sched = FrequencySchedule::linear_ramp(1.2, 1e-6, 1.0).unwrap();
        let f = fundamental_linear_ramp(&osc, &sched, 0.8).unwrap();
        let c = fundamental_constant(&osc, 1.2, 0.8).unwrap();
        for (x, y) in [(f.u, c.u), (f.v, c.v), (f.udot, c.udot), (f.vdot, c.vdot)] {
            assert!((x - y).abs() < 1e-6 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn linear_ramp_overdamped_falls_back() {
        let osc = Oscillator::new(1.0, 2.0).unwrap();
        let sched = FrequencySchedule::linear_ramp(1.0, 0.5, 2.0).unwrap();
        let (f, route) = fundamental_linear_ramp_with_route(&osc, &sched, 1.0).unwrap();
        assert_eq!(route, SolutionRoute::Numeric);
        let want = (-2.0 * osc.kappa * 1.0f64).exp();
        assert!((f.wronskian(osc.mass) - want).abs() < 1e-9 * want);
        // Downward ramps have no Bessel form either.
        let down = FrequencySchedule::linear_ramp(1.0, -0.5, 2.0).unwrap();
        let (_, route) = fundamental_linear_ramp_with_route(&Oscillator::new(1.0, 0.1).unwrap(), &down, 1.0).unwrap();
        assert_eq!(route, SolutionRoute::Numeric);
    }

    #[test]
    fn linear_ramp_wronskian_and_ode_agreement() {
        let osc = Oscillator::new(1.4, 0.25).unwrap();
        let sched = FrequencySchedule::linear_ramp(1.1, 1.7, 3.0).unwrap();
        for t in [0.5, 1.5, 3.0] {
            let (f, route) = fundamental_linear_ramp_with_route(&osc, &sched, t).unwrap();
            assert_eq!(route, SolutionRoute::Closed);
            let want = (-2.0 * osc.kappa * t).exp();
            assert!((f.wronskian(osc.mass) - want).abs() < 1e-9 * want, "t={t}");
            let n = fundamental_numeric(&osc, &sched, t).unwrap();
            for (x, y) in [(f.u, n.u), (f.v, n.v), (f.udot, n.udot), (f.vdot, n.vdot)] {
                assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()), "t={t}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn exponential_ramp_frozen_point() {
        let osc = Oscillator::new(1.0, 0.4).unwrap();
        let sched = FrequencySchedule::exponential_ramp(1.2, 1.1, 1.5).unwrap();
        let (f, route) = fundamental_exponential_ramp_with_route(&osc, &sched, 0.9).unwrap();
        assert_eq!(route, SolutionRoute::Closed);
        assert!(((f.u - 0.47660322830980274587) / 0.47660322830980274587).abs() < 1e-12);
        assert!(((f.v - 0.48132776522806533096) / 0.48132776522806533096).abs() < 1e-12);
    }

    #[test]
    fn exponential_ramp_integer_order_uses_second_kind() {
        // kappa/|lambda| = 2 exactly; the J pair degenerates there.
        let osc = Oscillator::new(1.0, 2.0).unwrap();
        let sched = FrequencySchedule::exponential_ramp(1.0, 1.0, 0.5).unwrap();
        for t in [0.2, 0.5] {
            let (f, route) = fundamental_exponential_ramp_with_route(&osc, &sched, t).unwrap();
            assert_eq!(route, SolutionRoute::Closed);
            let n = fundamental_numeric(&osc, &sched, t).unwrap();
            for (x, y) in [(f.u, n.u), (f.v, n.v), (f.udot, n.udot), (f.vdot, n.vdot)] {
                assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()), "t={t}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn exponential_ramp_downward_and_wronskian() {
        let osc = Oscillator::new(0.8, 0.37).unwrap();
        let sched = FrequencySchedule::exponential_ramp(2.0, -1.3, 2.0).unwrap();
        for t in [0.6, 2.0] {
            let (f, route) = fundamental_exponential_ramp_with_route(&osc, &sched, t).unwrap();
            assert_eq!(route, SolutionRoute::Closed);
            let want = (-2.0 * osc.kappa * t).exp();
            assert!((f.wronskian(osc.mass) - want).abs() < 1e-9 * want);
            let n = fundamental_numeric(&osc, &sched, t).unwrap();
            for (x, y) in [(f.u, n.u), (f.v, n.v)] {
                assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn bessel_wrapper_domain() {
        assert_eq!(bessel_j_real_order(0.0, 0.0).unwrap(), 1.0);
        assert!(bessel_j_real_order(201.0, 1.0).is_err());
        assert!(bessel_j_real_order(1.0, 1e5).is_err());
        let x: f64 = 2.0;
        let want = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
        assert!((bessel_j_real_order(0.5, x).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn propagate_zero_noise_zero_state() {
        let osc = Oscillator::new(1.0, 0.5).unwrap();
        let sched = FrequencySchedule::constant(1.0).unwrap();
        let d = DiffusionSchedule::constant(0.0).unwrap();
        let v = propagate_variance(&osc, &sched, &SecondMoments::zero(), &d, 2.0).unwrap();
        assert_eq!((v.q2, v.qp, v.p2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn propagate_steady_state_is_fixed_point() {
        let osc = Oscillator::new(1.3, 0.8).unwrap();
        let w = 1.1;
        let d0 = 0.9;
        let sched = FrequencySchedule::constant(w).unwrap();
        let d = DiffusionSchedule::constant(d0).unwrap();
        let ss = steady_state_moments(&osc, w, d0).unwrap();
        for t in [0.5, 3.0, 20.0] {
            let v = propagate_variance(&osc, &sched, &ss, &d, t).unwrap();
            assert!((v.q2 / ss.q2 - 1.0).abs() < 1e-8, "t={t}");
            assert!((v.p2 / ss.p2 - 1.0).abs() < 1e-8, "t={t}");
            assert!(v.qp.abs() < 1e-8 * (ss.q2 * ss.p2).sqrt(), "t={t}");
        }
    }

    #[test]
    fn propagate_linear_noise_ramp_frozen_point() {
        // Critical damping, D ramped 1 -> 2 over tau = 1.
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let sched = FrequencySchedule::constant(1.0).unwrap();
        let d = DiffusionSchedule::linear_ramp(1.0, 2.0, 1.0).unwrap();
        let v0 = steady_state_moments(&osc, 1.0, 1.0).unwrap();
        let v = propagate_variance(&osc, &sched, &v0, &d, 1.0).unwrap();
        assert!(((v.q2 - 0.55450438728237855676) / 0.55450438728237855676).abs() < 1e-9);
        assert!(((v.p2 - 0.85150146242745951892) / 0.85150146242745951892).abs() < 1e-9);
        assert!(((v.qp - 0.080830895954234135133) / 0.080830895954234135133).abs() < 1e-8);
    }

    #[test]
    fn moment_ode_matches_frozen_point() {
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let sched = FrequencySchedule::constant(1.0).unwrap();
        let d = DiffusionSchedule::linear_ramp(1.0, 2.0, 1.0).unwrap();
        let v0 = steady_state_moments(&osc, 1.0, 1.0).unwrap();
        let traj =
            moment_ode_integrate(&osc, &sched, &d, &v0, (0.0, 1.0), 33, &OdeControl::default()).unwrap();
        let v = traj.last();
        assert!(((v.q2 - 0.55450438728237855676) / 0.55450438728237855676).abs() < 1e-9);
        assert!(((v.p2 - 0.85150146242745951892) / 0.85150146242745951892).abs() < 1e-9);
    }

    #[test]
    fn moment_ode_flat_at_steady_state() {
        let osc = Oscillator::new(0.7, 1.2).unwrap();
        let sched = FrequencySchedule::constant(0.9).unwrap();
        let d = DiffusionSchedule::constant(1.4).unwrap();
        let ss = steady_state_moments(&osc, 0.9, 1.4).unwrap();
        let traj =
            moment_ode_integrate(&osc, &sched, &d, &ss, (0.0, 10.0), 21, &OdeControl::default()).unwrap();
        for m in traj.moments() {
            assert!((m.q2 / ss.q2 - 1.0).abs() < 1e-9);
            assert!((m.p2 / ss.p2 - 1.0).abs() < 1e-9);
            assert!(m.qp.abs() < 1e-9 * ss.p2);
        }
    }

    #[test]
    fn momentum_relaxation_rate_is_four_kappa() {
        // From 2x the steady state, <p^2> initially decays at exactly
        // 4 kappa (the qp cross term starts at zero).
        let osc = Oscillator::new(1.0, 5.0).unwrap();
        let (w, d0) = (1.0, 3.0);
        let sched = FrequencySchedule::constant(w).unwrap();
        let d = DiffusionSchedule::constant(d0).unwrap();
        let ss = steady_state_moments(&osc, w, d0).unwrap();
        let doubled = SecondMoments { q2: 2.0 * ss.q2, qp: 0.0, p2: 2.0 * ss.p2 };
        let t_end = 0.1 / osc.kappa;
        let traj = moment_ode_integrate(&osc, &sched, &d, &doubled, (0.0, t_end), 11, &OdeControl::default())
            .unwrap();
        let dev = |m: &SecondMoments| m.p2 - ss.p2;
        let rate = -(dev(&traj.moments()[10]) / dev(&traj.moments()[0])).ln() / t_end;
        assert!(
            (rate / (4.0 * osc.kappa) - 1.0).abs() < 0.05,
            "fit rate {rate}, want {}",
            4.0 * osc.kappa
        );
    }

    #[test]
    fn propagate_matches_ode_on_all_three_cases() {
        let osc = Oscillator::new(1.2, 0.35).unwrap();
        let d = DiffusionSchedule::linear_ramp(0.8, 1.7, 2.0).unwrap();
        let v0 = steady_state_moments(&osc, 1.0, 0.8).unwrap();
        let scheds = [
            FrequencySchedule::constant(1.0).unwrap(),
            FrequencySchedule::linear_ramp(1.0, 0.9, 2.0).unwrap(),
            FrequencySchedule::exponential_ramp(1.0, 0.9, 2.0).unwrap(),
        ];
        for sched in &scheds {
            let t = 2.0;
            let a = propagate_variance(&osc, sched, &v0, &d, t).unwrap();
            let b = moment_ode_integrate(&osc, sched, &d, &v0, (0.0, t), 65, &OdeControl::default())
                .unwrap()
                .last();
            for (x, y, name) in [(a.q2, b.q2, "q2"), (a.qp, b.qp, "qp"), (a.p2, b.p2, "p2")] {
                assert!(
                    (x - y).abs() < 1e-7 * (1.0 + y.abs()),
                    "{name}: quadrature {x:.12e} vs ode {y:.12e}"
                );
            }
        }
    }

    #[test]
    fn isochoric_bath_switch_keeps_heisenberg_floor() {
        // Quantum bath switched at fixed frequency: the state slides
        // between two thermal states and det V never crosses (hbar/2)^2.
        // (A sudden frequency quench does dip below it; this dynamics
        // is only uncertainty-safe at fixed omega.)
        let u = crate::core::UnitSystem::natural();
        let w = 1.0;
        let quantum = crate::core::Regime::Quantum;
        // Critical damping with deep cooling grazes the floor.
        for (kappa, t_hot, t_cold) in [(0.6, 0.4, 1.2), (1.0, 5.0, 0.01), (0.05, 5.0, 0.01)] {
            let osc = Oscillator::new(1.0, kappa).unwrap();
            let hot = crate::core::Bath::new(t_hot).unwrap();
            let cold = crate::core::Bath::new(t_cold).unwrap();
            let d_0 = crate::core::diffusion_coefficient(&osc, w, &hot, quantum, &u).unwrap();
            let d_1 = crate::core::diffusion_coefficient(&osc, w, &cold, quantum, &u).unwrap();
            let v0 = steady_state_moments(&osc, w, d_0).unwrap();
            let sched = FrequencySchedule::constant(w).unwrap();
            let d = DiffusionSchedule::constant(d_1).unwrap();
            let floor = 0.25 * u.hbar * u.hbar * (1.0 - 1e-9);
            for t in [0.1, 0.5, 1.0, 2.5, 6.0, 15.0] {
                let v = propagate_variance(&osc, &sched, &v0, &d, t).unwrap();
                assert!(v.det() >= floor, "kappa={kappa} t={t}: det {} under the floor", v.det());
            }
        }
    }

    #[test]
    fn trajectory_sampling_and_csv() {
        let osc = Oscillator::new(1.0, 0.5).unwrap();
        let sched = FrequencySchedule::constant(1.0).unwrap();
        let d = DiffusionSchedule::constant(1.0).unwrap();
        let v0 = SecondMoments::zero();
        let traj =
            moment_ode_integrate(&osc, &sched, &d, &v0, (0.0, 4.0), 41, &OdeControl::default()).unwrap();
        let m = traj.sample(traj.times()[7]);
        assert_eq!(m, traj.moments()[7]);
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,q2,qp,p2,omega,D\n"));
        assert_eq!(csv.lines().count(), 42);
        assert!(csv.lines().nth(1).unwrap().split(',').count() == 6);
    }

    #[test]
    fn schedule_validation_and_clamping() {
        assert!(FrequencySchedule::linear_ramp(1.0, -1.0, 1.0).is_err());
        assert!(FrequencySchedule::constant(0.0).is_err());
        assert!(DiffusionSchedule::constant(-1.0).is_err());
        let s = FrequencySchedule::linear_ramp(1.0, 3.0, 2.0).unwrap();
        assert_eq!(s.omega(-1.0), 1.0);
        assert_eq!(s.omega(5.0), 2.0);
        assert_eq!(s.omega_dot(5.0), 0.0);
        assert_eq!(s.duration(), Some(2.0));
        let d = DiffusionSchedule::linear_ramp(1.0, 2.0, 1.0).unwrap();
        assert_eq!(d.d(0.5), 1.5);
        assert_eq!(d.d(9.0), 2.0);
        let tab = FrequencySchedule::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 1.5, 1.2]).unwrap();
        assert_eq!(tab.omega(1.0), 1.5);
        assert!(FrequencySchedule::tabulated(vec![0.0, 1.0], vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn out_of_ramp_time_rejected() {
        let osc = Oscillator::new(1.0, 0.1).unwrap();
        let sched = FrequencySchedule::linear_ramp(1.0, 1.0, 1.0).unwrap();
        assert!(fundamental_linear_ramp(&osc, &sched, 1.5).is_err());
        assert!(fundamental_linear_ramp(&osc, &sched, -0.1).is_err());
        let e = FrequencySchedule::exponential_ramp(1.0, 1.0, 1.0).unwrap();
        assert!(fundamental_exponential_ramp(&osc, &e, 2.0).is_err());
    }
}
