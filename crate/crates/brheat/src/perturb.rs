//! Slow-driving expansion of the moment dynamics.  For schedules run
//! over a long duration tau the moments follow the instantaneous
//! steady state plus a 1/tau correction obtained by inverting the
//! drift matrix against the steady state's parametric drift.  On
//! isothermal frequency protocols the correction integrates to the
//! irreversible heat, a quadratic functional of the path whose
//! minimizer and minimum are closed-form in each damping regime.

use crate::core::{Bath, Oscillator, SecondMoments, UnitSystem};
use crate::dynamics::{DiffusionSchedule, FrequencySchedule};
use crate::num::bisect;
use crate::num::pchip::Pchip;
use crate::num::quad::integrate;
use crate::{Error, Result};

/// Which damping limit a closed-form kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingRegime {
    Overdamped,
    WeakDissipation,
}

/// Temperature treatment of the dissipation kernel g.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumLimit {
    Full,
    Classical,
    LowTemperature,
}

/// Steady moments and their 1/tau correction at scaled time s.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedMoments {
    pub s: f64,
    pub zeroth: SecondMoments,
    pub first: SecondMoments,
}

/// Outcome of evaluating (or minimizing) the dissipation functional on
/// an isothermal protocol: Q_irr for the given duration, the
/// duration-free coefficient Sigma = Q_irr tau / T, and the path as
/// (s, omega) samples.
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub q_irr: f64,
    pub sigma: f64,
    pub tau: f64,
    pub path: Vec<[f64; 2]>,
}

/// Instantaneous steady state for the current schedule values.
pub fn zeroth_order(osc: &Oscillator, omega: f64, d: f64) -> Result<SecondMoments> {
    crate::core::steady_state_moments(osc, omega, d)
}

fn shared_duration(w: &FrequencySchedule, d: &DiffusionSchedule) -> Result<Option<f64>> {
    match (w.duration(), d.duration()) {
        (Some(a), Some(b)) => {
            if (a - b).abs() > 1e-9 * a.max(b) {
                return Err(Error::InvalidInput(format!(
                    "schedule durations differ: frequency {a}, noise {b}"
                )));
            }
            Ok(Some(a))
        }
        (Some(a), None) => Ok(Some(a)),
        (None, Some(b)) => Ok(Some(b)),
        (None, None) => Ok(None),
    }
}

/// First-order (per 1/tau) moment correction at scaled time s: the
/// drift matrix inverted against d/ds of the instantaneous steady
/// state.  Duration-independent: it depends only on the schedule
/// shapes over s in [0, 1].
pub fn first_order(
    osc: &Oscillator,
    w_sched: &FrequencySchedule,
    d_sched: &DiffusionSchedule,
    s: f64,
) -> Result<SecondMoments> {
    Ok(perturbed_moments(osc, w_sched, d_sched, s)?.first)
}

/// Zeroth plus first order at scaled time s in [0, 1].
pub fn perturbed_moments(
    osc: &Oscillator,
    w_sched: &FrequencySchedule,
    d_sched: &DiffusionSchedule,
    s: f64,
) -> Result<PerturbedMoments> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("scaled time must lie in [0, 1], got {s}")));
    }
    let (m, k) = (osc.mass, osc.kappa);
    if !(k > 0.0) {
        return Err(Error::InvalidInput("drift matrix is singular without damping".into()));
    }
    let dur = shared_duration(w_sched, d_sched)?;
    let t = dur.map_or(0.0, |tau| s * tau);
    let w = w_sched.omega(t);
    if !(w > 0.0) {
        return Err(Error::InvalidInput(format!("drift matrix is singular at omega = {w}")));
    }
    let d = d_sched.d(t);
    let zeroth = SecondMoments { q2: d / (2.0 * k * m * m * w * w), qp: 0.0, p2: d / (2.0 * k) };

    // Shape derivatives per unit s; zero for constant schedules.
    let (w_s, d_s) = match dur {
        Some(tau) => (w_sched.omega_dot(t) * tau, d_sched.d_dot(t) * tau),
        None => (0.0, 0.0),
    };
    let b1 = (d_s - 2.0 * d * w_s / w) / (2.0 * k * m * m * w * w);
    let b3 = d_s / (2.0 * k);
    let qp1 = 0.5 * m * b1;
    let p21 = -(b3 + m * m * w * w * b1) / (4.0 * k);
    let q21 = -b1 * (4.0 * k * k + w * w) / (4.0 * k * w * w) - b3 / (4.0 * k * m * m * w * w);
    Ok(PerturbedMoments { s, zeroth, first: SecondMoments { q2: q21, qp: qp1, p2: p21 } })
}

/// x coth x, stable for tiny and huge arguments.
fn x_coth(x: f64) -> f64 {
    if x < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// x csch x = x / sinh x without overflow.
fn x_csch(x: f64) -> f64 {
    if x < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        2.0 * x * (-x).exp() / -(-2.0 * x).exp_m1()
    }
}

fn half_quantum_ratio(omega: f64, bath: &Bath, units: &UnitSystem) -> f64 {
    0.5 * units.hbar * omega * bath.beta(units)
}

/// Dissipation kernel g(omega) for the requested regime and limit.
/// Q_irr = (prefactor/tau) * integral of g(omega(s)) (domega/ds)^2 ds,
/// with the prefactor from [`g_prefactor`].
pub fn g_function(
    omega: f64,
    bath: &Bath,
    regime: CouplingRegime,
    limit: SpectrumLimit,
    units: &UnitSystem,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
    }
    let x = half_quantum_ratio(omega, bath, units);
    let w2 = omega * omega;
    Ok(match (regime, limit) {
        (CouplingRegime::Overdamped, SpectrumLimit::Full) => {
            let xc = x_csch(x);
            (x_coth(x) + xc * xc) / (2.0 * w2 * w2)
        }
        (CouplingRegime::Overdamped, SpectrumLimit::Classical) => 1.0 / (w2 * w2),
        (CouplingRegime::Overdamped, SpectrumLimit::LowTemperature) => x / (2.0 * w2 * w2),
        (CouplingRegime::WeakDissipation, SpectrumLimit::Full) => {
            let xc = x_csch(x);
            xc * xc / w2
        }
        (CouplingRegime::WeakDissipation, SpectrumLimit::Classical) => 1.0 / w2,
        (CouplingRegime::WeakDissipation, SpectrumLimit::LowTemperature) => {
            let e = 2.0 * x * (-x).exp();
            e * e / w2
        }
    })
}

/// Regime prefactor multiplying the g integral: 2 kappa kB T when
/// overdamped, kB T / (2 kappa) for weak dissipation.
pub fn g_prefactor(
    osc: &Oscillator,
    bath: &Bath,
    regime: CouplingRegime,
    units: &UnitSystem,
) -> Result<f64> {
    if !(osc.kappa > 0.0) {
        return Err(Error::InvalidInput("dissipation kernel needs kappa > 0".into()));
    }
    let kbt = units.kb * bath.temperature;
    Ok(match regime {
        CouplingRegime::Overdamped => 2.0 * osc.kappa * kbt,
        CouplingRegime::WeakDissipation => kbt / (2.0 * osc.kappa),
    })
}

/// Closed-form position correction per unit dissipation-kernel theory
/// in the requested damping regime, full quantum temperature
/// dependence.
pub fn q2_correction_regime(
    osc: &Oscillator,
    omega: f64,
    bath: &Bath,
    domega_ds: f64,
    regime: CouplingRegime,
    units: &UnitSystem,
) -> Result<f64> {
    if !(omega > 0.0) || !(osc.kappa > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need omega, kappa > 0, got omega={omega}, kappa={}",
            osc.kappa
        )));
    }
    let x = half_quantum_ratio(omega, bath, units);
    let beta = bath.beta(units);
    let (m, k) = (osc.mass, osc.kappa);
    let w5 = omega.powi(5);
    Ok(match regime {
        CouplingRegime::Overdamped => {
            let xc = x_csch(x);
            let b_tilde = x_coth(x) + xc * xc;
            k * domega_ds * b_tilde / (beta * m * w5)
        }
        CouplingRegime::WeakDissipation => {
            let xc = x_csch(x);
            domega_ds * xc * xc / (2.0 * k * beta * m * omega * omega * omega)
        }
    })
}

fn path_interpolant(path: &[[f64; 2]]) -> Result<Pchip> {
    if path.len() < 2 {
        return Err(Error::InvalidInput("protocol path needs at least 2 samples".into()));
    }
    if path[0][0].abs() > 1e-9 || (path[path.len() - 1][0] - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("protocol path must span s = 0 to s = 1".into()));
    }
    if path.iter().any(|p| !(p[1] > 0.0)) {
        return Err(Error::InvalidInput("protocol frequencies must stay positive".into()));
    }
    Pchip::new(path.iter().map(|p| p[0]).collect(), path.iter().map(|p| p[1]).collect())
}

/// Irreversible heat of an isothermal frequency protocol given as
/// (s, omega) samples (shape-preserving cubic through them), run over
/// duration tau at the bath's fixed temperature.
pub fn irreversible_heat(
    path: &[[f64; 2]],
    tau: f64,
    bath: &Bath,
    osc: &Oscillator,
    regime: CouplingRegime,
    limit: SpectrumLimit,
    units: &UnitSystem,
) -> Result<ProtocolResult> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {tau}")));
    }
    let curve = path_interpolant(path)?;
    let integrand = |s: f64| -> f64 {
        let w = curve.eval(s);
        let ws = curve.deriv(s);
        g_function(w, bath, regime, limit, units).expect("positive interpolant") * ws * ws
    };
    // Probe for an absolute-error floor so flat paths converge at zero.
    let scale = (0..9).map(|i| integrand(i as f64 / 8.0).abs()).fold(0.0, f64::max);
    let action = if scale == 0.0 {
        0.0
    } else {
        integrate(integrand, 0.0, 1.0, 1e-11, 1e-15 * scale)?.value
    };
    let pref = g_prefactor(osc, bath, regime, units)?;
    let q_irr = pref * action / tau;
    Ok(ProtocolResult { q_irr, sigma: pref * action / bath.temperature, tau, path: path.to_vec() })
}

/// Signed integral of sqrt(g) between two frequencies, the coordinate
/// in which the dissipation functional is flat.
fn action_coordinate_span(
    a: f64,
    b: f64,
    bath: &Bath,
    regime: CouplingRegime,
    limit: SpectrumLimit,
    units: &UnitSystem,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let f = |w: f64| g_function(w, bath, regime, limit, units).expect("positive domain").sqrt();
    let scale = f(0.5 * (a + b)) * (b - a).abs();
    Ok(integrate(f, a, b, 1e-13, 1e-16 * scale.max(1e-300))?.value)
}

/// The variationally optimal isothermal protocol between two
/// frequencies: linear in the integrated sqrt(g) coordinate, inverted
/// back to omega(s) by bisection.  Returns the minimal Q_irr for the
/// given duration along with the sampled path (at least 64 points).
pub fn optimal_protocol(
    omega_i: f64,
    omega_f: f64,
    tau: f64,
    bath: &Bath,
    osc: &Oscillator,
    regime: CouplingRegime,
    limit: SpectrumLimit,
    n_samples: usize,
    units: &UnitSystem,
) -> Result<ProtocolResult> {
    if !(omega_i > 0.0 && omega_f > 0.0) {
        return Err(Error::InvalidInput(format!(
            "endpoint frequencies must be positive, got {omega_i}, {omega_f}"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {tau}")));
    }
    let n = n_samples.max(64);
    let pref = g_prefactor(osc, bath, regime, units)?;
    let span = action_coordinate_span(omega_i, omega_f, bath, regime, limit, units)?;
    let mut path = Vec::with_capacity(n);
    if span == 0.0 {
        for k in 0..n {
            path.push([k as f64 / (n - 1) as f64, omega_i]);
        }
        return Ok(ProtocolResult { q_irr: 0.0, sigma: 0.0, tau, path });
    }
    let (lo, hi) = (omega_i.min(omega_f), omega_i.max(omega_f));
    for k in 0..n {
        let s = k as f64 / (n - 1) as f64;
        let w = if k == 0 {
            omega_i
        } else if k == n - 1 {
            omega_f
        } else {
            let target = span * s;
            let residual = |w: f64| {
                action_coordinate_span(omega_i, w, bath, regime, limit, units)
                    .expect("positive bracket")
                    - target
            };
            let mut w = bisect(&residual, lo, hi, 1e-9 * (hi - lo))?;
            // Two Newton polishes push the inversion to quadrature
            // accuracy; the derivative of the residual is sqrt(g).
            for _ in 0..2 {
                let slope =
                    g_function(w, bath, regime, limit, units).expect("positive domain").sqrt();
                w = (w - residual(w) / slope).clamp(lo, hi);
            }
            w
        };
        if !(w > 0.0) {
            return Err(Error::QuadratureFailed(
                "frequency map lost monotonicity while inverting the action coordinate".into(),
            ));
        }
        path.push([s, w]);
    }
    let action = span * span;
    Ok(ProtocolResult {
        q_irr: pref * action / tau,
        sigma: pref * action / bath.temperature,
        tau,
        path,
    })
}

/// Lower bound on tau times Q_irr between two endpoint frequencies:
/// the closed forms per regime and limit, the quadrature value where
/// no closed form exists.
pub fn complementarity_bound(
    omega_i: f64,
    omega_f: f64,
    bath: &Bath,
    osc: &Oscillator,
    regime: CouplingRegime,
    limit: SpectrumLimit,
    units: &UnitSystem,
) -> Result<f64> {
    if !(omega_i > 0.0 && omega_f > 0.0) {
        return Err(Error::InvalidInput(format!(
            "endpoint frequencies must be positive, got {omega_i}, {omega_f}"
        )));
    }
    let pref = g_prefactor(osc, bath, regime, units)?;
    let bh = units.hbar * bath.beta(units);
    let df = match (regime, limit) {
        (CouplingRegime::Overdamped, SpectrumLimit::Classical) => 1.0 / omega_i - 1.0 / omega_f,
        (CouplingRegime::Overdamped, SpectrumLimit::LowTemperature) => {
            bh.sqrt() * (1.0 / omega_i.sqrt() - 1.0 / omega_f.sqrt())
        }
        (CouplingRegime::WeakDissipation, SpectrumLimit::Classical) => (omega_f / omega_i).ln(),
        (CouplingRegime::WeakDissipation, SpectrumLimit::Full) => {
            ((0.25 * bh * omega_f).tanh() / (0.25 * bh * omega_i).tanh()).ln()
        }
        _ => action_coordinate_span(omega_i, omega_f, bath, regime, limit, units)?,
    };
    Ok(pref * df * df)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{diffusion_coefficient, steady_state_moments, Regime, UnitSystem};
    use crate::dynamics::moment_ode_integrate;
    use crate::num::ode::OdeControl;
    use crate::thermo::free_energy;

    fn natural() -> UnitSystem {
        UnitSystem::natural()
    }

    #[test]
    fn zeroth_delegates_to_steady_state() {
        let osc = Oscillator::new(1.3, 0.7).unwrap();
        for (w, d) in [(0.5, 1.0), (2.0, 0.3), (1.0, 2.5)] {
            assert_eq!(zeroth_order(&osc, w, d).unwrap(), steady_state_moments(&osc, w, d).unwrap());
        }
    }

    #[test]
    fn constant_schedules_have_zero_correction() {
        let osc = Oscillator::new(1.0, 0.8).unwrap();
        let w = FrequencySchedule::constant(1.2).unwrap();
        let d = DiffusionSchedule::constant(0.9).unwrap();
        let p = perturbed_moments(&osc, &w, &d, 0.4).unwrap();
        assert_eq!(p.first.q2, 0.0);
        assert_eq!(p.first.qp, 0.0);
        assert_eq!(p.first.p2, 0.0);
        assert_eq!(p.zeroth.qp, 0.0);
    }

    #[test]
    fn correction_is_duration_free() {
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let mut prev: Option<SecondMoments> = None;
        for tau in [10.0, 1000.0] {
            let w = FrequencySchedule::linear_ramp(1.0, 0.5, tau).unwrap();
            let d = DiffusionSchedule::linear_ramp(1.0, 2.0, tau).unwrap();
            let x1 = first_order(&osc, &w, &d, 0.7).unwrap();
            if let Some(p) = prev {
                assert!((x1.q2 - p.q2).abs() < 1e-12 * p.q2.abs());
                assert!((x1.qp - p.qp).abs() < 1e-12 * p.qp.abs());
                assert!((x1.p2 - p.p2).abs() < 1e-12 * p.p2.abs());
            }
            prev = Some(x1);
        }
    }

    #[test]
    fn overdamped_correction_matches_general_solve() {
        // kappa/omega = 100, classical bath (constant D): the full
        // first-order q2 reduces to the overdamped kernel up to
        // (omega/kappa)^2.
        let units = natural();
        let kbt = 5.0;
        let bath = Bath::new(kbt / units.kb).unwrap();
        let osc = Oscillator::new(1.0, 100.0).unwrap();
        let tau = 1.0;
        let w = FrequencySchedule::linear_ramp(1.0, 0.8, tau).unwrap();
        let d = DiffusionSchedule::constant(2.0 * osc.mass * osc.kappa * kbt).unwrap();
        let s = 0.5;
        let x1 = first_order(&osc, &w, &d, s).unwrap();
        let t = s * tau;
        let dwds = w.omega_dot(t) * tau;
        let q2r = q2_correction_regime(&osc, w.omega(t), &bath, dwds, CouplingRegime::Overdamped, &units)
            .unwrap();
        assert!(
            ((x1.q2 - q2r) / q2r).abs() < 2e-3,
            "general {} vs overdamped kernel {}",
            x1.q2,
            q2r
        );
        // Exact classical identity: general = kBT w'(4k^2+w^2)/(2k m w^5).
        let om = w.omega(t);
        let exact = kbt * dwds * (4.0 * osc.kappa * osc.kappa + om * om)
            / (2.0 * osc.kappa * osc.mass * om.powi(5));
        assert!(((x1.q2 - exact) / exact).abs() < 1e-4);
    }

    #[test]
    fn weak_dissipation_correction_matches_general_solve() {
        // kappa/omega ~ 0.01, quantum isothermal (D follows omega).
        let units = natural();
        let bath = Bath::new(0.8).unwrap();
        let osc = Oscillator::new(1.0, 0.01).unwrap();
        let tau = 1.0;
        let w = FrequencySchedule::linear_ramp(1.0, 0.9, tau).unwrap();
        let nn = 801;
        let ts: Vec<f64> = (0..nn).map(|i| tau * i as f64 / (nn - 1) as f64).collect();
        let ds: Vec<f64> = ts
            .iter()
            .map(|&t| diffusion_coefficient(&osc, w.omega(t), &bath, Regime::Quantum, &units).unwrap())
            .collect();
        let d = DiffusionSchedule::tabulated(ts, ds).unwrap();
        let s = 0.5;
        let x1 = first_order(&osc, &w, &d, s).unwrap();
        let t = s * tau;
        let q2r = q2_correction_regime(
            &osc,
            w.omega(t),
            &bath,
            w.omega_dot(t) * tau,
            CouplingRegime::WeakDissipation,
            &units,
        )
        .unwrap();
        assert!(((x1.q2 - q2r) / q2r).abs() < 0.02, "general {} vs weak kernel {}", x1.q2, q2r);
    }

    #[test]
    fn slow_driving_expansion_converges_at_first_order() {
        // Exact integrations at increasing durations approach the
        // instantaneous steady state at rate 1/tau, and the residual
        // after subtracting the 1/tau correction falls off at least
        // quadratically.
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let s_star = 0.7;
        let mut zeroth_err = Vec::new();
        let mut resid = Vec::new();
        for tau in [1e2, 1e3, 1e4] {
            let w = FrequencySchedule::linear_ramp(1.0, 0.5, tau).unwrap();
            let d = DiffusionSchedule::linear_ramp(1.0, 2.0, tau).unwrap();
            let v0 = steady_state_moments(&osc, 1.0, 1.0).unwrap();
            let ctrl = OdeControl { rtol: 1e-12, atol: 1e-14, ..OdeControl::default() };
            let traj =
                moment_ode_integrate(&osc, &w, &d, &v0, (0.0, s_star * tau), 33, &ctrl).unwrap();
            let end = traj.last();
            let p = perturbed_moments(&osc, &w, &d, s_star).unwrap();
            zeroth_err.push((end.q2 - p.zeroth.q2).abs());
            resid.push((end.q2 - p.zeroth.q2 - p.first.q2 / tau).abs());
        }
        for i in 0..2 {
            let order = (zeroth_err[i] / zeroth_err[i + 1]).ln() / 10f64.ln();
            assert!((order - 1.0).abs() < 0.1, "first-order rate off: {order}");
            let slope = (resid[i] / resid[i + 1]).ln() / 10f64.ln();
            assert!(slope > 1.8, "residual decay too slow: {slope}");
        }
    }

    #[test]
    fn kernel_values_and_limits() {
        let units = natural();
        // x = beta hbar omega / 2 = 5 at omega 1 when T = 0.1.
        let bath = Bath::new(0.1).unwrap();
        let g = g_function(1.0, &bath, CouplingRegime::Overdamped, SpectrumLimit::Full, &units)
            .unwrap();
        assert!(((g - 2.5024972125725722094) / g).abs() < 1e-14);
        let glt = g_function(
            1.0,
            &bath,
            CouplingRegime::Overdamped,
            SpectrumLimit::LowTemperature,
            &units,
        )
        .unwrap();
        assert_eq!(glt, 2.5);
        // Hot bath: both full kernels collapse onto the classical ones.
        let hot = Bath::new(1e8).unwrap();
        for w in [0.5, 1.0, 2.0] {
            let god =
                g_function(w, &hot, CouplingRegime::Overdamped, SpectrumLimit::Full, &units).unwrap();
            assert!((god * w.powi(4) - 1.0).abs() < 1e-12);
            let gw =
                g_function(w, &hot, CouplingRegime::WeakDissipation, SpectrumLimit::Full, &units)
                    .unwrap();
            assert!((gw * w * w - 1.0).abs() < 1e-12);
            assert_eq!(
                g_function(w, &hot, CouplingRegime::WeakDissipation, SpectrumLimit::Classical, &units)
                    .unwrap(),
                1.0 / (w * w)
            );
        }
    }

    #[test]
    fn linear_path_heat_matches_analytic_integral() {
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let n = 257;
        let path: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                [s, 1.0 + s]
            })
            .collect();
        let r = irreversible_heat(
            &path,
            1.0,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Classical,
            &units,
        )
        .unwrap();
        // integral of omega^-4 from 1 to 2 is 7/24.
        let want = 2.0 * 7.0 / 24.0;
        assert!(((r.q_irr - want) / want).abs() < 1e-7, "{} vs {want}", r.q_irr);
        assert!((r.sigma - r.q_irr * r.tau / bath.temperature).abs() < 1e-15 * r.sigma);
    }

    #[test]
    fn flat_path_dissipates_nothing() {
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let path = vec![[0.0, 1.5], [0.5, 1.5], [1.0, 1.5]];
        let r = irreversible_heat(
            &path,
            2.0,
            &bath,
            &osc,
            CouplingRegime::WeakDissipation,
            SpectrumLimit::Full,
            &units,
        )
        .unwrap();
        assert_eq!(r.q_irr, 0.0);
        assert_eq!(r.sigma, 0.0);
    }

    #[test]
    fn classical_sigma_is_temperature_free() {
        let units = natural();
        let osc = Oscillator::new(1.0, 0.5).unwrap();
        let n = 65;
        let path: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                [s, 1.0 + 0.7 * s]
            })
            .collect();
        for regime in [CouplingRegime::Overdamped, CouplingRegime::WeakDissipation] {
            let a = irreversible_heat(
                &path,
                3.0,
                &Bath::new(1.0).unwrap(),
                &osc,
                regime,
                SpectrumLimit::Classical,
                &units,
            )
            .unwrap();
            let b = irreversible_heat(
                &path,
                3.0,
                &Bath::new(2.0).unwrap(),
                &osc,
                regime,
                SpectrumLimit::Classical,
                &units,
            )
            .unwrap();
            assert_eq!(a.sigma, b.sigma);
            assert!((b.q_irr - 2.0 * a.q_irr).abs() < 1e-14 * b.q_irr);
        }
    }

    #[test]
    fn optimal_path_overdamped_classical_is_harmonic_mean_line() {
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let (w0, w1) = (1.0, 2.0);
        let r = optimal_protocol(
            w0,
            w1,
            1.0,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Classical,
            65,
            &units,
        )
        .unwrap();
        for p in &r.path {
            let want = w0 * w1 / (w1 + p[0] * (w0 - w1));
            assert!((p[1] - want).abs() < 1e-9, "s={} got {} want {want}", p[0], p[1]);
        }
        let bound = complementarity_bound(
            w0,
            w1,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Classical,
            &units,
        )
        .unwrap();
        let want = 2.0 * (1.0 / w1 - 1.0 / w0).powi(2);
        assert!(((bound - want) / want).abs() < 1e-14);
        assert!(((r.q_irr * r.tau - bound) / bound).abs() < 1e-11);
    }

    #[test]
    fn optimal_path_weak_classical_is_geometric_line() {
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 0.3).unwrap();
        let (w0, w1) = (2.0, 0.5);
        let r = optimal_protocol(
            w0,
            w1,
            4.0,
            &bath,
            &osc,
            CouplingRegime::WeakDissipation,
            SpectrumLimit::Classical,
            65,
            &units,
        )
        .unwrap();
        for p in &r.path {
            let want = w0.powf(1.0 - p[0]) * w1.powf(p[0]);
            assert!((p[1] - want).abs() < 1e-9, "s={} got {} want {want}", p[0], p[1]);
        }
        let bound = complementarity_bound(
            w0,
            w1,
            &bath,
            &osc,
            CouplingRegime::WeakDissipation,
            SpectrumLimit::Classical,
            &units,
        )
        .unwrap();
        let want = (1.0 / (2.0 * 0.3)) * (w0 / w1).ln().powi(2);
        assert!(((bound - want) / want).abs() < 1e-14);
        assert!(((r.q_irr * r.tau - bound) / bound).abs() < 1e-11);
    }

    #[test]
    fn quantum_weak_bound_frozen_value() {
        // beta hbar = 1: f(omega) = ln tanh(omega/4).
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 0.2).unwrap();
        let action = 0.40308820827274497244;
        let bound = complementarity_bound(
            1.0,
            2.0,
            &bath,
            &osc,
            CouplingRegime::WeakDissipation,
            SpectrumLimit::Full,
            &units,
        )
        .unwrap();
        let want = action / (2.0 * 0.2);
        assert!(((bound - want) / want).abs() < 1e-13);
        let r = optimal_protocol(
            1.0,
            2.0,
            7.0,
            &bath,
            &osc,
            CouplingRegime::WeakDissipation,
            SpectrumLimit::Full,
            64,
            &units,
        )
        .unwrap();
        assert!(((r.q_irr * r.tau - bound) / bound).abs() < 1e-10);
    }

    #[test]
    fn low_temperature_overdamped_bound_is_quantum() {
        // Prefactor kBT cancels the kernel's beta: the bound is
        // temperature-free, 2 kappa hbar (1/sqrt w1 - 1/sqrt w0)^2.
        let units = natural();
        let osc = Oscillator::new(1.0, 2.5).unwrap();
        let (w0, w1) = (1.0f64, 4.0f64);
        let want = 2.0 * 2.5 * (1.0 / w1.sqrt() - 1.0 / w0.sqrt()).powi(2);
        for temp in [0.05, 0.1] {
            let bath = Bath::new(temp).unwrap();
            let bound = complementarity_bound(
                w0,
                w1,
                &bath,
                &osc,
                CouplingRegime::Overdamped,
                SpectrumLimit::LowTemperature,
                &units,
            )
            .unwrap();
            assert!(((bound - want) / want).abs() < 1e-13, "T={temp}: {bound} vs {want}");
            let r = optimal_protocol(
                w0,
                w1,
                2.0,
                &bath,
                &osc,
                CouplingRegime::Overdamped,
                SpectrumLimit::LowTemperature,
                64,
                &units,
            )
            .unwrap();
            assert!(((r.q_irr * r.tau - bound) / bound).abs() < 1e-10);
        }
    }

    #[test]
    fn weak_bound_classical_limit_of_tanh_form() {
        let units = natural();
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let bath = Bath::new(1e9).unwrap();
        let full = complementarity_bound(
            1.0,
            2.0,
            &bath,
            &osc,
            CouplingRegime::WeakDissipation,
            SpectrumLimit::Full,
            &units,
        )
        .unwrap();
        let classical = complementarity_bound(
            1.0,
            2.0,
            &bath,
            &osc,
            CouplingRegime::WeakDissipation,
            SpectrumLimit::Classical,
            &units,
        )
        .unwrap();
        assert!(((full - classical) / classical).abs() < 1e-6);
    }

    #[test]
    fn matching_endpoints_cost_nothing() {
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let r = optimal_protocol(
            1.3,
            1.3,
            1.0,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Full,
            70,
            &units,
        )
        .unwrap();
        assert_eq!(r.q_irr, 0.0);
        assert!(r.path.iter().all(|p| p[1] == 1.3));
        assert_eq!(r.path.len(), 70);
        let b = complementarity_bound(
            1.3,
            1.3,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Full,
            &units,
        )
        .unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn perturbed_paths_never_beat_the_minimizer() {
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let best = optimal_protocol(
            1.0,
            2.0,
            1.0,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Classical,
            129,
            &units,
        )
        .unwrap();
        let mut lcg: u64 = 0x9E3779B97F4A7C15;
        let mut unit = || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (lcg >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let eps = 0.01 + 0.04 * unit();
            let k = 1 + (unit() * 3.0) as usize;
            let bumped: Vec<[f64; 2]> = best
                .path
                .iter()
                .map(|p| [p[0], p[1] * (1.0 + eps * (std::f64::consts::PI * k as f64 * p[0]).sin())])
                .collect();
            let r = irreversible_heat(
                &bumped,
                1.0,
                &bath,
                &osc,
                CouplingRegime::Overdamped,
                SpectrumLimit::Classical,
                &units,
            )
            .unwrap();
            assert!(
                r.q_irr > best.q_irr * (1.0 + 1e-6),
                "eps={eps}, k={k}: {} vs {}",
                r.q_irr,
                best.q_irr
            );
        }
    }

    #[test]
    fn heat_identity_between_routes() {
        // F(i) - F(f) - (work done by the system through first order)
        // equals the direct correction integral (1/tau) int m w q2^(1) w' ds.
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let tau = 50.0;
        let w = FrequencySchedule::linear_ramp(1.0, 3.0, tau).unwrap();
        let kbt = units.kb * bath.temperature;
        let d = DiffusionSchedule::constant(2.0 * osc.mass * osc.kappa * kbt).unwrap();
        let work_on = integrate(
            |s: f64| {
                let p = perturbed_moments(&osc, &w, &d, s).unwrap();
                let t = s * tau;
                let om = w.omega(t);
                osc.mass * om * (p.zeroth.q2 + p.first.q2 / tau) * w.omega_dot(t) * tau
            },
            0.0,
            1.0,
            1e-12,
            1e-16,
        )
        .unwrap()
        .value;
        let direct = integrate(
            |s: f64| {
                let p = perturbed_moments(&osc, &w, &d, s).unwrap();
                let t = s * tau;
                osc.mass * w.omega(t) * p.first.q2 * w.omega_dot(t) * tau
            },
            0.0,
            1.0,
            1e-12,
            1e-16,
        )
        .unwrap()
        .value
            / tau;
        let f_i = free_energy(w.omega(0.0), &bath, Regime::Classical, &units).unwrap();
        let f_f = free_energy(w.omega(tau), &bath, Regime::Classical, &units).unwrap();
        let route = f_i - f_f + work_on;
        assert!((route - direct).abs() < 1e-8, "{route} vs {direct}");
        assert!(direct > 0.0);
    }

    #[test]
    fn validation_errors() {
        let units = natural();
        let bath = Bath::new(1.0).unwrap();
        let osc = Oscillator::new(1.0, 1.0).unwrap();
        let free = Oscillator::new(1.0, 0.0).unwrap();
        let w = FrequencySchedule::linear_ramp(1.0, 0.5, 2.0).unwrap();
        let d = DiffusionSchedule::linear_ramp(1.0, 2.0, 3.0).unwrap();
        assert!(perturbed_moments(&osc, &w, &d, 0.5).is_err());
        let d_ok = DiffusionSchedule::constant(1.0).unwrap();
        assert!(perturbed_moments(&free, &w, &d_ok, 0.5).is_err());
        assert!(perturbed_moments(&osc, &w, &d_ok, 1.5).is_err());
        assert!(g_function(-1.0, &bath, CouplingRegime::Overdamped, SpectrumLimit::Full, &units)
            .is_err());
        assert!(irreversible_heat(
            &[[0.0, 1.0]],
            1.0,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Full,
            &units
        )
        .is_err());
        assert!(irreversible_heat(
            &[[0.0, 1.0], [1.0, -2.0]],
            1.0,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Full,
            &units
        )
        .is_err());
        assert!(optimal_protocol(
            1.0,
            0.0,
            1.0,
            &bath,
            &osc,
            CouplingRegime::Overdamped,
            SpectrumLimit::Full,
            64,
            &units
        )
        .is_err());
    }
}
