//! Equilibrium state functions of the harmonic oscillator in both
//! regimes, plus entropy evaluated directly on a Gaussian state.
//!
//! Every quantity uses the symmetrized moment convention, so quantum
//! energies carry the zero point and the classical forms are the small
//! beta*hbar*w limits.

use crate::core::{Bath, Regime, SecondMoments, UnitSystem};
use crate::{Error, Result};

/// ln(2 sinh x) without overflow for large x or cancellation for small x.
pub(crate) fn ln_two_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    x + (-(-2.0 * x).exp_m1()).ln()
}

/// ln(sinh x / sinh y), stable for arguments large or tiny.
pub(crate) fn ln_sinh_ratio(x: f64, y: f64) -> f64 {
    debug_assert!(x > 0.0 && y > 0.0);
    (x - y) + (-(-2.0 * x).exp_m1()).ln() - (-(-2.0 * y).exp_m1()).ln()
}

/// Mean thermal occupation 1/(exp(beta hbar w) - 1).
pub fn bose_occupation(omega: f64, bath: &Bath, units: &UnitSystem) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
    }
    let x = bath.beta(units) * units.hbar * omega;
    Ok(1.0 / x.exp_m1())
}

/// Mean energy: kB T classically, hbar w (n + 1/2) in the quantum case.
pub fn internal_energy(omega: f64, bath: &Bath, regime: Regime, units: &UnitSystem) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
    }
    Ok(match regime {
        Regime::Classical => units.kb * bath.temperature,
        Regime::Quantum => {
            let n = bose_occupation(omega, bath, units)?;
            units.hbar * omega * (n + 0.5)
        }
    })
}

/// Helmholtz free energy: kB T ln(beta hbar w) classically,
/// kB T ln(2 sinh(beta hbar w / 2)) in the quantum case.
pub fn free_energy(omega: f64, bath: &Bath, regime: Regime, units: &UnitSystem) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
    }
    let t = units.kb * bath.temperature;
    let x = bath.beta(units) * units.hbar * omega;
    Ok(match regime {
        Regime::Classical => t * x.ln(),
        Regime::Quantum => t * ln_two_sinh(0.5 * x),
    })
}

/// Entropy: kB (1 - ln(beta hbar w)) classically, the occupation form
/// kB [(n+1) ln(n+1) - n ln n] in the quantum case.
pub fn entropy(omega: f64, bath: &Bath, regime: Regime, units: &UnitSystem) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
    }
    let x = bath.beta(units) * units.hbar * omega;
    Ok(match regime {
        Regime::Classical => units.kb * (1.0 - x.ln()),
        Regime::Quantum => {
            let n = bose_occupation(omega, bath, units)?;
            units.kb * occupation_entropy(n)
        }
    })
}

/// (n+1) ln(n+1) - n ln n, continuous at n = 0.
fn occupation_entropy(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let lp = n.ln_1p();
    (n + 1.0) * lp - n * n.ln()
}

/// Entropy read off a Gaussian state from its moments alone.
///
/// Quantum: the occupation form evaluated at the uncertainty defect,
/// exact for any thermal state.  Classical: kB (1 + ln(sqrt(det V)/hbar)),
/// the Gibbs entropy of the phase-space Gaussian.
pub fn entropy_gaussian(mom: &SecondMoments, regime: Regime, units: &UnitSystem) -> Result<f64> {
    match regime {
        Regime::Quantum => {
            let sigma = crate::core::uncertainty_defect(mom, units)?;
            if sigma < 0.0 {
                return Err(Error::InvalidMoments(format!(
                    "state below minimum uncertainty (defect {sigma:.3e}) has no occupation entropy"
                )));
            }
            Ok(units.kb * occupation_entropy(sigma))
        }
        Regime::Classical => {
            let det = mom.det();
            if !(det > 0.0) {
                return Err(Error::InvalidMoments(format!("determinant {det:.3e} not positive")));
            }
            Ok(units.kb * (1.0 + (det.sqrt() / units.hbar).ln()))
        }
    }
}

/// Heat absorbed from the bath along a reversible isothermal frequency
/// change, Q = T [S(w_f) - S(w_i)].  Positive for expansion
/// (w_f < w_i) where the potential softens and entropy grows.
pub fn quasistatic_isothermal_heat(
    omega_i: f64,
    omega_f: f64,
    bath: &Bath,
    regime: Regime,
    units: &UnitSystem,
) -> Result<f64> {
    let si = entropy(omega_i, bath, regime, units)?;
    let sf = entropy(omega_f, bath, regime, units)?;
    Ok(bath.temperature * (sf - si))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{diffusion_coefficient, steady_state_moments, Oscillator};

    const U: UnitSystem = UnitSystem { hbar: 1.0, kb: 1.0 };

    fn bath_at_x(x: f64, omega: f64) -> Bath {
        // beta hbar omega = x with hbar = kB = 1.
        Bath { temperature: omega / x }
    }

    #[test]
    fn occupation_frozen_values() {
        let cases = [
            (1e-8, 99999999.500000000833),
            (0.1, 9.508331944775049624),
            (50.0, 1.928749847963917783e-22),
        ];
        for (x, want) in cases {
            let n = bose_occupation(1.0, &bath_at_x(x, 1.0), &U).unwrap();
            assert!(((n - want) / want).abs() < 1e-14, "x={x}: {n:.18e}");
        }
        let n = bose_occupation(1.0, &bath_at_x(std::f64::consts::LN_2, 1.0), &U).unwrap();
        assert!((n - 1.0).abs() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn energy_is_half_omega_coth() {
        for x in [0.02, 0.5, 3.0, 40.0] {
            let omega = 1.7;
            let bath = bath_at_x(x, omega);
            let u = internal_energy(omega, &bath, Regime::Quantum, &U).unwrap();
            let direct = 0.5 * omega / (0.5 * x).tanh();
            assert!(((u - direct) / direct).abs() < 1e-14);
        }
    }

    #[test]
    fn free_energy_small_x_gap_frozen() {
        let omega = 0.1;
        let bath = Bath { temperature: 1.0 };
        let fq = free_energy(omega, &bath, Regime::Quantum, &U).unwrap();
        let fc = free_energy(omega, &bath, Regime::Classical, &U).unwrap();
        // The gap is a 4-digit cancellation between O(1) logs, so allow
        // a few ulps of the operands.
        assert!(((fq - fc) - 0.00041663194995487509849).abs() < 5e-15);
    }

    #[test]
    fn entropy_single_occupation_frozen() {
        let bath = bath_at_x(std::f64::consts::LN_2, 1.0);
        let s = entropy(1.0, &bath, Regime::Quantum, &U).unwrap();
        assert!((s - 1.3862943611198906188).abs() < 1e-14);
    }

    #[test]
    fn classical_limits_quadratic_in_x() {
        // Relative gaps shrink as x^2 with the expected coefficients.
        for x in [0.1, 0.03, 0.01] {
            let omega = 2.0;
            let bath = bath_at_x(x, omega);
            let uq = internal_energy(omega, &bath, Regime::Quantum, &U).unwrap();
            let uc = internal_energy(omega, &bath, Regime::Classical, &U).unwrap();
            assert!((uq / uc - 1.0 - x * x / 12.0).abs() < 0.1 * x * x * x * x / 12.0);

            let sq = entropy(omega, &bath, Regime::Quantum, &U).unwrap();
            let sc = entropy(omega, &bath, Regime::Classical, &U).unwrap();
            assert!((sc - sq - x * x / 24.0).abs() < 0.1 * x * x);
        }
    }

    #[test]
    fn legendre_identity_both_regimes() {
        for regime in [Regime::Classical, Regime::Quantum] {
            for x in [0.05, 0.9, 7.0] {
                let omega = 1.3;
                let bath = bath_at_x(x, omega);
                let f = free_energy(omega, &bath, regime, &U).unwrap();
                let u = internal_energy(omega, &bath, regime, &U).unwrap();
                let s = entropy(omega, &bath, regime, &U).unwrap();
                let gap = f - (u - bath.temperature * s);
                assert!(gap.abs() < 1e-13 * u.abs().max(1.0), "{regime:?} x={x}: {gap:.3e}");
            }
        }
    }

    #[test]
    fn free_energy_slope_is_spring_response() {
        // dF/dw equals m w <q^2> in the matching steady state.
        let osc = Oscillator::new(1.4, 0.6).unwrap();
        let bath = Bath::new(0.8).unwrap();
        for regime in [Regime::Classical, Regime::Quantum] {
            for omega in [0.3, 1.0, 4.0] {
                let h = omega * 1e-6;
                let fp = free_energy(omega + h, &bath, regime, &U).unwrap();
                let fm = free_energy(omega - h, &bath, regime, &U).unwrap();
                let slope = (fp - fm) / (2.0 * h);
                let d = diffusion_coefficient(&osc, omega, &bath, regime, &U).unwrap();
                let q2 = steady_state_moments(&osc, omega, d).unwrap().q2;
                let want = osc.mass * omega * q2;
                assert!(((slope - want) / want).abs() < 1e-8, "{regime:?} w={omega}");
            }
        }
    }

    #[test]
    fn gaussian_entropy_matches_thermal_entropy() {
        let osc = Oscillator::new(0.9, 1.1).unwrap();
        for regime in [Regime::Classical, Regime::Quantum] {
            for x in [0.2, 1.0, 6.0] {
                let omega = 0.8;
                let bath = bath_at_x(x, omega);
                let d = diffusion_coefficient(&osc, omega, &bath, regime, &U).unwrap();
                let mom = steady_state_moments(&osc, omega, d).unwrap();
                let s_state = entropy_gaussian(&mom, regime, &U).unwrap();
                let s_thermal = entropy(omega, &bath, regime, &U).unwrap();
                assert!(
                    (s_state - s_thermal).abs() < 1e-12 * s_thermal.abs().max(1e-3),
                    "{regime:?} x={x}: {s_state} vs {s_thermal}"
                );
            }
        }
    }

    #[test]
    fn isothermal_heat_closes_first_law() {
        // T dS = dU - dF on any isotherm, so the two routes must agree.
        for regime in [Regime::Classical, Regime::Quantum] {
            let bath = Bath::new(0.6).unwrap();
            let (wi, wf) = (2.0, 0.5);
            let q = quasistatic_isothermal_heat(wi, wf, &bath, regime, &U).unwrap();
            let du = internal_energy(wf, &bath, regime, &U).unwrap()
                - internal_energy(wi, &bath, regime, &U).unwrap();
            let dw_on = free_energy(wf, &bath, regime, &U).unwrap()
                - free_energy(wi, &bath, regime, &U).unwrap();
            assert!((q - (du - dw_on)).abs() < 1e-14);
            assert!(q > 0.0, "expansion should draw heat");
        }
    }

    #[test]
    fn classical_isothermal_heat_is_log_ratio() {
        let bath = Bath::new(2.5).unwrap();
        let q = quasistatic_isothermal_heat(3.0, 1.0, &bath, Regime::Classical, &U).unwrap();
        let want = bath.temperature * (3.0f64 / 1.0).ln();
        assert!(((q - want) / want).abs() < 1e-14);
    }

    #[test]
    fn sinh_ratio_stability() {
        // Large arguments: ratio dominated by exp(x - y).
        let r = ln_sinh_ratio(600.0, 500.0);
        assert!((r - 100.0).abs() < 1e-12);
        // Tiny arguments: sinh x ~ x.
        let r = ln_sinh_ratio(1e-12, 5e-13);
        assert!((r - std::f64::consts::LN_2).abs() < 1e-9);
        // Cross-check at moderate arguments.
        let r = ln_sinh_ratio(1.3, 0.4);
        let direct = (1.3f64.sinh() / 0.4f64.sinh()).ln();
        assert!((r - direct).abs() < 1e-14);
    }
}
