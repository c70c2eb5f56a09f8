//! Shared physical types: units, oscillator and bath parameters, the
//! second-moment state, and the steady-state relations every other
//! module leans on.

use crate::{Error, Result};

/// Explicit unit scales.  Natural units (hbar = kB = 1) everywhere by
/// default; SI values are available for dimensional runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub kb: f64,
}

impl UnitSystem {
    pub fn natural() -> Self {
        UnitSystem { hbar: 1.0, kb: 1.0 }
    }

    pub fn si() -> Self {
        UnitSystem { hbar: 1.054571817e-34, kb: 1.380649e-23 }
    }

    pub fn new(hbar: f64, kb: f64) -> Result<Self> {
        if !(hbar > 0.0) || !(kb > 0.0) {
            return Err(Error::InvalidInput(format!("unit scales must be positive: hbar={hbar}, kb={kb}")));
        }
        Ok(UnitSystem { hbar, kb })
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}

/// Particle mass and friction rate of the damped oscillator.
///
/// The friction constant is the rate 2*kappa appearing in
/// pdot = -2 kappa p - m w^2 q + noise.  kappa = 0 (no bath) is allowed
/// so the Hamiltonian limit stays testable; every steady-state formula
/// additionally requires kappa > 0 and says so.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub mass: f64,
    pub kappa: f64,
}

impl Oscillator {
    pub fn new(mass: f64, kappa: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
        }
        if !(kappa >= 0.0) {
            return Err(Error::InvalidInput(format!("damping must be non-negative, got {kappa}")));
        }
        Ok(Oscillator { mass, kappa })
    }
}

/// Heat bath at a fixed temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bath {
    pub temperature: f64,
}

impl Bath {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidInput(format!("temperature must be positive, got {temperature}")));
        }
        Ok(Bath { temperature })
    }

    pub fn from_beta(beta: f64, units: &UnitSystem) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidInput(format!("beta must be finite positive, got {beta}")));
        }
        Ok(Bath { temperature: 1.0 / (units.kb * beta) })
    }

    /// Inverse temperature 1/(kB T).
    pub fn beta(&self, units: &UnitSystem) -> f64 {
        1.0 / (units.kb * self.temperature)
    }
}

/// Classical bath (white noise at equipartition strength) versus
/// quantum bath (zero point plus Bose occupation).  Carried explicitly
/// by every thermodynamic routine; there is no global switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Classical,
    Quantum,
}

/// The Gaussian state: variances of position and momentum plus the
/// symmetrized cross moment.  First moments are identically zero in
/// every process this crate treats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoments {
    pub q2: f64,
    pub qp: f64,
    pub p2: f64,
}

impl SecondMoments {
    pub fn new(q2: f64, qp: f64, p2: f64) -> Result<Self> {
        let m = SecondMoments { q2, qp, p2 };
        m.validate()?;
        Ok(m)
    }

    pub fn zero() -> Self {
        SecondMoments { q2: 0.0, qp: 0.0, p2: 0.0 }
    }

    /// Determinant of the 2x2 variance matrix.
    pub fn det(&self) -> f64 {
        self.q2 * self.p2 - self.qp * self.qp
    }

    /// Positivity check, with a 1e-9 relative allowance on the
    /// determinant so states coming out of an integrator pass.
    pub fn validate(&self) -> Result<()> {
        if !(self.q2 >= 0.0) || !(self.p2 >= 0.0) || !self.qp.is_finite() {
            return Err(Error::InvalidMoments(format!("{self:?}")));
        }
        let scale = self.q2 * self.p2 + self.qp * self.qp;
        if self.det() < -1e-9 * scale {
            return Err(Error::InvalidMoments(format!("negative determinant: {self:?}")));
        }
        Ok(())
    }
}

/// Noise strength matching the requested bath.
///
/// Quantum: D = 2 m hbar w kappa (n + 1/2), which feeds the
/// symmetrized (Wigner) moments.  Classical: D = 2 m kappa kB T, its
/// small beta*hbar*w limit.
pub fn diffusion_coefficient(
    osc: &Oscillator,
    omega: f64,
    bath: &Bath,
    regime: Regime,
    units: &UnitSystem,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
    }
    Ok(match regime {
        Regime::Classical => 2.0 * osc.mass * osc.kappa * units.kb * bath.temperature,
        Regime::Quantum => {
            let n = crate::thermo::bose_occupation(omega, bath, units)?;
            2.0 * osc.mass * units.hbar * omega * osc.kappa * (n + 0.5)
        }
    })
}

/// Stationary moments of the damped oscillator at fixed frequency and
/// noise strength: p2 = D/(2 kappa), q2 = D/(2 kappa m^2 w^2), qp = 0.
pub fn steady_state_moments(osc: &Oscillator, omega: f64, d: f64) -> Result<SecondMoments> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
    }
    if !(osc.kappa > 0.0) {
        return Err(Error::InvalidInput("steady state needs kappa > 0".into()));
    }
    if !(d >= 0.0) {
        return Err(Error::InvalidInput(format!("noise strength must be non-negative, got {d}")));
    }
    let p2 = d / (2.0 * osc.kappa);
    Ok(SecondMoments { q2: p2 / (osc.mass * osc.mass * omega * omega), qp: 0.0, p2 })
}

/// How far above minimum uncertainty the state sits, in units of hbar:
/// sigma = sqrt(det V)/hbar - 1/2.  Thermal states give exactly the
/// Bose occupation; classical-regime states may return negative values
/// and the caller decides what that means.
pub fn uncertainty_defect(mom: &SecondMoments, units: &UnitSystem) -> Result<f64> {
    let det = mom.det();
    let scale = mom.q2 * mom.p2 + mom.qp * mom.qp;
    if det < -1e-12 * scale {
        return Err(Error::InvalidMoments(format!("negative determinant {det:.3e}")));
    }
    Ok(det.max(0.0).sqrt() / units.hbar - 0.5)
}
