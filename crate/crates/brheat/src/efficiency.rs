//! Cycle efficiencies for the three engines, each available two ways:
//! closed form, and assembled stroke by stroke from the state functions
//! so the two routes can be checked against each other.

use crate::core::{Bath, Regime, UnitSystem};
use crate::thermo::{free_energy, internal_energy, ln_sinh_ratio};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Regenerator loss fraction in the sudden-switch overdamped limit.
pub const MU_OVERDAMPED: f64 = 0.5;

/// Stirling cycle: two isotherms at Th, Tc joined by isochores at
/// omega2 (heating) and omega1 (cooling); omega2 > omega1, Th > Tc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirlingSpec {
    pub omega1: f64,
    pub omega2: f64,
    pub tc: f64,
    pub th: f64,
}

impl StirlingSpec {
    pub fn new(omega1: f64, omega2: f64, tc: f64, th: f64) -> Result<Self> {
        if !(omega1 > 0.0 && omega2 > omega1) {
            return Err(Error::InvalidInput(format!(
                "need omega2 > omega1 > 0, got {omega1}, {omega2}"
            )));
        }
        if !(tc > 0.0 && th > tc) {
            return Err(Error::InvalidInput(format!("need Th > Tc > 0, got {tc}, {th}")));
        }
        Ok(StirlingSpec { omega1, omega2, tc, th })
    }
}

/// Carnot cycle corners. Constructed from the hot isotherm's endpoint
/// frequencies; the cold-side frequencies follow from matching the
/// entropy argument beta*hbar*w across each adiabat, which gives
/// omega3 = omega2 Tc/Th and omega4 = omega1 Tc/Th. Note omega4 >
/// omega3 whenever omega1 > omega2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarnotSpec {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub omega4: f64,
    pub tc: f64,
    pub th: f64,
}

impl CarnotSpec {
    /// Hot isotherm runs omega1 -> omega2 with omega1 > omega2
    /// (expansion absorbs heat); the adiabat endpoints are derived.
    pub fn new(omega1: f64, omega2: f64, tc: f64, th: f64) -> Result<Self> {
        if !(omega2 > 0.0 && omega1 > omega2) {
            return Err(Error::InvalidInput(format!(
                "need omega1 > omega2 > 0, got {omega1}, {omega2}"
            )));
        }
        if !(tc > 0.0 && th > tc) {
            return Err(Error::InvalidInput(format!("need Th > Tc > 0, got {tc}, {th}")));
        }
        let r = tc / th;
        Ok(CarnotSpec { omega1, omega2, omega3: omega2 * r, omega4: omega1 * r, tc, th })
    }

    /// All four corners given explicitly; the adiabat matching
    /// conditions are enforced to 1e-12 relative.
    pub fn from_corners(omega: [f64; 4], tc: f64, th: f64) -> Result<Self> {
        let s = CarnotSpec::new(omega[0], omega[1], tc, th)?;
        for (given, derived) in [(omega[2], s.omega3), (omega[3], s.omega4)] {
            if ((given - derived) / derived).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "corner frequency {given} breaks the adiabat condition (expected {derived})"
                )));
            }
        }
        Ok(CarnotSpec { omega3: omega[2], omega4: omega[3], ..s })
    }
}

/// Otto cycle: adiabats between omega_c and omega_h joined by
/// isochores. T1 and T2 are the temperatures reached at the end of the
/// cold-to-hot compression and the hot-to-cold expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OttoSpec {
    pub omega_c: f64,
    pub omega_h: f64,
    pub tc: f64,
    pub th: f64,
    pub t1: f64,
    pub t2: f64,
}

impl OttoSpec {
    pub fn new(omega_c: f64, omega_h: f64, tc: f64, th: f64) -> Result<Self> {
        if !(omega_c > 0.0 && omega_h > omega_c) {
            return Err(Error::InvalidInput(format!(
                "need omega_h > omega_c > 0, got {omega_c}, {omega_h}"
            )));
        }
        if !(tc > 0.0 && th > tc) {
            return Err(Error::InvalidInput(format!("need Th > Tc > 0, got {tc}, {th}")));
        }
        Ok(OttoSpec { omega_c, omega_h, tc, th, t1: tc * omega_h / omega_c, t2: th * omega_c / omega_h })
    }
}

/// Dimensionless Stirling parameters: a = beta_c hbar omega1,
/// b = omega2/omega1, c = Tc/Th, plus the regenerator loss mu_neq.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessStirling {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub mu_neq: f64,
}

impl DimensionlessStirling {
    pub fn new(a: f64, b: f64, c: f64, mu_neq: f64) -> Result<Self> {
        let d = DimensionlessStirling { a, b, c, mu_neq };
        d.validate()?;
        Ok(d)
    }

    pub fn from_spec(spec: &StirlingSpec, mu_neq: f64, units: &UnitSystem) -> Result<Self> {
        DimensionlessStirling::new(
            units.hbar * spec.omega1 / (units.kb * spec.tc),
            spec.omega2 / spec.omega1,
            spec.tc / spec.th,
            mu_neq,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 1.0 || self.c == 1.0 {
            return Err(Error::DegenerateCycle(format!(
                "zero-work cycle: b={}, c={}",
                self.b, self.c
            )));
        }
        if !(self.a > 0.0 && self.b > 1.0 && self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidInput(format!("{self:?} outside a>0, b>1, 0<c<1")));
        }
        if !(0.0..=1.0).contains(&self.mu_neq) {
            return Err(Error::InvalidInput(format!("mu_neq {} outside [0,1]", self.mu_neq)));
        }
        Ok(())
    }
}

/// Heat drawn from the hot side and net work out, per cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleEnergies {
    pub heat_in: f64,
    pub work_out: f64,
}

impl CycleEnergies {
    pub fn efficiency(&self) -> Result<f64> {
        if !(self.heat_in > 0.0) {
            return Err(Error::DegenerateCycle(format!(
                "no heat uptake (Q_in = {:.3e})",
                self.heat_in
            )));
        }
        Ok(self.work_out / self.heat_in)
    }
}

/// 1 - Tc/Th, the same in both regimes.
pub fn carnot_efficiency(spec: &CarnotSpec) -> f64 {
    1.0 - spec.tc / spec.th
}

/// Carnot heat and work assembled from T * dS on the two isotherms.
/// The adiabats exchange no heat; the entropy argument beta hbar w
/// matches across them, which is what makes the closed form exact in
/// both regimes.
pub fn carnot_cycle_energies(spec: &CarnotSpec, regime: Regime, units: &UnitSystem) -> Result<CycleEnergies> {
    let hot = Bath::new(spec.th)?;
    let cold = Bath::new(spec.tc)?;
    let q_h = crate::thermo::quasistatic_isothermal_heat(spec.omega1, spec.omega2, &hot, regime, units)?;
    let q_c = crate::thermo::quasistatic_isothermal_heat(spec.omega3, spec.omega4, &cold, regime, units)?;
    Ok(CycleEnergies { heat_in: q_h, work_out: q_h + q_c })
}

/// 1 - omega_c/omega_h, the same in both regimes.
pub fn otto_efficiency(spec: &OttoSpec) -> f64 {
    1.0 - spec.omega_c / spec.omega_h
}

/// Otto heat and work from internal-energy differences on the two
/// isochores; the adiabats only trade work.
pub fn otto_cycle_energies(spec: &OttoSpec, regime: Regime, units: &UnitSystem) -> Result<CycleEnergies> {
    let q_in = internal_energy(spec.omega_h, &Bath::new(spec.th)?, regime, units)?
        - internal_energy(spec.omega_h, &Bath::new(spec.t1)?, regime, units)?;
    let q_out = internal_energy(spec.omega_c, &Bath::new(spec.t2)?, regime, units)?
        - internal_energy(spec.omega_c, &Bath::new(spec.tc)?, regime, units)?;
    Ok(CycleEnergies { heat_in: q_in, work_out: q_in - q_out })
}

/// Classical Stirling efficiency (1-c)/(1 + mu (1-c)/ln b).
pub fn stirling_classical(d: &DimensionlessStirling) -> Result<f64> {
    d.validate()?;
    let eta_c = 1.0 - d.c;
    Ok(eta_c / (1.0 + d.mu_neq * eta_c / d.b.ln()))
}

/// Quantum Stirling efficiency (X - Y)/(X + Z) in the dimensionless
/// sinh/coth form; stable down to a ~ 1e-9 through the log-ratio
/// helper.
pub fn stirling_quantum(d: &DimensionlessStirling) -> Result<f64> {
    d.validate()?;
    let (a, b, c, mu) = (d.a, d.b, d.c, d.mu_neq);
    let coth = |v: f64| 1.0 / v.tanh();
    let x = ln_sinh_ratio(0.5 * a * b * c, 0.5 * a * c);
    let y = c * ln_sinh_ratio(0.5 * a * b, 0.5 * a);
    let z = 0.5 * a * c * coth(0.5 * a * c)
        - 0.5 * a * b * c * ((1.0 - mu) * coth(0.5 * a * b * c) + mu * coth(0.5 * a * b));
    let denom = x + z;
    if denom == 0.0 {
        return Err(Error::DegenerateCycle("cycle takes in no heat (X + Z = 0)".into()));
    }
    Ok((x - y) / denom)
}

/// Heat flowing into the system over one Stirling cycle: the hot
/// isothermal uptake -dF + dU, plus the fraction 2*mu of the kinetic
/// part of the cold-to-hot isochoric step (kinetic energy is half the
/// mean energy in both regimes).
pub fn stirling_heat_in(
    spec: &StirlingSpec,
    regime: Regime,
    mu_neq: f64,
    units: &UnitSystem,
) -> Result<f64> {
    Ok(stirling_cycle_energies(spec, regime, mu_neq, units)?.heat_in)
}

/// Stirling energies stroke by stroke from the state functions.
pub fn stirling_cycle_energies(
    spec: &StirlingSpec,
    regime: Regime,
    mu_neq: f64,
    units: &UnitSystem,
) -> Result<CycleEnergies> {
    if !(0.0..=1.0).contains(&mu_neq) {
        return Err(Error::InvalidInput(format!("mu_neq {mu_neq} outside [0,1]")));
    }
    let hot = Bath::new(spec.th)?;
    let cold = Bath::new(spec.tc)?;
    let f = |w: f64, bath: &Bath| free_energy(w, bath, regime, units);
    let u = |w: f64, bath: &Bath| internal_energy(w, bath, regime, units);

    // Hot isotherm omega2 -> omega1 (corner 1 -> 2).
    let isothermal = (u(spec.omega1, &hot)? - u(spec.omega2, &hot)?)
        - (f(spec.omega1, &hot)? - f(spec.omega2, &hot)?);
    // Isochore at omega2 (corner 4 -> 1): kinetic uptake counted with
    // weight 2*mu, and <p^2>/2m = U/2 in both regimes.
    let kin_1 = 0.5 * u(spec.omega2, &hot)?;
    let kin_4 = 0.5 * u(spec.omega2, &cold)?;
    let heat_in = isothermal + 2.0 * mu_neq * (kin_1 - kin_4);

    // Net work: free energies around the isotherms; isochores do none.
    let work_out = (f(spec.omega2, &hot)? - f(spec.omega1, &hot)?)
        + (f(spec.omega1, &cold)? - f(spec.omega2, &cold)?);
    Ok(CycleEnergies { heat_in, work_out })
}

/// Grid of the quantum-to-classical efficiency ratio over (a, c) at
/// fixed b and mu, row-major with a as the slow axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioGrid {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl RatioGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.ratio[i * self.c.len() + j]
    }
}

fn ratio_cell(a: f64, b: f64, c: f64, mu: f64) -> Result<f64> {
    let d = DimensionlessStirling::new(a, b, c, mu)?;
    let r = stirling_quantum(&d)? / stirling_classical(&d)?;
    if !r.is_finite() {
        return Err(Error::DegenerateCycle(format!("ratio not finite at a={a}, c={c}")));
    }
    Ok(r)
}

pub fn efficiency_ratio_grid(b: f64, a_values: &[f64], c_values: &[f64], mu_neq: f64) -> Result<RatioGrid> {
    #[cfg(feature = "parallel")]
    {
        let cells: Vec<(f64, f64)> = a_values
            .iter()
            .flat_map(|&a| c_values.iter().map(move |&c| (a, c)))
            .collect();
        let ratio = cells
            .into_par_iter()
            .map(|(a, c)| ratio_cell(a, b, c, mu_neq))
            .collect::<Result<Vec<f64>>>()?;
        Ok(RatioGrid { a: a_values.to_vec(), c: c_values.to_vec(), ratio })
    }
    #[cfg(not(feature = "parallel"))]
    efficiency_ratio_grid_seq(b, a_values, c_values, mu_neq)
}

/// Sequential twin of efficiency_ratio_grid; always available and
/// produces identical bits.
pub fn efficiency_ratio_grid_seq(b: f64, a_values: &[f64], c_values: &[f64], mu_neq: f64) -> Result<RatioGrid> {
    let mut ratio = Vec::with_capacity(a_values.len() * c_values.len());
    for &a in a_values {
        for &c in c_values {
            ratio.push(ratio_cell(a, b, c, mu_neq)?);
        }
    }
    Ok(RatioGrid { a: a_values.to_vec(), c: c_values.to_vec(), ratio })
}
