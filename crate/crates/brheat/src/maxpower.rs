//! Stirling engine driven at finite step durations: output power as a
//! function of the two isothermal times, the closed-form optimum, and
//! the efficiency at maximum power with its dissipation-ratio bounds.
//! The dissipation enters through the per-branch Sigma coefficients
//! (Q_irr = T Sigma / tau) and the regenerator loss mu.

use crate::core::UnitSystem;
use crate::efficiency::StirlingSpec;
use crate::{Error, Result};

/// Everything the finite-time power formula needs.  Sigma values can
/// come from the protocol machinery or be supplied directly.
#[derive(Debug, Clone, Copy)]
pub struct MaxPowerInputs {
    pub tc: f64,
    pub th: f64,
    pub sigma_h: f64,
    pub sigma_c: f64,
    pub delta_s: f64,
    pub mu_neq: f64,
    pub omega_ratio: f64,
}

/// Optimal durations and the performance there.
#[derive(Debug, Clone, Copy)]
pub struct MaxPowerResult {
    pub tau_h_star: f64,
    pub tau_c_star: f64,
    pub p_max: f64,
    pub eta_star: f64,
}

/// Efficiency bounds over the dissipation ratio at fixed mu, plus the
/// named special values.
#[derive(Debug, Clone, Copy)]
pub struct MaxPowerBounds {
    pub eta_c: f64,
    pub eta_ca: f64,
    pub lower: f64,
    pub upper: f64,
    pub symmetric_value: f64,
    /// mu above half the log frequency ratio caps the efficiency at
    /// maximum power at eta_c / 2 for every dissipation split.
    pub mu_exceeds_half_log_ratio: bool,
}

/// One record of the bounds figure: both bounds at (mu, eta_c) next to
/// the Curzon-Ahlborn value and eta_c / 2.
#[derive(Debug, Clone, Copy)]
pub struct FigureRow {
    pub mu: f64,
    pub eta_c: f64,
    pub lower: f64,
    pub upper: f64,
    pub eta_ca: f64,
    pub eta_c_half: f64,
}

impl MaxPowerInputs {
    pub fn new(
        tc: f64,
        th: f64,
        sigma_h: f64,
        sigma_c: f64,
        delta_s: f64,
        mu_neq: f64,
        omega_ratio: f64,
    ) -> Result<Self> {
        if !(tc > 0.0 && th > tc) {
            return Err(Error::InvalidInput(format!("need 0 < Tc < Th, got Tc={tc}, Th={th}")));
        }
        if !(sigma_h > 0.0 && sigma_c > 0.0 && delta_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "dissipation coefficients and entropy change must be positive, got Sigma_h={sigma_h}, Sigma_c={sigma_c}, dS={delta_s}"
            )));
        }
        if !(0.0..=1.0).contains(&mu_neq) {
            return Err(Error::InvalidInput(format!("mu must lie in [0, 1], got {mu_neq}")));
        }
        if !(omega_ratio > 1.0) {
            return Err(Error::InvalidInput(format!(
                "frequency ratio must exceed 1, got {omega_ratio}"
            )));
        }
        Ok(MaxPowerInputs { tc, th, sigma_h, sigma_c, delta_s, mu_neq, omega_ratio })
    }

    /// Classical construction from an engine spec: the hot isothermal
    /// entropy change is kB ln(omega2/omega1).
    pub fn from_stirling(
        spec: &StirlingSpec,
        sigma_h: f64,
        sigma_c: f64,
        mu_neq: f64,
        units: &UnitSystem,
    ) -> Result<Self> {
        let b = spec.omega2 / spec.omega1;
        MaxPowerInputs::new(
            spec.tc,
            spec.th,
            sigma_h,
            sigma_c,
            units.kb * b.ln(),
            mu_neq,
            b,
        )
    }

    pub fn eta_carnot(&self) -> f64 {
        1.0 - self.tc / self.th
    }

    /// (Th - Tc) dS, the reversible work per cycle.
    fn drive(&self) -> f64 {
        (self.th - self.tc) * self.delta_s
    }

    /// sqrt(Tc Sigma_c / Th Sigma_h), the dissipation split parameter.
    fn split(&self) -> f64 {
        (self.tc * self.sigma_c / (self.th * self.sigma_h)).sqrt()
    }

    /// mu kB / dS, the loss term in units of the entropy change.
    fn mu_scaled(&self, units: &UnitSystem) -> f64 {
        self.mu_neq * units.kb / self.delta_s
    }
}

/// Cycle-averaged output power at the given isothermal durations.
/// Negative when dissipation swamps the reversible work (stall).
pub fn power(inputs: &MaxPowerInputs, tau_h: f64, tau_c: f64) -> Result<f64> {
    if !(tau_h > 0.0 && tau_c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "durations must be positive, got tau_h={tau_h}, tau_c={tau_c}"
        )));
    }
    Ok((inputs.drive() - inputs.th * inputs.sigma_h / tau_h - inputs.tc * inputs.sigma_c / tau_c)
        / (tau_h + tau_c))
}

/// Efficiency at the given durations: net work over hot-branch intake,
/// with the regenerator loss mu kB (Th - Tc) in the intake.
pub fn efficiency(
    inputs: &MaxPowerInputs,
    tau_h: f64,
    tau_c: f64,
    units: &UnitSystem,
) -> Result<f64> {
    if !(tau_h > 0.0 && tau_c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "durations must be positive, got tau_h={tau_h}, tau_c={tau_c}"
        )));
    }
    let work = inputs.drive()
        - inputs.th * inputs.sigma_h / tau_h
        - inputs.tc * inputs.sigma_c / tau_c;
    let intake = inputs.mu_neq * units.kb * (inputs.th - inputs.tc) + inputs.th * inputs.delta_s
        - inputs.th * inputs.sigma_h / tau_h;
    if intake <= 0.0 {
        return Err(Error::DegenerateCycle(format!("no net heat intake at tau_h = {tau_h}")));
    }
    Ok(work / intake)
}

/// Closed-form maximizer of the power.
pub fn optimal_times(inputs: &MaxPowerInputs) -> (f64, f64) {
    let a = inputs.drive();
    let r = inputs.split();
    let tau_h = 2.0 * inputs.th * inputs.sigma_h * (1.0 + r) / a;
    let tau_c = 2.0 * inputs.tc * inputs.sigma_c * (1.0 + 1.0 / r) / a;
    (tau_h, tau_c)
}

/// Efficiency at maximum power, closed form.  At the optimum the
/// dissipation eats exactly half the reversible work, which collapses
/// the efficiency to
///   eta* = (eta_c / 2) / (1 + mu~ eta_c - eta_c / (2 (1 + r)))
/// with r the dissipation split and mu~ = mu kB / dS.
pub fn eta_at_max_power(inputs: &MaxPowerInputs, units: &UnitSystem) -> f64 {
    let eta_c = inputs.eta_carnot();
    let r = inputs.split();
    let mu_t = inputs.mu_scaled(units);
    0.5 * eta_c / (1.0 + mu_t * eta_c - 0.5 * eta_c / (1.0 + r))
}

/// Optimal durations together with the power and efficiency there.
pub fn maximize(inputs: &MaxPowerInputs, units: &UnitSystem) -> Result<MaxPowerResult> {
    let (tau_h_star, tau_c_star) = optimal_times(inputs);
    Ok(MaxPowerResult {
        tau_h_star,
        tau_c_star,
        p_max: power(inputs, tau_h_star, tau_c_star)?,
        eta_star: eta_at_max_power(inputs, units),
    })
}

fn bound_pair(eta_c: f64, mu_t: f64) -> (f64, f64) {
    // Dissipation entirely in the cold branch (split -> infinity)
    // floors eta*; entirely in the hot branch tops it out.
    let lower = eta_c / (2.0 + 2.0 * mu_t * eta_c);
    let upper = eta_c / (2.0 + 2.0 * mu_t * eta_c - eta_c);
    (lower, upper)
}

/// The named special values and the dissipation-split bounds for the
/// given inputs.
pub fn bounds_and_special_values(inputs: &MaxPowerInputs, units: &UnitSystem) -> MaxPowerBounds {
    let eta_c = inputs.eta_carnot();
    let mu_t = inputs.mu_scaled(units);
    let (lower, upper) = bound_pair(eta_c, mu_t);
    let eta_ca = 1.0 - (inputs.tc / inputs.th).sqrt();
    MaxPowerBounds {
        eta_c,
        eta_ca,
        lower,
        upper,
        symmetric_value: eta_ca / (1.0 + 2.0 * mu_t * eta_ca),
        mu_exceeds_half_log_ratio: inputs.mu_neq * units.kb > 0.5 * inputs.delta_s,
    }
}

/// The data behind the bounds figure: for each mu and each eta_c, both
/// bounds next to eta_CA and eta_c / 2.  Classical entropy change
/// dS = kB ln(omega_ratio) is implied, so the rows are unit-free.
pub fn figure_grid(omega_ratio: f64, mu_list: &[f64], eta_c_list: &[f64]) -> Result<Vec<FigureRow>> {
    if !(omega_ratio > 1.0) {
        return Err(Error::InvalidInput(format!(
            "frequency ratio must exceed 1, got {omega_ratio}"
        )));
    }
    let log_b = omega_ratio.ln();
    let mut rows = Vec::with_capacity(mu_list.len() * eta_c_list.len());
    for &mu in mu_list {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidInput(format!("mu must lie in [0, 1], got {mu}")));
        }
        for &eta_c in eta_c_list {
            if !(eta_c > 0.0 && eta_c < 1.0) {
                return Err(Error::InvalidInput(format!("eta_c must lie in (0, 1), got {eta_c}")));
            }
            let (lower, upper) = bound_pair(eta_c, mu / log_b);
            rows.push(FigureRow {
                mu,
                eta_c,
                lower,
                upper,
                eta_ca: 1.0 - (1.0 - eta_c).sqrt(),
                eta_c_half: 0.5 * eta_c,
            });
        }
    }
    Ok(rows)
}
