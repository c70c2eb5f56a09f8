//! Per-command TOML configurations.  Every struct rejects unknown
//! keys so a typo fails loudly instead of silently using a default.

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::path::Path;

/// Parse the given file, or fall back to the command's defaults.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn default_temperature() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermoConfig {
    pub temperature: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
}

impl Default for ThermoConfig {
    fn default() -> Self {
        ThermoConfig { temperature: 1.0, omega_min: 0.1, omega_max: 10.0, n_points: 200 }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleConfig {
    /// stirling, carnot, or otto.
    pub engine: String,
    /// Compression-end frequency (stirling, carnot) or cold frequency
    /// (otto).
    pub omega1: f64,
    /// Expansion-end frequency (stirling: above omega1; carnot: below)
    /// or hot frequency (otto: above omega1).
    pub omega2: f64,
    pub t_cold: f64,
    pub t_hot: f64,
    /// Regenerator loss fraction for the stirling cycle.
    pub mu: f64,
    /// Optional efficiency-ratio map over the dimensionless plane.
    pub grid: Option<RatioGridConfig>,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            engine: "stirling".into(),
            omega1: 1.0,
            omega2: 2.05,
            t_cold: 0.5,
            t_hot: 1.0,
            mu: 0.5,
            grid: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatioGridConfig {
    pub b: f64,
    pub mu: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub n_a: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub n_c: usize,
}

impl Default for RatioGridConfig {
    fn default() -> Self {
        RatioGridConfig {
            b: 2.05,
            mu: 0.5,
            a_min: 1e-6,
            a_max: 10.0,
            n_a: 40,
            c_min: 0.05,
            c_max: 0.95,
            n_c: 40,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathswitchConfig {
    pub omega: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub n_ratio: usize,
    pub kappa_tau_min: f64,
    pub kappa_tau_max: f64,
    pub n_kappa_tau: usize,
}

impl Default for BathswitchConfig {
    fn default() -> Self {
        BathswitchConfig {
            omega: 1.0,
            ratio_min: 0.01,
            ratio_max: 100.0,
            n_ratio: 25,
            kappa_tau_min: 0.01,
            kappa_tau_max: 10.0,
            n_kappa_tau: 25,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// overdamped or weak.
    pub coupling: String,
    /// full, classical, or low_temperature.
    pub spectrum: String,
    pub omega_i: f64,
    pub omega_f: f64,
    pub tau: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    pub kappa: f64,
    pub mass: f64,
    pub n_samples: usize,
    /// Final frequencies for the bounds table; defaults to a geometric
    /// sweep below omega_i.
    pub bound_omega_f: Option<Vec<f64>>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            coupling: "overdamped".into(),
            spectrum: "full".into(),
            omega_i: 2.0,
            omega_f: 1.0,
            tau: 10.0,
            temperature: 1.0,
            kappa: 1.0,
            mass: 1.0,
            n_samples: 129,
            bound_omega_f: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxpowerConfig {
    pub omega_ratio: f64,
    pub mu_list: Vec<f64>,
    pub eta_c_min: f64,
    pub eta_c_max: f64,
    pub n_eta_c: usize,
    /// Optional concrete engine to optimize and report on.
    pub engine: Option<EngineInputs>,
}

impl Default for MaxpowerConfig {
    fn default() -> Self {
        MaxpowerConfig {
            omega_ratio: 2.05,
            mu_list: vec![0.001, 0.1, 0.2, 0.4],
            eta_c_min: 0.01,
            eta_c_max: 0.99,
            n_eta_c: 99,
            engine: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineInputs {
    pub t_cold: f64,
    pub t_hot: f64,
    pub sigma_h: f64,
    pub sigma_c: f64,
    pub mu: f64,
}

impl Default for EngineInputs {
    fn default() -> Self {
        EngineInputs { t_cold: 0.25, t_hot: 1.0, sigma_h: 1.0, sigma_c: 0.5, mu: 0.1 }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub kappa: f64,
    pub mass: f64,
    pub omega0: f64,
    /// Relative change of omega^2 over the run; 0 keeps it constant.
    pub omega_rate: f64,
    pub d0: f64,
    /// Final noise strength; equal to d0 means constant noise.
    pub d1: f64,
    pub t_final: f64,
    pub dt: f64,
    pub n_trajectories: usize,
    pub n_output: usize,
    pub n_bins: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            kappa: 1.0,
            mass: 1.0,
            omega0: 1.0,
            omega_rate: -0.3,
            d0: 2.0,
            d1: 2.0,
            t_final: 2.0,
            dt: 0.005,
            n_trajectories: 20_000,
            n_output: 41,
            n_bins: 61,
        }
    }
}
