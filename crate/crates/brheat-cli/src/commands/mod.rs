pub mod bathswitch;
pub mod cycle;
pub mod maxpower;
pub mod protocol;
pub mod simulate;
pub mod thermo;

use brheat::core::UnitSystem;
use std::path::PathBuf;

/// Shared command environment from the global flags.
pub struct Context {
    pub out: PathBuf,
    pub units: UnitSystem,
    pub seed: u64,
    pub plot_script: bool,
}

/// Log-spaced grid including both endpoints.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Uniform grid including both endpoints.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
