use super::{log_grid, Context};
use crate::config::ThermoConfig;
use crate::output::{fmt, route_check, write_plot_script, PlotSpec, RunOutcome};
use anyhow::{ensure, Result};
use brheat::core::{Bath, Regime};
use brheat::thermo::{entropy, free_energy, internal_energy};

/// Frequency sweep of the three equilibrium potentials in both
/// regimes.  The dual route is the thermodynamic identity: the free
/// energy must equal U - T S at every grid point.
pub fn run(cfg: ThermoConfig, ctx: &Context) -> Result<RunOutcome> {
    ensure!(cfg.omega_min > 0.0 && cfg.omega_max > cfg.omega_min, "need 0 < omega_min < omega_max");
    ensure!(cfg.n_points >= 2, "need at least two grid points");
    let bath = Bath::new(cfg.temperature)?;
    let mut failures = Vec::new();
    let mut csv = String::from(
        "omega,u_classical,f_classical,s_classical,u_quantum,f_quantum,s_quantum\n",
    );
    for &omega in &log_grid(cfg.omega_min, cfg.omega_max, cfg.n_points) {
        let mut row = vec![fmt(omega)];
        for regime in [Regime::Classical, Regime::Quantum] {
            let u = internal_energy(omega, &bath, regime, &ctx.units)?;
            let f = free_energy(omega, &bath, regime, &ctx.units)?;
            let s = entropy(omega, &bath, regime, &ctx.units)?;
            let tag = match regime {
                Regime::Classical => "classical",
                Regime::Quantum => "quantum",
            };
            // Identity route; the cancellation scale of T S is what
            // limits the achievable agreement.
            let ts = cfg.temperature * s;
            route_check(
                &mut failures,
                &format!("thermo/{tag}/identity@omega={omega:.6e}"),
                f,
                u - ts,
                1e-11 * (1.0 + ts.abs()),
            );
            row.extend([fmt(u), fmt(f), fmt(s)]);
        }
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let path = ctx.out.join("thermo.csv");
    crate::output::write_text(&path, &csv)?;
    let mut summary = vec![format!(
        "thermo: {} frequencies at T = {} -> {}",
        cfg.n_points,
        cfg.temperature,
        path.display()
    )];
    if ctx.plot_script {
        let spec = PlotSpec {
            csv: "thermo.csv",
            title: "Oscillator potentials vs frequency",
            x_label: "omega",
            y_label: "energy / entropy",
            x_col: 0,
            series: vec![
                (1, "U classical".into()),
                (2, "F classical".into()),
                (3, "S classical".into()),
                (4, "U quantum".into()),
                (5, "F quantum".into()),
                (6, "S quantum".into()),
            ],
            log_x: true,
        };
        summary.push(format!("thermo: wrote {}", write_plot_script(&ctx.out, &[spec])?.display()));
    }
    Ok(RunOutcome { summary, failures })
}
