use super::{linear_grid, log_grid, Context};
use crate::config::CycleConfig;
use crate::output::{fmt, route_check, write_plot_script, PlotSpec, RunOutcome};
use anyhow::{bail, Result};
use brheat::core::Regime;
use brheat::efficiency::{
    carnot_cycle_energies, carnot_efficiency, efficiency_ratio_grid_seq, otto_cycle_energies,
    otto_efficiency, stirling_classical, stirling_cycle_energies, stirling_quantum, CarnotSpec,
    DimensionlessStirling, OttoSpec, StirlingSpec,
};

const ROUTE_TOL: f64 = 1e-10;

/// One engine, two routes: the closed efficiency formula against the
/// branch-by-branch heat and work bookkeeping, in both regimes.
/// Optionally maps the quantum-to-classical Stirling efficiency ratio
/// over the dimensionless plane (single threaded by design; only the
/// ensemble command runs parallel).
pub fn run(cfg: CycleConfig, ctx: &Context) -> Result<RunOutcome> {
    let mut failures = Vec::new();
    let mut report = String::new();
    report.push_str(&format!(
        "engine: {}\nomega1: {}\nomega2: {}\nt_cold: {}\nt_hot: {}\n",
        cfg.engine, cfg.omega1, cfg.omega2, cfg.t_cold, cfg.t_hot
    ));
    for regime in [Regime::Classical, Regime::Quantum] {
        let tag = match regime {
            Regime::Classical => "classical",
            Regime::Quantum => "quantum",
        };
        let (closed, energies) = match cfg.engine.as_str() {
            "stirling" => {
                let spec = StirlingSpec::new(cfg.omega1, cfg.omega2, cfg.t_cold, cfg.t_hot)?;
                let d = DimensionlessStirling::from_spec(&spec, cfg.mu, &ctx.units)?;
                let closed = match regime {
                    Regime::Classical => stirling_classical(&d)?,
                    Regime::Quantum => stirling_quantum(&d)?,
                };
                (closed, stirling_cycle_energies(&spec, regime, cfg.mu, &ctx.units)?)
            }
            "carnot" => {
                let spec = CarnotSpec::new(cfg.omega1, cfg.omega2, cfg.t_cold, cfg.t_hot)?;
                (carnot_efficiency(&spec), carnot_cycle_energies(&spec, regime, &ctx.units)?)
            }
            "otto" => {
                let spec = OttoSpec::new(cfg.omega1, cfg.omega2, cfg.t_cold, cfg.t_hot)?;
                (otto_efficiency(&spec), otto_cycle_energies(&spec, regime, &ctx.units)?)
            }
            other => bail!("unknown engine {other:?}; expected stirling, carnot, or otto"),
        };
        let via = energies.efficiency()?;
        route_check(
            &mut failures,
            &format!("cycle/{tag}/closed-vs-energies"),
            via,
            closed,
            ROUTE_TOL * (1.0 + closed.abs()),
        );
        report.push_str(&format!(
            "{tag}: efficiency {} (energy route {}), heat in {}, work out {}\n",
            fmt(closed),
            fmt(via),
            fmt(energies.heat_in),
            fmt(energies.work_out)
        ));
    }
    let report_path = ctx.out.join("cycle_report.txt");
    crate::output::write_text(&report_path, &report)?;
    let mut summary =
        vec![format!("cycle: {} engine -> {}", cfg.engine, report_path.display())];

    if let Some(g) = &cfg.grid {
        let a_vals = log_grid(g.a_min, g.a_max, g.n_a);
        let c_vals = linear_grid(g.c_min, g.c_max, g.n_c);
        let grid = efficiency_ratio_grid_seq(g.b, &a_vals, &c_vals, g.mu)?;
        let mut csv = String::from("a,c,R\n");
        for (i, &a) in a_vals.iter().enumerate() {
            for (j, &c) in c_vals.iter().enumerate() {
                let r = grid.at(i, j);
                if !r.is_finite() {
                    route_check(&mut failures, &format!("cycle/grid/finite@({a:.3e},{c:.3})"), r, 1.0, 0.5);
                }
                csv.push_str(&format!("{},{},{}\n", fmt(a), fmt(c), fmt(r)));
            }
        }
        let grid_path = ctx.out.join("ratio_grid.csv");
        crate::output::write_text(&grid_path, &csv)?;
        summary.push(format!(
            "cycle: {}x{} efficiency-ratio map -> {}",
            g.n_a,
            g.n_c,
            grid_path.display()
        ));
        if ctx.plot_script {
            let spec = PlotSpec {
                csv: "ratio_grid.csv",
                title: "Quantum / classical Stirling efficiency",
                x_label: "a",
                y_label: "R",
                x_col: 0,
            series: vec![(2, "R".into())],
                log_x: true,
            };
            summary.push(format!("cycle: wrote {}", write_plot_script(&ctx.out, &[spec])?.display()));
        }
    }
    Ok(RunOutcome { summary, failures })
}
