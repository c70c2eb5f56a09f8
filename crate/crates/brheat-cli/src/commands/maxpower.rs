use super::{linear_grid, Context};
use crate::config::MaxpowerConfig;
use crate::output::{fmt, route_check, write_plot_script, Failure, PlotSpec, RunOutcome};
use anyhow::Result;
use brheat::maxpower::{
    bounds_and_special_values, efficiency, eta_at_max_power, figure_grid, maximize, MaxPowerInputs,
};

const ROUTE_TOL: f64 = 1e-10;

/// Efficiency-at-maximum-power bounds over (mu, eta_c), plus the
/// optimum of a concrete engine when one is configured.  Dual route:
/// the closed-form efficiency at the optimum must match substituting
/// the optimal durations into the direct work/heat ratio.
pub fn run(cfg: MaxpowerConfig, ctx: &Context) -> Result<RunOutcome> {
    let mut failures = Vec::new();
    let etas = linear_grid(cfg.eta_c_min, cfg.eta_c_max, cfg.n_eta_c);
    let rows = figure_grid(cfg.omega_ratio, &cfg.mu_list, &etas)?;
    let mut csv = String::from("mu,eta_c,lower,upper,eta_CA,eta_c_half\n");
    for r in &rows {
        if !(r.lower <= r.upper + 1e-15) {
            failures.push(Failure {
                check: format!("maxpower/bound-order@(mu={},eta_c={})", r.mu, r.eta_c),
                got: r.upper - r.lower,
                want: 0.0,
                tolerance: 0.0,
            });
        }
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(r.mu),
            fmt(r.eta_c),
            fmt(r.lower),
            fmt(r.upper),
            fmt(r.eta_ca),
            fmt(r.eta_c_half)
        ));
    }
    let grid_path = ctx.out.join("maxpower_bounds.csv");
    crate::output::write_text(&grid_path, &csv)?;

    // Substitution route on a strided sample of the plane, covering
    // both extremes of the dissipation split.
    let delta_s = cfg.omega_ratio.ln() * ctx.units.kb;
    for (k, r) in rows.iter().enumerate().step_by(rows.len().div_ceil(12).max(1)) {
        for sigma_c in [0.2, 5.0] {
            let inputs = MaxPowerInputs::new(
                1.0 - r.eta_c,
                1.0,
                1.0,
                sigma_c,
                delta_s,
                r.mu,
                cfg.omega_ratio,
            )?;
            let best = maximize(&inputs, &ctx.units)?;
            let via = efficiency(&inputs, best.tau_h_star, best.tau_c_star, &ctx.units)?;
            route_check(
                &mut failures,
                &format!("maxpower/closed-vs-substitution@row={k},sigma_c={sigma_c}"),
                via,
                best.eta_star,
                ROUTE_TOL,
            );
        }
    }

    let mut summary = vec![format!(
        "maxpower: {} rows ({} loss values x {} Carnot efficiencies) -> {}",
        rows.len(),
        cfg.mu_list.len(),
        etas.len(),
        grid_path.display()
    )];

    if let Some(e) = &cfg.engine {
        let inputs = MaxPowerInputs::new(
            e.t_cold,
            e.t_hot,
            e.sigma_h,
            e.sigma_c,
            delta_s,
            e.mu,
            cfg.omega_ratio,
        )?;
        let best = maximize(&inputs, &ctx.units)?;
        let via = efficiency(&inputs, best.tau_h_star, best.tau_c_star, &ctx.units)?;
        route_check(
            &mut failures,
            "maxpower/engine/closed-vs-substitution",
            via,
            eta_at_max_power(&inputs, &ctx.units),
            ROUTE_TOL,
        );
        let b = bounds_and_special_values(&inputs, &ctx.units);
        let report = format!(
            "t_cold: {}\nt_hot: {}\nsigma_h: {}\nsigma_c: {}\nmu: {}\n\
             tau_h_star: {}\ntau_c_star: {}\np_max: {}\neta_star: {}\n\
             eta_carnot: {}\neta_curzon_ahlborn: {}\nlower_bound: {}\nupper_bound: {}\n\
             loss_caps_at_half_carnot: {}\n",
            e.t_cold,
            e.t_hot,
            e.sigma_h,
            e.sigma_c,
            e.mu,
            fmt(best.tau_h_star),
            fmt(best.tau_c_star),
            fmt(best.p_max),
            fmt(best.eta_star),
            fmt(b.eta_c),
            fmt(b.eta_ca),
            fmt(b.lower),
            fmt(b.upper),
            b.mu_exceeds_half_log_ratio
        );
        let report_path = ctx.out.join("maxpower_report.txt");
        crate::output::write_text(&report_path, &report)?;
        summary.push(format!("maxpower: engine optimum -> {}", report_path.display()));
    }

    if ctx.plot_script {
        let spec = PlotSpec {
            csv: "maxpower_bounds.csv",
            title: "Efficiency at maximum power",
            x_label: "eta_c",
            y_label: "eta*",
            x_col: 1,
            series: vec![
                (2, "lower".into()),
                (3, "upper".into()),
                (4, "Curzon-Ahlborn".into()),
                (5, "eta_c / 2".into()),
            ],
            log_x: false,
        };
        summary.push(format!("maxpower: wrote {}", write_plot_script(&ctx.out, &[spec])?.display()));
    }
    Ok(RunOutcome { summary, failures })
}
