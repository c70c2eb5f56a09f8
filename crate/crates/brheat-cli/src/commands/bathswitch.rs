use super::{log_grid, Context};
use crate::config::BathswitchConfig;
use crate::output::{fmt, route_check, write_plot_script, Failure, PlotSpec, RunOutcome};
use anyhow::{ensure, Result};
use brheat::bathswitch::{alpha_beta_closed, alpha_beta_quadrature};

const QUAD_TOL: f64 = 1e-9;

/// Sweep the window-averaged relaxation fractions over the damping
/// ratio and the window length.  The closed forms are spot-checked
/// against direct quadrature of the response kernels, and the
/// position fraction must dominate the momentum fraction everywhere.
pub fn run(cfg: BathswitchConfig, ctx: &Context) -> Result<RunOutcome> {
    ensure!(cfg.omega > 0.0, "omega must be positive");
    ensure!(
        cfg.ratio_min > 0.0 && cfg.ratio_max > cfg.ratio_min,
        "need 0 < ratio_min < ratio_max"
    );
    ensure!(
        cfg.kappa_tau_min > 0.0 && cfg.kappa_tau_max > cfg.kappa_tau_min,
        "need 0 < kappa_tau_min < kappa_tau_max"
    );
    ensure!(cfg.n_ratio >= 2 && cfg.n_kappa_tau >= 2, "need at least a 2x2 sweep");
    let mut failures = Vec::new();
    let ratios = log_grid(cfg.ratio_min, cfg.ratio_max, cfg.n_ratio);
    let kts = log_grid(cfg.kappa_tau_min, cfg.kappa_tau_max, cfg.n_kappa_tau);
    let mut csv = String::from("kappa_over_omega,kappa_tau,alpha,beta,mu\n");
    let mut cell = 0usize;
    for &ratio in &ratios {
        let kappa = ratio * cfg.omega;
        for &kt in &kts {
            let tau = kt / kappa;
            let s = alpha_beta_closed(kappa, cfg.omega, tau)?;
            // alpha - beta must stay strictly positive.
            if !(s.alpha_q > s.beta_p) {
                failures.push(Failure {
                    check: format!("bathswitch/ordering@(ratio={ratio:.3e},kt={kt:.3e})"),
                    got: s.alpha_q - s.beta_p,
                    want: 0.0,
                    tolerance: 0.0,
                });
            }
            // Quadrature is too slow for every cell; a strided sample
            // keeps the run fast while still crossing both regimes.
            if cell % 7 == 0 {
                let (aq, bq) = alpha_beta_quadrature(kappa, cfg.omega, tau, tau)?;
                route_check(
                    &mut failures,
                    &format!("bathswitch/alpha-quadrature@(ratio={ratio:.3e},kt={kt:.3e})"),
                    s.alpha_q,
                    aq,
                    QUAD_TOL,
                );
                route_check(
                    &mut failures,
                    &format!("bathswitch/beta-quadrature@(ratio={ratio:.3e},kt={kt:.3e})"),
                    s.beta_p,
                    bq,
                    QUAD_TOL,
                );
            }
            cell += 1;
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt(ratio),
                fmt(kt),
                fmt(s.alpha_q),
                fmt(s.beta_p),
                fmt(s.mu_neq)
            ));
        }
    }
    let path = ctx.out.join("bathswitch.csv");
    crate::output::write_text(&path, &csv)?;
    let mut summary = vec![format!(
        "bathswitch: {}x{} cells, {} quadrature spot checks -> {}",
        cfg.n_ratio,
        cfg.n_kappa_tau,
        cell.div_ceil(7),
        path.display()
    )];
    if ctx.plot_script {
        let spec = PlotSpec {
            csv: "bathswitch.csv",
            title: "Relaxation fractions",
            x_label: "kappa / omega",
            y_label: "fraction",
            x_col: 0,
            series: vec![(2, "alpha".into()), (3, "beta".into()), (4, "mu".into())],
            log_x: true,
        };
        summary
            .push(format!("bathswitch: wrote {}", write_plot_script(&ctx.out, &[spec])?.display()));
    }
    Ok(RunOutcome { summary, failures })
}
