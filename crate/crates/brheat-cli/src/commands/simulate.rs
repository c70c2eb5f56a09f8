use super::Context;
use crate::config::SimulateConfig;
use crate::output::{fmt, route_check, write_plot_script, Failure, PlotSpec, RunOutcome};
use anyhow::{ensure, Result};
use brheat::core::{steady_state_moments, Oscillator};
use brheat::dynamics::{propagate_variance, DiffusionSchedule, FrequencySchedule};
use brheat::langevin::{simulate_ensemble, work_distribution, EnsemblePlan};

/// Statistical gate: five standard errors keeps an honest comparison
/// against the exact moment equations while staying quiet about the
/// sampling noise a finite ensemble is entitled to.
const SE_FACTOR: f64 = 5.0;

/// Integrate an ensemble of driven-oscillator trajectories (the only
/// command that uses the thread pool) and gate the run on agreement
/// between the sampled moments and the exact variance propagation.
pub fn run(cfg: SimulateConfig, ctx: &Context) -> Result<RunOutcome> {
    ensure!(cfg.n_trajectories >= 100, "need at least 100 trajectories");
    ensure!(cfg.n_output >= 2, "need at least two output times");
    ensure!(cfg.n_bins >= 1, "need at least one histogram bin");
    let osc = Oscillator::new(cfg.mass, cfg.kappa)?;
    let omega = if cfg.omega_rate == 0.0 {
        FrequencySchedule::constant(cfg.omega0)?
    } else {
        FrequencySchedule::linear_ramp(cfg.omega0, cfg.omega_rate, cfg.t_final)?
    };
    let noise = if cfg.d0 == cfg.d1 {
        DiffusionSchedule::constant(cfg.d0)?
    } else {
        DiffusionSchedule::linear_ramp(cfg.d0, cfg.d1, cfg.t_final)?
    };
    let initial = steady_state_moments(&osc, cfg.omega0, cfg.d0)?;
    let plan = EnsemblePlan {
        oscillator: osc,
        omega,
        noise,
        initial,
        t_final: cfg.t_final,
        dt: cfg.dt,
        n_trajectories: cfg.n_trajectories,
        n_output: cfg.n_output,
        seed: ctx.seed,
    };
    let stats = simulate_ensemble(&plan)?;
    let mut failures = Vec::new();

    // Exact route: the same schedules through the variance equations.
    let exact = propagate_variance(&plan.oscillator, &plan.omega, &initial, &plan.noise, cfg.t_final)?;
    let got = stats.final_moments();
    let se = stats.moment_se.last().unwrap();
    for (name, g, want, s) in [
        ("q2", got.q2, exact.q2, se.q2),
        ("qp", got.qp, exact.qp, se.qp),
        ("p2", got.p2, exact.p2, se.p2),
    ] {
        route_check(
            &mut failures,
            &format!("simulate/final-{name}-vs-moment-equations"),
            g,
            want,
            SE_FACTOR * s,
        );
    }
    // Per-trajectory energy bookkeeping closes by construction; any
    // drift would mean the estimator itself is broken.
    let drift = stats.mean_heat - stats.mean_work - stats.mean_energy_change;
    let drift_tol = 1e-12 * (1.0 + stats.mean_heat.abs() + stats.mean_energy_change.abs());
    if !(drift.abs() <= drift_tol) {
        failures.push(Failure {
            check: "simulate/energy-balance".into(),
            got: drift,
            want: 0.0,
            tolerance: drift_tol,
        });
    }

    let moments_path = ctx.out.join("moments.csv");
    crate::output::write_text(&moments_path, &stats.to_csv())?;
    let hist = work_distribution(&stats.work_samples, cfg.n_bins)?;
    let hist_path = ctx.out.join("work_hist.csv");
    crate::output::write_text(&hist_path, &hist.to_csv())?;

    let stats_text = format!(
        "trajectories: {}\nsteps_dt: {}\nseed: {}\n\
         mean_work: {} +- {}\nmean_heat: {} +- {}\nmean_energy_change: {} +- {}\n\
         final_q2: {} (exact {})\nfinal_qp: {} (exact {})\nfinal_p2: {} (exact {})\n\
         energy_balance_drift: {}\n",
        cfg.n_trajectories,
        cfg.dt,
        ctx.seed,
        fmt(stats.mean_work),
        fmt(stats.se_work),
        fmt(stats.mean_heat),
        fmt(stats.se_heat),
        fmt(stats.mean_energy_change),
        fmt(stats.se_energy_change),
        fmt(got.q2),
        fmt(exact.q2),
        fmt(got.qp),
        fmt(exact.qp),
        fmt(got.p2),
        fmt(exact.p2),
        fmt(drift)
    );
    let stats_path = ctx.out.join("simulate_stats.txt");
    crate::output::write_text(&stats_path, &stats_text)?;

    let mut summary = vec![
        format!(
            "simulate: {} trajectories, {} output times -> {}",
            cfg.n_trajectories,
            cfg.n_output,
            moments_path.display()
        ),
        format!("simulate: work histogram -> {}", hist_path.display()),
        format!("simulate: summary -> {}", stats_path.display()),
    ];
    if ctx.plot_script {
        let specs = [
            PlotSpec {
                csv: "moments.csv",
                title: "Ensemble second moments",
                x_label: "t",
                y_label: "moment",
                x_col: 0,
                series: vec![(1, "q2".into()), (2, "qp".into()), (3, "p2".into())],
                log_x: false,
            },
            PlotSpec {
                csv: "work_hist.csv",
                title: "Work distribution",
                x_label: "work",
                y_label: "density",
                x_col: 0,
                series: vec![(2, "density".into())],
                log_x: false,
            },
        ];
        summary.push(format!("simulate: wrote {}", write_plot_script(&ctx.out, &specs)?.display()));
    }
    Ok(RunOutcome { summary, failures })
}
