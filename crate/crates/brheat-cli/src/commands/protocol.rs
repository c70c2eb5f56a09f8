use super::Context;
use crate::config::ProtocolConfig;
use crate::output::{fmt, route_check, write_plot_script, Failure, PlotSpec, RunOutcome};
use anyhow::{bail, ensure, Result};
use brheat::core::{Bath, Oscillator};
use brheat::perturb::{
    complementarity_bound, g_function, g_prefactor, optimal_protocol, CouplingRegime,
    SpectrumLimit,
};

const BOUND_TOL: f64 = 1e-9;

/// Minimum-dissipation frequency protocol between two trap stiffnesses
/// plus a table of the closed-form dissipation bounds.  The dual route
/// is variational against closed: the optimizer's tau * Q_irr must hit
/// the complementarity bound exactly.
pub fn run(cfg: ProtocolConfig, ctx: &Context) -> Result<RunOutcome> {
    let regime = match cfg.coupling.as_str() {
        "overdamped" => CouplingRegime::Overdamped,
        "weak" => CouplingRegime::WeakDissipation,
        other => bail!("unknown coupling {other:?}; expected overdamped or weak"),
    };
    let limit = match cfg.spectrum.as_str() {
        "full" => SpectrumLimit::Full,
        "classical" => SpectrumLimit::Classical,
        "low_temperature" => SpectrumLimit::LowTemperature,
        other => bail!("unknown spectrum {other:?}; expected full, classical, or low_temperature"),
    };
    ensure!(cfg.n_samples >= 64, "need at least 64 path samples");
    let osc = Oscillator::new(cfg.mass, cfg.kappa)?;
    let bath = Bath::new(cfg.temperature)?;
    let mut failures = Vec::new();

    let best = optimal_protocol(
        cfg.omega_i,
        cfg.omega_f,
        cfg.tau,
        &bath,
        &osc,
        regime,
        limit,
        cfg.n_samples,
        &ctx.units,
    )?;
    let bound = complementarity_bound(cfg.omega_i, cfg.omega_f, &bath, &osc, regime, limit, &ctx.units)?;
    route_check(
        &mut failures,
        "protocol/variational-vs-closed",
        best.q_irr * cfg.tau,
        bound,
        BOUND_TOL * (1.0 + bound.abs()),
    );

    // Path table: the g weight and the dissipation density along the
    // optimal schedule; on the optimum the density is flat in s.
    let pref = g_prefactor(&osc, &bath, regime, &ctx.units)?;
    let mut csv = String::from("s,omega,g,dI_ds\n");
    let n = best.path.len();
    for (k, &[s, w]) in best.path.iter().enumerate() {
        let g = g_function(w, &bath, regime, limit, &ctx.units)?;
        // Centered slope of omega(s) from the sampled path.
        let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
        let slope = (best.path[b][1] - best.path[a][1]) / (best.path[b][0] - best.path[a][0]);
        csv.push_str(&format!("{},{},{},{}\n", fmt(s), fmt(w), fmt(g), fmt(pref * g * slope * slope)));
    }
    let path_csv = ctx.out.join("protocol.csv");
    crate::output::write_text(&path_csv, &csv)?;

    // Bounds table over final frequencies.
    let omega_fs = cfg.bound_omega_f.clone().unwrap_or_else(|| {
        (1..=7).map(|k| cfg.omega_i * (0.3f64.powf(k as f64 / 7.0))).collect()
    });
    let mut bounds_csv = String::from("omega_i,omega_f,beta_hbar_omega,bound\n");
    for &wf in &omega_fs {
        let b = complementarity_bound(cfg.omega_i, wf, &bath, &osc, regime, limit, &ctx.units)?;
        if !(b.is_finite() && b >= 0.0) {
            failures.push(Failure {
                check: format!("protocol/bound-finite@omega_f={wf:.6e}"),
                got: b,
                want: 0.0,
                tolerance: 0.0,
            });
        }
        let x = bath.beta(&ctx.units) * ctx.units.hbar * wf;
        bounds_csv.push_str(&format!("{},{},{},{}\n", fmt(cfg.omega_i), fmt(wf), fmt(x), fmt(b)));
    }
    let bounds_path = ctx.out.join("protocol_bounds.csv");
    crate::output::write_text(&bounds_path, &bounds_csv)?;

    let mut summary = vec![
        format!(
            "protocol: {} / {} optimal path ({} samples), tau*Q_irr = {} -> {}",
            cfg.coupling,
            cfg.spectrum,
            cfg.n_samples,
            fmt(best.q_irr * cfg.tau),
            path_csv.display()
        ),
        format!("protocol: {} bound rows -> {}", omega_fs.len(), bounds_path.display()),
    ];
    if ctx.plot_script {
        let specs = [
            PlotSpec {
                csv: "protocol.csv",
                title: "Minimum-dissipation schedule",
                x_label: "s",
                y_label: "omega / density",
                x_col: 0,
            series: vec![(1, "omega".into()), (3, "dI/ds".into())],
                log_x: false,
            },
            PlotSpec {
                csv: "protocol_bounds.csv",
                title: "Dissipation bound vs final frequency",
                x_label: "omega_i",
                y_label: "bound",
                x_col: 0,
            series: vec![(3, "bound".into())],
                log_x: false,
            },
        ];
        summary.push(format!("protocol: wrote {}", write_plot_script(&ctx.out, &specs)?.display()));
    }
    Ok(RunOutcome { summary, failures })
}
