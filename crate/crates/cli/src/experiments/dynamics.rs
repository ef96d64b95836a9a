use prethermal_core::dynamics::{
    analyze_timescales, build_redfield_generator, closed_form_evolution, evolve, log_time_grid, prethermal_state,
    unified_generator_v, Generator, RedfieldVariant, ReducedState, TRAJECTORY_CSV_HEADER,
};
use prethermal_core::probes::initial_state;
use rayon::prelude::*;

use super::Outcome;
use crate::config::{parse_variant, Config};
use crate::error::CliError;
use crate::output::{num, Artifact, Csv};
use crate::plot::{Chart, Series, Style};

pub const DYNAMICS_CSV_HEADER: &str = "t,p,sigmaR,sigmaI,ground_pop,trace_err,min_eig,p_closed,sigmaR_closed";

const TRACE_LIMIT: f64 = 1e-8;
const POSITIVITY_LIMIT: f64 = -1e-8;

struct InitResult {
    label: String,
    csv: String,
    plot: Option<String>,
    summary: String,
    violations: Vec<String>,
}

pub fn run_dynamics(cfg: &Config) -> Result<Outcome, CliError> {
    let d = &cfg.dynamics;
    let model = cfg.model("v", 2, cfg.probe.beta)?;
    let rates = model.thermal_rates();
    let delta = model.delta();
    let variant = (d.generator != "reduced").then(|| parse_variant(&d.generator));
    let generator: Generator = match variant {
        None => unified_generator_v(rates, delta)?,
        Some(v) => build_redfield_generator(&model, v, cfg.tolerances.cluster_tol)?,
    };
    let times = log_time_grid(d.t_min, d.t_max, d.points)?;

    let results = d
        .initial
        .par_iter()
        .map(|name| -> Result<InitResult, CliError> {
            let prepared = initial_state(cfg.initial_condition(name), &model)?;
            let init = ReducedState::from_density(&prepared.rho);
            let traj = evolve(&generator, &prepared.rho, &times)?;
            let rep = analyze_timescales(&generator, Some(&generator.state_vector(&prepared.rho)?), &Default::default())?;
            let plateau_t = rep.plateau_time();
            let oracle = prethermal_state(model.beta(), model.nu(), prepared.xi)?;

            let mut csv = Csv::new(DYNAMICS_CSV_HEADER);
            let mut max_dev: f64 = 0.0;
            let mut closed_series = Vec::with_capacity(times.len());
            for s in &traj.snapshots {
                let r = s.reduced();
                let c = closed_form_evolution(rates, delta, init, s.t)?;
                // The closed form carries no imaginary coherence.
                max_dev = max_dev.max((r.p - c.p).abs()).max((r.sigma_r - c.sigma_r).abs());
                closed_series.push((s.t, c));
                csv.row([
                    num(s.t),
                    num(r.p),
                    num(r.sigma_r),
                    num(r.sigma_i),
                    num(s.rho.populations()[0]),
                    num(s.trace_error),
                    num(s.min_eigenvalue),
                    num(c.p),
                    num(c.sigma_r),
                ]);
            }
            let (plateau_p, plateau_s) = if plateau_t.is_finite() {
                let r = evolve(&generator, &prepared.rho, &[plateau_t])?.snapshots[0].reduced();
                (r.p, r.sigma_r)
            } else {
                (f64::NAN, f64::NAN)
            };

            csv.note("initial", name);
            csv.note("generator", &d.generator);
            csv.note("xi", num(prepared.xi));
            csv.note("max_closed_form_deviation", num(max_dev));
            csv.note("max_trace_error", num(traj.max_trace_error()));
            csv.note("min_eigenvalue", num(traj.min_eigenvalue()));
            csv.note("propagation", traj.method.as_str());
            csv.note("tau1", num(rep.tau1));
            csv.note("tau2", num(rep.tau2));
            csv.note("plateau_time", num(plateau_t));
            csv.note("plateau_p", num(plateau_p));
            csv.note("plateau_sigmaR", num(plateau_s));
            csv.note("prethermal_p", num(oracle.p_tilde));
            csv.note("prethermal_sigmaR", num(oracle.sigma_tilde));

            let mut violations = Vec::new();
            if traj.max_trace_error() > TRACE_LIMIT {
                violations.push(format!("{name}: trace error {:e} exceeds {TRACE_LIMIT:e}", traj.max_trace_error()));
            }
            // The nonsecular equation is not completely positive.
            if variant != Some(RedfieldVariant::Nonsecular) && traj.min_eigenvalue() < POSITIVITY_LIMIT {
                violations.push(format!("{name}: minimum eigenvalue {:e} below {POSITIVITY_LIMIT:e}", traj.min_eigenvalue()));
            }

            let plot = cfg.run.plots.then(|| {
                let pick = |f: fn(&ReducedState) -> f64| -> Vec<(f64, f64)> {
                    traj.snapshots.iter().map(|s| (s.t, f(&s.reduced()))).collect()
                };
                let closed = |f: fn(&ReducedState) -> f64| -> Vec<(f64, f64)> {
                    closed_series.iter().map(|(t, c)| (*t, f(c))).collect()
                };
                Chart {
                    title: format!("V-model dynamics, {name} initial state"),
                    x_label: "t".into(),
                    y_label: "population / coherence".into(),
                    log_x: true,
                    log_y: false,
                    series: vec![
                        Series::new("p (numeric)", pick(|r| r.p), Style::Dotted),
                        Series::new("σᴿ (numeric)", pick(|r| r.sigma_r), Style::Solid),
                        Series::new("p (closed form)", closed(|r| r.p), Style::Dashed),
                        Series::new("σᴿ (closed form)", closed(|r| r.sigma_r), Style::Dashed),
                    ],
                }
                .to_svg()
            });
            Ok(InitResult {
                label: name.clone(),
                csv: csv.finish(),
                plot,
                summary: format!(
                    "{name}: xi={:.6} plateau (p, sigmaR)=({plateau_p:.7}, {plateau_s:.7}) prethermal=({:.7}, {:.7}) max|numeric-closed|={max_dev:.3e} tau1={:.4e} tau2={:.4e}",
                    prepared.xi, oracle.p_tilde, oracle.sigma_tilde, rep.tau1, rep.tau2
                ),
                violations,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Outcome::default();
    for r in results {
        out.artifacts
            .push(Artifact::new(format!("dynamics_{}.csv", r.label), r.csv));
        if let Some(svg) = r.plot {
            out.artifacts
                .push(Artifact::new(format!("dynamics_{}.svg", r.label), svg));
        }
        out.summary.push(r.summary);
        out.violations.extend(r.violations);
    }
    debug_assert!(DYNAMICS_CSV_HEADER.starts_with(TRAJECTORY_CSV_HEADER));
    Ok(out)
}
