use prethermal_core::dynamics::{analyze_timescales, build_redfield_generator, lepe_eigenvalues, log_time_grid};
use prethermal_core::metrology::{evolved_fisher, optimal_degeneracy, qfi_equilibrium_n, time_weighted};
use prethermal_core::probes::{initial_state, InitialCondition, ProbeModel};
use rayon::prelude::*;

use super::Outcome;
use crate::config::{beta_grid, parse_variant, Config};
use crate::error::CliError;
use crate::output::{num, Artifact, Csv};
use crate::plot::{Chart, Series, Style};

pub const NLEVEL_QFI_HEADER: &str = "N,t,cfi,qfi,qfi_equilibrium";
pub const NLEVEL_TQFI_HEADER: &str =
    "beta,N,qfi_prethermal,qfi_equilibrium,tau1,tau2,tqfi_prethermal,tqfi_equilibrium,tau_mode";

/// Multiple of `τ1` at which the long-time QFI is read off.
const LATE_TIME_FACTOR: f64 = 100.0;

/// Plateau and long-time QFI of the ground-initialized probe at one `β`.
#[derive(Clone, Copy, Debug)]
struct Point {
    tau1: f64,
    tau2: f64,
    plateau_qfi: f64,
    late_qfi: f64,
}

fn probe_point(cfg: &Config, model: &ProbeModel) -> Result<Point, CliError> {
    let variant = parse_variant(&cfg.nlevel.variant);
    let tol = cfg.tolerances.cluster_tol;
    let gen = build_redfield_generator(model, variant, tol)?;
    let rho0 = initial_state(InitialCondition::Ground, model)?.rho;
    let rep = analyze_timescales(&gen, Some(&gen.state_vector(&rho0)?), &Default::default())?;
    if !rep.tau1.is_finite() {
        return Err(CliError::Numeric(format!(
            "N = {}: slowest mode does not relax, no long-time limit",
            model.degeneracy()
        )));
    }
    let times = [rep.plateau_time(), LATE_TIME_FACTOR * rep.tau1];
    let f = evolved_fisher(model, variant, tol, &rho0, &times, cfg.tolerances.fd_step)?;
    Ok(Point {
        tau1: rep.tau1,
        tau2: rep.tau2,
        plateau_qfi: f[0].1,
        late_qfi: f[1].1,
    })
}

struct Trace {
    n: usize,
    point: Point,
    series: Vec<(f64, f64, f64)>,
    f_eq: f64,
}

pub fn run_nlevel(cfg: &Config) -> Result<Outcome, CliError> {
    let c = &cfg.nlevel;
    let (nu, beta) = (cfg.probe.nu, cfg.probe.beta);
    let variant = parse_variant(&c.variant);
    let times = log_time_grid(c.t_min, c.t_max, c.points)?;

    let traces = c
        .levels
        .par_iter()
        .map(|&n| -> Result<Trace, CliError> {
            let model = cfg.model("nlevel", n, beta)?;
            let rho0 = initial_state(InitialCondition::Ground, &model)?.rho;
            let f = evolved_fisher(
                &model,
                variant,
                cfg.tolerances.cluster_tol,
                &rho0,
                &times,
                cfg.tolerances.fd_step,
            )?;
            Ok(Trace {
                n,
                point: probe_point(cfg, &model)?,
                series: times.iter().zip(f).map(|(&t, (cf, qf))| (t, cf, qf)).collect(),
                f_eq: qfi_equilibrium_n(beta, nu, n)?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Outcome::default();
    let mut qcsv = Csv::new(NLEVEL_QFI_HEADER);
    for tr in &traces {
        for &(t, cf, qf) in &tr.series {
            qcsv.row([tr.n.to_string(), num(t), num(cf), num(qf), num(tr.f_eq)]);
            if !(qf.is_finite() && cf.is_finite()) {
                out.violations
                    .push(format!("N={} t={t:e}: non-finite Fisher information", tr.n));
            } else if qf < cf - (1e-9 + 1e-6 * qf.abs()) {
                out.violations
                    .push(format!("N={} t={t:e}: QFI {qf:e} below CFI {cf:e}", tr.n));
            }
        }
    }
    let mut spread: f64 = 0.0;
    let mut late_err: f64 = 0.0;
    for a in &traces {
        for b in &traces {
            spread = spread.max((a.point.plateau_qfi / b.point.plateau_qfi - 1.0).abs());
        }
        late_err = late_err.max((a.point.late_qfi / a.f_eq - 1.0).abs());
        let p = a.point;
        let key = |s: &str| format!("N{}_{s}", a.n);
        qcsv.note(&key("tau1"), num(p.tau1));
        qcsv.note(&key("tau2"), num(p.tau2));
        qcsv.note(&key("plateau_time"), num((p.tau1 * p.tau2).sqrt()));
        qcsv.note(&key("plateau_qfi"), num(p.plateau_qfi));
        qcsv.note(&key("late_time"), num(LATE_TIME_FACTOR * p.tau1));
        qcsv.note(&key("late_qfi"), num(p.late_qfi));
        qcsv.note(&key("equilibrium_qfi"), num(a.f_eq));
        out.summary.push(format!(
            "N={}: tau1={:.4e} tau2={:.4e} plateau QFI={:.6e} QFI at {LATE_TIME_FACTOR}tau1={:.6e} equilibrium={:.6e}",
            a.n, p.tau1, p.tau2, p.plateau_qfi, p.late_qfi, a.f_eq
        ));
    }
    qcsv.note("max_plateau_spread", num(spread));
    qcsv.note("max_late_relative_error", num(late_err));
    qcsv.note("variant", variant);
    out.summary.push(format!(
        "max pairwise plateau spread {spread:.3e}, max long-time deviation from equilibrium {late_err:.3e}"
    ));
    out.artifacts.push(Artifact::new("nlevel_qfi.csv", qcsv.finish()));

    // TQFI against β: the prethermal QFI is always the exact plateau value;
    // `fixed` divides by the timescales found at the configured β, `exact`
    // by those at each β.
    let betas = beta_grid(c.beta_min, c.beta_max, c.beta_points);
    let jobs: Vec<(usize, usize)> = (0..betas.len())
        .flat_map(|i| (0..traces.len()).map(move |j| (i, j)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(i, j)| probe_point(cfg, &cfg.model("nlevel", traces[j].n, betas[i])?))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tcsv = Csv::new(NLEVEL_TQFI_HEADER);
    let mut curves: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 2 * traces.len() + 1];
    for (i, &b) in betas.iter().enumerate() {
        for (j, tr) in traces.iter().enumerate() {
            let p = points[i * traces.len() + j];
            let f_eq = qfi_equilibrium_n(b, nu, tr.n)?;
            for (mode, tau1, tau2) in [("fixed", tr.point.tau1, tr.point.tau2), ("exact", p.tau1, p.tau2)] {
                let (tp, te) = (time_weighted(p.plateau_qfi, tau2)?, time_weighted(f_eq, tau1)?);
                tcsv.row([
                    num(b),
                    tr.n.to_string(),
                    num(p.plateau_qfi),
                    num(f_eq),
                    num(tau1),
                    num(tau2),
                    num(tp),
                    num(te),
                    mode.to_owned(),
                ]);
                if mode == "exact" {
                    curves[2 * j].push((b, tp));
                    curves[2 * j + 1].push((b, te));
                }
            }
        }
        let v = cfg.model("v", 2, b)?;
        let tau1 = lepe_eigenvalues(v.thermal_rates(), v.delta()).tau1();
        let star = optimal_degeneracy(b, nu)?;
        let te = time_weighted(star.f_rounded, tau1)?;
        tcsv.row([
            num(b),
            star.rounded.to_string(),
            num(f64::NAN),
            num(star.f_rounded),
            num(tau1),
            num(f64::NAN),
            num(f64::NAN),
            num(te),
            "nstar".to_owned(),
        ]);
        curves[2 * traces.len()].push((b, te));
    }
    tcsv.note("fixed_tau_beta", num(beta));
    tcsv.note("nstar_tau1", "V-model slowest relaxation time at each beta");
    out.artifacts.push(Artifact::new("nlevel_tqfi.csv", tcsv.finish()));

    if cfg.run.plots {
        let mut series: Vec<Series> = traces
            .iter()
            .map(|tr| {
                Series::new(
                    format!("QFI N={}", tr.n),
                    tr.series.iter().map(|&(t, _, q)| (t, q)).collect(),
                    Style::Solid,
                )
            })
            .collect();
        for tr in &traces {
            series.push(Series::new(
                format!("equilibrium N={}", tr.n),
                vec![(times[0], tr.f_eq), (times[times.len() - 1], tr.f_eq)],
                Style::Dashed,
            ));
        }
        let chart = Chart {
            title: format!("QFI of N-level probes from the ground state, β={beta}"),
            x_label: "t".into(),
            y_label: "QFI".into(),
            log_x: true,
            log_y: false,
            series,
        };
        out.artifacts.push(Artifact::new("nlevel_qfi.svg", chart.to_svg()));
        let mut series = Vec::new();
        for (j, tr) in traces.iter().enumerate() {
            series.push(Series::new(
                format!("prethermal N={}", tr.n),
                curves[2 * j].clone(),
                Style::Solid,
            ));
            series.push(Series::new(
                format!("equilibrium N={}", tr.n),
                curves[2 * j + 1].clone(),
                Style::Dotted,
            ));
        }
        series.push(Series::new(
            "equilibrium N*",
            curves[2 * traces.len()].clone(),
            Style::Dashed,
        ));
        let chart = Chart {
            title: "Time-weighted QFI (per-β timescales)".into(),
            x_label: "β".into(),
            y_label: "F / τ".into(),
            log_x: false,
            log_y: true,
            series,
        };
        out.artifacts.push(Artifact::new("nlevel_tqfi.svg", chart.to_svg()));
    }
    Ok(out)
}
