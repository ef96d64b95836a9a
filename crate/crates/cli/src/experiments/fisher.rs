use prethermal_core::dynamics::{lepe_eigenvalues, prethermal_state};
use prethermal_core::metrology::{
    cfi_energy_basis, cfi_prethermal_analytic, optimal_degeneracy, qfi_equilibrium_v, qfi_from_state,
    qfi_prethermal_analytic, time_weighted, write_sweep_csv, SweepRow,
};
use prethermal_core::probes::initial_state;
use rayon::prelude::*;

use super::Outcome;
use crate::config::{beta_grid, Config};
use crate::error::CliError;
use crate::output::{capture, num, Artifact, Csv};
use crate::plot::{Chart, Series, Style};

const NUMERIC_REL_TOL: f64 = 1e-6;
const EQUALITY_TOL: f64 = 1e-10;

/// Per-`β` prethermal values for one initialization.
struct PreRow {
    cfi: f64,
    qfi: f64,
    tcfi: f64,
    tqfi: f64,
}

struct BetaBlock {
    rows: Vec<SweepRow>,
    pre: Vec<PreRow>,
    /// Best equilibrium TQFI: the V model or `N*` levels.
    eq_tqfi: f64,
    eq_v_tqfi: f64,
    nstar_tqfi: f64,
    max_rel_err: f64,
    violations: Vec<String>,
}

pub fn run_fisher_sweep(cfg: &Config) -> Result<Outcome, CliError> {
    let s = &cfg.sweep;
    let nu = cfg.probe.nu;
    let base = cfg.model("v", 2, cfg.probe.beta)?;
    let inits: Vec<(String, f64)> = s
        .initial
        .iter()
        .map(|n| Ok((n.clone(), initial_state(cfg.initial_condition(n), &base)?.xi)))
        .collect::<Result<_, CliError>>()?;
    let betas = beta_grid(s.beta_min, s.beta_max, s.beta_points);

    let blocks = betas
        .par_iter()
        .map(|&beta| -> Result<BetaBlock, CliError> {
            let model = cfg.model("v", 2, beta)?;
            let lepe = lepe_eigenvalues(model.thermal_rates(), model.delta());
            let (tau1, tau2) = (lepe.tau1(), lepe.tau2());
            let mut rows = Vec::new();
            let mut pre = Vec::new();
            let mut max_rel_err: f64 = 0.0;
            let mut violations = Vec::new();
            for (label, xi) in &inits {
                let (ca, qa) = (
                    cfi_prethermal_analytic(beta, nu, *xi)?,
                    qfi_prethermal_analytic(beta, nu, *xi)?,
                );
                let state = prethermal_state(beta, nu, *xi)?;
                let (rho, drho) = (state.matrix(), state.matrix_derivative());
                let (cn, qn) = (cfi_energy_basis(&rho, &drho)?, qfi_from_state(&rho, &drho)?);
                for (got, want, what) in [(cn, ca, "CFI"), (qn, qa, "QFI")] {
                    let err = if want == 0.0 {
                        got.abs()
                    } else {
                        (got / want - 1.0).abs()
                    };
                    max_rel_err = max_rel_err.max(err);
                    if err > NUMERIC_REL_TOL {
                        violations.push(format!(
                            "beta={beta} {label}: numeric {what} {got:e} vs analytic {want:e}"
                        ));
                    }
                }
                if qn < cn - 1e-12 * qn.abs().max(1.0) {
                    violations.push(format!("beta={beta} {label}: QFI {qn:e} below CFI {cn:e}"));
                }
                if *xi == 0.0 && (qa - ca).abs() > EQUALITY_TOL {
                    violations.push(format!("beta={beta} {label}: CFI and QFI differ at xi=0"));
                }
                let (tcfi, tqfi) = (time_weighted(ca, tau2)?, time_weighted(qa, tau2)?);
                for (cfi, qfi, method) in [(ca, qa, "analytic"), (cn, qn, "numeric")] {
                    rows.push(SweepRow {
                        beta,
                        xi_or_n: *xi,
                        cfi,
                        qfi,
                        tau1,
                        tau2,
                        tcfi: time_weighted(cfi, tau2)?,
                        tqfi: time_weighted(qfi, tau2)?,
                        method: format!("prethermal-{label}-{method}"),
                    });
                }
                pre.push(PreRow {
                    cfi: ca,
                    qfi: qa,
                    tcfi,
                    tqfi,
                });
            }

            let feq = qfi_equilibrium_v(beta, nu)?;
            let gibbs = model.gibbs_state();
            let dgibbs = model.gibbs_state_derivative();
            let (ceq_n, feq_n) = (cfi_energy_basis(&gibbs, &dgibbs)?, qfi_from_state(&gibbs, &dgibbs)?);
            let eq_err = (feq_n / feq - 1.0).abs().max((ceq_n / feq - 1.0).abs());
            max_rel_err = max_rel_err.max(eq_err);
            if eq_err > NUMERIC_REL_TOL {
                violations.push(format!(
                    "beta={beta}: numeric equilibrium QFI {feq_n:e} vs analytic {feq:e}"
                ));
            }
            let nstar = optimal_degeneracy(beta, nu)?;
            let eq_v_tqfi = time_weighted(feq, tau1)?;
            let nstar_tqfi = time_weighted(nstar.f_rounded, tau1)?;
            for (n, cfi, qfi, method) in [
                (2.0, feq, feq, "equilibrium-analytic"),
                (2.0, ceq_n, feq_n, "equilibrium-numeric"),
                (
                    nstar.rounded as f64,
                    nstar.f_rounded,
                    nstar.f_rounded,
                    "equilibrium-nstar",
                ),
            ] {
                rows.push(SweepRow {
                    beta,
                    xi_or_n: n,
                    cfi,
                    qfi,
                    tau1,
                    tau2,
                    tcfi: time_weighted(cfi, tau1)?,
                    tqfi: time_weighted(qfi, tau1)?,
                    method: method.into(),
                });
            }
            Ok(BetaBlock {
                rows,
                pre,
                eq_tqfi: eq_v_tqfi.max(nstar_tqfi),
                eq_v_tqfi,
                nstar_tqfi,
                max_rel_err,
                violations,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows: Vec<SweepRow> = blocks.iter().flat_map(|b| b.rows.iter().cloned()).collect();
    let mut csv = Csv::from_text(capture(|w| write_sweep_csv(w, &rows)));
    let mut out = Outcome::default();
    for (i, (label, xi)) in inits.iter().enumerate() {
        let min_ratio = |f: fn(&PreRow) -> f64| {
            blocks
                .iter()
                .map(|b| f(&b.pre[i]) / b.eq_tqfi)
                .fold(f64::INFINITY, f64::min)
        };
        let (adv_c, adv_q) = (min_ratio(|p| p.tcfi), min_ratio(|p| p.tqfi));
        csv.note(&format!("xi_{label}"), num(*xi));
        csv.note(&format!("min_advantage_tcfi_{label}"), num(adv_c));
        csv.note(&format!("min_advantage_tqfi_{label}"), num(adv_q));
        out.summary.push(format!(
            "{label}: xi={xi:.6} min over beta of TCFI/TQFI_eq = {adv_c:.4e}, TQFI/TQFI_eq = {adv_q:.4e}"
        ));
    }
    let max_rel_err = blocks.iter().map(|b| b.max_rel_err).fold(0.0, f64::max);
    csv.note("max_numeric_relative_error", num(max_rel_err));
    csv.note("equilibrium_reference", "max(V model, N* levels) over tau1");
    out.summary.push(format!(
        "{} beta points in [{}, {}], max numeric/analytic relative error {max_rel_err:.3e}",
        betas.len(),
        s.beta_min,
        s.beta_max
    ));
    if let Some(i) = betas.iter().position(|b| (b - 4.0).abs() < 1e-12) {
        let b = &blocks[i];
        let ground = inits.iter().position(|(l, _)| l == "ground");
        out.summary.push(format!(
            "beta=4: equilibrium QFI {:.6}{}",
            qfi_equilibrium_v(4.0, nu)?,
            ground.map_or(String::new(), |g| format!(
                ", prethermal ground QFI {:.6}",
                b.pre[g].qfi
            ))
        ));
    }
    out.artifacts.push(Artifact::new("fisher_sweep.csv", csv.finish()));

    if cfg.run.plots {
        let mut series = Vec::new();
        for (i, (label, _)) in inits.iter().enumerate() {
            let pts = |f: fn(&PreRow) -> f64| betas.iter().zip(&blocks).map(|(b, k)| (*b, f(&k.pre[i]))).collect();
            series.push(Series::new(
                format!("TQFI prethermal ({label})"),
                pts(|p| p.tqfi),
                Style::Solid,
            ));
            series.push(Series::new(
                format!("TCFI prethermal ({label})"),
                pts(|p| p.tcfi),
                Style::Dashed,
            ));
        }
        let eq = |f: fn(&BetaBlock) -> f64| betas.iter().zip(&blocks).map(|(b, k)| (*b, f(k))).collect();
        series.push(Series::new("TQFI equilibrium", eq(|k| k.eq_v_tqfi), Style::Dotted));
        series.push(Series::new(
            "TQFI equilibrium (N*)",
            eq(|k| k.nstar_tqfi),
            Style::Dotted,
        ));
        let chart = Chart {
            title: "Time-weighted Fisher information".into(),
            x_label: "β".into(),
            y_label: "F / τ".into(),
            log_x: false,
            log_y: true,
            series,
        };
        out.artifacts
            .push(Artifact::new("fisher_sweep_tqfi.svg", chart.to_svg()));
        let mut raw = Vec::new();
        for (i, (label, _)) in inits.iter().enumerate() {
            let pts = |f: fn(&PreRow) -> f64| betas.iter().zip(&blocks).map(|(b, k)| (*b, f(&k.pre[i]))).collect();
            raw.push(Series::new(
                format!("QFI prethermal ({label})"),
                pts(|p| p.qfi),
                Style::Solid,
            ));
            raw.push(Series::new(
                format!("CFI prethermal ({label})"),
                pts(|p| p.cfi),
                Style::Dashed,
            ));
        }
        raw.push(Series::new(
            "QFI equilibrium",
            betas
                .iter()
                .map(|&b| (b, qfi_equilibrium_v(b, nu).unwrap_or(f64::NAN)))
                .collect(),
            Style::Dotted,
        ));
        let chart = Chart {
            title: "Fisher information".into(),
            x_label: "β".into(),
            y_label: "F".into(),
            log_x: false,
            log_y: false,
            series: raw,
        };
        out.artifacts.push(Artifact::new("fisher_sweep.svg", chart.to_svg()));
    }
    out.violations = blocks.into_iter().flat_map(|b| b.violations).collect();
    Ok(out)
}
