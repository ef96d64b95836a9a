use prethermal_core::dynamics::{analyze_timescales, build_redfield_generator, lepe_eigenvalues};
use prethermal_core::probes::{initial_state, ProbeKind};

use super::Outcome;
use crate::config::{parse_variant, Config};
use crate::error::CliError;
use crate::output::{num, Artifact, Csv};
use crate::plot::{Chart, Series, Style};

pub const SPECTRUM_CSV_HEADER: &str = "index,re,im,tau,amplitude,active";

/// Range of `τ1/τ2` read as the "about 10⁶" separation.
const ORDER_RANGE: (f64, f64) = (1e6, 1e7);

pub fn run_spectrum(cfg: &Config) -> Result<Outcome, CliError> {
    let model = cfg.model(&cfg.probe.kind, cfg.probe.levels, cfg.probe.beta)?;
    let variant = parse_variant(&cfg.spectrum.variant);
    let gen = build_redfield_generator(&model, variant, cfg.tolerances.cluster_tol)?;
    let rho0 = initial_state(cfg.initial_condition(&cfg.spectrum.initial), &model)?.rho;
    let rep = analyze_timescales(&gen, Some(&gen.state_vector(&rho0)?), &Default::default())?;

    let mut csv = Csv::new(SPECTRUM_CSV_HEADER);
    for (i, m) in rep.modes.iter().enumerate() {
        csv.row([
            i.to_string(),
            num(m.eigenvalue.re),
            num(m.eigenvalue.im),
            num(m.tau),
            m.amplitude.map_or("NaN".into(), num),
            (m.active as u8).to_string(),
        ]);
    }
    let mut out = Outcome::default();
    csv.note("probe", &cfg.probe.kind);
    csv.note("variant", variant);
    csv.note("tau1", num(rep.tau1));
    csv.note("tau2", num(rep.tau2));
    csv.note("tau3", num(rep.tau3));
    csv.note("separation_ratio", num(rep.separation_ratio));
    csv.note("window_nonempty", rep.window_nonempty());
    csv.note("non_relaxing", rep.non_relaxing);
    csv.note("ill_conditioned", rep.ill_conditioned);
    out.summary.push(format!(
        "{} modes; tau1={:.5e} tau2={:.5e} tau3={:.5e} ratio={:.4e} window={}",
        rep.modes.len(),
        rep.tau1,
        rep.tau2,
        rep.tau3,
        rep.separation_ratio,
        if rep.window_nonempty() { "nonempty" } else { "empty" }
    ));

    if let ProbeKind::VModel { delta } = model.kind() {
        let lepe = lepe_eigenvalues(model.thermal_rates(), delta);
        // Each perturbative eigenvalue is compared with the nearest relaxation
        // rate among the active modes.
        for (name, l) in [
            ("lambda1", lepe.lambda1),
            ("lambda2", lepe.lambda2),
            ("lambda3", lepe.lambda3),
        ] {
            let nearest = rep
                .modes
                .iter()
                .filter(|m| m.active)
                .map(|m| m.eigenvalue.re)
                .min_by(|a, b| ((a - l).abs() / l.abs()).total_cmp(&((b - l).abs() / l.abs())))
                .unwrap_or(f64::NAN);
            let rel = (nearest - l).abs() / l.abs();
            csv.note(&format!("lepe_{name}"), num(l));
            csv.note(&format!("numeric_{name}"), num(nearest));
            csv.note(&format!("relative_error_{name}"), num(rel));
            out.summary.push(format!(
                "{name}: numeric {nearest:.6e} LEPE {l:.6e} relative error {rel:.2e}"
            ));
        }
        let consistent = (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&rep.separation_ratio);
        csv.note("lepe_separation_ratio", num(lepe.separation_ratio()));
        csv.note("ratio_consistent_with_1e6", consistent);
        out.summary.push(format!(
            "tau1/tau2 = {:.4e} ({} with the order 1e6 separation)",
            rep.separation_ratio,
            if consistent { "consistent" } else { "not consistent" }
        ));
    }
    out.artifacts.push(Artifact::new("spectrum.csv", csv.finish()));

    if cfg.run.plots {
        let pts = |active: bool| {
            rep.modes
                .iter()
                .filter(|m| m.active == active)
                .map(|m| (-m.eigenvalue.re, m.eigenvalue.im))
                .collect()
        };
        let chart = Chart {
            title: format!("Liouvillian spectrum ({variant})"),
            x_label: "-Re λ".into(),
            y_label: "Im λ".into(),
            log_x: true,
            log_y: false,
            series: vec![
                Series::new("excited modes", pts(true), Style::Markers),
                Series::new("inactive modes", pts(false), Style::Markers),
            ],
        };
        out.artifacts.push(Artifact::new("spectrum.svg", chart.to_svg()));
    }
    Ok(out)
}
