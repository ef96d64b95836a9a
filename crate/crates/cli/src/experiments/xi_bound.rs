use prethermal_core::sampling::{write_samples_csv, xi_bound_study, CoherenceSampling};
use serde::Serialize;

use super::Outcome;
use crate::config::Config;
use crate::error::CliError;
use crate::output::{capture, Artifact};
use crate::plot::{Chart, Series, Style};

#[derive(Serialize)]
struct Summary<'a> {
    samples: usize,
    seed: u64,
    mode: &'a str,
    physical: usize,
    xi_min: Option<f64>,
    xi_max: Option<f64>,
    sigma0r_abs_max: Option<f64>,
    xi_violations: usize,
    sigma0r_violations: usize,
    bound_holds: bool,
    witnesses: Vec<WitnessRecord>,
}

#[derive(Serialize)]
struct WitnessRecord {
    label: &'static str,
    xi: f64,
    expected_xi: f64,
    min_eigenvalue: f64,
    passes: bool,
}

pub fn run_xi_bound(cfg: &Config) -> Result<Outcome, CliError> {
    let x = &cfg.xi_bound;
    let mode = match x.mode.as_str() {
        "grid" => CoherenceSampling::Grid {
            bins: x.bins,
            lo: x.lo,
            hi: x.hi,
        },
        _ => CoherenceSampling::Uniform,
    };
    let study = xi_bound_study(x.samples, cfg.run.seed, mode);
    let s = &study.summary;
    let summary = Summary {
        samples: s.total,
        seed: cfg.run.seed,
        mode: &x.mode,
        physical: s.physical,
        xi_min: s.xi_min,
        xi_max: s.xi_max,
        sigma0r_abs_max: s.sigma_abs_max,
        xi_violations: s.xi_violations,
        sigma0r_violations: s.sigma_violations,
        bound_holds: s.bound_holds(),
        witnesses: study
            .witnesses
            .iter()
            .map(|w| WitnessRecord {
                label: w.label,
                xi: w.state.xi,
                expected_xi: w.expected_xi,
                min_eigenvalue: w.state.min_eigenvalue,
                passes: w.passes(),
            })
            .collect(),
    };

    let mut out = Outcome::default();
    out.artifacts.push(Artifact::new(
        "xi_samples.csv",
        capture(|w| write_samples_csv(w, &study.samples)),
    ));
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    out.artifacts.push(Artifact::new("xi_summary.json", json));

    let fmt = |v: Option<f64>| v.map_or("none".to_owned(), |v| format!("{v:.6}"));
    out.summary.push(format!(
        "{} samples ({}), {} physical; xi in [{}, {}]; max |sigma0R| {}",
        s.total,
        x.mode,
        s.physical,
        fmt(s.xi_min),
        fmt(s.xi_max),
        fmt(s.sigma_abs_max)
    ));
    for w in &study.witnesses {
        out.summary.push(format!(
            "witness {}: xi={} expected {} -> {}",
            w.label,
            w.state.xi,
            w.expected_xi,
            if w.passes() { "pass" } else { "FAIL" }
        ));
    }
    if s.xi_violations > 0 {
        out.violations
            .push(format!("{} physical samples with xi outside [-1, 0]", s.xi_violations));
    }
    if s.sigma_violations > 0 {
        out.violations
            .push(format!("{} physical samples with |sigma0R| > 1/2", s.sigma_violations));
    }
    for w in study.witnesses.iter().filter(|w| !w.passes()) {
        out.violations.push(format!("endpoint witness {} fails", w.label));
    }

    if cfg.run.plots {
        let pts = |phys: bool| {
            study
                .samples
                .iter()
                .filter(|c| c.physical == phys)
                .map(|c| (c.sigma0_r, c.xi))
                .collect()
        };
        let chart = Chart {
            title: "Physical initial states".into(),
            x_label: "σ0ᴿ".into(),
            y_label: "ξ".into(),
            log_x: false,
            log_y: false,
            series: vec![Series::new("physical", pts(true), Style::Markers)],
        };
        out.artifacts.push(Artifact::new("xi_samples.svg", chart.to_svg()));
    }
    Ok(out)
}
