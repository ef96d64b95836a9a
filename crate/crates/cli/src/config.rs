//! Experiment configuration: a flat-section TOML file, overridden by flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use prethermal_core::dynamics::RedfieldVariant;
use prethermal_core::probes::{InitialCondition, ProbeModel};
use serde::{Deserialize, Serialize};

/// Largest number of excited levels the Liouvillian pipelines accept.
pub const MAX_LEVELS: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Dynamics,
    FisherSweep,
    Nlevel,
    XiBound,
    Spectrum,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Dynamics => "dynamics",
            Experiment::FisherSweep => "fisher-sweep",
            Experiment::Nlevel => "nlevel",
            Experiment::XiBound => "xi-bound",
            Experiment::Spectrum => "spectrum",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Set in manifests; must match the subcommand when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub run: RunSection,
    pub probe: ProbeSection,
    pub dynamics: DynamicsSection,
    pub sweep: SweepSection,
    pub nlevel: NlevelSection,
    pub xi_bound: XiBoundSection,
    pub spectrum: SpectrumSection,
    pub tolerances: ToleranceSection,
    /// Written into manifests, ignored on load.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub plots: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    /// `v`, `qubit` or `nlevel`.
    pub kind: String,
    pub nu: f64,
    /// Excited-state splitting (V model) or level spacing (N-level probe).
    pub delta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub beta_ambient: f64,
    /// Excited levels of an `nlevel` probe.
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    /// Any of `ground`, `mixed`, `thermal`.
    pub initial: Vec<String>,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    /// `reduced` for the three-variable equations, otherwise a Redfield variant.
    pub generator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_points: usize,
    pub initial: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NlevelSection {
    pub levels: Vec<usize>,
    pub variant: String,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XiBoundSection {
    pub samples: usize,
    /// `uniform` or `grid`.
    pub mode: String,
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub variant: String,
    /// Initial state used to decide which modes are excited.
    pub initial: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    /// Bohr-frequency clustering width for the unified equation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_tol: Option<f64>,
    /// Central-difference step in `β`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub artifacts: Vec<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 2024,
            plots: false,
        }
    }
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            kind: "v".into(),
            nu: 1.0,
            delta: 1e-4,
            gamma: 0.07,
            beta: 4.0,
            beta_ambient: 2.5,
            levels: 2,
        }
    }
}

fn all_initial() -> Vec<String> {
    ["ground", "mixed", "thermal"].map(String::from).to_vec()
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            initial: all_initial(),
            t_min: 1e-2,
            t_max: 1e9,
            points: 200,
            generator: "reduced".into(),
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            beta_min: 2.0,
            beta_max: 6.0,
            beta_points: 41,
            initial: all_initial(),
        }
    }
}

impl Default for NlevelSection {
    fn default() -> Self {
        Self {
            levels: vec![2, 3, 4],
            variant: "unified".into(),
            t_min: 1e-2,
            t_max: 1e10,
            points: 120,
            beta_min: 2.0,
            beta_max: 6.0,
            beta_points: 21,
        }
    }
}

impl Default for XiBoundSection {
    fn default() -> Self {
        Self {
            samples: prethermal_core::sampling::DEFAULT_SAMPLE_COUNT,
            mode: "uniform".into(),
            bins: 60,
            lo: -0.75,
            hi: 0.75,
        }
    }
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            variant: "unified".into(),
            initial: "ground".into(),
        }
    }
}

/// Flag values that replace config entries when given.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub plots: bool,
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub beta_ambient: Option<f64>,
    pub kind: Option<String>,
    pub levels: Option<Vec<usize>>,
    pub initial: Option<Vec<String>>,
    pub variant: Option<String>,
    pub points: Option<usize>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub beta_points: Option<usize>,
    pub samples: Option<usize>,
    pub mode: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Vec<String>> {
        let text = std::fs::read_to_string(path).map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
        Self::parse(&text).map_err(|e| vec![format!("{}: {e}", path.display())])
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string().trim_end().to_owned())
    }

    /// Applies flag overrides for `exp`, mapping the generic flags onto the
    /// section that experiment reads.
    pub fn apply(&mut self, exp: Experiment, o: &Overrides) {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        set(&mut self.run.seed, &o.seed);
        self.run.plots |= o.plots;
        set(&mut self.probe.nu, &o.nu);
        set(&mut self.probe.delta, &o.delta);
        set(&mut self.probe.gamma, &o.gamma);
        set(&mut self.probe.beta, &o.beta);
        set(&mut self.probe.beta_ambient, &o.beta_ambient);
        set(&mut self.probe.kind, &o.kind);
        match exp {
            Experiment::Dynamics => {
                set(&mut self.dynamics.initial, &o.initial);
                set(&mut self.dynamics.generator, &o.variant);
                set(&mut self.dynamics.points, &o.points);
                set(&mut self.dynamics.t_min, &o.t_min);
                set(&mut self.dynamics.t_max, &o.t_max);
            }
            Experiment::FisherSweep => {
                set(&mut self.sweep.initial, &o.initial);
                set(&mut self.sweep.beta_min, &o.beta_min);
                set(&mut self.sweep.beta_max, &o.beta_max);
                set(&mut self.sweep.beta_points, &o.beta_points);
            }
            Experiment::Nlevel => {
                set(&mut self.nlevel.levels, &o.levels);
                set(&mut self.nlevel.variant, &o.variant);
                set(&mut self.nlevel.points, &o.points);
                set(&mut self.nlevel.t_min, &o.t_min);
                set(&mut self.nlevel.t_max, &o.t_max);
                set(&mut self.nlevel.beta_min, &o.beta_min);
                set(&mut self.nlevel.beta_max, &o.beta_max);
                set(&mut self.nlevel.beta_points, &o.beta_points);
            }
            Experiment::XiBound => {
                set(&mut self.xi_bound.samples, &o.samples);
                set(&mut self.xi_bound.mode, &o.mode);
            }
            Experiment::Spectrum => {
                if let Some(l) = o.levels.as_ref().and_then(|l| l.first()) {
                    self.probe.levels = *l;
                }
                set(&mut self.spectrum.variant, &o.variant);
                if let Some(i) = o.initial.as_ref().and_then(|i| i.first()) {
                    self.spectrum.initial = i.clone();
                }
            }
        }
    }

    /// Every problem with the configuration for `exp`, in one list.
    pub fn validate(&self, exp: Experiment) -> Vec<String> {
        let mut errs = Vec::new();
        if let Some(e) = self.experiment {
            if e != exp {
                errs.push(format!("config is for experiment `{e}`, not `{exp}`"));
            }
        }
        let p = &self.probe;
        if !(p.beta_ambient > 0.0 && p.beta_ambient.is_finite()) {
            errs.push(format!(
                "probe.beta_ambient = {} must be positive and finite",
                p.beta_ambient
            ));
        }
        match exp {
            Experiment::Dynamics => {
                if p.kind != "v" {
                    errs.push(format!("dynamics needs probe.kind = \"v\", got \"{}\"", p.kind));
                }
                self.check_model(&mut errs, "v", 2);
                check_initials(&mut errs, "dynamics.initial", &self.dynamics.initial);
                check_time_grid(
                    &mut errs,
                    "dynamics",
                    self.dynamics.t_min,
                    self.dynamics.t_max,
                    self.dynamics.points,
                );
                if self.dynamics.generator != "reduced" {
                    check_variant(&mut errs, "dynamics.generator", &self.dynamics.generator);
                }
            }
            Experiment::FisherSweep => {
                if p.kind != "v" {
                    errs.push(format!("fisher-sweep needs probe.kind = \"v\", got \"{}\"", p.kind));
                }
                self.check_model(&mut errs, "v", 2);
                check_initials(&mut errs, "sweep.initial", &self.sweep.initial);
                check_beta_grid(
                    &mut errs,
                    "sweep",
                    self.sweep.beta_min,
                    self.sweep.beta_max,
                    self.sweep.beta_points,
                );
            }
            Experiment::Nlevel => {
                let n = &self.nlevel;
                if n.levels.is_empty() {
                    errs.push("nlevel.levels is empty".into());
                }
                for &l in &n.levels {
                    check_levels(&mut errs, "nlevel.levels", l);
                    if (1..=MAX_LEVELS).contains(&l) {
                        self.check_model(&mut errs, "nlevel", l);
                    }
                }
                check_variant(&mut errs, "nlevel.variant", &n.variant);
                check_time_grid(&mut errs, "nlevel", n.t_min, n.t_max, n.points);
                check_beta_grid(&mut errs, "nlevel", n.beta_min, n.beta_max, n.beta_points);
            }
            Experiment::XiBound => {
                let x = &self.xi_bound;
                match x.mode.as_str() {
                    "uniform" => {}
                    "grid" => {
                        if x.bins == 0 {
                            errs.push("xi_bound.bins must be at least 1".into());
                        }
                        if !(x.lo < x.hi && x.lo.is_finite() && x.hi.is_finite()) {
                            errs.push(format!("xi_bound grid needs lo < hi, got [{}, {}]", x.lo, x.hi));
                        }
                    }
                    other => errs.push(format!("xi_bound.mode = \"{other}\": expected \"uniform\" or \"grid\"")),
                }
            }
            Experiment::Spectrum => {
                match p.kind.as_str() {
                    "v" | "qubit" => self.check_model(&mut errs, &p.kind, 2),
                    "nlevel" => {
                        check_levels(&mut errs, "probe.levels", p.levels);
                        if (1..=MAX_LEVELS).contains(&p.levels) {
                            self.check_model(&mut errs, "nlevel", p.levels);
                        }
                    }
                    other => errs.push(format!(
                        "probe.kind = \"{other}\": expected \"v\", \"qubit\" or \"nlevel\""
                    )),
                }
                check_variant(&mut errs, "spectrum.variant", &self.spectrum.variant);
                check_initials(
                    &mut errs,
                    "spectrum.initial",
                    std::slice::from_ref(&self.spectrum.initial),
                );
            }
        }
        if let Some(t) = self.tolerances.cluster_tol {
            if !(t >= 0.0 && t.is_finite()) {
                errs.push(format!("tolerances.cluster_tol = {t} must be non-negative and finite"));
            }
        }
        if let Some(h) = self.tolerances.fd_step {
            if !(h > 0.0 && h.is_finite()) {
                errs.push(format!("tolerances.fd_step = {h} must be positive and finite"));
            }
        }
        errs
    }

    fn check_model(&self, errs: &mut Vec<String>, kind: &str, levels: usize) {
        if let Err(e) = self.model(kind, levels, self.probe.beta) {
            let msg = format!("probe: {e}");
            if !errs.contains(&msg) {
                errs.push(msg);
            }
        }
    }

    /// Probe described by the `[probe]` section at inverse temperature `beta`.
    pub fn model(&self, kind: &str, levels: usize, beta: f64) -> prethermal_core::Result<ProbeModel> {
        let p = &self.probe;
        match kind {
            "qubit" => ProbeModel::qubit(p.nu, p.gamma, beta),
            "nlevel" => ProbeModel::n_level(p.nu, levels, p.delta, p.gamma, beta),
            _ => ProbeModel::v_model(p.nu, p.delta, p.gamma, beta),
        }
    }

    pub fn initial_condition(&self, name: &str) -> InitialCondition {
        parse_initial(name, self.probe.beta_ambient).expect("validated initial condition")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub fn parse_initial(name: &str, beta_ambient: f64) -> Option<InitialCondition> {
    match name {
        "ground" => Some(InitialCondition::Ground),
        "mixed" => Some(InitialCondition::MaximallyMixed),
        "thermal" => Some(InitialCondition::AmbientThermal { beta_ambient }),
        _ => None,
    }
}

pub fn parse_variant(s: &str) -> RedfieldVariant {
    RedfieldVariant::from_str(s).expect("validated variant")
}

fn check_initials(errs: &mut Vec<String>, key: &str, names: &[String]) {
    if names.is_empty() {
        errs.push(format!("{key} is empty"));
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            errs.push(format!("{key}: \"{n}\" listed twice"));
        }
        if parse_initial(n, 1.0).is_none() {
            errs.push(format!(
                "{key}: unknown initial condition \"{n}\" (expected ground, mixed or thermal)"
            ));
        }
    }
}

fn check_variant(errs: &mut Vec<String>, key: &str, v: &str) {
    if let Err(e) = RedfieldVariant::from_str(v) {
        errs.push(format!("{key}: {e}"));
    }
}

fn check_levels(errs: &mut Vec<String>, key: &str, n: usize) {
    if n == 0 {
        errs.push(format!("{key}: N = 0, at least one excited level is required"));
    } else if n > MAX_LEVELS {
        let d = (n + 1) * (n + 1);
        let cap = (MAX_LEVELS + 1) * (MAX_LEVELS + 1);
        errs.push(format!(
            "{key}: N = {n} exceeds the cap of {MAX_LEVELS} (Liouvillian dimension {d} > {cap})"
        ));
    }
}

fn check_time_grid(errs: &mut Vec<String>, section: &str, t_min: f64, t_max: f64, points: usize) {
    if points < 2 {
        errs.push(format!(
            "{section}.points = {points}: the time grid needs at least 2 points"
        ));
    }
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        errs.push(format!(
            "{section}: time grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]"
        ));
    }
}

fn check_beta_grid(errs: &mut Vec<String>, section: &str, lo: f64, hi: f64, points: usize) {
    if points == 0 {
        errs.push(format!("{section}.beta_points = 0: the beta grid is empty"));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        errs.push(format!(
            "{section}: beta grid needs 0 < beta_min <= beta_max, got [{lo}, {hi}]"
        ));
    } else if points > 1 && hi == lo {
        errs.push(format!("{section}: beta_min = beta_max needs beta_points = 1"));
    }
}

/// Evenly spaced `β` values, endpoints included.
pub fn beta_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect()
}
