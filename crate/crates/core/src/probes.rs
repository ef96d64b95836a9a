//! Probe models: Hamiltonians, system-bath coupling, bath spectral density
//! and thermal rates, plus the density matrices the experiments start from.
//!
//! Energies are in units of the excitation energy `nu` (usually 1), so `beta`
//! carries units of `1/nu` and rates carry units of `nu`.

use crate::error::{require_positive, Error, Result};
use crate::numerics::{hermitian_eig, ComplexMatrix, Tolerances, C64};
use crate::sampling::{is_physical, CandidateState};

/// Bath spectral density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectralDensity {
    /// `J(ω) = γ ω` for `ω ≥ 0`.
    Ohmic { gamma: f64 },
}

impl SpectralDensity {
    pub fn ohmic(gamma: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        Ok(SpectralDensity::Ohmic { gamma })
    }

    /// `J(ω)` for `ω ≥ 0`.
    pub fn value(&self, omega: f64) -> f64 {
        match *self {
            SpectralDensity::Ohmic { gamma } => gamma * omega.max(0.0),
        }
    }

    /// `lim_{ω→0} J(ω) n_B(ω)`.
    pub fn zero_frequency_limit(&self, beta: f64) -> f64 {
        match *self {
            SpectralDensity::Ohmic { gamma } => gamma / beta,
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            SpectralDensity::Ohmic { gamma } => gamma,
        }
    }
}

/// Bose-Einstein occupation `1 / (e^{βν} - 1)`.
pub fn bose_einstein(nu: f64, beta: f64) -> Result<f64> {
    require_positive("nu", nu)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must be positive",
        });
    }
    Ok(1.0 / (beta * nu).exp_m1())
}

/// Thermal rates of the unified master equation for the V model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    /// Excited-to-ground rate `k = 2 J(ν) (n_B + 1)`.
    pub k: f64,
    /// Composite rate `φ = k (1 + 2 e^{-βν})`.
    pub phi: f64,
    /// `n_B(ν)`.
    pub nbar: f64,
}

impl Rates {
    pub fn new(k: f64, phi: f64) -> Result<Self> {
        require_positive("k", k)?;
        if !(phi >= k) || !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                reason: "must satisfy phi >= k",
            });
        }
        // phi = k (1 + 2/(1/nbar + 1))  <=>  nbar = (phi - k) / (3k - phi)
        let nbar = (phi - k) / (3.0 * k - phi);
        Ok(Self { k, phi, nbar })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbeKind {
    /// Ground state plus two excited levels at `ν - Δ` and `ν`.
    VModel { delta: f64 },
    /// Ground state plus `n` excited levels at `ν - j·spacing`, `j = n-1, …, 0`.
    NLevel { n: usize, spacing: f64 },
    /// Ground state plus one excited level at `ν`.
    Qubit,
}

/// Manifold widths at or above this fraction of `ν` are not quasidegenerate.
pub const MAX_RELATIVE_SPLITTING: f64 = 1e-2;

/// A thermometry setup: probe spectrum, coupling to the bath, bath spectral
/// density and bath inverse temperature.
#[derive(Clone, Debug)]
pub struct ProbeModel {
    kind: ProbeKind,
    nu: f64,
    /// Excited level `i` sits at `nu - offsets[i]`.
    offsets: Vec<f64>,
    coupling: ComplexMatrix,
    spectral: SpectralDensity,
    beta: f64,
}

impl ProbeModel {
    pub fn v_model(nu: f64, delta: f64, gamma: f64, beta: f64) -> Result<Self> {
        require_positive("nu", nu)?;
        if !(delta >= 0.0) || delta / nu >= MAX_RELATIVE_SPLITTING {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "V model needs 0 <= delta/nu < 1e-2",
            });
        }
        Self::build(ProbeKind::VModel { delta }, nu, vec![delta, 0.0], gamma, beta)
    }

    /// `n` excited levels equally spaced by `spacing` below `ν`. With
    /// `spacing = 0` the manifold is exactly degenerate.
    pub fn n_level(nu: f64, n: usize, spacing: f64, gamma: f64, beta: f64) -> Result<Self> {
        require_positive("nu", nu)?;
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "at least one excited level is required",
            });
        }
        let width = spacing * (n.saturating_sub(1)) as f64;
        if !(spacing >= 0.0) || width / nu >= MAX_RELATIVE_SPLITTING {
            return Err(Error::InvalidParameter {
                name: "spacing",
                value: spacing,
                reason: "manifold width must stay below 1e-2 nu",
            });
        }
        let offsets = (0..n).rev().map(|j| j as f64 * spacing).collect();
        Self::build(ProbeKind::NLevel { n, spacing }, nu, offsets, gamma, beta)
    }

    pub fn qubit(nu: f64, gamma: f64, beta: f64) -> Result<Self> {
        require_positive("nu", nu)?;
        Self::build(ProbeKind::Qubit, nu, vec![0.0], gamma, beta)
    }

    fn build(kind: ProbeKind, nu: f64, offsets: Vec<f64>, gamma: f64, beta: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        let spectral = SpectralDensity::ohmic(gamma)?;
        let dim = offsets.len() + 1;
        let coupling = ComplexMatrix::from_fn(dim, dim, |i, j| {
            if (i == 0) != (j == 0) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self {
            kind,
            nu,
            offsets,
            coupling,
            spectral,
            beta,
        })
    }

    /// Same probe at a different bath temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        Ok(Self { beta, ..self.clone() })
    }

    pub fn kind(&self) -> ProbeKind {
        self.kind
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spectral_density(&self) -> SpectralDensity {
        self.spectral
    }

    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    /// Number of excited levels `N`.
    pub fn degeneracy(&self) -> usize {
        self.offsets.len()
    }

    pub fn dim(&self) -> usize {
        self.offsets.len() + 1
    }

    /// Splitting between the two excited levels of the V model; the largest
    /// offset otherwise.
    pub fn delta(&self) -> f64 {
        match self.kind {
            ProbeKind::VModel { delta } => delta,
            _ => self.offsets.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Level energies, ground first.
    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.offsets.iter().map(|o| self.nu - o))
            .collect()
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.energies())
    }

    /// Hamiltonian with every excited level placed at `ν`.
    pub fn manifold_hamiltonian(&self) -> ComplexMatrix {
        let mut e = vec![self.nu; self.dim()];
        e[0] = 0.0;
        ComplexMatrix::from_real_diagonal(&e)
    }

    pub fn thermal_rates(&self) -> Rates {
        let nbar = 1.0 / (self.beta * self.nu).exp_m1();
        let k = 2.0 * self.spectral.value(self.nu) * (nbar + 1.0);
        let phi = k * (1.0 + 2.0 * (-self.beta * self.nu).exp());
        Rates { k, phi, nbar }
    }

    /// Thermal state of the manifold Hamiltonian, `e^{-βH}/Z` with
    /// `Z = 1 + N e^{-βν}`. This is the fixed point of the unified generator.
    pub fn gibbs_state(&self) -> DensityMatrix {
        gibbs_from_energies(&manifold_energies(self.nu, self.degeneracy()), self.beta)
    }

    /// Thermal state of the exact probe Hamiltonian, splittings included.
    pub fn exact_gibbs_state(&self) -> DensityMatrix {
        gibbs_from_energies(&self.energies(), self.beta)
    }

    /// Analytic `∂β` of [`gibbs_state`](Self::gibbs_state):
    /// `-(H - ⟨H⟩) ρ`.
    pub fn gibbs_state_derivative(&self) -> ComplexMatrix {
        let e = manifold_energies(self.nu, self.degeneracy());
        let rho = self.gibbs_state();
        let pops = rho.populations();
        let mean: f64 = e.iter().zip(&pops).map(|(a, b)| a * b).sum();
        let d: Vec<f64> = e.iter().zip(&pops).map(|(ei, pi)| -(ei - mean) * pi).collect();
        ComplexMatrix::from_real_diagonal(&d)
    }
}

fn manifold_energies(nu: f64, n: usize) -> Vec<f64> {
    let mut e = vec![nu; n + 1];
    e[0] = 0.0;
    e
}

fn gibbs_from_energies(energies: &[f64], beta: f64) -> DensityMatrix {
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let pops: Vec<f64> = weights.iter().map(|w| w / z).collect();
    DensityMatrix::from_matrix_unchecked(ComplexMatrix::from_real_diagonal(&pops))
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

/// Tolerances used when validating a density matrix.
pub const TRACE_TOL: f64 = 1e-10;
pub const MIN_EIGENVALUE_TOL: f64 = -1e-12;

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!("density matrix is {}x{}", m.rows(), m.cols())));
        }
        if m.hermiticity_error() > 1e-12 {
            return Err(Error::Unphysical {
                constraint: format!("not Hermitian (max|ρ - ρ†| = {:.3e})", m.hermiticity_error()),
            });
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Unphysical {
                constraint: format!("trace {} differs from 1", tr.re),
            });
        }
        let rho = Self(m);
        let min_eig = rho.min_eigenvalue();
        if min_eig < MIN_EIGENVALUE_TOL {
            return Err(Error::Unphysical {
                constraint: format!("negative eigenvalue {min_eig:.3e} (positivity)"),
            });
        }
        Ok(rho)
    }

    /// Wraps a matrix without validation; used for propagated states whose
    /// diagnostics are reported separately.
    pub fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        match hermitian_eig(&self.0.hermitian_part(), &Tolerances::default()) {
            Ok(es) => es.real_eigenvalues(),
            Err(_) => vec![f64::NAN; self.dim()],
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    /// `⟨3|ρ|2⟩`, the coherence between the first two excited levels.
    pub fn excited_coherence(&self) -> C64 {
        if self.dim() >= 3 {
            self.0[(2, 1)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Mean excited-state population.
    pub fn mean_excited_population(&self) -> f64 {
        let pops = self.populations();
        if pops.len() < 2 {
            return 0.0;
        }
        pops[1..].iter().sum::<f64>() / (pops.len() - 1) as f64
    }
}

/// How the probe is prepared before it touches the bath.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    Ground,
    MaximallyMixed,
    /// Thermal state of the probe at an ambient inverse temperature.
    AmbientThermal {
        beta_ambient: f64,
    },
    /// V-model state with populations `p2`, `p3`, real ground-excited
    /// coherences `a`, `b` and excited-excited coherence `sigma0_r`.
    Custom {
        p2: f64,
        p3: f64,
        a: f64,
        b: f64,
        sigma0_r: f64,
    },
}

impl InitialCondition {
    pub fn label(&self) -> &'static str {
        match self {
            InitialCondition::Ground => "ground",
            InitialCondition::MaximallyMixed => "mixed",
            InitialCondition::AmbientThermal { .. } => "thermal",
            InitialCondition::Custom { .. } => "custom",
        }
    }
}

/// A prepared probe state with the parameters that fix its prethermal state.
#[derive(Clone, Debug)]
pub struct PreparedState {
    pub rho: DensityMatrix,
    /// Mean excited population.
    pub p0: f64,
    pub sigma0_r: f64,
    pub sigma0_i: f64,
    /// `σ0ᴿ - p0`.
    pub xi: f64,
}

pub fn initial_state(kind: InitialCondition, model: &ProbeModel) -> Result<PreparedState> {
    let dim = model.dim();
    let rho = match kind {
        InitialCondition::Ground => {
            let mut m = ComplexMatrix::zeros(dim, dim);
            m[(0, 0)] = C64::new(1.0, 0.0);
            DensityMatrix::from_matrix_unchecked(m)
        }
        InitialCondition::MaximallyMixed => {
            DensityMatrix::from_matrix_unchecked(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
        }
        InitialCondition::AmbientThermal { beta_ambient } => {
            require_positive("beta_ambient", beta_ambient)?;
            gibbs_from_energies(&manifold_energies(model.nu(), model.degeneracy()), beta_ambient)
        }
        InitialCondition::Custom { p2, p3, a, b, sigma0_r } => {
            if dim != 3 {
                return Err(Error::Dimension(format!(
                    "custom initial states are 3x3 V-model states, probe has dimension {dim}"
                )));
            }
            let candidate = CandidateState::from_parameters(p2, p3, a, b, sigma0_r);
            let check = is_physical(&candidate.matrix());
            if !check.physical {
                return Err(Error::Unphysical {
                    constraint: format!("positivity violated: minimum eigenvalue {:.3e}", check.min_eigenvalue),
                });
            }
            DensityMatrix::from_matrix_unchecked(candidate.complex_matrix())
        }
    };
    let p0 = rho.mean_excited_population();
    let coh = rho.excited_coherence();
    Ok(PreparedState {
        p0,
        sigma0_r: coh.re,
        sigma0_i: coh.im,
        xi: coh.re - p0,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF_GAMMA: f64 = 0.07;

    #[test]
    fn bose_einstein_values() {
        assert!(bose_einstein(1.0, 1e4).unwrap() == 0.0);
        // 1/(e^4 - 1) evaluated independently
        let direct = 1.0 / (4f64.exp() - 1.0);
        assert!((bose_einstein(1.0, 4.0).unwrap() - 0.0186574).abs() < 5e-8);
        assert!((bose_einstein(1.0, 4.0).unwrap() - direct).abs() < 1e-15);
        assert!((bose_einstein(1.0, 2f64.ln()).unwrap() - 1.0).abs() < 1e-14);
        assert!(bose_einstein(0.0, 1.0).is_err());
    }

    #[test]
    fn reference_rates() {
        let m = ProbeModel::v_model(1.0, 1e-4, REF_GAMMA, 4.0).unwrap();
        let r = m.thermal_rates();
        assert!((r.k - 0.1426120).abs() < 5e-8, "{}", r.k);
        // quoted value is good to ~1.5e-6 relative
        assert!((r.phi - 0.1478363).abs() < 5e-7, "{}", r.phi);
        assert!((r.phi - r.k * (1.0 + 2.0 * (-4f64).exp())).abs() < 1e-16);
        assert!((r.k - 2.0 * 0.07 * (1.0 + 0.0186574)).abs() < 1e-8);
        let cold = m.with_beta(1e3).unwrap().thermal_rates();
        assert!((cold.k - 2.0 * REF_GAMMA).abs() < 1e-15);
        assert!((cold.phi - cold.k).abs() < 1e-15);
    }

    #[test]
    fn rates_round_trip_nbar() {
        let r = ProbeModel::v_model(1.0, 0.0, 0.07, 4.0).unwrap().thermal_rates();
        let rebuilt = Rates::new(r.k, r.phi).unwrap();
        assert!((rebuilt.nbar - r.nbar).abs() < 1e-12);
    }

    #[test]
    fn rates_monotone_in_temperature() {
        let mut last = f64::INFINITY;
        for i in 0..40 {
            let beta = 0.25 + 0.25 * i as f64;
            let k = ProbeModel::qubit(1.0, 0.07, beta).unwrap().thermal_rates().k;
            assert!(k < last);
            last = k;
        }
    }

    #[test]
    fn gibbs_populations() {
        let q = ProbeModel::qubit(1.0, 0.07, 4.0).unwrap().gibbs_state();
        let p = q.populations();
        assert!((p[0] - 0.982014).abs() < 5e-7 && (p[1] - 0.017986).abs() < 5e-7);
        let v = ProbeModel::v_model(1.0, 0.0, 0.07, 4.0).unwrap().gibbs_state();
        let e4 = (-4f64).exp();
        for &x in &v.populations()[1..] {
            assert!((x - e4 / (1.0 + 2.0 * e4)).abs() < 1e-16);
            assert!((x - 0.017668).abs() < 5e-7);
        }
        assert!((v.matrix().trace().re - 1.0).abs() < 1e-14);
        let cold = ProbeModel::n_level(1.0, 5, 0.0, 0.07, 800.0).unwrap().gibbs_state();
        assert_eq!(cold.populations()[0], 1.0);
    }

    #[test]
    fn n_level_gibbs_excited_population() {
        for n in 1..=10 {
            let m = ProbeModel::n_level(1.0, n, 1e-4, 0.07, 3.0).unwrap();
            let rho = m.gibbs_state();
            let e = (-3f64).exp();
            for &x in &rho.populations()[1..] {
                assert!((x - e / (1.0 + n as f64 * e)).abs() < 1e-16);
            }
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn coupling_structure() {
        let m = ProbeModel::n_level(1.0, 3, 1e-4, 0.07, 4.0).unwrap();
        let s = m.coupling();
        assert!(s.is_hermitian(0.0));
        for i in 0..4 {
            assert_eq!(s[(i, i)].norm(), 0.0);
            if i > 0 {
                assert_eq!(s[(0, i)], C64::new(1.0, 0.0));
                assert_eq!(s[(i, 0)], C64::new(1.0, 0.0));
            }
        }
        assert_eq!(m.energies(), vec![0.0, 1.0 - 2e-4, 1.0 - 1e-4, 1.0]);
    }

    #[test]
    fn model_validation() {
        assert!(ProbeModel::v_model(1.0, 0.02, 0.07, 4.0).is_err());
        assert!(ProbeModel::v_model(1.0, 1e-4, 0.07, -1.0).is_err());
        assert!(ProbeModel::v_model(1.0, 1e-4, 0.0, 4.0).is_err());
        assert!(ProbeModel::n_level(1.0, 0, 0.0, 0.07, 4.0).is_err());
    }

    #[test]
    fn initial_conditions() {
        let m = ProbeModel::v_model(1.0, 1e-4, 0.07, 4.0).unwrap();
        let g = initial_state(InitialCondition::Ground, &m).unwrap();
        assert_eq!((g.p0, g.sigma0_r, g.xi), (0.0, 0.0, 0.0));
        let mix = initial_state(InitialCondition::MaximallyMixed, &m).unwrap();
        assert!((mix.p0 - 1.0 / 3.0).abs() < 1e-15 && (mix.xi + 1.0 / 3.0).abs() < 1e-15);
        let amb = initial_state(InitialCondition::AmbientThermal { beta_ambient: 2.5 }, &m).unwrap();
        let e = (-2.5f64).exp();
        assert!((amb.p0 - e / (1.0 + 2.0 * e)).abs() < 1e-16);
        assert!((amb.p0 - 0.070510).abs() < 1e-6 && (amb.xi + amb.p0).abs() < 1e-16);
        for s in [&g, &mix, &amb] {
            assert!(DensityMatrix::new(s.rho.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn custom_initial_state_checked() {
        let m = ProbeModel::v_model(1.0, 1e-4, 0.07, 4.0).unwrap();
        let ok = InitialCondition::Custom {
            p2: 0.5,
            p3: 0.5,
            a: 0.0,
            b: 0.0,
            sigma0_r: -0.5,
        };
        let s = initial_state(ok, &m).unwrap();
        assert!((s.xi + 1.0).abs() < 1e-15);
        let bad = InitialCondition::Custom {
            p2: 0.0,
            p3: 0.0,
            a: 0.0,
            b: 0.0,
            sigma0_r: 0.5,
        };
        match initial_state(bad, &m) {
            Err(Error::Unphysical { constraint }) => assert!(constraint.contains("positivity")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.7, 0.7]);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = ComplexMatrix::from_real_diagonal(&[1.2, -0.2]);
        assert!(DensityMatrix::new(negative).is_err());
    }
}
