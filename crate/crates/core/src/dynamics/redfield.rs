//! Born-Markov master equations in Liouville space.
//!
//! The probe couples to the bath through `S ⊗ B`. Decomposing
//! `S = Σ_ω S_ω` into Bohr-frequency components (`S_ω` lowers the energy by
//! `ω`), the three variants differ in how the components are paired:
//!
//! * `Nonsecular`: full Redfield, `Σ_ω Γ(ω)(S_ω ρ S - S S_ω ρ) + h.c.`
//! * `FullSecular`: Davies form, one Lindblad channel per exact frequency.
//! * `Unified`: Lindblad channels for clusters of nearly equal frequencies,
//!   each evaluated at a single representative frequency.
//!
//! `Γ` is the real part of the one-sided bath correlation spectrum; Lamb
//! shifts are dropped. Vectorization is row-major, so
//! `A ρ B ↦ (A ⊗ Bᵀ) vec(ρ)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};
use crate::probes::{ProbeModel, SpectralDensity};

use super::{Generator, GeneratorBasis, GeneratorOrigin};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RedfieldVariant {
    Unified,
    FullSecular,
    Nonsecular,
}

impl RedfieldVariant {
    pub const ALL: [RedfieldVariant; 3] = [Self::Unified, Self::FullSecular, Self::Nonsecular];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Unified => "unified",
            Self::FullSecular => "full-secular",
            Self::Nonsecular => "nonsecular",
        }
    }
}

impl fmt::Display for RedfieldVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RedfieldVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "unified" => Ok(Self::Unified),
            "full-secular" | "secular" => Ok(Self::FullSecular),
            "nonsecular" | "redfield" => Ok(Self::Nonsecular),
            other => Err(format!(
                "unknown master equation `{other}` (expected unified, full-secular or nonsecular)"
            )),
        }
    }
}

/// `Γ(ω) = J(ω)(n(ω)+1)` for emission, `J(|ω|) n(|ω|)` for absorption and
/// the `ω → 0` limit at zero frequency.
pub fn one_sided_rate(spectral: &SpectralDensity, beta: f64, omega: f64) -> f64 {
    if omega == 0.0 {
        return spectral.zero_frequency_limit(beta);
    }
    let w = omega.abs();
    let n = 1.0 / (beta * w).exp_m1();
    if omega > 0.0 {
        spectral.value(w) * (n + 1.0)
    } else {
        spectral.value(w) * n
    }
}

/// Clustering tolerance used when none is given: a hundred times the largest
/// level splitting, floored at a relative `1e-12`.
pub fn default_cluster_tol(model: &ProbeModel) -> f64 {
    (100.0 * model.delta()).max(1e-12 * model.nu())
}

/// Liouvillian of `model` under the chosen master equation. `cluster_tol`
/// only affects the unified variant.
pub fn build_redfield_generator(
    model: &ProbeModel,
    variant: RedfieldVariant,
    cluster_tol: Option<f64>,
) -> Result<Generator> {
    let tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(model));
    let matrix = redfield_superoperator(
        &model.hamiltonian(),
        model.coupling(),
        &model.spectral_density(),
        model.beta(),
        variant,
        tol,
    )?;
    Ok(Generator {
        matrix,
        basis: GeneratorBasis::Vectorized { dim: model.dim() },
        origin: GeneratorOrigin::Redfield {
            variant,
            beta: model.beta(),
            cluster_tol: tol,
        },
    })
}

/// Liouvillian for a diagonal Hamiltonian `h` and Hermitian coupling `s`.
pub fn redfield_superoperator(
    h: &ComplexMatrix,
    s: &ComplexMatrix,
    spectral: &SpectralDensity,
    beta: f64,
    variant: RedfieldVariant,
    cluster_tol: f64,
) -> Result<ComplexMatrix> {
    crate::error::require_positive("beta", beta)?;
    if !(cluster_tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "cluster_tol",
            value: cluster_tol,
            reason: "must be non-negative",
        });
    }
    let d = h.rows();
    if !h.is_square() || s.rows() != d || !s.is_square() {
        return Err(Error::Dimension(format!(
            "Hamiltonian is {}x{}, coupling is {}x{}",
            h.rows(),
            h.cols(),
            s.rows(),
            s.cols()
        )));
    }
    let scale = h.max_abs().max(1.0);
    let off_diag = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| h[(i, j)].norm())
        .fold(0.0, f64::max);
    if off_diag > 1e-12 * scale {
        return Err(Error::NonDiagonalHamiltonian(off_diag));
    }
    if !s.is_hermitian(1e-12) {
        return Err(Error::Unphysical {
            constraint: format!("coupling operator is not Hermitian ({:.3e})", s.hermiticity_error()),
        });
    }

    let energies: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
    let id = ComplexMatrix::identity(d);
    let i_unit = C64::new(0.0, 1.0);

    let mut l = ComplexMatrix::zeros(d * d, d * d);
    l.add_scaled(&h.kron(&id), -i_unit)?;
    l.add_scaled(&id.kron(&h.transpose()), i_unit)?;

    let exact_tol = 1e-12 * scale;
    let group_tol = match variant {
        RedfieldVariant::Unified => cluster_tol.max(exact_tol),
        _ => exact_tol,
    };
    for group in frequency_groups(s, &energies, group_tol) {
        let omega = match variant {
            RedfieldVariant::Unified => group.representative(group_tol),
            _ => group.mean(),
        };
        let omega = if omega.abs() <= exact_tol { 0.0 } else { omega };
        let g = one_sided_rate(spectral, beta, omega);
        if g == 0.0 {
            continue;
        }
        let a = &group.operator;
        match variant {
            RedfieldVariant::Unified | RedfieldVariant::FullSecular => {
                let ada = &a.adjoint() * a;
                let rate = C64::new(2.0 * g, 0.0);
                l.add_scaled(&a.kron(&a.conjugate()), rate)?;
                l.add_scaled(&ada.kron(&id), -rate * 0.5)?;
                l.add_scaled(&id.kron(&ada.transpose()), -rate * 0.5)?;
            }
            RedfieldVariant::Nonsecular => {
                let rate = C64::new(g, 0.0);
                let sa = s * a;
                let ads = &a.adjoint() * s;
                l.add_scaled(&a.kron(&s.transpose()), rate)?;
                l.add_scaled(&sa.kron(&id), -rate)?;
                l.add_scaled(&s.kron(&a.conjugate()), rate)?;
                l.add_scaled(&id.kron(&ads.transpose()), -rate)?;
            }
        }
    }
    Ok(l)
}

struct FrequencyGroup {
    frequencies: Vec<f64>,
    operator: ComplexMatrix,
}

impl FrequencyGroup {
    fn mean(&self) -> f64 {
        self.frequencies.iter().sum::<f64>() / self.frequencies.len() as f64
    }

    /// Zero for a cluster that straddles zero; otherwise the member of
    /// largest magnitude, which places a quasidegenerate manifold at its top
    /// level.
    fn representative(&self, tol: f64) -> f64 {
        if self.frequencies.iter().any(|w| w.abs() <= tol) {
            return 0.0;
        }
        self.frequencies
            .iter()
            .cloned()
            .fold(0.0, |best, w| if w.abs() > best.abs() { w } else { best })
    }
}

/// Single-linkage grouping of the Bohr frequencies `E_b - E_a` carried by
/// nonzero `S_ab`.
fn frequency_groups(s: &ComplexMatrix, energies: &[f64], tol: f64) -> Vec<FrequencyGroup> {
    let d = energies.len();
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..d {
        for b in 0..d {
            if s[(a, b)].norm() > 0.0 {
                entries.push((energies[b] - energies[a], a, b));
            }
        }
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut groups: Vec<FrequencyGroup> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (omega, a, b) in entries {
        if groups.is_empty() || omega - last > tol {
            groups.push(FrequencyGroup {
                frequencies: Vec::new(),
                operator: ComplexMatrix::zeros(d, d),
            });
        }
        let g = groups.last_mut().expect("group pushed above");
        g.frequencies.push(omega);
        g.operator[(a, b)] = s[(a, b)];
        last = omega;
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::unified_generator_v;

    fn reference_model() -> ProbeModel {
        ProbeModel::v_model(1.0, 1e-4, 0.07, 4.0).unwrap()
    }

    fn stationarity(g: &Generator, rho: &crate::probes::DensityMatrix) -> f64 {
        g.matrix()
            .mul_vec(rho.matrix().as_slice())
            .unwrap()
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    #[test]
    fn parses_variants() {
        for v in RedfieldVariant::ALL {
            assert_eq!(v.as_str().parse::<RedfieldVariant>().unwrap(), v);
        }
        assert!("lindblad".parse::<RedfieldVariant>().is_err());
    }

    #[test]
    fn kms_ratio() {
        let sd = SpectralDensity::ohmic(0.07).unwrap();
        let r = one_sided_rate(&sd, 4.0, -1.0) / one_sided_rate(&sd, 4.0, 1.0);
        assert!((r - (-4f64).exp()).abs() < 1e-15);
        assert!((2.0 * one_sided_rate(&sd, 4.0, 1.0) - reference_model().thermal_rates().k).abs() < 1e-15);
        assert!((one_sided_rate(&sd, 4.0, 0.0) - 0.07 / 4.0).abs() < 1e-18);
    }

    #[test]
    fn unified_restricts_to_reduced_equations() {
        let m = reference_model();
        let g = build_redfield_generator(&m, RedfieldVariant::Unified, None).unwrap();
        let (h, leak) = g.restrict_to_reduced().unwrap();
        let reduced = unified_generator_v(m.thermal_rates(), m.delta()).unwrap();
        let dev = (&h - reduced.matrix()).max_abs();
        assert!(dev < 1e-12, "deviation {dev:e}");
        assert!(leak < 1e-14);
    }

    #[test]
    fn trace_preserving_for_all_variants() {
        for model in [
            reference_model(),
            ProbeModel::n_level(1.0, 4, 1e-4, 0.07, 2.0).unwrap(),
            ProbeModel::qubit(1.0, 0.07, 4.0).unwrap(),
        ] {
            for v in RedfieldVariant::ALL {
                let g = build_redfield_generator(&model, v, None).unwrap();
                assert!(
                    g.trace_preservation_error() < 1e-14,
                    "{v} {:e}",
                    g.trace_preservation_error()
                );
            }
        }
    }

    #[test]
    fn thermal_fixed_points() {
        let m = reference_model();
        let uni = build_redfield_generator(&m, RedfieldVariant::Unified, None).unwrap();
        assert!(stationarity(&uni, &m.gibbs_state()) < 1e-15);
        for v in [RedfieldVariant::FullSecular, RedfieldVariant::Nonsecular] {
            let g = build_redfield_generator(&m, v, None).unwrap();
            assert!(stationarity(&g, &m.exact_gibbs_state()) < 1e-15, "{v}");
        }
        let n = ProbeModel::n_level(1.0, 5, 1e-4, 0.07, 3.0).unwrap();
        let uni = build_redfield_generator(&n, RedfieldVariant::Unified, None).unwrap();
        assert!(stationarity(&uni, &n.gibbs_state()) < 1e-15);
    }

    #[test]
    fn full_secular_decouples_excited_coherence() {
        let g = build_redfield_generator(&reference_model(), RedfieldVariant::FullSecular, None).unwrap();
        let idx = |i: usize, j: usize| i * 3 + j;
        let col = idx(2, 1);
        for p in [idx(0, 0), idx(1, 1), idx(2, 2)] {
            assert_eq!(g.matrix()[(p, col)].norm(), 0.0);
            assert_eq!(g.matrix()[(col, p)].norm(), 0.0);
        }
    }

    #[test]
    fn qubit_relaxation_rate() {
        let m = ProbeModel::qubit(1.0, 0.07, 4.0).unwrap();
        let r = m.thermal_rates();
        let g = build_redfield_generator(&m, RedfieldVariant::Unified, None).unwrap();
        // dρ_ee/dt = -k(1+e^{-βν}) ρ_ee + k e^{-βν}
        let expected = -r.k * (1.0 + (-4f64).exp());
        let d = g.matrix()[(3, 3)].re - g.matrix()[(3, 0)].re;
        assert!((d - expected).abs() < 1e-15);
        assert!((expected + 0.145224).abs() < 5e-7);
    }

    #[test]
    fn rejects_non_diagonal_hamiltonian() {
        let mut h = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        h[(0, 1)] = C64::new(0.1, 0.0);
        h[(1, 0)] = C64::new(0.1, 0.0);
        let s = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let sd = SpectralDensity::ohmic(0.1).unwrap();
        let err = redfield_superoperator(&h, &s, &sd, 1.0, RedfieldVariant::Nonsecular, 0.0).unwrap_err();
        assert!(matches!(err, Error::NonDiagonalHamiltonian(_)));
    }

    #[test]
    fn cluster_representative() {
        let m = ProbeModel::n_level(1.0, 3, 1e-4, 0.07, 4.0).unwrap();
        let groups = frequency_groups(m.coupling(), &m.energies(), 1e-2);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].representative(1e-2), -1.0);
        assert_eq!(groups[1].representative(1e-2), 1.0);
        assert_eq!(frequency_groups(m.coupling(), &m.energies(), 1e-12).len(), 6);
    }
}
