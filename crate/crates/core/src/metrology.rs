//! Fisher information of temperature probes: numeric CFI and QFI from
//! states, the symmetric logarithmic derivative, closed forms for
//! prethermal and equilibrium probes, and time-weighted figures of merit.

use std::fmt;
use std::io::{self, Write};

use crate::dynamics::{build_redfield_generator, evolve, prethermal_state, RedfieldVariant};
use crate::error::{require_positive, Error, Result};
use crate::numerics::{hermitian_eig, ComplexMatrix, Tolerances};
use crate::probes::{DensityMatrix, ProbeModel};

/// Eigenvalues of `ρ` (or pairs summing to) at most this are outside the
/// support.
pub const SUPPORT_CUTOFF: f64 = 1e-14;

/// Weight of `∂βρ` outside the support of `ρ` tolerated before the QFI is
/// declared divergent.
pub const SUPPORT_LEAK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FisherMethod {
    Analytic,
    NumericSld,
    NumericPopulation,
}

impl FisherMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::NumericSld => "numeric-sld",
            Self::NumericPopulation => "numeric-population",
        }
    }
}

impl fmt::Display for FisherMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FisherReport {
    pub beta: f64,
    pub cfi: f64,
    pub qfi: f64,
    /// Preparation time the figures of merit are weighted by.
    pub tau_used: f64,
    pub tcfi: f64,
    pub tqfi: f64,
    pub method: FisherMethod,
    /// Finite-difference step, when `∂βρ` was not analytic.
    pub derivative_step: Option<f64>,
}

impl FisherReport {
    pub fn new(
        beta: f64,
        cfi: f64,
        qfi: f64,
        tau: f64,
        method: FisherMethod,
        derivative_step: Option<f64>,
    ) -> Result<Self> {
        Ok(Self {
            beta,
            cfi,
            qfi,
            tau_used: tau,
            tcfi: time_weighted(cfi, tau)?,
            tqfi: time_weighted(qfi, tau)?,
            method,
            derivative_step,
        })
    }

    /// Energy-basis CFI and SLD QFI of `rho` with derivative `drho`.
    pub fn from_state(
        beta: f64,
        rho: &DensityMatrix,
        drho: &ComplexMatrix,
        tau: f64,
        derivative_step: Option<f64>,
    ) -> Result<Self> {
        let cfi = cfi_energy_basis(rho, drho)?;
        let qfi = qfi_from_state(rho, drho)?;
        Self::new(beta, cfi, qfi, tau, FisherMethod::NumericSld, derivative_step)
    }
}

/// `Σ_j (∂β p_j)² / p_j` over `p_j` above the support cutoff.
pub fn cfi_from_populations(p: &[f64], dp: &[f64]) -> Result<f64> {
    if p.len() != dp.len() {
        return Err(Error::Probabilities(format!(
            "{} probabilities but {} derivatives",
            p.len(),
            dp.len()
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Probabilities(format!("probabilities sum to {total}")));
    }
    let dtotal: f64 = dp.iter().sum();
    if dtotal.abs() > 1e-10 {
        return Err(Error::Probabilities(format!("derivatives sum to {dtotal:e}")));
    }
    if let Some(&neg) = p.iter().find(|&&x| x < -1e-12) {
        return Err(Error::Probabilities(format!("negative probability {neg:e}")));
    }
    Ok(p.iter()
        .zip(dp)
        .filter(|(&pj, _)| pj > SUPPORT_CUTOFF)
        .map(|(&pj, &dj)| dj * dj / pj)
        .sum())
}

/// CFI of a projective measurement in the computational (energy) basis.
pub fn cfi_energy_basis(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<f64> {
    let dp: Vec<f64> = drho.diagonal().iter().map(|z| z.re).collect();
    cfi_from_populations(&rho.populations(), &dp)
}

/// Symmetric logarithmic derivative, `∂βρ = ½{L, ρ}`.
#[derive(Clone, Debug)]
pub struct Sld {
    pub matrix: ComplexMatrix,
    /// Number of eigenvalues of `ρ` above the support cutoff.
    pub support_dimension: usize,
    /// `Tr[ρ L²]`.
    pub qfi: f64,
}

impl Sld {
    /// `max|∂ρ - ½{L, ρ}|`.
    pub fn residual(&self, rho: &DensityMatrix, drho: &ComplexMatrix) -> f64 {
        let anti = &(&self.matrix * rho.matrix()) + &(rho.matrix() * &self.matrix);
        (drho - &anti.scale_real(0.5)).max_abs()
    }
}

pub fn sld(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<Sld> {
    let d = rho.dim();
    if drho.rows() != d || drho.cols() != d {
        return Err(Error::Dimension(format!(
            "state is {d}x{d}, derivative is {}x{}",
            drho.rows(),
            drho.cols()
        )));
    }
    let scale = drho.max_abs().max(1.0);
    if drho.hermiticity_error() > 1e-10 * scale {
        return Err(Error::Unphysical {
            constraint: format!("derivative not Hermitian ({:.3e})", drho.hermiticity_error()),
        });
    }
    if drho.trace().norm() > 1e-10 * scale {
        return Err(Error::Unphysical {
            constraint: format!("derivative not traceless ({:.3e})", drho.trace().norm()),
        });
    }
    let es = hermitian_eig(&rho.matrix().hermitian_part(), &Tolerances::default())?;
    let u = &es.vectors;
    let w = es.real_eigenvalues();
    // ∂ρ in the eigenbasis of ρ.
    let dr = &(&u.adjoint() * drho) * u;
    let mut l = ComplexMatrix::zeros(d, d);
    let mut qfi = 0.0;
    for j in 0..d {
        for k in 0..d {
            let s = w[j] + w[k];
            if s > SUPPORT_CUTOFF {
                l[(j, k)] = dr[(j, k)] * (2.0 / s);
                qfi += 2.0 * dr[(j, k)].norm_sqr() / s;
            } else if dr[(j, k)].norm() > SUPPORT_LEAK_TOL * scale {
                return Err(Error::SupportViolation {
                    row: j,
                    col: k,
                    value: dr[(j, k)].norm(),
                });
            }
        }
    }
    Ok(Sld {
        matrix: &(u * &l) * &u.adjoint(),
        support_dimension: w.iter().filter(|&&x| x > SUPPORT_CUTOFF).count(),
        qfi,
    })
}

/// QFI `Tr[ρ L²] = Σ_jk 2|∂ρ_jk|²/(d_j + d_k)`.
pub fn qfi_from_state(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<f64> {
    Ok(sld(rho, drho)?.qfi)
}

fn check_xi(xi: f64) -> Result<()> {
    if (-1.0..=0.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::XiOutOfRange { xi })
    }
}

/// Energy-basis CFI of the prethermal state,
/// `ν² e^{βν}(ξ+1) / ((1+e^{βν})² (1 - ξ e^{βν}))`.
pub fn cfi_prethermal_analytic(beta: f64, nu: f64, xi: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    require_positive("nu", nu)?;
    check_xi(xi)?;
    // Written in e^{-βν} to stay finite at large βν.
    let e = (-beta * nu).exp();
    Ok(nu * nu * e * e * (xi + 1.0) / ((1.0 + e) * (1.0 + e) * (e - xi)))
}

/// QFI of the prethermal state, `ν² e^{βν}(ξ+1) / (1+e^{βν})²`.
pub fn qfi_prethermal_analytic(beta: f64, nu: f64, xi: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    require_positive("nu", nu)?;
    check_xi(xi)?;
    let e = (-beta * nu).exp();
    Ok(nu * nu * e * (xi + 1.0) / ((1.0 + e) * (1.0 + e)))
}

/// Equilibrium QFI of the V model, `2ν² e^{νβ}/(2+e^{νβ})²`.
pub fn qfi_equilibrium_v(beta: f64, nu: f64) -> Result<f64> {
    qfi_equilibrium_n(beta, nu, 2)
}

/// Equilibrium QFI with `n` degenerate excited levels,
/// `ν² n e^{νβ}/(n + e^{νβ})²`.
pub fn qfi_equilibrium_n(beta: f64, nu: f64, n: usize) -> Result<f64> {
    require_positive("beta", beta)?;
    require_positive("nu", nu)?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "at least one excited level is required",
        });
    }
    Ok(fn_continuous(beta, nu, n as f64))
}

fn fn_continuous(beta: f64, nu: f64, n: f64) -> f64 {
    let e = (-beta * nu).exp();
    nu * nu * n * e / ((1.0 + n * e) * (1.0 + n * e))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalDegeneracy {
    /// `e^{βν}`.
    pub continuous: f64,
    pub rounded: usize,
    /// QFI at the continuous optimum, `ν²/4`.
    pub f_continuous: f64,
    pub f_rounded: f64,
}

/// Degeneracy maximizing the equilibrium QFI at fixed `β`.
pub fn optimal_degeneracy(beta: f64, nu: f64) -> Result<OptimalDegeneracy> {
    require_positive("beta", beta)?;
    require_positive("nu", nu)?;
    let continuous = (beta * nu).exp();
    let lo = (continuous.floor() as usize).max(1);
    let hi = (continuous.ceil() as usize).max(1);
    let (f_lo, f_hi) = (qfi_equilibrium_n(beta, nu, lo)?, qfi_equilibrium_n(beta, nu, hi)?);
    let (rounded, f_rounded) = if f_hi > f_lo { (hi, f_hi) } else { (lo, f_lo) };
    Ok(OptimalDegeneracy {
        continuous,
        rounded,
        f_continuous: fn_continuous(beta, nu, continuous),
        f_rounded,
    })
}

/// Fisher information per unit preparation time.
pub fn time_weighted(f: f64, tau: f64) -> Result<f64> {
    require_positive("tau", tau)?;
    Ok(f / tau)
}

/// Cramér-Rao bound `(M F)^{-1/2}`; infinite when `F = 0`.
pub fn precision_bound(f: f64, m: u64) -> Result<f64> {
    if !(f >= 0.0) || !f.is_finite() {
        return Err(Error::InvalidParameter {
            name: "fisher",
            value: f,
            reason: "Fisher information must be finite and non-negative",
        });
    }
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "measurements",
            value: 0.0,
            reason: "at least one measurement is required",
        });
    }
    if f == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (m as f64 * f).sqrt())
}

/// Precision gain `√(τ1/τ2)` of the prethermal protocol at equal wall-clock
/// budget.
pub fn improvement_factor(tau1: f64, tau2: f64) -> Result<f64> {
    require_positive("tau1", tau1)?;
    require_positive("tau2", tau2)?;
    Ok((tau1 / tau2).sqrt())
}

/// Central difference `(ρ(β+h) - ρ(β-h))/(2h)`, Hermitian part. Default
/// step `1e-5 β`.
pub fn dstate_dbeta<F>(builder: F, beta: f64, h: Option<f64>) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    require_positive("beta", beta)?;
    let h = h.unwrap_or(1e-5 * beta);
    if !(h > 0.0 && h < beta) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "step must lie in (0, beta)",
        });
    }
    let plus = builder(beta + h)?;
    let minus = builder(beta - h)?;
    Ok((plus.matrix() - minus.matrix()).scale_real(0.5 / h).hermitian_part())
}

/// Prethermal state as a function of `β` at fixed `ν` and `ξ`.
pub fn prethermal_builder(nu: f64, xi: f64) -> impl Fn(f64) -> Result<DensityMatrix> {
    move |b| Ok(prethermal_state(b, nu, xi)?.matrix())
}

/// CFI and QFI of `ρ(β, t)` at each time, with `∂β` by central difference
/// over two full evolutions at `β ± h`.
pub fn evolved_fisher(
    model: &ProbeModel,
    variant: RedfieldVariant,
    cluster_tol: Option<f64>,
    rho0: &DensityMatrix,
    times: &[f64],
    h: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    let beta = model.beta();
    let h = h.unwrap_or(1e-5 * beta);
    let run = |b: f64| -> Result<Vec<DensityMatrix>> {
        let gen = build_redfield_generator(&model.with_beta(b)?, variant, cluster_tol)?;
        Ok(evolve(&gen, rho0, times)?
            .snapshots
            .into_iter()
            .map(|s| s.rho)
            .collect())
    };
    let (centre, plus, minus) = (run(beta)?, run(beta + h)?, run(beta - h)?);
    centre
        .iter()
        .zip(plus.iter().zip(&minus))
        .map(|(rho, (p, m))| {
            let drho = (p.matrix() - m.matrix()).scale_real(0.5 / h).hermitian_part();
            Ok((cfi_energy_basis(rho, &drho)?, qfi_from_state(rho, &drho)?))
        })
        .collect()
}

/// One row of a Fisher-information sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    /// `ξ` for prethermal rows, `N` for degeneracy rows.
    pub xi_or_n: f64,
    pub cfi: f64,
    pub qfi: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tcfi: f64,
    pub tqfi: f64,
    pub method: String,
}

pub const SWEEP_CSV_HEADER: &str = "beta,xi_or_N,cfi,qfi,tau1,tau2,tcfi,tqfi,method";

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            r.beta, r.xi_or_n, r.cfi, r.qfi, r.tau1, r.tau2, r.tcfi, r.tqfi, r.method
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::C64;

    fn qubit_s2(beta: f64) -> f64 {
        let e = beta.exp();
        e / ((1.0 + e) * (1.0 + e))
    }

    #[test]
    fn cfi_basics() {
        assert_eq!(cfi_from_populations(&[0.3, 0.7], &[0.0, 0.0]).unwrap(), 0.0);
        let m = ProbeModel::qubit(1.0, 0.07, 4.0).unwrap();
        let rho = m.gibbs_state();
        let d = m.gibbs_state_derivative();
        let c = cfi_energy_basis(&rho, &d).unwrap();
        assert!((c - qubit_s2(4.0)).abs() < 1e-15);
        assert!((c - 0.017663).abs() < 5e-7);
        assert!(cfi_from_populations(&[1.1, -0.1], &[0.0, 0.0]).is_err());
        assert!(cfi_from_populations(&[0.5, 0.4], &[0.0, 0.0]).is_err());
        assert!(cfi_from_populations(&[0.5, 0.5], &[0.1, 0.0]).is_err());
    }

    #[test]
    fn sld_of_gibbs_is_mean_minus_h() {
        for m in [
            ProbeModel::qubit(1.0, 0.07, 4.0).unwrap(),
            ProbeModel::v_model(1.0, 1e-4, 0.07, 2.0).unwrap(),
        ] {
            let rho = m.gibbs_state();
            let s = sld(&rho, &m.gibbs_state_derivative()).unwrap();
            let h = m.manifold_hamiltonian();
            let mean = (&h * rho.matrix()).trace();
            let expected = &ComplexMatrix::identity(m.dim()).scale(mean) - &h;
            assert!((&s.matrix - &expected).max_abs() < 1e-9);
            assert_eq!(s.support_dimension, m.dim());
        }
    }

    #[test]
    fn zero_derivative_gives_zero_sld() {
        let rho = prethermal_state(4.0, 1.0, 0.0).unwrap().matrix();
        let s = sld(&rho, &ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(s.matrix.max_abs(), 0.0);
        assert_eq!(s.qfi, 0.0);
    }

    #[test]
    fn sld_residual_on_prethermal_state() {
        let st = prethermal_state(4.0, 1.0, -0.5).unwrap();
        let rho = st.matrix();
        let d = st.matrix_derivative();
        let s = sld(&rho, &d).unwrap();
        assert!(s.residual(&rho, &d) < 1e-10);
        let tr_rho_l2 = (&(rho.matrix() * &s.matrix) * &s.matrix).trace().re;
        assert!((tr_rho_l2 - s.qfi).abs() < 1e-12);
    }

    #[test]
    fn support_violation_is_reported() {
        let rho = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let d = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(sld(&rho, &d).is_ok());
        let mut bad = ComplexMatrix::from_real_diagonal(&[0.0, 0.0, 0.0]);
        bad[(1, 2)] = C64::new(0.1, 0.0);
        bad[(2, 1)] = C64::new(0.1, 0.0);
        let rho3 = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0])).unwrap();
        let err = sld(&rho3, &bad).unwrap_err();
        assert!(matches!(err, Error::SupportViolation { .. }));
    }

    fn e4_ratio() -> f64 {
        let e = 4f64.exp();
        e / ((1.0 + e) * (1.0 + e))
    }

    #[test]
    fn prethermal_closed_forms() {
        assert!((qfi_prethermal_analytic(4.0, 1.0, 0.0).unwrap() - qubit_s2(4.0)).abs() < 1e-17);
        assert!((cfi_prethermal_analytic(4.0, 1.0, 0.0).unwrap() - qubit_s2(4.0)).abs() < 1e-17);
        assert_eq!(qfi_prethermal_analytic(4.0, 1.0, -1.0).unwrap(), 0.0);
        assert_eq!(cfi_prethermal_analytic(4.0, 1.0, -1.0).unwrap(), 0.0);
        let q = qfi_prethermal_analytic(4.0, 1.0, -0.5).unwrap();
        let c = cfi_prethermal_analytic(4.0, 1.0, -0.5).unwrap();
        assert!((q - 0.0088314).abs() < 5e-8);
        assert!((q - 0.5 * e4_ratio()).abs() < 1e-17);
        assert!((c - 3.1207e-4).abs() < 5e-9);
        let e4 = 4f64.exp();
        assert!((c - e4 * 0.5 / ((1.0 + e4).powi(2) * (1.0 + 0.5 * e4))).abs() < 1e-17);
        assert!(qfi_prethermal_analytic(4.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn numeric_matches_closed_forms() {
        for xi in [0.0, -0.0705, -1.0 / 3.0, -0.5, -0.9] {
            let rho = prethermal_state(4.0, 1.0, xi).unwrap().matrix();
            let d = dstate_dbeta(prethermal_builder(1.0, xi), 4.0, None).unwrap();
            let q = qfi_from_state(&rho, &d).unwrap();
            let c = cfi_energy_basis(&rho, &d).unwrap();
            let qa = qfi_prethermal_analytic(4.0, 1.0, xi).unwrap();
            let ca = cfi_prethermal_analytic(4.0, 1.0, xi).unwrap();
            assert!((q / qa - 1.0).abs() < 1e-6, "xi {xi}: {q} vs {qa}");
            assert!((c / ca - 1.0).abs() < 1e-6, "xi {xi}: {c} vs {ca}");
        }
    }

    #[test]
    fn derivative_step_matches_analytic() {
        let st = prethermal_state(4.0, 1.0, 0.0).unwrap();
        let d = dstate_dbeta(prethermal_builder(1.0, 0.0), 4.0, None).unwrap();
        assert!((d[(1, 1)].re - st.dp_dbeta()).abs() < 1e-8);
        let e = (-4f64).exp();
        assert!((st.dp_dbeta() + e / (2.0 * (1.0 + e) * (1.0 + e))).abs() < 1e-17);
        assert!((st.dp_dbeta() + 0.0088314).abs() < 5e-8);
        assert!((&d - &st.matrix_derivative()).max_abs() < 1e-8);
        assert!(d.trace().norm() < 1e-9);
        let flat = dstate_dbeta(|_| Ok(st.matrix()), 4.0, None).unwrap();
        assert_eq!(flat.max_abs(), 0.0);
        // Central differences are second order.
        let coarse = dstate_dbeta(prethermal_builder(1.0, 0.0), 4.0, Some(1e-2)).unwrap();
        let fine = dstate_dbeta(prethermal_builder(1.0, 0.0), 4.0, Some(5e-3)).unwrap();
        let e1 = (coarse[(1, 1)].re - st.dp_dbeta()).abs();
        let e2 = (fine[(1, 1)].re - st.dp_dbeta()).abs();
        assert!((e1 / e2 - 4.0).abs() < 0.05, "{}", e1 / e2);
    }

    #[test]
    fn equilibrium_values() {
        assert!((qfi_equilibrium_v(4.0, 1.0).unwrap() - 0.034088).abs() < 5e-7);
        assert_eq!(
            qfi_equilibrium_v(4.0, 1.0).unwrap(),
            qfi_equilibrium_n(4.0, 1.0, 2).unwrap()
        );
        assert!((qfi_equilibrium_n(4.0, 1.0, 1).unwrap() - qubit_s2(4.0)).abs() < 1e-17);
        assert!((qfi_equilibrium_n(4.0, 1.0, 55).unwrap() - 0.2499).abs() < 1e-4);
        assert!(qfi_equilibrium_v(800.0, 1.0).unwrap() < 1e-300);
        let e4 = 4f64.exp();
        assert!((qfi_equilibrium_v(4.0, 1.0).unwrap() - 2.0 * e4 / (2.0 + e4).powi(2)).abs() < 1e-17);
    }

    #[test]
    fn equilibrium_is_second_derivative_of_log_partition() {
        let h = 1e-4;
        for n in [1usize, 2, 5, 55] {
            let ln_z = |b: f64| (1.0 + n as f64 * (-b).exp()).ln();
            let second = (ln_z(4.0 + h) - 2.0 * ln_z(4.0) + ln_z(4.0 - h)) / (h * h);
            let f = qfi_equilibrium_n(4.0, 1.0, n).unwrap();
            assert!((second - f).abs() < 1e-6 * f.max(1e-3), "n {n}");
        }
    }

    #[test]
    fn optimal_degeneracy_values() {
        assert_eq!(optimal_degeneracy(4.0, 1.0).unwrap().rounded, 55);
        assert_eq!(optimal_degeneracy(3f64.ln(), 1.0).unwrap().rounded, 3);
        assert_eq!(optimal_degeneracy(1.0986, 1.0).unwrap().rounded, 3);
        for b in [0.5, 1.0, 2.0, 4.0, 6.0] {
            let o = optimal_degeneracy(b, 1.0).unwrap();
            assert!((o.f_continuous - 0.25).abs() < 1e-12);
            assert!(o.f_rounded <= 0.25 + 1e-15);
        }
    }

    #[test]
    fn weighting_and_bounds() {
        assert!((time_weighted(0.017663, 7.0120).unwrap() - 2.519e-3).abs() < 5e-7);
        assert!((time_weighted(0.034088, 2.8018e7).unwrap() - 1.2167e-9).abs() < 5e-13);
        assert!(time_weighted(1.0, 0.0).is_err());
        assert_eq!(precision_bound(0.25, 1).unwrap(), 2.0);
        assert_eq!(precision_bound(0.25, 4).unwrap(), 1.0);
        assert!(precision_bound(0.0, 1).unwrap().is_infinite());
        assert!(precision_bound(1.0, 0).is_err());
        assert!((improvement_factor(2.8018e7, 7.0120).unwrap() - 1999.0).abs() < 1.0);
    }

    #[test]
    fn sweep_csv_layout() {
        let row = SweepRow {
            beta: 4.0,
            xi_or_n: 0.0,
            cfi: 0.1,
            qfi: 0.2,
            tau1: 1.0,
            tau2: 2.0,
            tcfi: 0.1,
            tqfi: 0.1,
            method: "analytic".into(),
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(SWEEP_CSV_HEADER));
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0].parse::<f64>().unwrap(), 4.0);
    }
}
