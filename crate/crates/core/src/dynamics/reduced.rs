//! Unified master equation of the V model in the reduced coordinates
//! `v = (p, σᴿ, σᴵ)`: `p` is the mean excited population and `σ = ⟨3|ρ|2⟩`
//! the coherence between the two excited levels.
//!
//! ```text
//! dp/dt  = -k σᴿ - φ p + (φ - k)/2
//! dσᴿ/dt = -k σᴿ - φ p + Δ σᴵ + (φ - k)/2
//! dσᴵ/dt = -k σᴵ - Δ σᴿ
//! ```

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};
use crate::probes::{DensityMatrix, Rates};

use super::{Generator, GeneratorBasis, GeneratorOrigin};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ReducedState {
    pub p: f64,
    pub sigma_r: f64,
    pub sigma_i: f64,
}

impl ReducedState {
    pub fn new(p: f64, sigma_r: f64, sigma_i: f64) -> Self {
        Self { p, sigma_r, sigma_i }
    }

    pub fn ground_population(&self) -> f64 {
        1.0 - 2.0 * self.p
    }

    /// Reads `(p, σᴿ, σᴵ)` off a density matrix with at least two excited
    /// levels.
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let coh = rho.excited_coherence();
        Self {
            p: rho.mean_excited_population(),
            sigma_r: coh.re,
            sigma_i: coh.im,
        }
    }

    /// The 3×3 state with equal excited populations and no ground-excited
    /// coherence.
    pub fn to_density(&self) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 0)] = C64::new(1.0 - 2.0 * self.p, 0.0);
        m[(1, 1)] = C64::new(self.p, 0.0);
        m[(2, 2)] = C64::new(self.p, 0.0);
        m[(2, 1)] = C64::new(self.sigma_r, self.sigma_i);
        m[(1, 2)] = C64::new(self.sigma_r, -self.sigma_i);
        DensityMatrix::from_matrix_unchecked(m)
    }

    /// Homogeneous coordinates `(p, σᴿ, σᴵ, 1)`.
    pub fn homogeneous(&self) -> Vec<C64> {
        vec![
            C64::new(self.p, 0.0),
            C64::new(self.sigma_r, 0.0),
            C64::new(self.sigma_i, 0.0),
            C64::new(1.0, 0.0),
        ]
    }

    pub fn from_homogeneous(v: &[C64]) -> Self {
        Self {
            p: v[0].re,
            sigma_r: v[1].re,
            sigma_i: v[2].re,
        }
    }
}

/// Reduced unified generator, lifted to 4×4 homogeneous form so that the
/// constant drive `((φ-k)/2, (φ-k)/2, 0)` propagates linearly.
pub fn unified_generator_v(rates: Rates, delta: f64) -> Result<Generator> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "splitting must be non-negative",
        });
    }
    let Rates { k, phi, .. } = rates;
    let drive = 0.5 * (phi - k);
    #[rustfmt::skip]
    let m = ComplexMatrix::from_real(4, 4, &[
        -phi, -k,     0.0,   drive,
        -phi, -k,     delta, drive,
         0.0, -delta, -k,    0.0,
         0.0,  0.0,   0.0,   0.0,
    ])?;
    Ok(Generator {
        matrix: m,
        basis: GeneratorBasis::ReducedVModel,
        origin: GeneratorOrigin::ReducedV { rates, delta },
    })
}

/// Closed-form solution for `p(t)` and `σᴿ(t)`. The imaginary coherence is
/// `O(Δ)` and is not part of the solution; the returned `sigma_i` is zero.
pub fn closed_form_evolution(rates: Rates, delta: f64, init: ReducedState, t: f64) -> Result<ReducedState> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "time must be non-negative",
        });
    }
    let Rates { k, phi, .. } = rates;
    let (slow, fast) = closed_form_amplitudes(rates, init);
    let lambda1 = lepe_lambda1(k, phi, delta);
    let e_slow = (lambda1 * t).exp();
    let e_fast = (-(phi + k) * t).exp();
    let denom = 2.0 * (phi + k);
    let sigma_r = (slow * e_slow - fast * e_fast) / denom;
    let p = (phi - k) / (2.0 * phi) - ((k / phi) * slow * e_slow + fast * e_fast) / denom;
    Ok(ReducedState {
        p,
        sigma_r,
        sigma_i: 0.0,
    })
}

/// Time derivative of [`closed_form_evolution`], differentiated analytically.
pub fn closed_form_rate(rates: Rates, delta: f64, init: ReducedState, t: f64) -> ReducedState {
    let Rates { k, phi, .. } = rates;
    let (slow, fast) = closed_form_amplitudes(rates, init);
    let lambda1 = lepe_lambda1(k, phi, delta);
    let lambda3 = -(phi + k);
    let e_slow = lambda1 * (lambda1 * t).exp();
    let e_fast = lambda3 * (lambda3 * t).exp();
    let denom = 2.0 * (phi + k);
    ReducedState {
        p: -((k / phi) * slow * e_slow + fast * e_fast) / denom,
        sigma_r: (slow * e_slow - fast * e_fast) / denom,
        sigma_i: 0.0,
    }
}

fn closed_form_amplitudes(rates: Rates, init: ReducedState) -> (f64, f64) {
    let Rates { k, phi, .. } = rates;
    let (p0, s0) = (init.p, init.sigma_r);
    let slow = phi * (1.0 + 2.0 * s0 - 2.0 * p0) - k;
    let fast = phi * (1.0 - 2.0 * p0) - k * (1.0 + 2.0 * s0);
    (slow, fast)
}

fn lepe_lambda1(k: f64, phi: f64, delta: f64) -> f64 {
    -phi * delta * delta / (k * (k + phi))
}

/// Lowest-order-in-Δ eigenvalues of the reduced Liouvillian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LepeEigenvalues {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl LepeEigenvalues {
    pub fn tau1(&self) -> f64 {
        1.0 / self.lambda1.abs()
    }

    pub fn tau2(&self) -> f64 {
        1.0 / self.lambda2.abs()
    }

    pub fn tau3(&self) -> f64 {
        1.0 / self.lambda3.abs()
    }

    /// `τ1 / τ2`.
    pub fn separation_ratio(&self) -> f64 {
        self.tau1() / self.tau2()
    }
}

/// `λ1 = -φΔ²/(k(k+φ))`, `λ2 = -k`, `λ3 = -(φ+k)`.
pub fn lepe_eigenvalues(rates: Rates, delta: f64) -> LepeEigenvalues {
    let Rates { k, phi, .. } = rates;
    LepeEigenvalues {
        lambda1: lepe_lambda1(k, phi, delta),
        lambda2: -k,
        lambda3: -(phi + k),
    }
}

/// Quasi-stationary state reached after the fast transients, fixed by
/// `ξ = σ0ᴿ - p0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrethermalState {
    pub p_tilde: f64,
    pub sigma_tilde: f64,
    pub xi: f64,
    pub beta: f64,
    pub nu: f64,
}

pub fn prethermal_state(beta: f64, nu: f64, xi: f64) -> Result<PrethermalState> {
    crate::error::require_positive("beta", beta)?;
    crate::error::require_positive("nu", nu)?;
    if !(-1.0..=0.0).contains(&xi) {
        return Err(Error::XiOutOfRange { xi });
    }
    let e = (-beta * nu).exp();
    Ok(PrethermalState {
        p_tilde: (e - xi) / (2.0 * (1.0 + e)),
        sigma_tilde: (e + (1.0 + 2.0 * e) * xi) / (2.0 * (1.0 + e)),
        xi,
        beta,
        nu,
    })
}

impl PrethermalState {
    pub fn matrix(&self) -> DensityMatrix {
        ReducedState::new(self.p_tilde, self.sigma_tilde, 0.0).to_density()
    }

    /// `∂β p̃`; `∂β σ̃ᴿ` is identical.
    pub fn dp_dbeta(&self) -> f64 {
        let e = (-self.beta * self.nu).exp();
        -(self.xi + 1.0) * self.nu * e / (2.0 * (1.0 + e) * (1.0 + e))
    }

    pub fn dsigma_dbeta(&self) -> f64 {
        self.dp_dbeta()
    }

    /// Analytic `∂β` of [`matrix`](Self::matrix).
    pub fn matrix_derivative(&self) -> ComplexMatrix {
        let dp = self.dp_dbeta();
        let ds = self.dsigma_dbeta();
        #[rustfmt::skip]
        let m = ComplexMatrix::from_real(3, 3, &[
            -2.0 * dp, 0.0, 0.0,
             0.0,      dp,  ds,
             0.0,      ds,  dp,
        ]);
        m.expect("3x3 literal")
    }

    /// Eigenvalues `(1 - 2p̃, p̃ - σ̃, p̃ + σ̃)`.
    pub fn eigenvalues(&self) -> [f64; 3] {
        [
            1.0 - 2.0 * self.p_tilde,
            self.p_tilde - self.sigma_tilde,
            self.p_tilde + self.sigma_tilde,
        ]
    }
}
