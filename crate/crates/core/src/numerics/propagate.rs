use super::eigen::{general_eig, EigenSystem};
use super::matrix::{ComplexMatrix, C64};
use super::{NumericsError, Tolerances};

/// How a propagator evaluates `exp(G t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationMethod {
    /// `V exp(Λ t) V⁻¹`.
    Spectral,
    /// Scaling and squaring of a truncated Taylor series, evaluated per time.
    ScalingSquaring,
}

impl PropagationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PropagationMethod::Spectral => "spectral",
            PropagationMethod::ScalingSquaring => "scaling-squaring",
        }
    }
}

/// Propagator for the linear system `dv/dt = G v` with time-independent `G`.
#[derive(Clone, Debug)]
pub struct Propagator {
    generator: ComplexMatrix,
    eigen: Option<EigenSystem>,
    fallback_reason: Option<String>,
}

impl Propagator {
    /// Diagonalizes `g`; defective, ill-conditioned or non-convergent input
    /// switches the propagator to scaling and squaring.
    pub fn new(g: &ComplexMatrix, tol: &Tolerances) -> Result<Self, NumericsError> {
        if !g.is_square() {
            return Err(NumericsError::NotSquare {
                rows: g.rows(),
                cols: g.cols(),
            });
        }
        let (eigen, fallback_reason) = match general_eig(g, tol) {
            Ok(mut es) if !es.ill_conditioned => {
                snap_zero_modes(&mut es, g.max_abs());
                (Some(es), None)
            }
            Ok(es) => (
                None,
                Some(format!("eigenvector condition {:.3e} exceeds limit", es.condition)),
            ),
            Err(e @ (NumericsError::NoConvergence { .. } | NumericsError::ResidualTooLarge { .. })) => {
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(e),
        };
        Ok(Self {
            generator: g.clone(),
            eigen,
            fallback_reason,
        })
    }

    /// As [`new`](Self::new) for a generator with a conserved linear
    /// functional `c` (`c G = 0`). The stationary mode is pinned to
    /// eigenvalue zero and its admixture is removed from every other mode so
    /// that `c · v(t)` stays exact when a slow eigenvalue sits close to zero.
    pub fn with_conserved(g: &ComplexMatrix, tol: &Tolerances, c: &[C64]) -> Result<Self, NumericsError> {
        let mut p = Self::new(g, tol)?;
        if c.len() != p.dim() {
            return Err(NumericsError::DimensionMismatch {
                expected: p.dim(),
                found: c.len(),
            });
        }
        if let Some(es) = p.eigen.as_mut() {
            let n = es.dim();
            let overlap = |es: &EigenSystem, j: usize| -> C64 { (0..n).map(|i| c[i] * es.vectors[(i, j)]).sum() };
            // Among numerically zero modes, the one carrying the functional.
            let cutoff = ZERO_MODE_EPS * g.max_abs();
            let s = (0..n)
                .filter(|&j| es.eigenvalues[j].norm() <= cutoff)
                .max_by(|&a, &b| overlap(es, a).norm().total_cmp(&overlap(es, b).norm()))
                .or_else(|| (0..n).min_by(|&a, &b| es.eigenvalues[a].norm().total_cmp(&es.eigenvalues[b].norm())))
                .expect("non-empty system");
            let anchor = overlap(es, s);
            if anchor.norm() > 0.0 {
                for j in (0..n).filter(|&j| j != s) {
                    let f = overlap(es, j) / anchor;
                    for i in 0..n {
                        let v = es.vectors[(i, s)];
                        es.vectors[(i, j)] -= f * v;
                    }
                }
                es.eigenvalues[s] = C64::new(0.0, 0.0);
                es.inverse = es.vectors.inverse()?;
            }
        }
        Ok(p)
    }

    pub fn method(&self) -> PropagationMethod {
        if self.eigen.is_some() {
            PropagationMethod::Spectral
        } else {
            PropagationMethod::ScalingSquaring
        }
    }

    pub fn fallback_reason(&self) -> Option<&str> {
        self.fallback_reason.as_deref()
    }

    pub fn eigensystem(&self) -> Option<&EigenSystem> {
        self.eigen.as_ref()
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    /// `exp(G t) v0`.
    pub fn apply(&self, v0: &[C64], t: f64) -> Result<Vec<C64>, NumericsError> {
        if v0.len() != self.dim() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.dim(),
                found: v0.len(),
            });
        }
        if t < 0.0 || !t.is_finite() {
            return Err(NumericsError::InvalidTime(t));
        }
        if t == 0.0 {
            return Ok(v0.to_vec());
        }
        match &self.eigen {
            Some(es) => {
                let coeffs = es.inverse.mul_vec(v0)?;
                Ok(spectral_sum(es, &coeffs, t))
            }
            None => expm(&self.generator.scale_real(t))?.mul_vec(v0),
        }
    }

    /// `exp(G t) v0` at every time in `times`.
    pub fn apply_many(&self, v0: &[C64], times: &[f64]) -> Result<Vec<Vec<C64>>, NumericsError> {
        if let Some(es) = &self.eigen {
            if v0.len() != self.dim() {
                return Err(NumericsError::DimensionMismatch {
                    expected: self.dim(),
                    found: v0.len(),
                });
            }
            let coeffs = es.inverse.mul_vec(v0)?;
            times
                .iter()
                .map(|&t| {
                    if t < 0.0 || !t.is_finite() {
                        Err(NumericsError::InvalidTime(t))
                    } else if t == 0.0 {
                        Ok(v0.to_vec())
                    } else {
                        Ok(spectral_sum(es, &coeffs, t))
                    }
                })
                .collect()
        } else {
            times.iter().map(|&t| self.apply(v0, t)).collect()
        }
    }

    /// Expansion coefficients of `v0` in the eigenvector basis, if spectral.
    pub fn mode_amplitudes(&self, v0: &[C64]) -> Option<Vec<C64>> {
        self.eigen.as_ref().and_then(|es| es.inverse.mul_vec(v0).ok())
    }
}

/// Eigenvalues indistinguishable from zero at working precision are set to
/// exactly zero, so stationary modes stay stationary at large `t`.
fn snap_zero_modes(es: &mut EigenSystem, scale: f64) {
    let cutoff = ZERO_MODE_EPS * scale;
    for l in &mut es.eigenvalues {
        if l.norm() <= cutoff {
            *l = C64::new(0.0, 0.0);
        }
    }
}

const ZERO_MODE_EPS: f64 = 100.0 * f64::EPSILON;

fn spectral_sum(es: &EigenSystem, coeffs: &[C64], t: f64) -> Vec<C64> {
    let n = es.dim();
    let weights: Vec<C64> = es
        .eigenvalues
        .iter()
        .zip(coeffs)
        .map(|(&l, &c)| (l * t).exp() * c)
        .collect();
    (0..n)
        .map(|i| es.vectors.row(i).iter().zip(&weights).map(|(&v, &w)| v * w).sum())
        .collect()
}

/// `V exp(Λ t) V⁻¹ v0` for each time.
pub fn propagate_spectral(
    g: &ComplexMatrix,
    v0: &[C64],
    times: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<Vec<C64>>, PropagationMethod), NumericsError> {
    let prop = Propagator::new(g, tol)?;
    let states = prop.apply_many(v0, times)?;
    Ok((states, prop.method()))
}

const TAYLOR_TERMS: usize = 24;

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings));
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=TAYLOR_TERMS {
        term = (&term * &scaled).scale_real(1.0 / k as f64);
        result = &result + &term;
        if term.max_abs() <= f64::EPSILON * 1e-3 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Classical fixed-step RK4 for `dv/dt = G v`, reporting the state at each
/// requested time (times must be ascending). The final step before each
/// report is shortened to land exactly on it.
pub fn rk4_propagate(g: &ComplexMatrix, v0: &[C64], times: &[f64], step: f64) -> Result<Vec<Vec<C64>>, NumericsError> {
    if !(step > 0.0) {
        return Err(NumericsError::InvalidTime(step));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut v = v0.to_vec();
    let mut t = 0.0;
    for &target in times {
        if target < t {
            return Err(NumericsError::InvalidTime(target));
        }
        while t < target {
            let h = step.min(target - t);
            let k1 = g.mul_vec(&v)?;
            let y2: Vec<C64> = v.iter().zip(&k1).map(|(a, b)| a + b * (h / 2.0)).collect();
            let k2 = g.mul_vec(&y2)?;
            let y3: Vec<C64> = v.iter().zip(&k2).map(|(a, b)| a + b * (h / 2.0)).collect();
            let k3 = g.mul_vec(&y3)?;
            let y4: Vec<C64> = v.iter().zip(&k3).map(|(a, b)| a + b * h).collect();
            let k4 = g.mul_vec(&y4)?;
            for i in 0..v.len() {
                v[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
            t += h;
            if target - t < 1e-12 * step {
                t = target;
            }
        }
        out.push(v.clone());
    }
    Ok(out)
}
