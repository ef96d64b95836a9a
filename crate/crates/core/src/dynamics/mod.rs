//! Open-system dynamics of the probes: the reduced V-model equations,
//! Redfield-type master equations in Liouville space, exact propagation and
//! timescale analysis.

mod evolve;
mod redfield;
mod reduced;
mod timescales;

pub use evolve::{
    evolve, evolve_reduced, log_time_grid, rk4_cross_check, write_trajectory_csv, Snapshot, Trajectory,
    TRAJECTORY_CSV_HEADER,
};
pub use redfield::{
    build_redfield_generator, default_cluster_tol, one_sided_rate, redfield_superoperator, RedfieldVariant,
};
pub use reduced::{
    closed_form_evolution, closed_form_rate, lepe_eigenvalues, prethermal_state, unified_generator_v, LepeEigenvalues,
    PrethermalState, ReducedState,
};
pub use timescales::{analyze_timescales, Mode, TimescaleOptions, TimescaleReport};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Propagator, Tolerances, C64};
use crate::probes::Rates;

/// Coordinates the generator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorBasis {
    /// Homogeneous `(p, σᴿ, σᴵ, 1)`.
    ReducedVModel,
    /// Row-major `vec(ρ)` of a `dim × dim` density matrix.
    Vectorized { dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeneratorOrigin {
    ReducedV {
        rates: Rates,
        delta: f64,
    },
    Redfield {
        variant: RedfieldVariant,
        beta: f64,
        cluster_tol: f64,
    },
}

/// Time-independent linear generator `dv/dt = G v`.
#[derive(Clone, Debug)]
pub struct Generator {
    matrix: ComplexMatrix,
    basis: GeneratorBasis,
    origin: GeneratorOrigin,
}

impl Generator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> GeneratorBasis {
        self.basis
    }

    pub fn origin(&self) -> GeneratorOrigin {
        self.origin
    }

    /// Dimension of the vector the generator acts on.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Hilbert-space dimension of the probe.
    pub fn probe_dim(&self) -> usize {
        match self.basis {
            GeneratorBasis::ReducedVModel => 3,
            GeneratorBasis::Vectorized { dim } => dim,
        }
    }

    /// Exact propagator with the trace (the homogeneous coordinate for the
    /// reduced basis) held fixed.
    pub fn propagator(&self) -> Result<Propagator> {
        Ok(Propagator::with_conserved(
            &self.matrix,
            &Tolerances::default(),
            &self.trace_functional(),
        )?)
    }

    fn trace_functional(&self) -> Vec<C64> {
        let mut c = vec![C64::new(0.0, 0.0); self.dim()];
        match self.basis {
            GeneratorBasis::ReducedVModel => c[3] = C64::new(1.0, 0.0),
            GeneratorBasis::Vectorized { dim } => {
                for i in 0..dim {
                    c[i * dim + i] = C64::new(1.0, 0.0);
                }
            }
        }
        c
    }

    /// Largest violation of `d Tr ρ / dt = 0` over the basis.
    pub fn trace_preservation_error(&self) -> f64 {
        match self.basis {
            GeneratorBasis::ReducedVModel => (0..4).map(|j| self.matrix[(3, j)].norm()).fold(0.0, f64::max),
            GeneratorBasis::Vectorized { dim } => (0..self.dim())
                .map(|col| (0..dim).map(|i| self.matrix[(i * dim + i, col)]).sum::<C64>().norm())
                .fold(0.0, f64::max),
        }
    }

    /// Vector representation of a state in this generator's basis.
    pub fn state_vector(&self, rho: &crate::probes::DensityMatrix) -> Result<Vec<C64>> {
        if rho.dim() != self.probe_dim() {
            return Err(Error::Dimension(format!(
                "state is {}-dimensional, generator acts on {} levels",
                rho.dim(),
                self.probe_dim()
            )));
        }
        Ok(match self.basis {
            GeneratorBasis::ReducedVModel => ReducedState::from_density(rho).homogeneous(),
            GeneratorBasis::Vectorized { .. } => rho.matrix().as_slice().to_vec(),
        })
    }

    /// Fixed point of the reduced equations, `L v + b = 0`.
    pub fn reduced_stationary_state(&self) -> Result<ReducedState> {
        let (lin, drive) = self.reduced_affine_part()?;
        let inv = lin.inverse()?;
        let v = inv.mul_vec(&drive)?;
        Ok(ReducedState::new(-v[0].re, -v[1].re, -v[2].re))
    }

    /// Affine restriction `(L, b)` of a reduced generator, or of a 3-level
    /// Liouvillian onto states with equal excited populations and no
    /// ground-excited coherence.
    pub fn reduced_affine_part(&self) -> Result<(ComplexMatrix, Vec<C64>)> {
        let h = self.restrict_to_reduced()?.0;
        let lin = ComplexMatrix::from_fn(3, 3, |i, j| h[(i, j)]);
        let drive = (0..3).map(|i| h[(i, 3)]).collect();
        Ok((lin, drive))
    }

    /// The generator expressed in homogeneous reduced coordinates, together
    /// with the largest rate at which it leaks out of the reduced subspace.
    pub fn restrict_to_reduced(&self) -> Result<(ComplexMatrix, f64)> {
        match self.basis {
            GeneratorBasis::ReducedVModel => Ok((self.matrix.clone(), 0.0)),
            GeneratorBasis::Vectorized { dim: 3 } => {
                let basis = [
                    ReducedState::new(0.0, 0.0, 0.0),
                    ReducedState::new(1.0, 0.0, 0.0),
                    ReducedState::new(0.0, 1.0, 0.0),
                    ReducedState::new(0.0, 0.0, 1.0),
                ];
                let mut out = ComplexMatrix::zeros(4, 4);
                let mut leak: f64 = 0.0;
                let mut origin = [0.0; 3];
                for (j, s) in basis.iter().enumerate() {
                    let d = self.matrix.mul_vec(s.to_density().matrix().as_slice())?;
                    let d = ComplexMatrix::from_vec(3, 3, d)?;
                    let rate = [0.5 * (d[(1, 1)].re + d[(2, 2)].re), d[(2, 1)].re, d[(2, 1)].im];
                    leak = leak
                        .max((d[(1, 1)] - d[(2, 2)]).norm())
                        .max(d[(0, 1)].norm())
                        .max(d[(0, 2)].norm())
                        .max(d[(1, 0)].norm())
                        .max(d[(2, 0)].norm());
                    if j == 0 {
                        origin = rate;
                        for i in 0..3 {
                            out[(i, 3)] = C64::new(rate[i], 0.0);
                        }
                    } else {
                        for i in 0..3 {
                            out[(i, j - 1)] = C64::new(rate[i] - origin[i], 0.0);
                        }
                    }
                }
                Ok((out, leak))
            }
            GeneratorBasis::Vectorized { dim } => Err(Error::Dimension(format!(
                "reduced coordinates need a 3-level probe, generator acts on {dim} levels"
            ))),
        }
    }
}
