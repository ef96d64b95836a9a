use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::numerics::{rk4_propagate, ComplexMatrix, PropagationMethod, C64};
use crate::probes::DensityMatrix;

use super::{Generator, GeneratorBasis, ReducedState};

/// State at one time together with its physicality diagnostics.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub rho: DensityMatrix,
    /// `|Tr ρ - 1|`.
    pub trace_error: f64,
    /// `max|ρ - ρ†|`.
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Snapshot {
    fn new(t: f64, m: ComplexMatrix) -> Self {
        let trace_error = (m.trace() - C64::new(1.0, 0.0)).norm();
        let hermiticity_error = m.hermiticity_error();
        let rho = DensityMatrix::from_matrix_unchecked(m);
        let min_eigenvalue = rho.min_eigenvalue();
        Self {
            t,
            rho,
            trace_error,
            hermiticity_error,
            min_eigenvalue,
        }
    }

    pub fn reduced(&self) -> ReducedState {
        ReducedState::from_density(&self.rho)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub method: PropagationMethod,
    pub fallback_reason: Option<String>,
}

impl Trajectory {
    pub fn max_trace_error(&self) -> f64 {
        self.snapshots.iter().map(|s| s.trace_error).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.snapshots
            .iter()
            .map(|s| s.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact propagation of `rho0` to each of `times`.
pub fn evolve(generator: &Generator, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    check_times(times)?;
    let v0 = generator.state_vector(rho0)?;
    let prop = generator.propagator()?;
    let states = prop.apply_many(&v0, times)?;
    let d = generator.probe_dim();
    let snapshots = times
        .iter()
        .zip(states)
        .map(|(&t, v)| {
            let m = match generator.basis() {
                GeneratorBasis::ReducedVModel => ReducedState::from_homogeneous(&v).to_density().into_matrix(),
                GeneratorBasis::Vectorized { .. } => ComplexMatrix::from_vec(d, d, v)?,
            };
            Ok(Snapshot::new(t, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        snapshots,
        method: prop.method(),
        fallback_reason: prop.fallback_reason().map(str::to_owned),
    })
}

/// Propagates reduced coordinates under a reduced generator.
pub fn evolve_reduced(generator: &Generator, init: ReducedState, times: &[f64]) -> Result<Vec<ReducedState>> {
    if generator.basis() != GeneratorBasis::ReducedVModel {
        return Err(Error::Dimension(
            "evolve_reduced needs a reduced V-model generator".into(),
        ));
    }
    check_times(times)?;
    let prop = generator.propagator()?;
    Ok(prop
        .apply_many(&init.homogeneous(), times)?
        .iter()
        .map(|v| ReducedState::from_homogeneous(v))
        .collect())
}

/// Largest deviation between exact propagation and fixed-step RK4 over
/// `times` (ascending).
pub fn rk4_cross_check(generator: &Generator, v0: &[C64], times: &[f64], step: f64) -> Result<f64> {
    check_times(times)?;
    let exact = generator.propagator()?.apply_many(v0, times)?;
    let rk = rk4_propagate(generator.matrix(), v0, times, step)?;
    Ok(exact
        .iter()
        .zip(&rk)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max))
}

fn check_times(times: &[f64]) -> Result<()> {
    match times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        Some(&t) => Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "times must be finite and non-negative",
        }),
        None => Ok(()),
    }
}

/// `n` geometrically spaced times from `t_min` to `t_max` inclusive.
pub fn log_time_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_max,
            reason: "need 0 < t_min < t_max",
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            value: n as f64,
            reason: "need at least two points",
        });
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = t_min;
    grid[n - 1] = t_max;
    Ok(grid)
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,p,sigmaR,sigmaI,ground_pop,trace_err,min_eig";

pub fn write_trajectory_csv<W: Write>(mut w: W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
    for s in &trajectory.snapshots {
        let r = s.reduced();
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            s.t,
            r.p,
            r.sigma_r,
            r.sigma_i,
            s.rho.populations()[0],
            s.trace_error,
            s.min_eigenvalue
        )?;
    }
    Ok(())
}
