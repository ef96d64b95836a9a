use crate::error::Result;
use crate::numerics::{general_eig, Tolerances, C64};

use super::Generator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimescaleOptions {
    /// Eigenvalues with `|λ| ≤ zero_tol · max|G|` count as zero modes.
    pub zero_tol: f64,
    /// Modes whose amplitude in the initial state is below
    /// `overlap_tol · |v0|` are inactive.
    pub overlap_tol: f64,
    /// `τ1/τ2` above which a prethermal window is reported.
    pub window_threshold: f64,
}

impl Default for TimescaleOptions {
    fn default() -> Self {
        Self {
            zero_tol: 1e-13,
            overlap_tol: 1e-10,
            window_threshold: 100.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub eigenvalue: C64,
    /// `1/|Re λ|`; infinite for non-relaxing modes.
    pub tau: f64,
    /// `|c_n|` in the initial state, when one was given.
    pub amplitude: Option<f64>,
    pub active: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimescaleReport {
    /// Every eigenvalue except the stationary one, slowest first.
    pub modes: Vec<Mode>,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub separation_ratio: f64,
    /// `(τ2, τ1)` when `τ1/τ2` exceeds the threshold.
    pub window: Option<(f64, f64)>,
    /// Zero modes beyond the stationary one.
    pub non_relaxing: usize,
    /// Mode amplitudes are unreliable and every mode was kept.
    pub ill_conditioned: bool,
}

impl TimescaleReport {
    pub fn window_nonempty(&self) -> bool {
        self.window.is_some()
    }

    /// Geometric centre of the window, `√(τ1 τ2)`.
    pub fn plateau_time(&self) -> f64 {
        (self.tau1 * self.tau2).sqrt()
    }
}

/// Relaxation timescales of `generator`, optionally restricted to the modes
/// an initial vector excites. `τ1` is the slowest active mode, `τ3` the
/// fastest and `τ2` the slowest mode on the fast side of the largest gap in
/// the relaxation spectrum, so that a cluster of nearly equal slow rates
/// counts as one channel.
pub fn analyze_timescales(
    generator: &Generator,
    init: Option<&[C64]>,
    opts: &TimescaleOptions,
) -> Result<TimescaleReport> {
    let es = general_eig(generator.matrix(), &Tolerances::default())?;
    let scale = generator.matrix().max_abs().max(f64::MIN_POSITIVE);
    let zero = opts.zero_tol * scale;

    let amplitudes: Option<Vec<f64>> = match init {
        Some(v0) if !es.ill_conditioned => Some(es.inverse.mul_vec(v0)?.iter().map(|c| c.norm()).collect()),
        _ => None,
    };
    let v0_norm = init.map_or(0.0, |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());

    let mut order: Vec<usize> = (0..es.dim()).collect();
    order.sort_by(|&a, &b| {
        let ka = (es.eigenvalues[a].re.abs(), es.eigenvalues[a].norm());
        let kb = (es.eigenvalues[b].re.abs(), es.eigenvalues[b].norm());
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let stationary = *order
        .iter()
        .min_by(|&&a, &&b| es.eigenvalues[a].norm().total_cmp(&es.eigenvalues[b].norm()))
        .expect("generator has at least one mode");

    let modes: Vec<Mode> = order
        .into_iter()
        .filter(|&i| i != stationary)
        .map(|i| {
            let l = es.eigenvalues[i];
            let amplitude = amplitudes.as_ref().map(|a| a[i]);
            Mode {
                eigenvalue: l,
                tau: if l.re.abs() <= zero {
                    f64::INFINITY
                } else {
                    1.0 / l.re.abs()
                },
                amplitude,
                active: amplitude.is_none_or(|a| a > opts.overlap_tol * v0_norm),
            }
        })
        .collect();
    let non_relaxing = modes.iter().filter(|m| m.active && m.tau.is_infinite()).count();

    let active: Vec<f64> = modes.iter().filter(|m| m.active).map(|m| m.tau).collect();
    let (tau1, tau2, tau3) = match active.as_slice() {
        [] => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
        all => (all[0], all[largest_gap(all)], all[all.len() - 1]),
    };
    let separation_ratio = if tau2.is_infinite() || tau1 == tau2 {
        1.0
    } else {
        tau1 / tau2
    };
    let window = (separation_ratio > opts.window_threshold).then_some((tau2, tau1));
    Ok(TimescaleReport {
        modes,
        tau1,
        tau2,
        tau3,
        separation_ratio,
        window,
        non_relaxing,
        ill_conditioned: es.ill_conditioned,
    })
}

/// Index of the slowest mode above the largest ratio gap between
/// consecutive relaxation rates; 0 when all rates coincide.
fn largest_gap(taus: &[f64]) -> usize {
    let mut best = (1.0, 0);
    for (i, w) in taus.windows(2).enumerate() {
        let (slow, fast) = (1.0 / w[0], 1.0 / w[1]);
        let ratio = if slow == 0.0 {
            if fast > 0.0 {
                f64::INFINITY
            } else {
                1.0
            }
        } else {
            fast / slow
        };
        if ratio > best.0 {
            best = (ratio, i + 1);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{
        build_redfield_generator, lepe_eigenvalues, unified_generator_v, RedfieldVariant, ReducedState,
    };
    use crate::probes::{ProbeModel, Rates};

    fn reference_rates() -> Rates {
        ProbeModel::v_model(1.0, 1e-4, 0.07, 4.0).unwrap().thermal_rates()
    }

    #[test]
    fn gap_selection() {
        assert_eq!(largest_gap(&[1e7, 1e7 / 1.04, 5.0, 2.0]), 2);
        assert_eq!(largest_gap(&[2.0, 2.0, 1.0]), 2);
        assert_eq!(largest_gap(&[3.0, 3.0]), 0);
        assert_eq!(largest_gap(&[f64::INFINITY, f64::INFINITY, 7.0]), 2);
    }

    #[test]
    fn reduced_v_matches_lepe() {
        let r = reference_rates();
        let g = unified_generator_v(r, 1e-4).unwrap();
        let rep = analyze_timescales(&g, Some(&ReducedState::default().homogeneous()), &Default::default()).unwrap();
        let lepe = lepe_eigenvalues(r, 1e-4);
        assert_eq!(rep.modes.len(), 3);
        assert!((rep.tau1 / lepe.tau1() - 1.0).abs() < 1e-6);
        assert!((rep.tau2 / lepe.tau2() - 1.0).abs() < 1e-6);
        assert!((rep.tau3 / lepe.tau3() - 1.0).abs() < 1e-6);
        assert!(rep.window_nonempty());
        assert!((rep.separation_ratio / 3.996e6 - 1.0).abs() < 1e-3);
        assert_eq!(rep.non_relaxing, 0);
        assert!(rep.modes.iter().all(|m| m.eigenvalue.re <= 1e-10));
    }

    #[test]
    fn zero_splitting_has_non_relaxing_mode() {
        let g = unified_generator_v(reference_rates(), 0.0).unwrap();
        let rep = analyze_timescales(&g, Some(&ReducedState::default().homogeneous()), &Default::default()).unwrap();
        assert_eq!(rep.non_relaxing, 1);
        assert!(rep.tau1.is_infinite());
        assert!(rep.window_nonempty());
    }

    #[test]
    fn qubit_has_no_window() {
        let m = ProbeModel::qubit(1.0, 0.07, 4.0).unwrap();
        let g = build_redfield_generator(&m, RedfieldVariant::Unified, None).unwrap();
        let rep = analyze_timescales(&g, None, &Default::default()).unwrap();
        assert!(!rep.window_nonempty());
        let r = m.thermal_rates();
        assert!((rep.tau3 * r.k * (1.0 + (-4f64).exp()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_relaxing_mode() {
        let m = ProbeModel::qubit(1.0, 0.07, 4.0).unwrap();
        let g = build_redfield_generator(&m, RedfieldVariant::Unified, None).unwrap();
        let rho = m.gibbs_state();
        let mut v = rho.matrix().as_slice().to_vec();
        // Populations only: the coherence modes are not excited.
        v[0] = C64::new(1.0, 0.0);
        v[3] = C64::new(0.0, 0.0);
        let rep = analyze_timescales(&g, Some(&v), &Default::default()).unwrap();
        assert_eq!(rep.tau1, rep.tau2);
        assert_eq!(rep.tau2, rep.tau3);
        assert!(!rep.window_nonempty());
    }

    #[test]
    fn n_level_slow_cluster_is_one_channel() {
        let m = ProbeModel::n_level(1.0, 3, 1e-4, 0.07, 4.0).unwrap();
        let g = build_redfield_generator(&m, RedfieldVariant::Unified, None).unwrap();
        let v0 = g
            .state_vector(
                &crate::probes::initial_state(crate::probes::InitialCondition::Ground, &m)
                    .unwrap()
                    .rho,
            )
            .unwrap();
        let rep = analyze_timescales(&g, Some(&v0), &Default::default()).unwrap();
        assert!(rep.separation_ratio > 1e5);
        assert!(rep.tau2 < 100.0);
        assert!(rep.tau1 > 3e7);
    }

    #[test]
    fn lambda1_tracks_lepe_in_full_liouvillian() {
        let base = ProbeModel::v_model(1.0, 1e-4, 0.07, 4.0).unwrap();
        for delta in [1e-5, 1e-4, 1e-3] {
            let m = ProbeModel::v_model(1.0, delta, 0.07, 4.0).unwrap();
            let g = build_redfield_generator(&m, RedfieldVariant::Unified, None).unwrap();
            let rep = analyze_timescales(&g, None, &Default::default()).unwrap();
            let lepe = lepe_eigenvalues(base.thermal_rates(), delta);
            let rel = (1.0 / rep.tau1 - lepe.lambda1.abs()).abs() / lepe.lambda1.abs();
            assert!(rel < 10.0 * delta, "delta {delta}: rel {rel:e}");
        }
    }
}
