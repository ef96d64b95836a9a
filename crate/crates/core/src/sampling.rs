//! Random sampling of V-model initial states to map the physical range of
//! `ξ = σ0ᴿ - p0`.
//!
//! Candidates have the form
//!
//! ```text
//! [ 1-p2-p3   a     b   ]
//! [   a       p2    σ0ᴿ ]
//! [   b       σ0ᴿ   p3  ]
//! ```
//!
//! with `p2, p3 ~ U[0,1]` and `a, b ~ U[-1,1]`. The random stream is
//! ChaCha20 (`rand_chacha`), seeded with `seed_from_u64(seed)`; shard `s`
//! of the study uses stream number `s` of that key, so the table is
//! identical for every thread count and platform.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::numerics::{hermitian_eig, ComplexMatrix, Tolerances, C64};

/// Samples per independently seeded shard.
pub const SHARD_SIZE: usize = 8192;

/// Sample count used for the published scan.
pub const DEFAULT_SAMPLE_COUNT: usize = 200_000;

const PHYSICAL_TOL: f64 = -1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateState {
    pub p2: f64,
    pub p3: f64,
    pub a: f64,
    pub b: f64,
    pub sigma0_r: f64,
    pub physical: bool,
    pub min_eigenvalue: f64,
    pub purity: f64,
    pub xi: f64,
}

impl CandidateState {
    pub fn from_parameters(p2: f64, p3: f64, a: f64, b: f64, sigma0_r: f64) -> Self {
        let mut c = Self {
            p2,
            p3,
            a,
            b,
            sigma0_r,
            physical: false,
            min_eigenvalue: f64::NAN,
            purity: f64::NAN,
            xi: sigma0_r - 0.5 * (p2 + p3),
        };
        let check = is_physical(&c.matrix());
        c.physical = check.physical;
        c.min_eigenvalue = check.min_eigenvalue;
        c.purity = check.purity;
        c
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [1.0 - self.p2 - self.p3, self.a, self.b],
            [self.a, self.p2, self.sigma0_r],
            [self.b, self.sigma0_r, self.p3],
        ]
    }

    pub fn complex_matrix(&self) -> ComplexMatrix {
        let m = self.matrix();
        ComplexMatrix::from_fn(3, 3, |i, j| C64::new(m[i][j], 0.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalityCheck {
    pub physical: bool,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

/// Positivity test for a unit-trace real symmetric 3×3 matrix. Purity is
/// reported but implied: a unit-trace positive matrix has purity ≤ 1.
pub fn is_physical(rho: &[[f64; 3]; 3]) -> PhysicalityCheck {
    let m = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(rho[i][j], 0.0));
    let purity = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| rho[i][j] * rho[j][i])
        .sum();
    let min_eigenvalue = match hermitian_eig(&m, &Tolerances::default()) {
        Ok(es) => es.eigenvalues[0].re,
        Err(_) => f64::NAN,
    };
    PhysicalityCheck {
        physical: min_eigenvalue >= PHYSICAL_TOL,
        min_eigenvalue,
        purity,
    }
}

/// How the excited-excited coherence is drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoherenceSampling {
    /// `σ0ᴿ ~ U[-1, 1]`.
    Uniform,
    /// Sample `i` takes the centre of bin `i mod bins` on `[lo, hi]`.
    Grid { bins: usize, lo: f64, hi: f64 },
}

impl CoherenceSampling {
    /// 60 bins over `[-0.75, 0.75]`.
    pub fn default_grid() -> Self {
        CoherenceSampling::Grid {
            bins: 60,
            lo: -0.75,
            hi: 0.75,
        }
    }
}

/// One candidate with all parameters drawn from `rng`.
pub fn sample_candidate<R: Rng + ?Sized>(rng: &mut R) -> CandidateState {
    let (p2, p3, a, b) = draw_body(rng);
    let sigma0_r = rng.random_range(-1.0..=1.0);
    CandidateState::from_parameters(p2, p3, a, b, sigma0_r)
}

fn draw_body<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, f64, f64) {
    let p2 = rng.random_range(0.0..=1.0);
    let p3 = rng.random_range(0.0..=1.0);
    let a = rng.random_range(-1.0..=1.0);
    let b = rng.random_range(-1.0..=1.0);
    (p2, p3, a, b)
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

/// Deterministic sample table of `n` candidates.
pub fn sample_table(n: usize, seed: u64, mode: CoherenceSampling) -> Vec<CandidateState> {
    let shards = n.div_ceil(SHARD_SIZE);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            let start = s * SHARD_SIZE;
            let end = (start + SHARD_SIZE).min(n);
            (start..end)
                .map(|idx| match mode {
                    CoherenceSampling::Uniform => sample_candidate(&mut rng),
                    CoherenceSampling::Grid { bins, lo, hi } => {
                        let (p2, p3, a, b) = draw_body(&mut rng);
                        let sigma = grid_center(idx % bins.max(1), bins, lo, hi);
                        CandidateState::from_parameters(p2, p3, a, b, sigma)
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn grid_center(bin: usize, bins: usize, lo: f64, hi: f64) -> f64 {
    let width = (hi - lo) / bins.max(1) as f64;
    lo + (bin as f64 + 0.5) * width
}

/// A deterministic state that attains one end of the ξ range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub label: &'static str,
    pub state: CandidateState,
    pub expected_xi: f64,
}

impl Witness {
    pub fn passes(&self) -> bool {
        self.state.physical && (self.state.xi - self.expected_xi).abs() < 1e-12
    }
}

/// Ground state (ξ = 0) and the antisymmetric excited superposition
/// `(|2⟩ - |3⟩)/√2` (ξ = -1).
pub fn endpoint_witnesses() -> [Witness; 2] {
    [
        Witness {
            label: "ground",
            state: CandidateState::from_parameters(0.0, 0.0, 0.0, 0.0, 0.0),
            expected_xi: 0.0,
        },
        Witness {
            label: "antisymmetric-superposition",
            state: CandidateState::from_parameters(0.5, 0.5, 0.0, 0.0, -0.5),
            expected_xi: -1.0,
        },
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct XiSummary {
    pub total: usize,
    pub physical: usize,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub sigma_abs_max: Option<f64>,
    /// Physical samples with ξ outside `[-1 - 1e-9, 1e-9]`.
    pub xi_violations: usize,
    /// Physical samples with `|σ0ᴿ| > 0.5 + 1e-9`.
    pub sigma_violations: usize,
}

impl XiSummary {
    pub fn from_samples(samples: &[CandidateState]) -> Self {
        let phys: Vec<&CandidateState> = samples.iter().filter(|c| c.physical).collect();
        let fold = |f: fn(f64, f64) -> f64, g: fn(&CandidateState) -> f64| phys.iter().map(|c| g(c)).reduce(f);
        Self {
            total: samples.len(),
            physical: phys.len(),
            xi_min: fold(f64::min, |c| c.xi),
            xi_max: fold(f64::max, |c| c.xi),
            sigma_abs_max: fold(f64::max, |c| c.sigma0_r.abs()),
            xi_violations: phys.iter().filter(|c| c.xi < -1.0 - 1e-9 || c.xi > 1e-9).count(),
            sigma_violations: phys.iter().filter(|c| c.sigma0_r.abs() > 0.5 + 1e-9).count(),
        }
    }

    pub fn bound_holds(&self) -> bool {
        self.xi_violations == 0 && self.sigma_violations == 0
    }
}

#[derive(Clone, Debug)]
pub struct XiBoundStudy {
    pub samples: Vec<CandidateState>,
    pub summary: XiSummary,
    pub witnesses: [Witness; 2],
}

pub fn xi_bound_study(n: usize, seed: u64, mode: CoherenceSampling) -> XiBoundStudy {
    let samples = sample_table(n, seed, mode);
    let summary = XiSummary::from_samples(&samples);
    XiBoundStudy {
        samples,
        summary,
        witnesses: endpoint_witnesses(),
    }
}

/// ξ extent of the physical samples whose σ0ᴿ falls in `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
}

impl BinRange {
    /// `xi_max - xi_min`, zero for an empty bin.
    pub fn width(&self) -> f64 {
        match (self.xi_min, self.xi_max) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

pub fn bin_range(samples: &[CandidateState], lo: f64, hi: f64) -> BinRange {
    let xs: Vec<f64> = samples
        .iter()
        .filter(|c| c.physical && c.sigma0_r >= lo && c.sigma0_r < hi)
        .map(|c| c.xi)
        .collect();
    BinRange {
        lo,
        hi,
        count: xs.len(),
        xi_min: xs.iter().cloned().reduce(f64::min),
        xi_max: xs.iter().cloned().reduce(f64::max),
    }
}

pub const SAMPLE_CSV_HEADER: &str = "sigma0R,p2,p3,a,b,xi,physical,min_eig";

pub fn write_samples_csv<W: Write>(mut w: W, samples: &[CandidateState]) -> io::Result<()> {
    writeln!(w, "{SAMPLE_CSV_HEADER}")?;
    for c in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            c.sigma0_r, c.p2, c.p3, c.a, c.b, c.xi, c.physical as u8, c.min_eigenvalue
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_draw_is_ground() {
        let c = CandidateState::from_parameters(0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(c.physical);
        assert_eq!(c.xi, 0.0);
    }

    #[test]
    fn symmetric_superposition() {
        let c = CandidateState::from_parameters(0.5, 0.5, 0.0, 0.0, 0.5);
        assert!(c.physical);
        assert!(c.xi.abs() < 1e-15);
        let ev = hermitian_eig(&c.complex_matrix(), &Tolerances::default())
            .unwrap()
            .real_eigenvalues();
        for (got, want) in ev.iter().zip([0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!((c.purity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn antisymmetric_superposition_hits_lower_bound() {
        let w = endpoint_witnesses();
        assert!(w.iter().all(Witness::passes));
        assert!((w[1].state.xi + 1.0).abs() < 1e-15);
    }

    #[test]
    fn physicality_examples() {
        let mixed = [[1.0 / 3.0, 0.0, 0.0], [0.0, 1.0 / 3.0, 0.0], [0.0, 0.0, 1.0 / 3.0]];
        assert!(is_physical(&mixed).physical);
        let bad = CandidateState::from_parameters(0.0, 0.0, 0.0, 0.0, 0.5);
        assert!(!bad.physical);
        assert!((bad.min_eigenvalue + 0.5).abs() < 1e-14);
    }

    #[test]
    fn empty_study_still_reports_witnesses() {
        let s = xi_bound_study(0, 7, CoherenceSampling::Uniform);
        assert!(s.samples.is_empty());
        assert_eq!(s.summary.physical, 0);
        assert_eq!(s.summary.xi_min, None);
        assert!(s.witnesses.iter().all(Witness::passes));
    }

    #[test]
    fn table_is_deterministic_and_shard_independent() {
        let a = sample_table(3 * SHARD_SIZE / 2, 11, CoherenceSampling::Uniform);
        let b = sample_table(3 * SHARD_SIZE / 2, 11, CoherenceSampling::Uniform);
        assert_eq!(a, b);
        // prefix of a longer table is the shorter table
        let c = sample_table(2 * SHARD_SIZE, 11, CoherenceSampling::Uniform);
        assert_eq!(&c[..a.len()], &a[..]);
        let d = sample_table(100, 12, CoherenceSampling::Uniform);
        assert_ne!(&d[..], &a[..100]);
    }

    #[test]
    fn draws_respect_ranges() {
        for c in sample_table(5000, 3, CoherenceSampling::Uniform) {
            assert!((0.0..=1.0).contains(&c.p2) && (0.0..=1.0).contains(&c.p3));
            assert!((-1.0..=1.0).contains(&c.a) && (-1.0..=1.0).contains(&c.b));
            assert!((-1.0..=1.0).contains(&c.sigma0_r));
        }
    }

    #[test]
    fn grid_mode_has_sixty_bins() {
        let t = sample_table(600, 5, CoherenceSampling::default_grid());
        let mut labels: Vec<u64> = t.iter().map(|c| c.sigma0_r.to_bits()).collect();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 60);
    }
}
