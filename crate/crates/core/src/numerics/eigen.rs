//! Eigensolvers.
//!
//! `hermitian_eig` is a cyclic complex Jacobi method: quadratically
//! convergent and accurate to working precision for the small density
//! matrices it is used on. `general_eig` reduces to upper Hessenberg form
//! with Householder reflectors, runs implicitly shifted single-shift complex
//! QR sweeps to a Schur form `A = Z T Z†`, and back-substitutes eigenvectors
//! of `T`.

use super::matrix::{ComplexMatrix, C64};
use super::{NumericsError, Tolerances, MAX_DIMENSION};

/// Eigenvalues with right eigenvectors (as columns) and their inverse.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<C64>,
    pub vectors: ComplexMatrix,
    pub inverse: ComplexMatrix,
    /// `max|A V - V Λ| / max|A|`.
    pub residual: f64,
    /// 1-norm condition estimate of `vectors`.
    pub condition: f64,
    pub ill_conditioned: bool,
}

impl EigenSystem {
    /// Real parts of the eigenvalues; meaningful for Hermitian input.
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

const MAX_JACOBI_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascending,
/// eigenvectors orthonormal.
pub fn hermitian_eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<EigenSystem, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let scale = a.max_abs();
    let herm_err = a.hermiticity_error();
    if herm_err > tol.hermitian * scale.max(f64::MIN_POSITIVE) {
        return Err(NumericsError::NotHermitian {
            deviation: herm_err,
            scale,
        });
    }
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let off_norm = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let total = m.frobenius();

    let mut converged = n <= 1 || total == 0.0;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        if off_norm(&m) <= f64::EPSILON * 1e-2 * total {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let abs_pq = apq.norm();
                if abs_pq == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // phase that makes the (p,q) entry real and positive
                let phase = apq / abs_pq;
                let theta = (aqq - app) / (2.0 * abs_pq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = [[c, s], [-s·conj(phase), c·conj(phase)]] on (p, q)
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                for i in 0..n {
                    let mp = m[(i, p)];
                    let mq = m[(i, q)];
                    m[(i, p)] = mp * u_pp + mq * u_qp;
                    m[(i, q)] = mp * u_pq + mq * u_qq;
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * u_pp + vq * u_qp;
                    v[(i, q)] = vp * u_pq + vq * u_qq;
                }
                for j in 0..n {
                    let mp = m[(p, j)];
                    let mq = m[(q, j)];
                    m[(p, j)] = u_pp.conj() * mp + u_qp.conj() * mq;
                    m[(q, j)] = u_pq.conj() * mp + u_qq.conj() * mq;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    if !converged && off_norm(&m) > 1e-12 * total {
        return Err(NumericsError::NoConvergence {
            iterations: MAX_JACOBI_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues: Vec<C64> = order.iter().map(|&i| C64::new(m[(i, i)].re, 0.0)).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    let inverse = vectors.adjoint();
    let residual = residual_of(a, &vectors, &eigenvalues);
    Ok(EigenSystem {
        eigenvalues,
        vectors,
        inverse,
        residual,
        condition: 1.0,
        ill_conditioned: false,
    })
}

/// Eigendecomposition of a general square matrix.
///
/// Fails with `NoConvergence` when one deflation takes more than
/// `30·max(n, 10)` QR sweeps and
/// with `ResidualTooLarge` when the returned vectors do not satisfy the
/// residual bound. Near-defective input is not an error: the system comes
/// back with `ill_conditioned` set.
pub fn general_eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<EigenSystem, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > MAX_DIMENSION {
        return Err(NumericsError::TooLarge {
            dim: n,
            max: MAX_DIMENSION,
        });
    }
    if n == 0 {
        return Ok(EigenSystem {
            eigenvalues: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
            inverse: ComplexMatrix::zeros(0, 0),
            residual: 0.0,
            condition: 1.0,
            ill_conditioned: false,
        });
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(EigenSystem {
            eigenvalues: vec![C64::new(0.0, 0.0); n],
            vectors: ComplexMatrix::identity(n),
            inverse: ComplexMatrix::identity(n),
            residual: 0.0,
            condition: 1.0,
            ill_conditioned: false,
        });
    }

    let (mut h, mut z) = hessenberg(a);
    schur_qr(&mut h, &mut z, 30 * n.max(10))?;
    let eigenvalues = h.diagonal();
    let x = triangular_eigenvectors(&h);
    let mut vectors = z.matmul(&x)?;
    normalize_columns(&mut vectors);

    let residual = residual_of(a, &vectors, &eigenvalues);
    if residual > tol.eigen_residual {
        return Err(NumericsError::ResidualTooLarge {
            residual,
            bound: tol.eigen_residual,
        });
    }
    let (inverse, condition) = match vectors.inverse() {
        Ok(inv) => {
            let cond = vectors.norm_one() * inv.norm_one();
            (inv, cond)
        }
        Err(_) => (ComplexMatrix::zeros(n, n), f64::INFINITY),
    };
    let ill_conditioned = !(condition <= tol.condition_limit);
    Ok(EigenSystem {
        eigenvalues,
        vectors,
        inverse,
        residual,
        condition,
        ill_conditioned,
    })
}

fn residual_of(a: &ComplexMatrix, v: &ComplexMatrix, lambda: &[C64]) -> f64 {
    let av = a * v;
    let n = a.rows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((av[(i, j)] - v[(i, j)] * lambda[j]).norm());
        }
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

fn normalize_columns(v: &mut ComplexMatrix) {
    for j in 0..v.cols() {
        let norm = (0..v.rows()).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..v.rows() {
                v[(i, j)] /= norm;
            }
        }
    }
}

/// Householder reduction `A = Q H Q†` with `H` upper Hessenberg.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- P H with P = I - 2 v v†, acting on rows k+1..n
        for j in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + idx, j)];
            }
            let dot = dot * 2.0;
            for (idx, vi) in v.iter().enumerate() {
                h[(k + 1 + idx, j)] -= vi * dot;
            }
        }
        // H <- H P and Q <- Q P, acting on columns k+1..n
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let mut dot = C64::new(0.0, 0.0);
                for (idx, vi) in v.iter().enumerate() {
                    dot += m[(i, k + 1 + idx)] * vi;
                }
                let dot = dot * 2.0;
                for (idx, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + idx)] -= dot * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Givens rotation with real `c` and complex `s` such that
/// `[c, s; -conj(s), c] · [x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    let nx = x.norm();
    if nx == 0.0 {
        return (0.0, y.conj() / ny);
    }
    let norm = nx.hypot(ny);
    let c = nx / norm;
    let s = (x / nx) * y.conj() / norm;
    (c, s)
}

/// Shifted QR iteration driving Hessenberg `h` to upper triangular form,
/// accumulating the unitary similarity into `z`. `max_sweeps` bounds the
/// sweeps spent on any single deflation.
fn schur_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix, max_sweeps: usize) -> Result<(), NumericsError> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let norm = h.max_abs();
    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    let mut total = 0usize;

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= eps * diag || sub < f64::MIN_POSITIVE * 1e3 {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        if hi - l == 1 {
            // A 2x2 active block is triangularized directly; iterating on a
            // nearly defective pair can stall above the deflation threshold.
            let (c, s) = schur_rotation_2x2(h[(l, l)], h[(l, hi)], h[(hi, l)], h[(hi, hi)]);
            rotate(h, z, l, c, s, l, hi);
            h[(hi, l)] = C64::new(0.0, 0.0);
            if l == 0 {
                break;
            }
            hi = l - 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if since_deflation > max_sweeps {
            return Err(NumericsError::NoConvergence { iterations: total });
        }

        // Exceptional shifts break the rare cycles of the Wilkinson shift,
        // alternating between the top and the bottom of the active block.
        let shift = if since_deflation % 20 == 10 {
            h[(l, l)] + C64::new(0.75 * h[(l + 1, l)].re.abs(), 0.0)
        } else if since_deflation.is_multiple_of(20) {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].re.abs(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(l, l)] - shift;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let col_start = if k > l { k - 1 } else { l };
            rotate(h, z, k, c, s, col_start, (k + 2).min(hi));
            if k > l {
                h[(k + 1, k - 1)] = C64::new(0.0, 0.0);
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// Applies `H <- G H G†`, `Z <- Z G†` for the rotation
/// `G = [c, s; -conj(s), c]` acting on indices `k, k+1`. Rows of `H` are
/// touched from column `col_start`, columns up to row `row_end`.
fn rotate(h: &mut ComplexMatrix, z: &mut ComplexMatrix, k: usize, c: f64, s: C64, col_start: usize, row_end: usize) {
    let n = h.rows();
    for j in col_start..n {
        let a = h[(k, j)];
        let b = h[(k + 1, j)];
        h[(k, j)] = a * c + s * b;
        h[(k + 1, j)] = -s.conj() * a + b * c;
    }
    for i in 0..=row_end {
        let a = h[(i, k)];
        let b = h[(i, k + 1)];
        h[(i, k)] = a * c + b * s.conj();
        h[(i, k + 1)] = -a * s + b * c;
    }
    for i in 0..n {
        let a = z[(i, k)];
        let b = z[(i, k + 1)];
        z[(i, k)] = a * c + b * s.conj();
        z[(i, k + 1)] = -a * s + b * c;
    }
}

/// Rotation whose first row is the conjugate of a unit eigenvector of
/// `[a b; c d]`, which makes the block upper triangular.
fn schur_rotation_2x2(a: C64, b: C64, c: C64, d: C64) -> (f64, C64) {
    let mu = wilkinson_shift(a, b, c, d);
    let v1 = (b, mu - a);
    let v2 = (mu - d, c);
    let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
    let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
    let (x1, x2, nrm) = if n1 >= n2 {
        (v1.0, v1.1, n1.sqrt())
    } else {
        (v2.0, v2.1, n2.sqrt())
    };
    if nrm == 0.0 {
        // Scalar multiple of the identity: already triangular.
        return (1.0, C64::new(0.0, 0.0));
    }
    // Fix the phase so the first component is real and non-negative.
    let phase = if x1.norm() > 0.0 {
        x1.conj() / x1.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let (x1, x2) = (x1 * phase / nrm, x2 * phase / nrm);
    (x1.re, x2.conj())
}

/// Eigenvalue of the trailing 2×2 block `[a b; c d]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Right eigenvectors of an upper triangular matrix, one per column.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let mut x = ComplexMatrix::zeros(n, n);
    let smin = (f64::EPSILON * t.max_abs()).max(f64::MIN_POSITIVE * 1e10);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * x[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            x[(i, k)] = -acc / denom;
            // rescale growth so later entries stay finite
            let big = x[(i, k)].norm();
            if big > 1e150 {
                for r in i..=k {
                    x[(r, k)] /= big;
                }
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sorted_re(vals: &[C64]) -> Vec<f64> {
        let mut v: Vec<f64> = vals.iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn identity_eigenvalues() {
        let es = hermitian_eig(&ComplexMatrix::identity(3), &tol()).unwrap();
        for z in &es.eigenvalues {
            assert!((z.re - 1.0).abs() < 1e-15 && z.im == 0.0);
        }
    }

    #[test]
    fn prethermal_block_eigenvalues() {
        let (p, s) = (0.2, 0.07);
        let a = ComplexMatrix::from_real(3, 3, &[1.0 - 2.0 * p, 0.0, 0.0, 0.0, p, s, 0.0, s, p]).unwrap();
        let es = hermitian_eig(&a, &tol()).unwrap();
        let expected = {
            let mut e = vec![1.0 - 2.0 * p, p - s, p + s];
            e.sort_by(f64::total_cmp);
            e
        };
        for (got, want) in es.real_eigenvalues().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn non_hermitian_rejected_with_norm() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        match hermitian_eig(&a, &tol()) {
            Err(NumericsError::NotHermitian { deviation, .. }) => assert!((deviation - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagonal_general() {
        let a = ComplexMatrix::from_real(2, 2, &[-1.0, 0.0, 0.0, -2.0]).unwrap();
        let es = general_eig(&a, &tol()).unwrap();
        assert_eq!(sorted_re(&es.eigenvalues), vec![-2.0, -1.0]);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        let es = general_eig(&a, &tol()).unwrap();
        let mut ims: Vec<f64> = es.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        for z in &es.eigenvalues {
            assert!(z.re.abs() < 1e-14);
        }
    }

    #[test]
    fn jordan_block_flagged() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let es = general_eig(&a, &tol()).unwrap();
        assert!(es.ill_conditioned);
    }

    #[test]
    fn general_on_dense_nonnormal() {
        let n = 12;
        let a = ComplexMatrix::from_fn(n, n, |i, j| {
            let x = ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.5;
            let y = ((i * 5 + j * 3) % 7) as f64 / 7.0 - 0.5;
            C64::new(x + if i == j { i as f64 } else { 0.0 }, y)
        });
        let es = general_eig(&a, &tol()).unwrap();
        assert!(es.residual < 1e-12, "{}", es.residual);
        assert!(!es.ill_conditioned);
        let recon = &(&es.vectors * &ComplexMatrix::from_diagonal(&es.eigenvalues)) * &es.inverse;
        assert!((&recon - &a).max_abs() < 1e-10);
        let tr: C64 = es.eigenvalues.iter().sum();
        assert!((tr - a.trace()).norm() < 1e-11);
    }
}
