//! Dense linear algebra generic over [`Real`].
//!
//! Only what the Gaussian-state formalism needs: Householder reduction of
//! antisymmetric matrices, a one-sided Jacobi SVD, LU log-determinants and
//! Pfaffians. All routines are deterministic for identical input.

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Largest absolute entry.
pub fn max_abs<T: Real>(m: ArrayView2<'_, T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

pub fn identity<T: Real>(n: usize) -> Array2<T> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { T::one() } else { T::zero() })
}

/// `‖m + mᵀ‖_max`, zero exactly when `m` is antisymmetric.
pub fn antisymmetry_defect<T: Real>(m: ArrayView2<'_, T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[[i, j]] + m[[j, i]]).abs());
        }
    }
    worst
}

/// Antisymmetric tridiagonal form `T = Qᵀ M Q`.
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    /// Orthogonal accumulation of the Householder reflections.
    pub q: Array2<T>,
    /// `superdiag[i] = T[i][i+1] = -T[i+1][i]`.
    pub superdiag: Vec<T>,
    /// Number of nontrivial reflections applied; `det(Q) = (-1)^reflections`.
    pub reflections: usize,
}

/// Householder reduction of an antisymmetric matrix to tridiagonal form.
///
/// For antisymmetric `A` and reflector `H = I - β v vᵀ`, `vᵀ A v = 0` and the
/// two-sided update collapses to `A + β (v pᵀ - p vᵀ)` with `p = A v`.
pub fn tridiagonalize_antisymmetric<T: Real>(m: ArrayView2<'_, T>) -> Tridiagonal<T> {
    let n = m.nrows();
    let mut a = m.to_owned();
    let mut q = identity::<T>(n);
    let mut reflections = 0;
    let two = T::lit(2.0);

    for k in 0..n.saturating_sub(2) {
        let tail_norm2 = T::sum_iter((k + 2..n).map(|i| a[[i, k]] * a[[i, k]]));
        if tail_norm2 == T::zero() {
            continue;
        }
        let x0 = a[[k + 1, k]];
        let norm = (tail_norm2 + x0 * x0).sqrt();
        let alpha = if x0 >= T::zero() { -norm } else { norm };

        let mut v = Array1::<T>::zeros(n);
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[[i, k]];
        }
        let vnorm2 = T::sum_iter(v.iter().map(|&x| x * x));
        if vnorm2 == T::zero() {
            continue;
        }
        let beta = two / vnorm2;

        let p: Array1<T> = Array1::from_shape_fn(n, |i| T::sum_iter((k + 1..n).map(|j| a[[i, j]] * v[j])));
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] = a[[i, j]] + beta * (v[i] * p[j] - p[i] * v[j]);
            }
        }
        // Q <- Q H
        for i in 0..n {
            let qv = T::sum_iter((k + 1..n).map(|j| q[[i, j]] * v[j]));
            let scale = beta * qv;
            for j in k + 1..n {
                q[[i, j]] = q[[i, j]] - scale * v[j];
            }
        }
        reflections += 1;
    }

    let half = T::lit(0.5);
    let superdiag = (0..n.saturating_sub(1)).map(|i| half * (a[[i, i + 1]] - a[[i + 1, i]])).collect();
    Tridiagonal { q, superdiag, reflections }
}

/// Pfaffian of an antisymmetric matrix of even dimension.
pub fn pfaffian<T: Real>(m: ArrayView2<'_, T>) -> T {
    let n = m.nrows();
    if n % 2 == 1 {
        return T::zero();
    }
    let tri = tridiagonalize_antisymmetric(m);
    let mut pf = if tri.reflections.is_multiple_of(2) { T::one() } else { -T::one() };
    for k in 0..n / 2 {
        pf = pf * tri.superdiag[2 * k];
    }
    pf
}

/// Thin SVD `K = U diag(σ) Vᵀ` of a square matrix, singular values ascending.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Array2<T>,
    pub sigma: Vec<T>,
    pub v: Array2<T>,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of `K V` are orthogonalised pairwise until every pair satisfies
/// `|⟨w_p, w_q⟩| ≤ tol ‖w_p‖‖w_q‖`, so left singular vectors stay orthogonal
/// even for singular values far below `ε ‖K‖`.
pub fn jacobi_svd<T: Real>(k: ArrayView2<'_, T>) -> Result<Svd<T>> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: k.ncols() });
    }
    // Column-major working copies: w[j*n + i] = (K V)[i][j].
    let mut w: Vec<T> = (0..n * n).map(|idx| k[[idx % n, idx / n]]).collect();
    let mut v: Vec<T> = (0..n * n).map(|idx| if idx % n == idx / n { T::one() } else { T::zero() }).collect();
    let tol = T::unit_roundoff() * T::lit(n.max(1) as f64).sqrt();
    let one = T::one();
    let two = T::lit(2.0);

    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..n {
                    let wp = w[p * n + i];
                    let wq = w[q * n + i];
                    alpha = alpha + wp * wp;
                    beta = beta + wq * wq;
                    gamma = gamma + wp * wq;
                }
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                if gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let t = if zeta.abs() > T::lit(1e100) {
                    one / (two * zeta)
                } else {
                    let sgn = if zeta >= T::zero() { one } else { -one };
                    sgn / (zeta.abs() + (one + zeta * zeta).sqrt())
                };
                let c = one / (one + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, n, p, q, c, s);
                rotate(&mut v, n, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_JACOBI_SWEEPS });
    }

    let norms: Vec<T> = (0..n).map(|j| T::sum_iter((0..n).map(|i| w[j * n + i] * w[j * n + i])).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[a].partial_cmp(&norms[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));

    let mut u = Array2::<T>::zeros((n, n));
    let mut vv = Array2::<T>::zeros((n, n));
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(norms[src]);
        for i in 0..n {
            vv[[i, dst]] = v[src * n + i];
            if norms[src] > T::zero() {
                u[[i, dst]] = w[src * n + i] / norms[src];
            }
        }
    }
    orthonormalize_descending(&mut u, &sigma);
    Ok(Svd { u, sigma, v: vv })
}

#[inline]
fn rotate<T: Real>(cols: &mut [T], n: usize, p: usize, q: usize, c: T, s: T) {
    for i in 0..n {
        let xp = cols[p * n + i];
        let xq = cols[q * n + i];
        cols[p * n + i] = c * xp - s * xq;
        cols[q * n + i] = s * xp + c * xq;
    }
}

/// Modified Gram-Schmidt over the columns of `u`, largest singular value
/// first. Columns for exactly-zero singular values are completed from the
/// standard basis.
fn orthonormalize_descending<T: Real>(u: &mut Array2<T>, sigma: &[T]) {
    let n = u.nrows();
    let half = T::lit(0.5);
    let mut done: Vec<usize> = Vec::with_capacity(n);
    for j in (0..n).rev() {
        let mut accepted = false;
        if sigma[j] > T::zero() {
            accepted = project_and_normalize(u, j, &done, half);
        }
        if !accepted {
            // Standard basis vector with the largest component outside the
            // accepted span, preferring `e_j` on ties.
            let outside = |b: usize| T::one() - T::sum_iter(done.iter().map(|&d| u[[b, d]] * u[[b, d]]));
            let best = (0..n)
                .map(|k| (j + k) % n)
                .fold(None::<(usize, T)>, |acc, b| {
                    let r = outside(b);
                    match acc {
                        Some((_, br)) if br >= r => acc,
                        _ => Some((b, r)),
                    }
                })
                .map(|(b, _)| b)
                .expect("n > 0");
            for i in 0..n {
                u[[i, j]] = if i == best { T::one() } else { T::zero() };
            }
            project_and_normalize(u, j, &done, T::zero());
            project_and_normalize(u, j, &done, T::zero());
        }
        done.push(j);
    }
}

fn project_and_normalize<T: Real>(u: &mut Array2<T>, j: usize, done: &[usize], keep: T) -> bool {
    let n = u.nrows();
    let before = T::sum_iter((0..n).map(|i| u[[i, j]] * u[[i, j]])).sqrt();
    if before == T::zero() {
        return false;
    }
    for &d in done {
        let dot = T::sum_iter((0..n).map(|i| u[[i, d]] * u[[i, j]]));
        for i in 0..n {
            u[[i, j]] = u[[i, j]] - dot * u[[i, d]];
        }
    }
    let after = T::sum_iter((0..n).map(|i| u[[i, j]] * u[[i, j]])).sqrt();
    if after <= keep * before {
        return false;
    }
    for i in 0..n {
        u[[i, j]] = u[[i, j]] / after;
    }
    true
}

/// `ln|det|` together with the sign of the determinant (0 when singular).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet<T> {
    pub ln_abs: T,
    pub sign: i8,
}

/// Log-determinant by LU factorisation with partial pivoting.
pub fn log_det<T: Real>(m: ArrayView2<'_, T>) -> LogDet<T> {
    let n = m.nrows();
    let mut a = m.to_owned();
    let mut sign: i8 = 1;
    let mut ln_abs = T::zero();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[[k, k]].abs();
        for i in k + 1..n {
            let cand = a[[i, k]].abs();
            if cand > best {
                best = cand;
                piv = i;
            }
        }
        if best == T::zero() {
            return LogDet { ln_abs: T::neg_infinity(), sign: 0 };
        }
        if piv != k {
            for j in 0..n {
                a.swap([k, j], [piv, j]);
            }
            sign = -sign;
        }
        let d = a[[k, k]];
        if d < T::zero() {
            sign = -sign;
        }
        ln_abs = ln_abs + d.abs().ln();
        let (top, mut rest) = a.view_mut().split_at(ndarray::Axis(0), k + 1);
        let pivot_row = top.slice(s![k, ..]);
        for mut row in rest.rows_mut() {
            let f = row[k] / d;
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                row[j] = row[j] - f * pivot_row[j];
            }
        }
    }
    LogDet { ln_abs, sign }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use twofloat::TwoFloat;

    fn random_antisymmetric(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next = || rng.gen_range(-1.0..1.0);
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                let x = next();
                m[[i, j]] = x;
                m[[j, i]] = -x;
            }
        }
        m
    }

    #[test]
    fn tridiagonal_reconstructs_input() {
        let m = random_antisymmetric(9, 3);
        let tri = tridiagonalize_antisymmetric(m.view());
        let n = 9;
        let mut t = Array2::<f64>::zeros((n, n));
        for i in 0..n - 1 {
            t[[i, i + 1]] = tri.superdiag[i];
            t[[i + 1, i]] = -tri.superdiag[i];
        }
        let back = tri.q.dot(&t).dot(&tri.q.t());
        assert!(max_abs((&back - &m).view()) < 1e-13);
        let qtq = tri.q.t().dot(&tri.q);
        assert!(max_abs((&qtq - &identity::<f64>(n)).view()) < 1e-13);
    }

    #[test]
    fn pfaffian_of_small_matrices() {
        let m = array![[0.0f64, 2.5], [-2.5, 0.0]];
        assert!((pfaffian(m.view()) - 2.5).abs() < 1e-15);
        // Pf of 4x4: a01 a23 - a02 a13 + a03 a12
        let m = array![[0.0f64, 1.0, 2.0, 3.0], [-1.0, 0.0, 4.0, 5.0], [-2.0, -4.0, 0.0, 6.0], [-3.0, -5.0, -6.0, 0.0]];
        let expected = 1.0 * 6.0 - 2.0 * 5.0 + 3.0 * 4.0;
        assert!((pfaffian(m.view()) - expected).abs() < 1e-12);
        let ld = log_det(m.view());
        assert!((ld.ln_abs.exp() - expected * expected).abs() < 1e-10);
        assert_eq!(ld.sign, 1);
    }

    #[test]
    fn log_det_sign_and_singular() {
        let m = array![[0.0f64, 1.0], [1.0, 0.0]];
        let ld = log_det(m.view());
        assert_eq!(ld.sign, -1);
        assert!(ld.ln_abs.abs() < 1e-15);
        let z = array![[1.0f64, 2.0], [2.0, 4.0]];
        assert_eq!(log_det(z.view()).sign, 0);
    }

    #[test]
    fn jacobi_svd_reconstructs_and_sorts() {
        let k = array![[3.0f64, 1.0, 0.0], [0.5, -2.0, 1.0], [0.0, 0.25, 0.1]];
        let svd = jacobi_svd(k.view()).unwrap();
        assert!(svd.sigma.windows(2).all(|w| w[0] <= w[1]));
        let d = Array2::from_diag(&Array1::from(svd.sigma.clone()));
        let back = svd.u.dot(&d).dot(&svd.v.t());
        assert!(max_abs((&back - &k).view()) < 1e-13);
        let utu = svd.u.t().dot(&svd.u);
        assert!(max_abs((&utu - &identity::<f64>(3)).view()) < 1e-13);
    }

    #[test]
    fn jacobi_svd_completes_null_space() {
        let k = Array2::<f64>::zeros((3, 3));
        let svd = jacobi_svd(k.view()).unwrap();
        assert!(svd.sigma.iter().all(|&s| s == 0.0));
        assert!(max_abs((&svd.u - &identity::<f64>(3)).view()) < 1e-15);
        let rank_one = array![[1.0f64, 1.0], [1.0, 1.0]];
        let svd = jacobi_svd(rank_one.view()).unwrap();
        assert!(svd.sigma[0].abs() < 1e-15);
        assert!((svd.sigma[1] - 2.0).abs() < 1e-14);
        let utu = svd.u.t().dot(&svd.u);
        assert!(max_abs((&utu - &identity::<f64>(2)).view()) < 1e-14);
    }

    #[test]
    fn double_double_resolves_tiny_singular_value() {
        // Lower bidiagonal with ratio 1/2 per step: smallest singular value ~ 2^-n.
        let n = 60;
        let k = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                TwoFloat::lit(-1.0)
            } else if i == j + 1 {
                TwoFloat::lit(-2.0)
            } else {
                TwoFloat::lit(0.0)
            }
        });
        let svd = jacobi_svd(k.view()).unwrap();
        let smallest = svd.sigma[0].as_f64();
        // Exact: 1/sigma_min = ||K^{-1}||_2 with K^{-1} entries 2^{i-j} (lower part).
        assert!(smallest > 1e-19 && smallest < 1e-17, "{smallest:e}");
    }
}
