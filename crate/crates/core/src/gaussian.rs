//! Fermionic Gaussian states in the Majorana covariance-matrix formalism.
//!
//! Majorana operators are ordered `γ_0 … γ_{N-1}, γ'_0 … γ'_{N-1}` with
//! `γ_j = (c_j + c†_j)/√2`, `γ'_j = (c_j - c†_j)/(√2 i)` and `{γ_a, γ_b} = δ_ab`.
//! Covariance matrices are `Γ_ab = i⟨[γ_a, γ_b]⟩`, so a single occupied mode
//! has `Γ_{j, j+N} = +1` and the vacuum has `Γ_{j, j+N} = -1`.

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::models::QuadraticHamiltonian;
use crate::scalar::Real;

/// Mode energies below this are reported as zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-10;

/// `ln det` below this is treated as an exact zero.
pub const LOG_DET_FLOOR: f64 = -700.0;

/// Negative determinants smaller than this in magnitude are rounding noise.
pub const NEGATIVE_DET_SLACK: f64 = 1e-12;

pub(crate) fn purity_tol<T: Real>() -> T {
    T::lit(1e-8).max(T::unit_roundoff() * T::lit(1e3))
}

/// Real antisymmetric `2N × 2N` coupling `M` with `H = (i/2) Σ M_ab γ_a γ_b + const`.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaCoupling<T> {
    m: Array2<T>,
}

impl<T: Real> MajoranaCoupling<T> {
    /// Wraps an arbitrary square matrix, keeping only its antisymmetric part.
    pub fn from_matrix(m: Array2<T>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c || r % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: r + r % 2, found: c });
        }
        let half = T::lit(0.5);
        let anti = Array2::from_shape_fn((r, r), |(i, j)| half * (m[[i, j]] - m[[j, i]]));
        Ok(Self { m: anti })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> ArrayView2<'_, T> {
        self.m.view()
    }
}

/// Majorana coupling of `H = Σ A c†c + ½ Σ (B c†c† + h.c.)` for real `A`, `B`:
/// upper-right block `A - B`, lower-left block `-(A + B)`, diagonal blocks zero.
pub fn majorana_coupling<T: Real>(h: &QuadraticHamiltonian<T>) -> Result<MajoranaCoupling<T>> {
    let n = h.n_sites;
    for m in [&h.a, &h.b] {
        if m.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
    }
    let mut m = Array2::<T>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j + n]] = h.a[[i, j]] - h.b[[i, j]];
            m[[i + n, j]] = -(h.a[[i, j]] + h.b[[i, j]]);
        }
    }
    MajoranaCoupling::from_matrix(m)
}

/// `M = Pᵀ Ω_E P` with `Ω_E = [[0, diag(E)], [-diag(E), 0]]`, `E` ascending.
///
/// Rows `j` and `j + N` of `P` are the Majorana pair `(λ_j, λ'_j)` of mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDecomposition<T> {
    pub p: Array2<T>,
    pub energies: Vec<T>,
    pub zero_mode_flags: Vec<bool>,
}

impl<T: Real> CanonicalDecomposition<T> {
    pub fn n_modes(&self) -> usize {
        self.energies.len()
    }

    pub fn has_zero_mode(&self) -> bool {
        self.zero_mode_flags.iter().any(|&z| z)
    }

    /// `Pᵀ Ω_E P`, the matrix this decomposition represents.
    pub fn reconstruct(&self) -> Array2<T> {
        self.sandwich(&self.energies)
    }

    /// `Pᵀ [[0, diag(w)], [-diag(w), 0]] P`.
    fn sandwich(&self, w: &[T]) -> Array2<T> {
        let n = self.n_modes();
        let top = self.p.slice(s![..n, ..]);
        let bot = self.p.slice(s![n.., ..]);
        let scaled_bot = Array2::from_shape_fn(bot.dim(), |(j, c)| w[j] * bot[[j, c]]);
        let x = top.t().dot(&scaled_bot);
        &x - &x.t()
    }
}

/// Canonical form of a real antisymmetric matrix.
///
/// Couplings with vanishing diagonal blocks (every real `A`, `B` Hamiltonian)
/// reduce to the SVD of the off-diagonal `N × N` block. Anything else is first
/// brought to antisymmetric tridiagonal form, whose odd/even permutation is
/// again off-diagonal with a bidiagonal block.
pub fn canonical_form<T: Real>(coupling: &MajoranaCoupling<T>) -> Result<CanonicalDecomposition<T>> {
    let m = coupling.matrix();
    let n = coupling.n_modes();
    let dim = 2 * n;
    let block_offdiagonal = (0..n).all(|i| (0..n).all(|j| m[[i, j]] == T::zero() && m[[i + n, j + n]] == T::zero()));

    let (svd, p) = if block_offdiagonal {
        let k = m.slice(s![..n, n..]);
        let svd = linalg::jacobi_svd(k)?;
        let mut p = Array2::<T>::zeros((dim, dim));
        p.slice_mut(s![..n, ..n]).assign(&svd.u.t());
        p.slice_mut(s![n.., n..]).assign(&svd.v.t());
        (svd, p)
    } else {
        let tri = linalg::tridiagonalize_antisymmetric(m);
        let e = &tri.superdiag;
        let mut k = Array2::<T>::zeros((n, n));
        for a in 0..n {
            k[[a, a]] = e[2 * a];
            if a + 1 < n {
                k[[a + 1, a]] = -e[2 * a + 1];
            }
        }
        let svd = linalg::jacobi_svd(k.view())?;
        // R = blockdiag(Uᵀ, Vᵀ) Π with Π sending a -> 2a and N+b -> 2b+1.
        let mut r = Array2::<T>::zeros((dim, dim));
        for row in 0..n {
            for a in 0..n {
                r[[row, 2 * a]] = svd.u[[a, row]];
                r[[row + n, 2 * a + 1]] = svd.v[[a, row]];
            }
        }
        let p = r.dot(&tri.q.t());
        (svd, p)
    };

    let tol = T::lit(ZERO_MODE_TOL);
    let zero_mode_flags = svd.sigma.iter().map(|&e| e < tol).collect();
    Ok(CanonicalDecomposition { p, energies: svd.sigma, zero_mode_flags })
}

/// Lowest mode energy.
pub fn spectral_gap<T: Real>(d: &CanonicalDecomposition<T>) -> T {
    d.energies.iter().copied().fold(T::infinity(), T::min)
}

/// Ground-state energy `½ Tr A - ½ Σ E_j` of the Hamiltonian as written with
/// creation and annihilation operators (no constant dropped).
pub fn ground_energy<T: Real>(h: &QuadraticHamiltonian<T>, d: &CanonicalDecomposition<T>) -> T {
    let half = T::lit(0.5);
    half * T::sum_iter(h.a.diag().iter().copied()) - half * T::sum_iter(d.energies.iter().copied())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purity {
    Pure,
    Mixed,
}

/// Antisymmetric `2N × 2N` matrix `Γ_ab = i⟨[γ_a, γ_b]⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T> {
    g: Array2<T>,
    purity: Purity,
}

impl<T: Real> CovarianceMatrix<T> {
    /// Validates antisymmetry; the purity tag is derived from `‖Γ² + I‖`.
    pub fn from_matrix(g: Array2<T>) -> Result<Self> {
        let (r, c) = g.dim();
        if r != c || r % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: r + r % 2, found: c });
        }
        if linalg::antisymmetry_defect(g.view()) > purity_tol::<T>() {
            return Err(Error::InvalidParameter("covariance matrix must be antisymmetric".into()));
        }
        let purity = purity_of(g.view());
        Ok(Self { g, purity })
    }

    fn with_purity(g: Array2<T>, purity: Purity) -> Self {
        Self { g, purity }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.g.nrows() / 2
    }

    pub fn matrix(&self) -> ArrayView2<'_, T> {
        self.g.view()
    }

    pub fn purity(&self) -> Purity {
        self.purity
    }

    pub fn is_pure(&self) -> bool {
        self.purity == Purity::Pure
    }

    /// `‖Γ² + I‖_max`.
    pub fn purity_defect(&self) -> T {
        let mut sq = self.g.dot(&self.g);
        for i in 0..sq.nrows() {
            sq[[i, i]] = sq[[i, i]] + T::one();
        }
        max_abs(sq.view())
    }

    /// `⟨c†_j c_j⟩`.
    pub fn occupation(&self, j: usize) -> T {
        let n = self.n_modes();
        T::lit(0.5) * (T::one() + self.g[[j, j + n]])
    }

    /// Fermion parity `±1` of a pure state, relative to the vacuum.
    pub fn parity(&self) -> Option<i8> {
        if !self.is_pure() {
            return None;
        }
        let pf = linalg::pfaffian(self.g.view());
        // Pf(vacuum) = Pf(-Ω) = (-1)^{N(N+1)/2}
        let n = self.n_modes();
        let vacuum_sign = if (n * (n + 1) / 2).is_multiple_of(2) { 1 } else { -1 };
        let sign = if pf >= T::zero() { 1 } else { -1 };
        Some(sign * vacuum_sign)
    }

    /// Real parts of `C_ij = ⟨c†_i c_j⟩` and `F_ij = ⟨c_i c_j⟩`.
    pub fn two_point_functions(&self) -> (Array2<T>, Array2<T>) {
        let n = self.n_modes();
        let g = &self.g;
        let q = T::lit(0.25);
        let half = T::lit(0.5);
        let c = Array2::from_shape_fn((n, n), |(i, j)| {
            let diag = if i == j { half } else { T::zero() };
            diag + q * (g[[i, j + n]] - g[[i + n, j]])
        });
        let f = Array2::from_shape_fn((n, n), |(i, j)| q * (g[[i, j + n]] + g[[i + n, j]]));
        (c, f)
    }
}

fn purity_of<T: Real>(g: ArrayView2<'_, T>) -> Purity {
    let mut sq = g.dot(&g);
    for i in 0..sq.nrows() {
        sq[[i, i]] = sq[[i, i]] + T::one();
    }
    if max_abs(sq.view()) < purity_tol::<T>() {
        Purity::Pure
    } else {
        Purity::Mixed
    }
}

/// Ground state: every canonical mode empty, `Γ = -Pᵀ Ω P`.
///
/// Modes flagged as zero modes keep the orientation returned by the
/// decomposition; the choice is deterministic but physically arbitrary.
pub fn ground_state_covariance<T: Real>(d: &CanonicalDecomposition<T>) -> CovarianceMatrix<T> {
    let ones = vec![T::one(); d.n_modes()];
    let g = -d.sandwich(&ones);
    CovarianceMatrix::with_purity(g, Purity::Pure)
}

/// Gibbs state at inverse temperature `beta`: mode weights `tanh(β E_j / 2)`.
pub fn thermal_covariance<T: Real>(d: &CanonicalDecomposition<T>, beta: T) -> Result<CovarianceMatrix<T>> {
    if !(beta > T::zero()) {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    let half = T::lit(0.5);
    let w: Vec<T> = d.energies.iter().map(|&e| (beta * e * half).tanh()).collect();
    let g = -d.sandwich(&w);
    let purity = purity_of(g.view());
    Ok(CovarianceMatrix::with_purity(g, purity))
}

/// Ground state of `h` together with its canonical decomposition.
pub fn ground_state<T: Real>(h: &QuadraticHamiltonian<T>) -> Result<(CanonicalDecomposition<T>, CovarianceMatrix<T>)> {
    let d = canonical_form(&majorana_coupling(h)?)?;
    let g = ground_state_covariance(&d);
    Ok((d, g))
}

/// A value computed from a determinant root, with the underflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetRoot<T> {
    pub value: T,
    pub underflow_clamped: bool,
}

/// `det((Γ₁ + Γ₂)/2)^(1/root)` by log-determinant accumulation.
fn det_root<T: Real>(g1: &CovarianceMatrix<T>, g2: &CovarianceMatrix<T>, root: f64) -> Result<DetRoot<T>> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch { expected: g1.dim(), found: g2.dim() });
    }
    let half = T::lit(0.5);
    let sum = (&g1.g + &g2.g).mapv(|x| x * half);
    let ld = linalg::log_det(sum.view());
    let floor = T::lit(LOG_DET_FLOOR);
    match ld.sign {
        0 => Ok(DetRoot { value: T::zero(), underflow_clamped: false }),
        _ if ld.ln_abs < floor => Ok(DetRoot { value: T::zero(), underflow_clamped: true }),
        1 => Ok(DetRoot { value: (ld.ln_abs / T::lit(root)).exp(), underflow_clamped: false }),
        _ => {
            let magnitude = ld.ln_abs.exp();
            if magnitude <= T::lit(NEGATIVE_DET_SLACK) {
                Ok(DetRoot { value: T::zero(), underflow_clamped: false })
            } else {
                Err(Error::NegativeDeterminant(-magnitude.as_f64()))
            }
        }
    }
}

/// `|⟨ψ₁|ψ₂⟩| = det((Γ₁ + Γ₂)/2)^(1/4)` for pure states; with the underflow flag.
///
/// States of opposite fermion parity are orthogonal and return exactly zero.
pub fn overlap_pure_detailed<T: Real>(g1: &CovarianceMatrix<T>, g2: &CovarianceMatrix<T>) -> Result<DetRoot<T>> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch { expected: g1.dim(), found: g2.dim() });
    }
    if !g1.is_pure() || !g2.is_pure() {
        return Err(Error::NotPure);
    }
    if g1.parity() != g2.parity() {
        return Ok(DetRoot { value: T::zero(), underflow_clamped: false });
    }
    let r = det_root(g1, g2, 4.0)?;
    Ok(DetRoot { value: r.value.min(T::one()), ..r })
}

pub fn overlap_pure<T: Real>(g1: &CovarianceMatrix<T>, g2: &CovarianceMatrix<T>) -> Result<T> {
    overlap_pure_detailed(g1, g2).map(|r| r.value)
}

/// `⟨ψ|σ|ψ⟩ = det((Γ_ψ + Γ_σ)/2)^(1/2)` for pure `ψ` and arbitrary Gaussian `σ`.
pub fn fidelity_pure_mixed_detailed<T: Real>(
    g_pure: &CovarianceMatrix<T>,
    g_mixed: &CovarianceMatrix<T>,
) -> Result<DetRoot<T>> {
    if g_pure.dim() != g_mixed.dim() {
        return Err(Error::DimensionMismatch { expected: g_pure.dim(), found: g_mixed.dim() });
    }
    if !g_pure.is_pure() {
        return Err(Error::NotPure);
    }
    if g_mixed.is_pure() && g_pure.parity() != g_mixed.parity() {
        return Ok(DetRoot { value: T::zero(), underflow_clamped: false });
    }
    let r = det_root(g_pure, g_mixed, 2.0)?;
    Ok(DetRoot { value: r.value.min(T::one()), ..r })
}

pub fn fidelity_pure_mixed<T: Real>(g_pure: &CovarianceMatrix<T>, g_mixed: &CovarianceMatrix<T>) -> Result<T> {
    fidelity_pure_mixed_detailed(g_pure, g_mixed).map(|r| r.value)
}

/// Reduced state on `sites` (strictly increasing): the principal submatrix on
/// `{s} ∪ {s + N}`, repacked as `|sites|` modes.
pub fn reduce<T: Real>(g: &CovarianceMatrix<T>, sites: &[usize]) -> Result<CovarianceMatrix<T>> {
    let n = g.n_modes();
    if sites.is_empty() || sites.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSubset);
    }
    if let Some(&bad) = sites.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutOfRange { index: bad, n_sites: n });
    }
    let k = sites.len();
    let idx: Vec<usize> = sites.iter().copied().chain(sites.iter().map(|&s| s + n)).collect();
    let sub = Array2::from_shape_fn((2 * k, 2 * k), |(i, j)| g.g[[idx[i], idx[j]]]);
    if k == n {
        return Ok(CovarianceMatrix::with_purity(sub, g.purity));
    }
    let purity = purity_of(sub.view());
    Ok(CovarianceMatrix::with_purity(sub, purity))
}

/// Relabels sites: site `order[k]` of `g` becomes site `k`.
///
/// Covariances are built from physical Majorana operators, so relabeling
/// needs no Jordan-Wigner sign fix.
pub fn permute_sites<T: Real>(g: &CovarianceMatrix<T>, order: &[usize]) -> Result<CovarianceMatrix<T>> {
    let n = g.n_modes();
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: order.len() });
    }
    let mut seen = vec![false; n];
    for &o in order {
        if o >= n || std::mem::replace(&mut seen[o], true) {
            return Err(Error::InvalidParameter("order must be a permutation".into()));
        }
    }
    let idx: Vec<usize> = order.iter().copied().chain(order.iter().map(|&o| o + n)).collect();
    let p = Array2::from_shape_fn((2 * n, 2 * n), |(i, j)| g.g[[idx[i], idx[j]]]);
    Ok(CovarianceMatrix::with_purity(p, g.purity))
}

/// Covariance of the product state with `left`'s sites first.
pub fn product_embed<T: Real>(left: &CovarianceMatrix<T>, right: &CovarianceMatrix<T>) -> CovarianceMatrix<T> {
    let nl = left.n_modes();
    let nr = right.n_modes();
    let n = nl + nr;
    let mut g = Array2::<T>::zeros((2 * n, 2 * n));
    let place = |local: usize, modes: usize, offset: usize| (local % modes) + offset + (local / modes) * n;
    for i in 0..2 * nl {
        for j in 0..2 * nl {
            g[[place(i, nl, 0), place(j, nl, 0)]] = left.g[[i, j]];
        }
    }
    for i in 0..2 * nr {
        for j in 0..2 * nr {
            g[[place(i, nr, nl), place(j, nr, nl)]] = right.g[[i, j]];
        }
    }
    let purity = if left.is_pure() && right.is_pure() { Purity::Pure } else { Purity::Mixed };
    CovarianceMatrix::with_purity(g, purity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_global, build_kitaev_chain};
    use ndarray::array;
    use proptest::prelude::*;

    fn single_site(a: f64) -> QuadraticHamiltonian<f64> {
        build_kitaev_chain(1, -a / 2.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn single_site_coupling() {
        let h = single_site(3.0);
        let m = majorana_coupling(&h).unwrap();
        assert_eq!(m.matrix(), array![[0.0f64, 3.0], [-3.0, 0.0]]);
    }

    #[test]
    fn coupling_is_traceless_and_antisymmetric() {
        let h = build_global(5, 0.3f64, -1.2, 0.7).unwrap();
        let m = majorana_coupling(&h).unwrap();
        assert_eq!(m.matrix().diag().sum(), 0.0);
        assert_eq!(linalg::antisymmetry_defect(m.matrix()), 0.0);
    }

    #[test]
    fn canonical_form_of_canonical_block() {
        let m = MajoranaCoupling::from_matrix(array![[0.0f64, 2.5], [-2.5, 0.0]]).unwrap();
        let d = canonical_form(&m).unwrap();
        assert_eq!(d.energies, vec![2.5]);
        assert!(max_abs((&d.p - &linalg::identity::<f64>(2)).view()) < 1e-15);
    }

    #[test]
    fn canonical_form_of_zero_matrix() {
        let m = MajoranaCoupling::from_matrix(Array2::<f64>::zeros((6, 6))).unwrap();
        let d = canonical_form(&m).unwrap();
        assert_eq!(d.energies, vec![0.0; 3]);
        assert!(d.zero_mode_flags.iter().all(|&z| z));
        assert!(max_abs((&d.p - &linalg::identity::<f64>(6)).view()) < 1e-15);
    }

    #[test]
    fn single_site_gap_and_ground_state() {
        // μ = 1: on-site energy -2, filled
        let h = build_kitaev_chain(1, 1.0f64, 0.0, 0.0).unwrap();
        let (d, g) = ground_state(&h).unwrap();
        assert!((spectral_gap(&d) - 2.0).abs() < 1e-15);
        assert!(max_abs((&g.matrix() - &array![[0.0f64, 1.0], [-1.0, 0.0]]).view()) < 1e-15);
        assert!((ground_energy(&h, &d) + 2.0).abs() < 1e-15);
        // μ < 0: empty
        let h = build_kitaev_chain(1, -0.5f64, 0.0, 0.0).unwrap();
        let (_, g) = ground_state(&h).unwrap();
        assert!(max_abs((&g.matrix() - &array![[0.0f64, -1.0], [1.0, 0.0]]).view()) < 1e-15);
    }

    #[test]
    fn global_gap_closes_at_exact_points() {
        for mu in [-0.5, 7.5] {
            let h = build_global(16, mu, 1.0, 0.0).unwrap();
            let (d, _) = ground_state(&h).unwrap();
            assert!(spectral_gap(&d) < 1e-10, "mu={mu}: {}", spectral_gap(&d));
        }
    }

    #[test]
    fn thermal_limits() {
        let h = build_kitaev_chain(4, 2.0f64, 1.0, 0.6).unwrap();
        let (d, g) = ground_state(&h).unwrap();
        let cold = thermal_covariance(&d, 1e12).unwrap();
        assert!(max_abs((&cold.matrix() - &g.matrix()).view()) < 1e-8);
        let hot = thermal_covariance(&d, 1e-14).unwrap();
        assert!(max_abs(hot.matrix()) < 1e-12);
        assert_eq!(hot.purity(), Purity::Mixed);
        assert!(thermal_covariance(&d, 0.0).is_err());
    }

    #[test]
    fn single_site_thermal_occupation_is_fermi_factor() {
        let h = build_kitaev_chain(1, 1.0f64, 0.0, 0.0).unwrap();
        let (d, _) = ground_state(&h).unwrap();
        let g = thermal_covariance(&d, 1.0).unwrap();
        // single-particle energy -2 at β = 1
        let fermi = 1.0 / ((-2.0f64).exp() + 1.0);
        assert!((g.occupation(0) - fermi).abs() < 1e-14);
    }

    #[test]
    fn overlap_edge_cases() {
        let occ = CovarianceMatrix::from_matrix(array![[0.0f64, 1.0], [-1.0, 0.0]]).unwrap();
        let empty = CovarianceMatrix::from_matrix(array![[0.0f64, -1.0], [1.0, 0.0]]).unwrap();
        assert!(occ.is_pure() && empty.is_pure());
        assert!((overlap_pure(&occ, &occ).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(overlap_pure(&occ, &empty).unwrap(), 0.0);
        let mixed = CovarianceMatrix::from_matrix(array![[0.0f64, 0.2], [-0.2, 0.0]]).unwrap();
        assert_eq!(overlap_pure(&occ, &mixed), Err(Error::NotPure));
        assert_eq!(fidelity_pure_mixed(&mixed, &occ), Err(Error::NotPure));
        let two = product_embed(&occ, &occ);
        assert!(matches!(overlap_pure(&occ, &two), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fidelity_single_mode_is_one_minus_occupation() {
        let empty = CovarianceMatrix::from_matrix(array![[0.0f64, -1.0], [1.0, 0.0]]).unwrap();
        for p in [0.0, 0.1, 0.5, 0.9] {
            let x = 2.0 * p - 1.0;
            let sigma = CovarianceMatrix::from_matrix(array![[0.0f64, x], [-x, 0.0]]).unwrap();
            let f = fidelity_pure_mixed(&empty, &sigma).unwrap();
            assert!((f - (1.0 - p)).abs() < 1e-14, "p={p}: {f}");
        }
    }

    #[test]
    fn reduce_and_embed_round_trip() {
        let (_, a) = ground_state(&build_kitaev_chain(3, 0.4f64, 1.0, 0.9).unwrap()).unwrap();
        let (_, b) = ground_state(&build_kitaev_chain(2, 1.5f64, 0.5, 0.2).unwrap()).unwrap();
        let ab = product_embed(&a, &b);
        assert!(ab.is_pure());
        let left = reduce(&ab, &[0, 1, 2]).unwrap();
        assert_eq!(left.matrix(), a.matrix());
        assert!(left.is_pure());
        let right = reduce(&ab, &[3, 4]).unwrap();
        assert_eq!(right.matrix(), b.matrix());
        assert_eq!(reduce(&ab, &[0, 1, 2, 3, 4]).unwrap(), ab);
        assert_eq!(reduce(&ab, &[]), Err(Error::InvalidSubset));
        assert_eq!(reduce(&ab, &[1, 1]), Err(Error::InvalidSubset));
        assert_eq!(reduce(&ab, &[5]), Err(Error::SiteOutOfRange { index: 5, n_sites: 5 }));
    }

    #[test]
    fn embedding_empty_sites_gives_decoupled_ground_state() {
        let (_, one) = ground_state(&build_kitaev_chain(1, -1.0f64, 0.0, 0.0).unwrap()).unwrap();
        let (_, two) = ground_state(&build_kitaev_chain(2, -1.0f64, 0.0, 0.0).unwrap()).unwrap();
        let emb = product_embed(&one, &one);
        assert!(max_abs((&emb.matrix() - &two.matrix()).view()) < 1e-15);
    }

    #[test]
    fn general_route_matches_block_route() {
        let h = build_kitaev_chain(5, 0.7f64, 1.0, 0.4).unwrap();
        let m = majorana_coupling(&h).unwrap();
        let d_block = canonical_form(&m).unwrap();
        // Rotating the Majorana basis destroys the block structure.
        let (_, g) = ground_state(&build_global(5, 0.3f64, 1.0, 0.5).unwrap()).unwrap();
        let o = linalg::tridiagonalize_antisymmetric(g.matrix()).q;
        let rotated = MajoranaCoupling::from_matrix(o.t().dot(&m.matrix()).dot(&o)).unwrap();
        let d_gen = canonical_form(&rotated).unwrap();
        for (x, y) in d_block.energies.iter().zip(&d_gen.energies) {
            assert!((x - y).abs() < 1e-12);
        }
        let err = max_abs((&d_gen.reconstruct() - &rotated.matrix()).view());
        assert!(err < 1e-12, "{err:e}");
    }

    fn antisymmetric_strategy(max_modes: usize) -> impl Strategy<Value = Array2<f64>> {
        (1..=max_modes).prop_flat_map(|n| {
            let dim = 2 * n;
            proptest::collection::vec(-3.0f64..3.0, dim * dim).prop_map(move |v| {
                let m = Array2::from_shape_vec((dim, dim), v).unwrap();
                &m - &m.t()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn canonical_form_round_trip(m in antisymmetric_strategy(6)) {
            let coupling = MajoranaCoupling::from_matrix(m).unwrap();
            let d = canonical_form(&coupling).unwrap();
            let scale = max_abs(coupling.matrix()).max(1.0);
            let err = max_abs((&d.reconstruct() - &coupling.matrix()).view());
            prop_assert!(err < 1e-8 * scale);
            let ppt = d.p.dot(&d.p.t());
            prop_assert!(max_abs((&ppt - &linalg::identity::<f64>(coupling.dim())).view()) < 1e-10);
            prop_assert!(d.energies.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(d.energies.iter().all(|&e| e >= 0.0));
        }

        #[test]
        fn ground_states_are_pure_and_overlaps_symmetric(
            mu1 in -2.0f64..2.0, t1 in -2.0f64..2.0, d1 in -2.0f64..2.0,
            mu2 in -2.0f64..2.0, t2 in -2.0f64..2.0, d2 in -2.0f64..2.0,
            n in 2usize..7,
        ) {
            let (e1, g1) = ground_state(&build_kitaev_chain(n, mu1, t1, d1).unwrap()).unwrap();
            let (_, g2) = ground_state(&build_kitaev_chain(n, mu2, t2, d2).unwrap()).unwrap();
            if spectral_gap(&e1) > 1e-8 {
                prop_assert!(g1.purity_defect() < 1e-8);
            }
            let o12 = overlap_pure(&g1, &g2).unwrap();
            let o21 = overlap_pure(&g2, &g1).unwrap();
            prop_assert!((o12 - o21).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&o12));
            let f = fidelity_pure_mixed(&g1, &g2).unwrap();
            prop_assert!((f - o12 * o12).abs() < 1e-10);
            prop_assert!((fidelity_pure_mixed(&g1, &g1).unwrap() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn optimal_added_block_beats_any_product(
            mu in -2.0f64..2.0, t in -2.0f64..2.0, delta in -2.0f64..2.0,
            qmu in -2.0f64..2.0, qt in -2.0f64..2.0, qd in -2.0f64..2.0,
            n in 3usize..8, k in 1usize..3,
        ) {
            let (_, big) = ground_state(&build_kitaev_chain(n, mu, t, delta).unwrap()).unwrap();
            let (_, small) = ground_state(&build_kitaev_chain(n - k, mu, t, delta).unwrap()).unwrap();
            let (_, q) = ground_state(&build_global(k, qmu, qt, qd).unwrap()).unwrap();
            let kept: Vec<usize> = (0..n - k).collect();
            let f = fidelity_pure_mixed(&small, &reduce(&big, &kept).unwrap()).unwrap();
            let o = overlap_pure(&product_embed(&small, &q), &big).unwrap();
            prop_assert!(o * o <= f + 1e-9);
        }
    }
}
