//! Dense Jordan-Wigner reference for small quadratic Hamiltonians.
//!
//! Everything here works on explicit `2^N`-dimensional state vectors with
//! `nalgebra`, sharing no numerics with `fermvac-core`; the two agree only if
//! both are right. Basis states are bit strings with site 0 in the most
//! significant bit, and `c†_j` carries the string `(-1)^{n_0 + … + n_{j-1}}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use fermvac_core::Hamiltonian;

pub mod suite;

pub use suite::{run_equivalence_suite, SuiteConfig, SuiteReport};

/// Largest system the oracle accepts (Hilbert dimension 256).
pub const MAX_SITES: usize = 8;

/// Many-body levels closer than this to the ground energy span the ground space.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle supports at most {MAX_SITES} sites, got {0}")]
    TooLarge(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid site subset")]
    InvalidSubset,
    #[error(transparent)]
    Core(#[from] fermvac_core::Error),
}

pub type Result<T> = std::result::Result<T, OracleError>;

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        Err(OracleError::TooLarge(n))
    } else {
        Ok(())
    }
}

#[inline]
fn bit(n: usize, site: usize) -> usize {
    1 << (n - 1 - site)
}

/// Sign of the string in front of site `site` in basis state `state`.
#[inline]
fn string_sign(n: usize, state: usize, site: usize) -> f64 {
    let mask = !((1usize << (n - site)) - 1) & ((1usize << n) - 1);
    if (state & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `c_site |state⟩` as `(sign, new_state)`, or `None` when it vanishes.
fn annihilate(n: usize, state: usize, site: usize) -> Option<(f64, usize)> {
    let b = bit(n, site);
    (state & b != 0).then(|| (string_sign(n, state, site), state ^ b))
}

/// `c†_site |state⟩` as `(sign, new_state)`, or `None` when it vanishes.
fn create(n: usize, state: usize, site: usize) -> Option<(f64, usize)> {
    let b = bit(n, site);
    (state & b == 0).then(|| (string_sign(n, state, site), state | b))
}

/// `H = Σ A_ij c†_i c_j + ½ Σ (B_ij c†_i c†_j + B_ij c_j c_i)` as a dense matrix.
pub fn many_body_hamiltonian(h: &Hamiltonian) -> Result<DMatrix<f64>> {
    h.validate()?;
    let n = h.n_sites;
    check_size(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for state in 0..dim {
        for i in 0..n {
            for j in 0..n {
                let a = h.a[[i, j]];
                if a != 0.0 {
                    if let Some((s1, k)) = annihilate(n, state, j) {
                        if let Some((s2, out)) = create(n, k, i) {
                            m[(out, state)] += a * s1 * s2;
                        }
                    }
                }
                let b = 0.5 * h.b[[i, j]];
                if b != 0.0 {
                    if let Some((s1, k)) = create(n, state, j) {
                        if let Some((s2, out)) = create(n, k, i) {
                            m[(out, state)] += b * s1 * s2;
                        }
                    }
                    if let Some((s1, k)) = annihilate(n, state, i) {
                        if let Some((s2, out)) = annihilate(n, k, j) {
                            m[(out, state)] += b * s1 * s2;
                        }
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Full many-body spectrum, energies ascending with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct ManyBodySpectrum {
    pub n_sites: usize,
    pub energies: Vec<f64>,
    pub states: DMatrix<f64>,
}

impl ManyBodySpectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// `E₁ − E₀`.
    pub fn gap(&self) -> f64 {
        self.energies.get(1).map_or(f64::INFINITY, |e1| e1 - self.energies[0])
    }

    pub fn ground_state(&self) -> DVector<f64> {
        self.states.column(0).into_owned()
    }

    /// Orthonormal basis of all levels within `tol` of the ground energy.
    pub fn ground_space(&self, tol: f64) -> DMatrix<f64> {
        let k = self.energies.iter().take_while(|&&e| e - self.energies[0] < tol).count();
        self.states.columns(0, k).into_owned()
    }

    pub fn is_degenerate(&self) -> bool {
        self.gap() < DEGENERACY_TOL
    }
}

pub fn diagonalize(h: &Hamiltonian) -> Result<ManyBodySpectrum> {
    let m = many_body_hamiltonian(h)?;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let states = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(ManyBodySpectrum { n_sites: h.n_sites, energies, states })
}

pub fn oracle_gap(h: &Hamiltonian) -> Result<f64> {
    Ok(diagonalize(h)?.gap())
}

/// An overlap together with whether a degenerate ground space was involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOverlap {
    pub value: f64,
    pub degenerate: bool,
}

/// `|⟨g₁|g₂⟩|`, or the largest overlap between the two ground spaces
/// (levels within `tol`) when either is degenerate.
pub fn oracle_overlap(h1: &Hamiltonian, h2: &Hamiltonian, tol: f64) -> Result<OracleOverlap> {
    let s1 = diagonalize(h1)?;
    let s2 = diagonalize(h2)?;
    if s1.energies.len() != s2.energies.len() {
        return Err(OracleError::DimensionMismatch { expected: s1.energies.len(), found: s2.energies.len() });
    }
    let g1 = s1.ground_space(tol);
    let g2 = s2.ground_space(tol);
    Ok(OracleOverlap { value: max_space_overlap(&g1, &g2), degenerate: g1.ncols() > 1 || g2.ncols() > 1 })
}

/// Largest `|⟨u|v⟩|` over unit vectors `u ∈ span(a)`, `v ∈ span(b)`.
pub fn max_space_overlap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let m = a.transpose() * b;
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// The state as a `2^k × 2^{N−k}` matrix: rows index the first `k` sites.
fn reshape_prefix(psi: &DVector<f64>, n: usize, k: usize) -> DMatrix<f64> {
    let cols = 1usize << (n - k);
    DMatrix::from_fn(1 << k, cols, |r, c| psi[r * cols + c])
}

fn n_sites_of(psi: &DVector<f64>) -> Result<usize> {
    let n = psi.len().trailing_zeros() as usize;
    if psi.len() != 1 << n {
        return Err(OracleError::DimensionMismatch { expected: 1 << n, found: psi.len() });
    }
    check_size(n)?;
    Ok(n)
}

/// `⟨φ|Tr_rest |ψ⟩⟨ψ| |φ⟩` for `φ` living on the first sites of `ψ`.
pub fn reduced_fidelity(phi: &DVector<f64>, psi: &DVector<f64>) -> Result<f64> {
    let n = n_sites_of(psi)?;
    let k = n_sites_of(phi)?;
    if k >= n {
        return Err(OracleError::InvalidSubset);
    }
    let m = reshape_prefix(psi, n, k);
    Ok((m.transpose() * phi).norm_squared())
}

/// `⟨φ|Tr_rest ρ|φ⟩` for a density matrix `ρ` and `φ` on the first sites.
pub fn reduced_fidelity_mixed(phi: &DVector<f64>, rho: &DMatrix<f64>) -> Result<f64> {
    let k = n_sites_of(phi)?;
    let n = rho.nrows().trailing_zeros() as usize;
    check_size(n)?;
    if k >= n || rho.nrows() != 1 << n || rho.ncols() != rho.nrows() {
        return Err(OracleError::InvalidSubset);
    }
    let rest = 1usize << (n - k);
    let mut f = 0.0;
    for r in 0..rest {
        for a in 0..phi.len() {
            for b in 0..phi.len() {
                f += phi[a] * rho[(a * rest + r, b * rest + r)] * phi[b];
            }
        }
    }
    Ok(f)
}

/// Schmidt coefficients (squared singular values), descending, for the cut
/// between the first `k` sites and the rest.
pub fn schmidt_values(psi: &DVector<f64>, k: usize) -> Result<Vec<f64>> {
    let n = n_sites_of(psi)?;
    if k == 0 || k >= n {
        return Err(OracleError::InvalidSubset);
    }
    let mut s: Vec<f64> = reshape_prefix(psi, n, k).singular_values().iter().map(|x| x * x).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Renyi entropy of a probability vector; `None` is the order `∞`.
pub fn renyi(probs: &[f64], order: Option<f64>, zero_tol: f64) -> f64 {
    match order {
        None => -probs.iter().copied().fold(0.0, f64::max).ln(),
        Some(0.0) => (probs.iter().filter(|&&p| p > zero_tol).count() as f64).ln(),
        Some(1.0) => -probs.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>(),
        Some(k) => probs.iter().map(|p| p.powf(k)).sum::<f64>().ln() / (1.0 - k),
    }
}

/// Reorders the fermionic modes of `psi`: new site `k` is old site `order[k]`.
pub fn reorder_modes(psi: &DVector<f64>, order: &[usize]) -> Result<DVector<f64>> {
    let n = n_sites_of(psi)?;
    if order.len() != n {
        return Err(OracleError::DimensionMismatch { expected: n, found: order.len() });
    }
    let mut new_label = vec![usize::MAX; n];
    for (k, &o) in order.iter().enumerate() {
        if o >= n || new_label[o] != usize::MAX {
            return Err(OracleError::InvalidSubset);
        }
        new_label[o] = k;
    }
    let mut out = DVector::zeros(psi.len());
    for state in 0..psi.len() {
        // Occupied old modes in creation order, relabelled.
        let labels: Vec<usize> = (0..n).filter(|&s| state & bit(n, s) != 0).map(|s| new_label[s]).collect();
        let inversions: usize =
            (0..labels.len()).map(|i| labels[i + 1..].iter().filter(|&&l| l < labels[i]).count()).sum();
        let target = labels.iter().fold(0, |acc, &l| acc | bit(n, l));
        out[target] = if inversions.is_multiple_of(2) { psi[state] } else { -psi[state] };
    }
    Ok(out)
}

/// Moves the sites in `first` (increasing) to the front, keeping the rest in order.
pub fn bring_to_front(psi: &DVector<f64>, first: &[usize]) -> Result<DVector<f64>> {
    let n = n_sites_of(psi)?;
    let order: Vec<usize> = first.iter().copied().chain((0..n).filter(|s| !first.contains(s))).collect();
    reorder_modes(psi, &order)
}

/// Fermionic product state with `left`'s sites first.
pub fn product_state(left: &DVector<f64>, right: &DVector<f64>) -> DVector<f64> {
    left.kronecker(right)
}

/// `C_ij = ⟨c†_i c_j⟩` and `F_ij = ⟨c_i c_j⟩` in the state `ρ`.
pub fn two_point_functions_mixed(rho: &DMatrix<f64>, n: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_size(n)?;
    let dim = 1usize << n;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(OracleError::DimensionMismatch { expected: dim, found: rho.nrows() });
    }
    let mut c = DMatrix::zeros(n, n);
    let mut f = DMatrix::zeros(n, n);
    // Tr(ρ X) = Σ_{s} Σ_out ρ[s, out] X[out, s]
    for s in 0..dim {
        for i in 0..n {
            for j in 0..n {
                if let Some((s1, k)) = annihilate(n, s, j) {
                    if let Some((s2, out)) = create(n, k, i) {
                        c[(i, j)] += rho[(s, out)] * s1 * s2;
                    }
                    if let Some((s2, out)) = annihilate(n, k, i) {
                        f[(i, j)] += rho[(s, out)] * s1 * s2;
                    }
                }
            }
        }
    }
    Ok((c, f))
}

pub fn two_point_functions(psi: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = n_sites_of(psi)?;
    two_point_functions_mixed(&(psi * psi.transpose()), n)
}

/// Gibbs state `e^{−βH}/Z`.
pub fn thermal_state(h: &Hamiltonian, beta: f64) -> Result<DMatrix<f64>> {
    let s = diagonalize(h)?;
    let e0 = s.ground_energy();
    let w: Vec<f64> = s.energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let d = DMatrix::from_diagonal(&DVector::from_iterator(w.len(), w.iter().map(|x| x / z)));
    Ok(&s.states * d * s.states.transpose())
}

/// Reduced density matrix on the first `k` sites.
pub fn partial_trace_prefix(rho: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = rho.nrows().trailing_zeros() as usize;
    check_size(n)?;
    if k == 0 || k > n {
        return Err(OracleError::InvalidSubset);
    }
    let rest = 1usize << (n - k);
    Ok(DMatrix::from_fn(1 << k, 1 << k, |a, b| (0..rest).map(|r| rho[(a * rest + r, b * rest + r)]).sum()))
}
