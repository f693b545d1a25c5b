//! Entanglement spectrum of pure Gaussian states across a bipartition.
//!
//! The reduced covariance on a cut has eigenvalues `±iν_j`; each mode `j`
//! contributes the two-outcome distribution `{p_j, 1 - p_j}` with
//! `p_j = (1 + ν_j)/2`, and the Schmidt coefficients are the products of one
//! outcome per mode. Everything here works modewise and never materialises
//! the `2^k` Schmidt values.

use crate::error::{Error, Result};
use crate::gaussian::{canonical_form, reduce, CovarianceMatrix, MajoranaCoupling};
use crate::scalar::Real;

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementSpectrum<T> {
    /// `ν_j ∈ [0, 1]`, ascending.
    pub nus: Vec<T>,
    pub cut: Vec<usize>,
}

impl<T: Real> EntanglementSpectrum<T> {
    /// Builds a spectrum directly from correlation values (clamped to `[0, 1]`).
    pub fn from_nus(mut nus: Vec<T>, cut: Vec<usize>) -> Self {
        for nu in nus.iter_mut() {
            *nu = nu.max(T::zero()).min(T::one());
        }
        nus.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Self { nus, cut }
    }

    /// `p_j = (1 + ν_j)/2`, the larger weight of each mode.
    pub fn occupations(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.nus.iter().map(|&nu| half * (T::one() + nu)).collect()
    }
}

/// Order parameter for [`renyi_entropy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenyiOrder<T> {
    Finite(T),
    Infinity,
}

/// Spectrum of `g` on the sites in `cut` (a proper, nonempty, increasing subset).
pub fn entanglement_spectrum<T: Real>(g: &CovarianceMatrix<T>, cut: &[usize]) -> Result<EntanglementSpectrum<T>> {
    if !g.is_pure() {
        return Err(Error::NotPure);
    }
    if cut.len() >= g.n_modes() {
        return Err(Error::InvalidSubset);
    }
    let sub = reduce(g, cut)?;
    let d = canonical_form(&MajoranaCoupling::from_matrix(sub.matrix().to_owned())?)?;
    Ok(EntanglementSpectrum::from_nus(d.energies, cut.to_vec()))
}

/// Largest Schmidt coefficient `λ₁ = Π_j max(p_j, 1 - p_j)`.
pub fn largest_schmidt<T: Real>(s: &EntanglementSpectrum<T>) -> T {
    s.occupations().into_iter().fold(T::one(), |acc, p| acc * p.max(T::one() - p))
}

/// Schmidt rank `2^{#{j : ν_j < 1 - rank_tol}}` as a natural log.
fn ln_rank<T: Real>(s: &EntanglementSpectrum<T>, rank_tol: T) -> T {
    let mixed = s.nus.iter().filter(|&&nu| nu < T::one() - rank_tol).count();
    T::lit(mixed as f64) * T::LN_2()
}

fn binary_entropy<T: Real>(p: T) -> T {
    let q = T::one() - p;
    let term = |x: T| if x > T::zero() { -x * x.ln() } else { T::zero() };
    term(p) + term(q)
}

/// Renyi entropy `S_k` of the Schmidt distribution (natural log).
///
/// `k = 0` counts modes with `ν_j < 1 - rank_tol`; `k = 1` is the von Neumann
/// entropy; `k = ∞` is `-ln λ₁`.
pub fn renyi_entropy<T: Real>(s: &EntanglementSpectrum<T>, order: RenyiOrder<T>, rank_tol: T) -> Result<T> {
    let k = match order {
        RenyiOrder::Infinity => return Ok(-largest_schmidt(s).ln()),
        RenyiOrder::Finite(k) => k,
    };
    if !(k >= T::zero()) || !k.is_finite() {
        return Err(Error::InvalidParameter("Renyi order must be a finite k >= 0 or infinity".into()));
    }
    if k == T::zero() {
        return Ok(ln_rank(s, rank_tol));
    }
    let occ = s.occupations();
    if k == T::one() {
        return Ok(T::sum_iter(occ.into_iter().map(binary_entropy)));
    }
    let total = T::sum_iter(occ.into_iter().map(|p| (p.powf(k) + (T::one() - p).powf(k)).ln()));
    Ok(total / (T::one() - k))
}
