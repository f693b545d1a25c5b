//! Coupling matrices `(A, B)` of quadratic fermionic Hamiltonians
//!
//! `H = Σ A_ij c†_i c_j + ½ Σ (B_ij c†_i c†_j + h.c.)`
//!
//! Every model below is written as `-μ Σ n_j - Σ (t c†c + Δ c†c†) + h.c.`,
//! with the Hermitian conjugate applied to every term, so the on-site
//! coefficient is `-2μ`.

use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    #[serde(rename = "kitaev")]
    KitaevChain,
    #[serde(rename = "square")]
    SquareLattice2D,
    #[serde(rename = "global")]
    GlobalCoupling,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::KitaevChain => "kitaev",
            ModelTag::SquareLattice2D => "square",
            ModelTag::GlobalCoupling => "global",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kitaev" | "chain" => Ok(ModelTag::KitaevChain),
            "square" | "2d" => Ok(ModelTag::SquareLattice2D),
            "global" => Ok(ModelTag::GlobalCoupling),
            other => Err(Error::InvalidParameter(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub mu: T,
    pub t: T,
    pub delta: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(mu: T, t: T, delta: T) -> Self {
        Self { mu, t, delta }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("t", self.t), ("delta", self.delta)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Real coupling matrices of a quadratic Hamiltonian plus model metadata.
///
/// `a` is symmetric, `b` antisymmetric with zero diagonal; the builders
/// guarantee both exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian<T> {
    pub n_sites: usize,
    pub a: Array2<T>,
    pub b: Array2<T>,
    pub model_tag: ModelTag,
    pub params: ModelParams<T>,
}

impl<T: Real> QuadraticHamiltonian<T> {
    /// Checks the structural invariants (exact symmetry, finite entries).
    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        if n == 0 {
            return Err(Error::InvalidParameter("n_sites must be positive".into()));
        }
        for m in [&self.a, &self.b] {
            if m.dim() != (n, n) {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
        }
        for i in 0..n {
            if self.b[[i, i]] != T::zero() {
                return Err(Error::InvalidParameter("B must have zero diagonal".into()));
            }
            for j in 0..n {
                if !self.a[[i, j]].is_finite() || !self.b[[i, j]].is_finite() {
                    return Err(Error::InvalidParameter("couplings must be finite".into()));
                }
                if self.a[[i, j]] != self.a[[j, i]] {
                    return Err(Error::InvalidParameter("A must be symmetric".into()));
                }
                if self.b[[i, j]] != -self.b[[j, i]] {
                    return Err(Error::InvalidParameter("B must be antisymmetric".into()));
                }
            }
        }
        Ok(())
    }

    /// Hamiltonian of the region `sites` (strictly increasing) with every
    /// coupling leaving the region dropped.
    pub fn restricted(&self, sites: &[usize]) -> Result<Self> {
        let n = self.n_sites;
        if sites.is_empty() || sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset);
        }
        if let Some(&bad) = sites.iter().find(|&&s| s >= n) {
            return Err(Error::SiteOutOfRange { index: bad, n_sites: n });
        }
        let k = sites.len();
        Ok(Self {
            n_sites: k,
            a: Array2::from_shape_fn((k, k), |(i, j)| self.a[[sites[i], sites[j]]]),
            b: Array2::from_shape_fn((k, k), |(i, j)| self.b[[sites[i], sites[j]]]),
            model_tag: self.model_tag,
            params: self.params,
        })
    }

    /// Relabels sites: site `order[k]` of `self` becomes site `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_sites;
        if order.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: order.len() });
        }
        let mut seen = vec![false; n];
        for &o in order {
            if o >= n || std::mem::replace(&mut seen[o], true) {
                return Err(Error::InvalidParameter("order must be a permutation".into()));
            }
        }
        Ok(Self {
            n_sites: n,
            a: Array2::from_shape_fn((n, n), |(i, j)| self.a[[order[i], order[j]]]),
            b: Array2::from_shape_fn((n, n), |(i, j)| self.b[[order[i], order[j]]]),
            model_tag: self.model_tag,
            params: self.params,
        })
    }
}

fn empty<T: Real>(n: usize, tag: ModelTag, params: ModelParams<T>) -> Result<QuadraticHamiltonian<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n_sites must be at least 1".into()));
    }
    params.validate()?;
    let mut a = Array2::zeros((n, n));
    for j in 0..n {
        a[[j, j]] = -T::lit(2.0) * params.mu;
    }
    Ok(QuadraticHamiltonian { n_sites: n, a, b: Array2::zeros((n, n)), model_tag: tag, params })
}

/// Adds hopping `-t` and pairing `-Δ` on bond `(p, q)` with `p < q`.
fn add_nn_bond<T: Real>(h: &mut QuadraticHamiltonian<T>, p: usize, q: usize) {
    debug_assert!(p < q);
    let ModelParams { t, delta, .. } = h.params;
    h.a[[p, q]] = -t;
    h.a[[q, p]] = -t;
    h.b[[p, q]] = -delta;
    h.b[[q, p]] = delta;
}

/// Open Kitaev chain on `n_sites` sites.
pub fn build_kitaev_chain<T: Real>(n_sites: usize, mu: T, t: T, delta: T) -> Result<QuadraticHamiltonian<T>> {
    let mut h = empty(n_sites, ModelTag::KitaevChain, ModelParams::new(mu, t, delta))?;
    for j in 0..n_sites.saturating_sub(1) {
        add_nn_bond(&mut h, j, j + 1);
    }
    Ok(h)
}

/// Nearest-neighbour model on an arbitrary set of square-lattice sites.
///
/// Sites are `(row, col)` pairs and are indexed in lexicographic order, which
/// coincides with row-major order on any rectangle containing them. Pairing
/// on each bond is `B[p][q] = -Δ` for `p < q` in that order.
pub fn build_square_region<T: Real>(
    sites: &[(usize, usize)],
    mu: T,
    t: T,
    delta: T,
) -> Result<QuadraticHamiltonian<T>> {
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(Error::InvalidParameter("duplicate lattice site".into()));
    }
    let mut h = empty(sorted.len(), ModelTag::SquareLattice2D, ModelParams::new(mu, t, delta))?;
    let index_of = |site: (usize, usize)| sorted.binary_search(&site).ok();
    for (p, &(r, c)) in sorted.iter().enumerate() {
        for nb in [(r, c + 1), (r + 1, c)] {
            if let Some(q) = index_of(nb) {
                add_nn_bond(&mut h, p, q);
            }
        }
    }
    Ok(h)
}

/// Row-major sites of a `rows × cols` rectangle.
pub fn rectangle_sites(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect()
}

/// Open `side × side` square lattice, row-major indexing `(i, j) → i·side + j`.
pub fn build_square_lattice<T: Real>(side: usize, mu: T, t: T, delta: T) -> Result<QuadraticHamiltonian<T>> {
    if side == 0 {
        return Err(Error::InvalidParameter("side must be at least 1".into()));
    }
    build_square_region(&rectangle_sites(side, side), mu, t, delta)
}

/// All-to-all coupled model: `A[i][j] = +t`, `B[i][j] = +Δ` for `i < j`.
pub fn build_global<T: Real>(n_sites: usize, mu: T, t: T, delta: T) -> Result<QuadraticHamiltonian<T>> {
    let mut h = empty(n_sites, ModelTag::GlobalCoupling, ModelParams::new(mu, t, delta))?;
    for i in 0..n_sites {
        for j in i + 1..n_sites {
            h.a[[i, j]] = t;
            h.a[[j, i]] = t;
            h.b[[i, j]] = delta;
            h.b[[j, i]] = -delta;
        }
    }
    Ok(h)
}

/// Order in which square-lattice sites are added when growing site by site:
/// each shell completing the `ℓ × ℓ` square adds its new sites in row-major
/// order, so the last site of every shell is the corner `(ℓ-1, ℓ-1)`.
pub fn square_growth_order(n_sites: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(n_sites);
    let mut side = 0;
    while order.len() < n_sites {
        let shell = side;
        for r in 0..shell {
            order.push((r, shell));
        }
        for c in 0..=shell {
            order.push((shell, c));
        }
        side += 1;
    }
    order.truncate(n_sites);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn kitaev_two_sites() {
        let h = build_kitaev_chain(2, 1.0f64, 1.0, 1.0).unwrap();
        assert_eq!(h.a, array![[-2.0f64, -1.0], [-1.0, -2.0]]);
        assert_eq!(h.b, array![[0.0f64, -1.0], [1.0, 0.0]]);
        h.validate().unwrap();
    }

    #[test]
    fn kitaev_single_site_has_no_bonds() {
        let h = build_kitaev_chain(1, 0.5f64, 1.0, 1.0).unwrap();
        assert_eq!(h.a, array![[-1.0f64]]);
        assert_eq!(h.b, array![[0.0f64]]);
    }

    #[test]
    fn square_side_one_matches_chain() {
        let sq = build_square_lattice(1, 0.7f64, 1.3, -0.4).unwrap();
        let ch = build_kitaev_chain(1, 0.7f64, 1.3, -0.4).unwrap();
        assert_eq!(sq.a, ch.a);
        assert_eq!(sq.b, ch.b);
    }

    #[test]
    fn square_two_by_two_is_four_cycle() {
        let h = build_square_lattice(2, 0.0f64, 1.0, 0.0).unwrap();
        // 0-1, 0-2, 1-3, 2-3
        let adj = array![[0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0]];
        assert_eq!(h.a, -adj);
        let h = build_square_lattice(2, 1.0f64, 1.0, 1.0).unwrap();
        assert_eq!(h.b[[0, 1]], -1.0);
        assert_eq!(h.b[[2, 0]], 1.0);
        assert_eq!(h.b[[0, 3]], 0.0);
    }

    #[test]
    fn global_entries() {
        let h = build_global(3, 0.25f64, 2.0, 0.5).unwrap();
        assert_eq!(h.a, array![[-0.5f64, 2.0, 2.0], [2.0, -0.5, 2.0], [2.0, 2.0, -0.5]]);
        assert_eq!(h.b, array![[0.0f64, 0.5, 0.5], [-0.5, 0.0, 0.5], [-0.5, -0.5, 0.0]]);
    }

    #[test]
    fn global_two_sites_differs_from_chain_only_by_signs() {
        let g = build_global(2, 0.3f64, 1.0, 0.8).unwrap();
        let c = build_kitaev_chain(2, 0.3f64, 1.0, 0.8).unwrap();
        assert_eq!(g.a.diag(), c.a.diag());
        assert_eq!(g.a[[0, 1]], -c.a[[0, 1]]);
        assert_eq!(g.b[[0, 1]], -c.b[[0, 1]]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_kitaev_chain(0, 1.0f64, 1.0, 1.0).is_err());
        assert!(build_global(3, f64::NAN, 1.0, 1.0).is_err());
        assert!(build_square_lattice(2, 1.0f64, f64::INFINITY, 1.0).is_err());
        assert!(build_square_region(&[(0, 0), (0, 0)], 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn growth_order_shells() {
        let order = square_growth_order(9);
        assert_eq!(order, vec![(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (1, 2), (2, 0), (2, 1), (2, 2)]);
        // every complete shell ends on the corner
        let order = square_growth_order(64);
        for side in 1..=8 {
            assert_eq!(order[side * side - 1], (side - 1, side - 1));
        }
    }

    #[test]
    fn region_of_full_square_equals_lattice() {
        let full = build_square_lattice(3, 0.4f64, 1.0, 0.6).unwrap();
        let region = build_square_region(&square_growth_order(9), 0.4, 1.0, 0.6).unwrap();
        assert_eq!(full, region);
    }

    #[test]
    fn permutation_relabels_sites() {
        let h = build_kitaev_chain(3, 0.1f64, 1.0, 0.5).unwrap();
        let p = h.permuted(&[2, 1, 0]).unwrap();
        assert_eq!(p.a[[0, 1]], h.a[[2, 1]]);
        assert_eq!(p.b[[0, 1]], h.b[[2, 1]]);
        assert!(h.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn restriction_matches_smaller_builders() {
        let big = build_kitaev_chain(6, 0.3f64, 1.0, 0.7).unwrap();
        assert_eq!(big.restricted(&[0, 1, 2, 3]).unwrap(), build_kitaev_chain(4, 0.3, 1.0, 0.7).unwrap());
        let g = build_global(5, 0.3f64, 1.0, 0.7).unwrap();
        assert_eq!(g.restricted(&[1, 2, 4]).unwrap(), build_global(3, 0.3, 1.0, 0.7).unwrap());
        let sq = build_square_lattice(3, 0.3f64, 1.0, 0.7).unwrap();
        let top = build_square_region(&rectangle_sites(2, 3), 0.3, 1.0, 0.7).unwrap();
        assert_eq!(sq.restricted(&[0, 1, 2, 3, 4, 5]).unwrap(), top);
        assert!(big.restricted(&[2, 1]).is_err());
        assert!(big.restricted(&[7]).is_err());
    }
}
