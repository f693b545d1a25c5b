//! Free-fermion numerics for site-by-site ground-state preparation.
//!
//! The crate computes spectral gaps, successive ground-state overlaps,
//! Schmidt-spectrum bounds and gate-cost estimates for quadratic fermionic
//! Hamiltonians, and sweeps them over `(μ, Δ)` phase diagrams.
//!
//! All numerics are generic over [`Real`]; the aliases below fix the two
//! scalar types used in practice: `f64` and double-double [`Extended`].

pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod models;
pub mod pipeline;
pub mod scalar;
pub mod schmidt;
pub mod sweep;

pub use error::{Error, Result};
pub use gaussian::{
    canonical_form, fidelity_pure_mixed, ground_state, ground_state_covariance, majorana_coupling, overlap_pure,
    product_embed, reduce, spectral_gap, thermal_covariance, CanonicalDecomposition, CovarianceMatrix,
    MajoranaCoupling, Purity,
};
pub use models::{build_global, build_kitaev_chain, build_square_lattice, ModelTag, QuadraticHamiltonian};
pub use scalar::Real;
pub use schmidt::{entanglement_spectrum, largest_schmidt, renyi_entropy, EntanglementSpectrum, RenyiOrder};

/// Double-double scalar (~32 significant digits).
pub type Extended = twofloat::TwoFloat;

pub type Hamiltonian = QuadraticHamiltonian<f64>;
pub type Coupling = MajoranaCoupling<f64>;
pub type Decomposition = CanonicalDecomposition<f64>;
pub type Covariance = CovarianceMatrix<f64>;
pub type Spectrum = EntanglementSpectrum<f64>;
pub type Model = pipeline::ModelSpec<f64>;
pub type Series = pipeline::GrowthSeries<f64>;

pub type ExtendedHamiltonian = QuadraticHamiltonian<Extended>;
pub type ExtendedCovariance = CovarianceMatrix<Extended>;
pub type ExtendedModel = pipeline::ModelSpec<Extended>;
pub type ExtendedSeries = pipeline::GrowthSeries<Extended>;
