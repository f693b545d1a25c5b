//! Randomised cross-check of the Gaussian fast path against the dense oracle.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fermvac_core::models::{build_square_region, rectangle_sites};
use fermvac_core::schmidt::DEFAULT_RANK_TOL;
use fermvac_core::{
    build_global, build_kitaev_chain, entanglement_spectrum, fidelity_pure_mixed, ground_state, largest_schmidt,
    overlap_pure, product_embed, reduce, renyi_entropy, spectral_gap, thermal_covariance, Covariance, Hamiltonian,
    ModelTag, RenyiOrder,
};

use crate::{
    bring_to_front, diagonalize, max_space_overlap, product_state, reduced_fidelity, reduced_fidelity_mixed, renyi,
    schmidt_values, thermal_state, two_point_functions, Result,
};

/// Draws whose single-particle gap falls below this are too close to
/// degenerate for a state-by-state comparison; only their gap is checked.
pub const NEAR_DEGENERATE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// Random parameter draws per model family.
    pub trials: usize,
    /// Largest chain or global-model size; the square lattice uses 2×2 and 2×3.
    pub max_n: usize,
    pub seed: u64,
    pub families: Vec<ModelTag>,
    /// Inverse temperature of the thermal fidelity check.
    pub beta: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            max_n: 6,
            seed: 7,
            families: vec![ModelTag::KitaevChain, ModelTag::SquareLattice2D, ModelTag::GlobalCoupling],
            beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Deviation {
    pub max: f64,
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    /// Keyed by `family/quantity`.
    pub deviations: BTreeMap<String, Deviation>,
    /// Draws whose state comparisons were skipped as near-degenerate.
    pub near_degenerate: usize,
    pub trials: usize,
}

impl SuiteReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.values().map(|d| d.max).fold(0.0, f64::max)
    }

    pub fn total_checks(&self) -> usize {
        self.deviations.values().map(|d| d.checks).sum()
    }

    fn record(&mut self, family: ModelTag, quantity: &str, fast: f64, oracle: f64) {
        let dev = if fast.is_finite() && oracle.is_finite() { (fast - oracle).abs() } else { f64::INFINITY };
        let e = self.deviations.entry(format!("{family}/{quantity}")).or_default();
        e.max = e.max.max(dev);
        e.checks += 1;
    }
}

/// Random couplings on `n` sites; the square lattice picks its own shape.
fn draw_hamiltonian(family: ModelTag, rng: &mut ChaCha8Rng, trial: usize, n: usize) -> Result<Hamiltonian> {
    let mut p = || rng.gen_range(-2.0..=2.0);
    let (mu, t, delta) = (p(), p(), p());
    let h = match family {
        ModelTag::KitaevChain => build_kitaev_chain(n, mu, t, delta)?,
        ModelTag::GlobalCoupling => build_global(n, mu, t, delta)?,
        ModelTag::SquareLattice2D => {
            let cols = if trial.is_multiple_of(2) { 2 } else { 3 };
            build_square_region(&rectangle_sites(2, cols), mu, t, delta)?
        }
    };
    Ok(h)
}

fn nondegenerate(h: &Hamiltonian) -> Result<Option<Covariance>> {
    let (d, g) = ground_state(h)?;
    Ok((spectral_gap(&d) >= NEAR_DEGENERATE_GAP).then_some(g))
}

/// Runs every family for `config.trials` seeded draws and collects the
/// largest absolute deviation of each quantity.
pub fn run_equivalence_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport { trials: config.trials, ..Default::default() };
    for (fi, &family) in config.families.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(fi as u64));
        for trial in 0..config.trials {
            let n = rng.gen_range(2..=config.max_n);
            let h = draw_hamiltonian(family, &mut rng, trial, n)?;
            let other = draw_hamiltonian(family, &mut rng, trial, n)?;
            let removed = rng.gen_range(0..h.n_sites);
            let cut = rng.gen_range(1..h.n_sites);
            let mut shuffled: Vec<usize> = (0..h.n_sites).collect();
            shuffled.shuffle(&mut rng);
            let mut subset: Vec<usize> = shuffled[..cut].to_vec();
            subset.sort_unstable();
            if !check_draw(&mut report, family, &h, &other, removed, cut, &subset, config.beta)? {
                report.near_degenerate += 1;
            }
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn check_draw(
    report: &mut SuiteReport,
    family: ModelTag,
    h: &Hamiltonian,
    other: &Hamiltonian,
    removed: usize,
    cut: usize,
    subset: &[usize],
    beta: f64,
) -> Result<bool> {
    let n = h.n_sites;
    let spectrum = diagonalize(h)?;
    let (d, g) = ground_state(h)?;
    report.record(family, "gap", spectral_gap(&d), spectrum.gap());

    // thermal fidelity is well defined even for degenerate targets
    let prefix: Vec<usize> = (0..n - 1).collect();
    let small = h.restricted(&prefix)?;
    if let Some(g_small) = nondegenerate(&small)? {
        let psi_small = diagonalize(&small)?.ground_state();
        let fast = fidelity_pure_mixed(&g_small, &reduce(&thermal_covariance(&d, beta)?, &prefix)?)?;
        let rho = thermal_state(h, beta)?;
        report.record(family, "thermal_fidelity", fast, reduced_fidelity_mixed(&psi_small, &rho)?);
    }

    let Some(_) = nondegenerate(h)? else {
        return Ok(false);
    };
    let psi = spectrum.ground_state();

    let (c, f) = g.two_point_functions();
    let (oc, of) = two_point_functions(&psi)?;
    let two_point_dev = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (c[[i, j]] - oc[(i, j)]).abs().max((f[[i, j]] - of[(i, j)]).abs()))
        .fold(0.0, f64::max);
    report.record(family, "two_point", two_point_dev, 0.0);

    if other.n_sites == n {
        if let Some(g_other) = nondegenerate(other)? {
            let psi_other = diagonalize(other)?.ground_state();
            report.record(family, "overlap", overlap_pure(&g, &g_other)?, psi.dot(&psi_other).abs());
        }
    }

    let kept: Vec<usize> = (0..n).filter(|&s| s != removed).collect();
    let sub = h.restricted(&kept)?;
    if let Some(g_sub) = nondegenerate(&sub)? {
        let psi_sub = diagonalize(&sub)?.ground_state();
        let fast = fidelity_pure_mixed(&g_sub, &reduce(&g, &kept)?)?;
        report.record(family, "fidelity", fast, reduced_fidelity(&psi_sub, &bring_to_front(&psi, &kept)?)?);
        let lambda = largest_schmidt(&entanglement_spectrum(&g, &kept)?);
        report.record(family, "lambda1_site", lambda, schmidt_values(&bring_to_front(&psi, &kept)?, n - 1)?[0]);
    }

    let prefix_cut: Vec<usize> = (0..cut).collect();
    let spec = entanglement_spectrum(&g, &prefix_cut)?;
    let probs = schmidt_values(&psi, cut)?;
    report.record(family, "lambda1", largest_schmidt(&spec), probs[0]);
    for (name, fast_order, oracle_order) in [
        ("renyi1", RenyiOrder::Finite(1.0), Some(1.0)),
        ("renyi2", RenyiOrder::Finite(2.0), Some(2.0)),
        ("renyi_inf", RenyiOrder::Infinity, None),
    ] {
        let fast = renyi_entropy(&spec, fast_order, DEFAULT_RANK_TOL)?;
        report.record(family, name, fast, renyi(&probs, oracle_order, 0.0));
    }

    let scattered = entanglement_spectrum(&g, subset)?;
    let scattered_probs = schmidt_values(&bring_to_front(&psi, subset)?, subset.len())?;
    report.record(family, "lambda1_subset", largest_schmidt(&scattered), scattered_probs[0]);

    if n.is_multiple_of(2) {
        let left: Vec<usize> = (0..n / 2).collect();
        let right: Vec<usize> = (n / 2..n).collect();
        let (hl, hr) = (h.restricted(&left)?, h.restricted(&right)?);
        if let (Some(gl), Some(gr)) = (nondegenerate(&hl)?, nondegenerate(&hr)?) {
            let joined = product_state(&diagonalize(&hl)?.ground_state(), &diagonalize(&hr)?.ground_state());
            let fast = overlap_pure(&product_embed(&gl, &gr), &g)?;
            let exact = max_space_overlap(
                &nalgebra::DMatrix::from_column_slice(joined.len(), 1, joined.as_slice()),
                &spectrum.ground_space(crate::DEGENERACY_TOL),
            );
            report.record(family, "half_overlap", fast, exact);
        }
    }
    Ok(true)
}
