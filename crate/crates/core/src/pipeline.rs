//! Growth series for the two preparation schemes and their cost model.
//!
//! *Site by site*: the `n`-site ground state plus one freshly prepared site
//! is driven to the `(n+1)`-site ground state. The added site is taken in its
//! optimal state, so the step overlap is `η_n = √F` with `F` the fidelity of
//! the `n`-site ground state with the reduced `(n+1)`-site ground state.
//!
//! *Half-half*: two copies of the `n/2`-site ground state are joined; the
//! overlap is the plain pure-state overlap with the `n`-site ground state.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    self, fidelity_pure_mixed_detailed, ground_state, overlap_pure_detailed, product_embed, reduce, spectral_gap,
    thermal_covariance, CanonicalDecomposition, CovarianceMatrix,
};
use crate::models::{self, ModelParams, ModelTag, QuadraticHamiltonian};
use crate::scalar::Real;
use crate::schmidt::{entanglement_spectrum, largest_schmidt};

/// Costs whose gap or overlap fall below this are reported as infinite.
pub const COST_FLOOR: f64 = 1e-14;

/// A model family with fixed couplings, independent of system size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec<T> {
    pub tag: ModelTag,
    pub params: ModelParams<T>,
}

/// Hamiltonians involved in one site-by-site step.
#[derive(Debug, Clone)]
pub struct GrowthStep<T> {
    pub smaller: QuadraticHamiltonian<T>,
    pub larger: QuadraticHamiltonian<T>,
    /// Positions of the smaller system's sites inside the larger one.
    pub kept: Vec<usize>,
}

/// Hamiltonians involved in one half-half join.
#[derive(Debug, Clone)]
pub struct HalfSplit<T> {
    pub half: QuadraticHamiltonian<T>,
    pub full: QuadraticHamiltonian<T>,
    /// Sites of the first half inside the full system.
    pub left: Vec<usize>,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(tag: ModelTag, mu: T, t: T, delta: T) -> Self {
        Self { tag, params: ModelParams::new(mu, t, delta) }
    }

    pub fn kitaev(mu: T, t: T, delta: T) -> Self {
        Self::new(ModelTag::KitaevChain, mu, t, delta)
    }

    pub fn square(mu: T, t: T, delta: T) -> Self {
        Self::new(ModelTag::SquareLattice2D, mu, t, delta)
    }

    pub fn global(mu: T, t: T, delta: T) -> Self {
        Self::new(ModelTag::GlobalCoupling, mu, t, delta)
    }

    /// Hamiltonian on `n` sites. For the square lattice this is the region
    /// covered by the first `n` sites of [`models::square_growth_order`].
    pub fn hamiltonian(&self, n: usize) -> Result<QuadraticHamiltonian<T>> {
        let ModelParams { mu, t, delta } = self.params;
        match self.tag {
            ModelTag::KitaevChain => models::build_kitaev_chain(n, mu, t, delta),
            ModelTag::GlobalCoupling => models::build_global(n, mu, t, delta),
            ModelTag::SquareLattice2D => models::build_square_region(&models::square_growth_order(n), mu, t, delta),
        }
    }

    /// Step from `n` to `n + 1` sites.
    pub fn growth_step(&self, n: usize) -> Result<GrowthStep<T>> {
        if n == 0 {
            return Err(Error::InvalidParameter("growth starts from at least one site".into()));
        }
        let kept = match self.tag {
            ModelTag::KitaevChain | ModelTag::GlobalCoupling => (0..n).collect(),
            ModelTag::SquareLattice2D => {
                let order = models::square_growth_order(n + 1);
                let added = order[n];
                let mut sorted = order;
                sorted.sort_unstable();
                let rank = sorted.binary_search(&added).expect("added site is in the region");
                (0..=n).filter(|&i| i != rank).collect()
            }
        };
        Ok(GrowthStep { smaller: self.hamiltonian(n)?, larger: self.hamiltonian(n + 1)?, kept })
    }

    /// Split of an `n`-site system into two equal halves, the first half's
    /// fermions ordered before the second's.
    ///
    /// The square lattice needs `n = ℓ²` with even `ℓ`; its halves are the top
    /// and bottom `(ℓ/2) × ℓ` rectangles, contiguous in row-major order.
    pub fn half_split(&self, n: usize) -> Result<HalfSplit<T>> {
        let ModelParams { mu, t, delta } = self.params;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("half-half join needs an even size >= 2, got {n}")));
        }
        let (half, full) = match self.tag {
            ModelTag::KitaevChain | ModelTag::GlobalCoupling => (self.hamiltonian(n / 2)?, self.hamiltonian(n)?),
            ModelTag::SquareLattice2D => {
                let side = exact_even_side(n).ok_or_else(|| {
                    Error::Unsupported(format!("square half-half join needs n = l^2 with even l, got {n}"))
                })?;
                (
                    models::build_square_region(&models::rectangle_sites(side / 2, side), mu, t, delta)?,
                    models::build_square_lattice(side, mu, t, delta)?,
                )
            }
        };
        Ok(HalfSplit { half, full, left: (0..n / 2).collect() })
    }

    /// Sizes at which a half-half join is defined, up to `n_max`.
    pub fn half_sizes(&self, n_max: usize) -> Vec<usize> {
        match self.tag {
            ModelTag::KitaevChain | ModelTag::GlobalCoupling => (2..=n_max).step_by(2).collect(),
            ModelTag::SquareLattice2D => (2..).step_by(2).map(|l: usize| l * l).take_while(|&n| n <= n_max).collect(),
        }
    }
}

fn exact_even_side(n: usize) -> Option<usize> {
    let side = (n as f64).sqrt().round() as usize;
    (side * side == n && side.is_multiple_of(2)).then_some(side)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SiteBySite,
    HalfHalf,
}

/// Options shared by the series computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthOptions<T> {
    /// When set, the target state is the Gibbs state at this inverse
    /// temperature instead of the pure ground state.
    pub beta: Option<T>,
    /// Evaluate sizes concurrently. Results do not depend on this.
    pub parallel: bool,
}

impl<T> Default for GrowthOptions<T> {
    fn default() -> Self {
        Self { beta: None, parallel: true }
    }
}

/// Everything computed for one preparation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult<T> {
    /// Size of the ground state prepared by this step.
    pub size: usize,
    /// Gap of the Hamiltonian being prepared.
    pub gap: T,
    pub eta: T,
    /// `η²` for site-by-site steps; the Schmidt ceiling bounds it.
    pub fidelity: T,
    pub lambda1: T,
    pub degenerate: bool,
    pub underflow_clamped: bool,
}

fn target_state<T: Real>(
    d: &CanonicalDecomposition<T>,
    pure: &CovarianceMatrix<T>,
    beta: Option<T>,
) -> Result<CovarianceMatrix<T>> {
    match beta {
        Some(b) => thermal_covariance(d, b),
        None => Ok(pure.clone()),
    }
}

/// One site-by-site step, `n → n + 1`.
pub fn site_by_site_step<T: Real>(model: &ModelSpec<T>, n: usize, beta: Option<T>) -> Result<StepResult<T>> {
    let step = model.growth_step(n)?;
    let (d_small, g_small) = ground_state(&step.smaller)?;
    let (d_big, g_big) = ground_state(&step.larger)?;
    step_from_states(n, &step.kept, (&d_small, &g_small), (&d_big, &g_big), beta)
}

fn step_from_states<T: Real>(
    n: usize,
    kept: &[usize],
    small: (&CanonicalDecomposition<T>, &CovarianceMatrix<T>),
    big: (&CanonicalDecomposition<T>, &CovarianceMatrix<T>),
    beta: Option<T>,
) -> Result<StepResult<T>> {
    let target = target_state(big.0, big.1, beta)?;
    let sigma = reduce(&target, kept)?;
    let f = fidelity_pure_mixed_detailed(small.1, &sigma)?;
    let lambda1 = largest_schmidt(&entanglement_spectrum(big.1, kept)?);
    Ok(StepResult {
        size: n + 1,
        gap: spectral_gap(big.0),
        eta: f.value.sqrt(),
        fidelity: f.value,
        lambda1,
        degenerate: small.0.has_zero_mode() || big.0.has_zero_mode(),
        underflow_clamped: f.underflow_clamped,
    })
}

/// Overlap of `(g_n ⊗ q)` with `g_{n+1}` for a fixed added-site state `q`.
/// Diagnostic only; the series always use the optimal added state.
pub fn site_by_site_probe<T: Real>(model: &ModelSpec<T>, n: usize, probe: &CovarianceMatrix<T>) -> Result<T> {
    if probe.n_modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: probe.n_modes() });
    }
    let step = model.growth_step(n)?;
    let (_, g_small) = ground_state(&step.smaller)?;
    let (_, g_big) = ground_state(&step.larger)?;
    let joined = product_embed(&g_small, probe);
    // joined has the added site last; move it to its place in the larger ordering.
    let added = (0..=n).find(|i| !step.kept.contains(i)).expect("one site is added");
    let mut order: Vec<usize> = (0..n).collect();
    order.insert(added, n);
    let joined = gaussian::permute_sites(&joined, &order)?;
    gaussian::overlap_pure(&joined, &g_big)
}

/// One half-half join producing the `n`-site ground state.
pub fn half_half_step<T: Real>(model: &ModelSpec<T>, n: usize, beta: Option<T>) -> Result<StepResult<T>> {
    let split = model.half_split(n)?;
    let (d_half, g_half) = ground_state(&split.half)?;
    let (d_full, g_full) = ground_state(&split.full)?;
    let joined = product_embed(&g_half, &g_half);
    let (eta, underflow) = match beta {
        None => {
            let r = overlap_pure_detailed(&joined, &g_full)?;
            (r.value, r.underflow_clamped)
        }
        Some(b) => {
            let r = fidelity_pure_mixed_detailed(&joined, &thermal_covariance(&d_full, b)?)?;
            (r.value.sqrt(), r.underflow_clamped)
        }
    };
    let lambda1 = largest_schmidt(&entanglement_spectrum(&g_full, &split.left)?);
    Ok(StepResult {
        size: n,
        gap: spectral_gap(&d_full),
        eta,
        fidelity: eta * eta,
        lambda1,
        degenerate: d_half.has_zero_mode() || d_full.has_zero_mode(),
        underflow_clamped: underflow,
    })
}

/// Gap and overlap series of one preparation scheme.
///
/// Entries are aligned by index; `sizes[i]` is the size of the ground state
/// prepared in step `i`, `gaps[i]` its gap and `overlaps[i]` the overlap of
/// that step.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSeries<T> {
    pub model: ModelSpec<T>,
    pub scheme: Scheme,
    pub sizes: Vec<usize>,
    pub gaps: Vec<T>,
    pub overlaps: Vec<T>,
    pub lambda1s: Vec<T>,
    /// Steps where a zero mode made the ground state effectively degenerate.
    pub degenerate: Vec<bool>,
    pub underflow_clamped: Vec<bool>,
}

impl<T: Real> GrowthSeries<T> {
    fn from_steps(model: ModelSpec<T>, scheme: Scheme, steps: Vec<StepResult<T>>) -> Self {
        Self {
            model,
            scheme,
            sizes: steps.iter().map(|s| s.size).collect(),
            gaps: steps.iter().map(|s| s.gap).collect(),
            overlaps: steps.iter().map(|s| s.eta).collect(),
            lambda1s: steps.iter().map(|s| s.lambda1).collect(),
            degenerate: steps.iter().map(|s| s.degenerate).collect(),
            underflow_clamped: steps.iter().map(|s| s.underflow_clamped).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Index of the step that prepares `size`.
    pub fn index_of(&self, size: usize) -> Option<usize> {
        self.sizes.iter().position(|&s| s == size)
    }
}

fn map_sizes<R, F>(sizes: &[usize], parallel: bool, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    if parallel {
        sizes.par_iter().map(|&n| f(n)).collect()
    } else {
        sizes.iter().map(|&n| f(n)).collect()
    }
}

/// Site-by-site series over steps `n → n + 1` for `n ∈ [n0, n_max)`.
pub fn site_by_site_series<T: Real>(
    model: &ModelSpec<T>,
    n0: usize,
    n_max: usize,
    opts: GrowthOptions<T>,
) -> Result<GrowthSeries<T>> {
    if n0 < 1 || n0 >= n_max {
        return Err(Error::InvalidParameter(format!("need 1 <= n0 < n_max, got n0={n0}, n_max={n_max}")));
    }
    let all: Vec<usize> = (n0..=n_max).collect();
    let states = map_sizes(&all, opts.parallel, |n| ground_state(&model.hamiltonian(n)?))?;
    let steps: Vec<usize> = (n0..n_max).collect();
    let results = map_sizes(&steps, opts.parallel, |n| {
        let kept = model.growth_step_kept(n);
        let small = &states[n - n0];
        let big = &states[n + 1 - n0];
        step_from_states(n, &kept, (&small.0, &small.1), (&big.0, &big.1), opts.beta)
    })?;
    Ok(GrowthSeries::from_steps(*model, Scheme::SiteBySite, results))
}

impl<T: Real> ModelSpec<T> {
    fn growth_step_kept(&self, n: usize) -> Vec<usize> {
        match self.tag {
            ModelTag::KitaevChain | ModelTag::GlobalCoupling => (0..n).collect(),
            ModelTag::SquareLattice2D => {
                let order = models::square_growth_order(n + 1);
                let added = order[n];
                let rank = order.iter().filter(|&&s| s < added).count();
                (0..=n).filter(|&i| i != rank).collect()
            }
        }
    }
}

/// Half-half series over every join size up to `n_max`.
pub fn half_half_series<T: Real>(
    model: &ModelSpec<T>,
    n_max: usize,
    opts: GrowthOptions<T>,
) -> Result<GrowthSeries<T>> {
    if n_max < 2 || !n_max.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("n_max must be even and >= 2, got {n_max}")));
    }
    let sizes = model.half_sizes(n_max);
    if sizes.is_empty() {
        return Err(Error::Unsupported(format!("no half-half join size up to {n_max}")));
    }
    let results = map_sizes(&sizes, opts.parallel, |n| half_half_step(model, n, opts.beta))?;
    Ok(GrowthSeries::from_steps(*model, Scheme::HalfHalf, results))
}

/// Relative gate-count estimate from `n / (m η) · ln(1/ε)` per step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostEstimate {
    pub scheme: Scheme,
    pub total_cost: f64,
    /// Site by site: one entry per step. Half-half: one join per level.
    pub per_step_costs: Vec<f64>,
    /// Critical path; equals `total_cost` for the sequential scheme.
    pub depth_cost: f64,
    pub epsilon: f64,
    pub constant_prefactor: f64,
    /// Sizes of the base blocks the recursion starts from (half-half only).
    pub base_size: Option<usize>,
    pub infinite: bool,
}

fn step_cost(size: usize, gap: f64, eta: f64, log_term: f64, prefactor: f64) -> f64 {
    if !(gap >= COST_FLOOR) || !(eta >= COST_FLOOR) {
        return f64::INFINITY;
    }
    prefactor * (size as f64 / (gap * eta) * log_term)
}

/// Cost of preparing the last state of `series`.
///
/// Half-half joins recurse by halving the final size while it stays even;
/// the first odd size (or 1) is the base block and is not costed. Every
/// joined size must appear in the series.
pub fn complexity_estimate<T: Real>(series: &GrowthSeries<T>, epsilon: f64, prefactor: f64) -> Result<CostEstimate> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1]".into()));
    }
    if !(prefactor >= 0.0) || !prefactor.is_finite() {
        return Err(Error::InvalidParameter("prefactor must be finite and nonnegative".into()));
    }
    if series.is_empty() {
        return Err(Error::InvalidParameter("empty series".into()));
    }
    let log_term = (1.0 / epsilon).ln();
    let at = |i: usize| {
        step_cost(series.sizes[i], series.gaps[i].as_f64(), series.overlaps[i].as_f64(), log_term, prefactor)
    };

    match series.scheme {
        Scheme::SiteBySite => {
            let per_step: Vec<f64> = (0..series.len()).map(at).collect();
            let infinite = per_step.iter().any(|c| c.is_infinite());
            let total = per_step.iter().sum();
            Ok(CostEstimate {
                scheme: Scheme::SiteBySite,
                total_cost: total,
                per_step_costs: per_step,
                depth_cost: total,
                epsilon,
                constant_prefactor: prefactor,
                base_size: None,
                infinite,
            })
        }
        Scheme::HalfHalf => {
            let n_max = *series.sizes.iter().max().expect("nonempty");
            let mut levels = 0u32;
            let mut base = n_max;
            while base.is_multiple_of(2) {
                base /= 2;
                levels += 1;
            }
            let mut per_level = Vec::with_capacity(levels as usize);
            let (mut total, mut depth) = (0.0, 0.0);
            for level in 1..=levels {
                let size = base << level;
                let i = series
                    .index_of(size)
                    .ok_or_else(|| Error::InvalidParameter(format!("series lacks join size {size}")))?;
                let join = at(i);
                let joins = (1u64 << (levels - level)) as f64;
                total += joins * join;
                depth += join;
                per_level.push(join);
            }
            let infinite = per_level.iter().any(|c| c.is_infinite());
            Ok(CostEstimate {
                scheme: Scheme::HalfHalf,
                total_cost: total,
                per_step_costs: per_level,
                depth_cost: depth,
                epsilon,
                constant_prefactor: prefactor,
                base_size: Some(base),
                infinite,
            })
        }
    }
}

/// Least-squares line `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() || xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit { slope, intercept, r_squared })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapScaling {
    Constant,
    Polynomial,
    Exponential,
    Ambiguous,
}

impl std::fmt::Display for GapScaling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GapScaling::Constant => "constant",
            GapScaling::Polynomial => "polynomial",
            GapScaling::Exponential => "exponential",
            GapScaling::Ambiguous => "ambiguous",
        })
    }
}

/// A gap that changes by less than this fraction over the last doubling of
/// the system size counts as saturated.
pub const SATURATION_TOL: f64 = 0.01;

/// Fits closer than this in `R²` cannot be told apart.
pub const R2_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapFits {
    /// `ln m` against `ln n`.
    pub loglog: Option<LinearFit>,
    /// `ln m` against `n`.
    pub semilog: Option<LinearFit>,
    /// `|m(n_last) − m(n_half)| / m(n_last)` with `n_half` the size closest to `n_last / 2`.
    pub saturation: Option<f64>,
    pub classification: GapScaling,
}

/// Classifies gap decay as constant, polynomial or exponential.
pub fn classify_gap(sizes: &[usize], gaps: &[f64]) -> GapFits {
    let usable = sizes.len() >= 3 && sizes.len() == gaps.len() && gaps.iter().all(|&g| g > 0.0 && g.is_finite());
    if !usable {
        return GapFits { loglog: None, semilog: None, saturation: None, classification: GapScaling::Ambiguous };
    }
    let ns: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let ln_n: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ln_g: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let loglog = linear_fit(&ln_n, &ln_g);
    let semilog = linear_fit(&ns, &ln_g);

    let last = sizes.len() - 1;
    let target = ns[last] / 2.0;
    let mid = (0..last)
        .min_by(|&a, &b| (ns[a] - target).abs().total_cmp(&(ns[b] - target).abs()))
        .expect("at least three sizes");
    let saturation = ((gaps[last] - gaps[mid]) / gaps[last]).abs();

    let classification = if saturation < SATURATION_TOL {
        GapScaling::Constant
    } else {
        match (loglog, semilog) {
            (Some(p), Some(e)) if (p.r_squared - e.r_squared).abs() < R2_MARGIN => GapScaling::Ambiguous,
            (Some(p), Some(e)) if p.r_squared > e.r_squared => GapScaling::Polynomial,
            (Some(_), Some(_)) => GapScaling::Exponential,
            _ => GapScaling::Ambiguous,
        }
    };
    GapFits { loglog, semilog, saturation: Some(saturation), classification }
}

/// Which overlap columns a scaling study computes besides the gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingQuantities {
    pub eta_site: bool,
    pub eta_half: bool,
}

impl Default for ScalingQuantities {
    fn default() -> Self {
        Self { eta_site: true, eta_half: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub gap: f64,
    pub eta_site: Option<f64>,
    pub eta_half: Option<f64>,
    /// Largest Schmidt coefficient for the site-by-site cut at this size.
    pub lambda1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub fits: GapFits,
}

impl ScalingTable {
    /// CSV with header `n,gap,eta_site,eta_half,lambda1`; missing values are empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("n,gap,eta_site,eta_half,lambda1\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.n, r.gap, opt(r.eta_site), opt(r.eta_half), opt(r.lambda1)));
        }
        out
    }
}

/// Gap and overlap table over ascending `sizes`, with the gap classified.
pub fn scaling_study<T: Real>(
    model: &ModelSpec<T>,
    sizes: &[usize],
    quantities: ScalingQuantities,
    opts: GrowthOptions<T>,
) -> Result<ScalingTable> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::InvalidParameter("sizes must be positive and strictly ascending".into()));
    }
    let rows = map_sizes(sizes, opts.parallel, |n| {
        let (d, _) = ground_state(&model.hamiltonian(n)?)?;
        let mut row = ScalingRow { n, gap: spectral_gap(&d).as_f64(), eta_site: None, eta_half: None, lambda1: None };
        if quantities.eta_site && n >= 2 {
            let step = site_by_site_step(model, n - 1, opts.beta)?;
            row.eta_site = Some(step.eta.as_f64());
            row.lambda1 = Some(step.lambda1.as_f64());
        }
        if quantities.eta_half && model.half_sizes(n).last() == Some(&n) {
            row.eta_half = Some(half_half_step(model, n, opts.beta)?.eta.as_f64());
        }
        Ok(row)
    })?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let fits = classify_gap(sizes, &gaps);
    Ok(ScalingTable { rows, fits })
}
