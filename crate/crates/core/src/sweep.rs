//! Parallel `(μ, Δ)` phase-diagram sweeps and their CSV / JSON serialization.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{ground_state, spectral_gap};
use crate::models::ModelTag;
use crate::pipeline::{half_half_step, site_by_site_step, ModelSpec, StepResult, COST_FLOOR};
use crate::scalar::Real;

pub const CSV_HEADER: [&str; 8] = ["model", "n", "t", "mu", "delta", "quantity", "value", "flags"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Gap,
    EtaSite,
    EtaHalf,
    Lambda1Site,
    Lambda1Half,
    CostSite,
    CostHalf,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::Gap,
        Quantity::EtaSite,
        Quantity::EtaHalf,
        Quantity::Lambda1Site,
        Quantity::Lambda1Half,
        Quantity::CostSite,
        Quantity::CostHalf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Gap => "gap",
            Quantity::EtaSite => "eta_site",
            Quantity::EtaHalf => "eta_half",
            Quantity::Lambda1Site => "lambda1_site",
            Quantity::Lambda1Half => "lambda1_half",
            Quantity::CostSite => "cost_site",
            Quantity::CostHalf => "cost_half",
        }
    }

    fn needs_site_step(self) -> bool {
        matches!(self, Quantity::EtaSite | Quantity::Lambda1Site | Quantity::CostSite)
    }

    fn needs_half_step(self) -> bool {
        matches!(self, Quantity::EtaHalf | Quantity::Lambda1Half | Quantity::CostHalf)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown quantity '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    DegenerateGap,
    UnderflowClamped,
    InfiniteCost,
    /// The point could not be evaluated; the value is NaN.
    NumericalFailure,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::DegenerateGap => "degenerate_gap",
            Flag::UnderflowClamped => "underflow_clamped",
            Flag::InfiniteCost => "infinite_cost",
            Flag::NumericalFailure => "numerical_failure",
        }
    }
}

/// Evenly spaced values `lo, …, hi`; a single step yields `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridRange {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let r = Self { lo, hi, steps };
        r.validate()?;
        Ok(r)
    }

    pub fn single(v: f64) -> Self {
        Self { lo: v, hi: v, steps: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || !self.lo.is_finite() || !self.hi.is_finite() || self.lo > self.hi {
            return Err(Error::InvalidParameter(format!(
                "grid range needs finite lo <= hi and steps >= 1, got {}:{}:{}",
                self.lo, self.hi, self.steps
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let span = self.hi - self.lo;
        let last = (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.lo + span * (i as f64) / last).collect()
    }
}

/// `lo:hi:steps`, or a single value.
impl FromStr for GridRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected lo:hi:steps or a number, got '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(GridRange::single(v.trim().parse().map_err(|_| bad())?)),
            [lo, hi, steps] => GridRange::new(
                lo.trim().parse().map_err(|_| bad())?,
                hi.trim().parse().map_err(|_| bad())?,
                steps.trim().parse().map_err(|_| bad())?,
            ),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub model: ModelTag,
    /// Number of sites, or the side length for the square lattice.
    pub size: usize,
    pub t: f64,
    pub mu: GridRange,
    pub delta: GridRange,
    pub quantities: Vec<Quantity>,
    pub epsilon: f64,
    pub prefactor: f64,
    pub beta: Option<f64>,
}

impl SweepSpec {
    pub fn new(
        model: ModelTag,
        size: usize,
        t: f64,
        mu: GridRange,
        delta: GridRange,
        quantities: Vec<Quantity>,
    ) -> Self {
        Self { model, size, t, mu, delta, quantities, epsilon: 1e-3, prefactor: 1.0, beta: None }
    }

    /// Total number of sites of the swept system.
    pub fn n_sites(&self) -> usize {
        match self.model {
            ModelTag::SquareLattice2D => self.size * self.size,
            _ => self.size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mu.validate()?;
        self.delta.validate()?;
        if self.quantities.is_empty() {
            return Err(Error::InvalidParameter("at least one quantity is required".into()));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidParameter("t must be finite".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter("epsilon must lie in (0, 1]".into()));
        }
        if !(self.prefactor >= 0.0 && self.prefactor.is_finite()) {
            return Err(Error::InvalidParameter("prefactor must be finite and nonnegative".into()));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidParameter("beta must be positive and finite".into()));
            }
        }
        let n = self.n_sites();
        if n == 0 {
            return Err(Error::InvalidParameter("size must be at least 1".into()));
        }
        if self.quantities.iter().any(|q| q.needs_site_step()) && n < 2 {
            return Err(Error::InvalidParameter("site-by-site quantities need at least 2 sites".into()));
        }
        if self.quantities.iter().any(|q| q.needs_half_step()) {
            let ok = match self.model {
                ModelTag::SquareLattice2D => self.size.is_multiple_of(2) && self.size >= 2,
                _ => n.is_multiple_of(2) && n >= 2,
            };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "half-half quantities need an even {}",
                    if self.model == ModelTag::SquareLattice2D { "side" } else { "size" }
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: ModelTag,
    pub n: usize,
    pub t: f64,
    pub mu: f64,
    pub delta: f64,
    pub quantity: Quantity,
    pub value: f64,
    #[serde(serialize_with = "serialize_flags")]
    pub flags: Vec<Flag>,
}

impl SweepRow {
    pub fn flags_string(&self) -> String {
        self.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(";")
    }

    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }
}

fn serialize_flags<S: serde::Serializer>(flags: &[Flag], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(";"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Unsupported(format!("csv write failed: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.model.as_str().to_string(),
                r.n.to_string(),
                r.t.to_string(),
                r.mu.to_string(),
                r.delta.to_string(),
                r.quantity.as_str().to_string(),
                r.value.to_string(),
                r.flags_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Unsupported(format!("csv write failed: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep results serialize")
    }

    /// Rows of one quantity, in grid order.
    pub fn quantity(&self, q: Quantity) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.quantity == q)
    }
}

fn cost(spec: &SweepSpec, size: usize, gap: f64, eta: f64) -> f64 {
    if !(gap >= COST_FLOOR) || !(eta >= COST_FLOOR) {
        return f64::INFINITY;
    }
    spec.prefactor * (size as f64 / (gap * eta) * (1.0 / spec.epsilon).ln())
}

type Cell = (f64, Vec<Flag>);

fn step_flags<T>(s: &StepResult<T>) -> Vec<Flag> {
    let mut f = Vec::new();
    if s.degenerate {
        f.push(Flag::DegenerateGap);
    }
    if s.underflow_clamped {
        f.push(Flag::UnderflowClamped);
    }
    f
}

fn with_cost_flag(value: f64, mut flags: Vec<Flag>) -> Cell {
    if value.is_infinite() {
        flags.push(Flag::InfiniteCost);
    }
    (value, flags)
}

fn failure() -> Cell {
    (f64::NAN, vec![Flag::NumericalFailure])
}

/// Values for every requested quantity at one grid point, in spec order.
fn evaluate_point<T: Real>(spec: &SweepSpec, mu: f64, delta: f64) -> Vec<Cell> {
    let model = ModelSpec::<T>::new(spec.model, T::lit(mu), T::lit(spec.t), T::lit(delta));
    let n = spec.n_sites();
    let beta = spec.beta.map(T::lit);
    let wants = |pred: fn(Quantity) -> bool| spec.quantities.iter().any(|&q| pred(q));

    let site = wants(Quantity::needs_site_step).then(|| site_by_site_step(&model, n - 1, beta));
    let half = wants(Quantity::needs_half_step).then(|| half_half_step(&model, n, beta));
    let gap = if spec.quantities.contains(&Quantity::Gap) {
        match &site {
            Some(Ok(s)) => Some(Ok((s.gap.as_f64(), s.degenerate))),
            _ => Some(
                model
                    .hamiltonian(n)
                    .and_then(|h| ground_state(&h))
                    .map(|(d, _)| (spectral_gap(&d).as_f64(), d.has_zero_mode())),
            ),
        }
    } else {
        None
    };

    spec.quantities
        .iter()
        .map(|&q| match q {
            Quantity::Gap => match gap.as_ref().expect("gap computed") {
                Ok((g, degenerate)) => (*g, if *degenerate { vec![Flag::DegenerateGap] } else { Vec::new() }),
                Err(_) => failure(),
            },
            Quantity::EtaSite | Quantity::Lambda1Site | Quantity::CostSite => {
                match site.as_ref().expect("site step computed") {
                    Ok(s) => match q {
                        Quantity::EtaSite => (s.eta.as_f64(), step_flags(s)),
                        Quantity::Lambda1Site => (s.lambda1.as_f64(), step_flags(s)),
                        _ => with_cost_flag(cost(spec, s.size, s.gap.as_f64(), s.eta.as_f64()), step_flags(s)),
                    },
                    Err(_) => failure(),
                }
            }
            Quantity::EtaHalf | Quantity::Lambda1Half | Quantity::CostHalf => {
                match half.as_ref().expect("half step computed") {
                    Ok(s) => match q {
                        Quantity::EtaHalf => (s.eta.as_f64(), step_flags(s)),
                        Quantity::Lambda1Half => (s.lambda1.as_f64(), step_flags(s)),
                        _ => with_cost_flag(cost(spec, s.size, s.gap.as_f64(), s.eta.as_f64()), step_flags(s)),
                    },
                    Err(_) => failure(),
                }
            }
        })
        .collect()
}

/// Evaluates the grid on a pool of `workers` threads.
///
/// Rows are ordered by μ index, then Δ index, then the order of
/// `spec.quantities`, independently of the worker count. Points that fail
/// numerically yield NaN rows flagged `numerical_failure`.
pub fn run_sweep<T: Real>(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    if workers == 0 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    let mus = spec.mu.values();
    let deltas = spec.delta.values();
    let points: Vec<(f64, f64)> = mus.iter().flat_map(|&m| deltas.iter().map(move |&d| (m, d))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("cannot start worker pool: {e}")))?;
    let cells: Vec<Vec<Cell>> =
        pool.install(|| points.par_iter().map(|&(m, d)| evaluate_point::<T>(spec, m, d)).collect());

    let n = spec.n_sites();
    let rows = points
        .iter()
        .zip(cells)
        .flat_map(|(&(mu, delta), point)| {
            spec.quantities.iter().zip(point).map(move |(&quantity, (value, flags))| SweepRow {
                model: spec.model,
                n,
                t: spec.t,
                mu,
                delta,
                quantity,
                value,
                flags,
            })
        })
        .collect();
    Ok(SweepResult { spec: spec.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_kitaev_chain;

    #[test]
    fn single_point_gap_matches_direct_computation() {
        let spec = SweepSpec::new(
            ModelTag::KitaevChain,
            2,
            1.0,
            GridRange::single(1.0),
            GridRange::single(1.0),
            vec![Quantity::Gap],
        );
        let r = run_sweep::<f64>(&spec, 1).unwrap();
        assert_eq!(r.rows.len(), 1);
        let (d, _) = ground_state(&build_kitaev_chain(2, 1.0f64, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r.rows[0].value, spectral_gap(&d));
        assert!(r.rows[0].flags.is_empty());
    }

    #[test]
    fn grid_values_hit_endpoints() {
        let g: GridRange = "-2:2:101".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 101);
        assert_eq!((v[0], v[25], v[50], v[100]), (-2.0, -1.0, 0.0, 2.0));
        assert_eq!("0.5".parse::<GridRange>().unwrap().values(), vec![0.5]);
        assert!("2:1:3".parse::<GridRange>().is_err());
        assert!("0:1:0".parse::<GridRange>().is_err());
        assert!("0:1".parse::<GridRange>().is_err());
    }

    #[test]
    fn row_order_and_count() {
        let mut spec = SweepSpec::new(
            ModelTag::KitaevChain,
            6,
            1.0,
            GridRange::new(-1.5, 1.5, 3).unwrap(),
            GridRange::new(0.5, 1.0, 2).unwrap(),
            vec![Quantity::EtaSite, Quantity::Gap, Quantity::CostHalf],
        );
        spec.epsilon = 0.01;
        let r = run_sweep::<f64>(&spec, 2).unwrap();
        assert_eq!(r.rows.len(), 3 * 2 * 3);
        let keys: Vec<(f64, f64, Quantity)> = r.rows.iter().map(|r| (r.mu, r.delta, r.quantity)).collect();
        assert_eq!(keys[0], (-1.5, 0.5, Quantity::EtaSite));
        assert_eq!(keys[1], (-1.5, 0.5, Quantity::Gap));
        assert_eq!(keys[3], (-1.5, 1.0, Quantity::EtaSite));
        assert_eq!(keys[6], (0.0, 0.5, Quantity::EtaSite));
        assert!(r.rows.iter().all(|r| r.value.is_finite() || r.has_flag(Flag::InfiniteCost)));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let spec = SweepSpec::new(
            ModelTag::GlobalCoupling,
            8,
            1.0,
            GridRange::new(-2.0, 2.0, 5).unwrap(),
            GridRange::new(-1.0, 1.0, 5).unwrap(),
            vec![Quantity::Gap, Quantity::EtaSite, Quantity::EtaHalf, Quantity::Lambda1Half],
        );
        let a = run_sweep::<f64>(&spec, 1).unwrap().to_csv_string();
        let b = run_sweep::<f64>(&spec, 4).unwrap().to_csv_string();
        assert_eq!(a, b);
    }

    #[test]
    fn gap_is_mirror_symmetric_in_delta() {
        let spec = SweepSpec::new(
            ModelTag::KitaevChain,
            12,
            1.0,
            GridRange::new(-2.0, 2.0, 9).unwrap(),
            GridRange::new(-2.0, 2.0, 9).unwrap(),
            vec![Quantity::Gap],
        );
        let r = run_sweep::<f64>(&spec, 2).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let a = r.rows[i * 9 + j].value;
                let b = r.rows[i * 9 + (8 - j)].value;
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_gap_is_flagged_degenerate_and_infinite_cost() {
        let spec = SweepSpec::new(
            ModelTag::GlobalCoupling,
            16,
            1.0,
            GridRange::single(-0.5),
            GridRange::single(0.0),
            vec![Quantity::Gap, Quantity::CostSite],
        );
        let r = run_sweep::<f64>(&spec, 1).unwrap();
        assert!(r.rows[0].value < 1e-10);
        assert!(r.rows[0].has_flag(Flag::DegenerateGap));
        assert!(r.rows[1].has_flag(Flag::InfiniteCost));
        assert!(r.rows[1].value.is_infinite());
    }

    #[test]
    fn csv_and_json_schema() {
        let spec = SweepSpec::new(
            ModelTag::SquareLattice2D,
            2,
            1.0,
            GridRange::single(0.25),
            GridRange::single(0.5),
            vec![Quantity::Gap, Quantity::EtaHalf],
        );
        let r = run_sweep::<f64>(&spec, 1).unwrap();
        let csv = r.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("model,n,t,mu,delta,quantity,value,flags"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&first[..6], &["square", "4", "1", "0.25", "0.5", "gap"]);
        assert_eq!(first[6].parse::<f64>().unwrap(), r.rows[0].value);
        let json: serde_json::Value = serde_json::from_str(&r.to_json_string()).unwrap();
        assert_eq!(json["spec"]["size"], 2);
        assert_eq!(json["rows"][1]["quantity"], "eta_half");
        assert_eq!(json["rows"][1]["flags"], "");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = SweepSpec::new(
            ModelTag::KitaevChain,
            5,
            1.0,
            GridRange::single(0.0),
            GridRange::single(0.0),
            vec![Quantity::EtaHalf],
        );
        assert!(base.validate().is_err());
        let empty = SweepSpec { quantities: vec![], ..base.clone() };
        assert!(empty.validate().is_err());
        let ok = SweepSpec { quantities: vec![Quantity::Gap], ..base };
        assert!(run_sweep::<f64>(&ok, 0).is_err());
    }
}
