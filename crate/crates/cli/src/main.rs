use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fermvac_core::pipeline::{
    complexity_estimate, half_half_series, scaling_study, site_by_site_series, GrowthOptions, GrowthSeries, ModelSpec,
    ScalingQuantities,
};
use fermvac_core::schmidt::DEFAULT_RANK_TOL;
use fermvac_core::sweep::{run_sweep, GridRange, Quantity, SweepSpec};
use fermvac_core::{
    entanglement_spectrum, fidelity_pure_mixed, ground_state, largest_schmidt, reduce, renyi_entropy, Extended,
    ModelTag, Real, RenyiOrder,
};
use fermvac_oracle::{run_equivalence_suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "fermvac", version, about = "Free-fermion site-by-site vacuum preparation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate quantities over a (mu, delta) grid.
    Sweep(SweepArgs),
    /// Gap and overlap table over a list of sizes, with the gap decay classified.
    Scaling(ScalingArgs),
    /// Site-by-site or half-half growth series.
    Series(SeriesArgs),
    /// Entanglement spectrum and overlap bounds at one point.
    Schmidt(SchmidtArgs),
    /// Gate-cost estimate from a growth series.
    Complexity(ComplexityArgs),
    /// Compare the fast path against dense exact diagonalisation.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F64,
    /// Double-double, about 32 significant digits.
    Extended,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Site,
    Half,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// kitaev, square or global
    #[arg(long, default_value = "kitaev")]
    model: ModelTag,
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    /// Inverse temperature of the thermal target state (pure when absent).
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "kitaev")]
    model: ModelTag,
    /// Number of sites; side length for the square lattice.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    /// lo:hi:steps or a single value
    #[arg(long, default_value = "-2:2:101", allow_hyphen_values = true)]
    mu: GridRange,
    /// lo:hi:steps or a single value
    #[arg(long, default_value = "-2:2:101", allow_hyphen_values = true)]
    delta: GridRange,
    #[arg(long = "quantity", value_delimiter = ',', default_value = "gap")]
    quantities: Vec<Quantity>,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    prefactor: f64,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "FERMVAC_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// lo:hi:stride or a comma-separated list
    #[arg(long, default_value = "8:72:8")]
    sizes: SizeList,
    /// Extra columns: eta_site, eta_half (the gap is always computed).
    #[arg(long = "quantity", value_delimiter = ',')]
    quantities: Vec<Quantity>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "site")]
    scheme: SchemeArg,
    /// Starting size of the site-by-site scheme.
    #[arg(long, default_value_t = 1)]
    n0: usize,
    #[arg(long)]
    n_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SchmidtArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    /// Sites kept on one side of the cut; defaults to all but the last site.
    #[arg(long, value_delimiter = ',')]
    cut: Vec<usize>,
}

#[derive(Args)]
struct ComplexityArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "site")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 1)]
    n0: usize,
    #[arg(long)]
    n_max: usize,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    prefactor: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 6)]
    max_n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Deviation above which the check fails.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

#[derive(Clone)]
struct SizeList(Vec<usize>);

impl std::str::FromStr for SizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad size '{x}'"));
        let sizes = match s.split(':').collect::<Vec<_>>().as_slice() {
            [lo, hi, stride] => {
                let (lo, hi, stride) = (num(lo)?, num(hi)?, num(stride)?);
                if stride == 0 || lo == 0 || lo > hi {
                    return Err(format!("bad size range '{s}'"));
                }
                (lo..=hi).step_by(stride).collect()
            }
            [_] => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
            _ => return Err(format!("expected lo:hi:stride or a list, got '{s}'")),
        };
        Ok(SizeList(sizes))
    }
}

/// Bad input detected after parsing; reported with exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fermvac: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Scaling(a) => dispatch(&a.model, |p| match p {
            Precision::F64 => scaling::<f64>(&a),
            Precision::Extended => scaling::<Extended>(&a),
        }),
        Command::Series(a) => dispatch(&a.model, |p| match p {
            Precision::F64 => series::<f64>(&a),
            Precision::Extended => series::<Extended>(&a),
        }),
        Command::Schmidt(a) => dispatch(&a.model, |p| match p {
            Precision::F64 => schmidt::<f64>(&a),
            Precision::Extended => schmidt::<Extended>(&a),
        }),
        Command::Complexity(a) => dispatch(&a.model, |p| match p {
            Precision::F64 => complexity::<f64>(&a),
            Precision::Extended => complexity::<Extended>(&a),
        }),
        Command::OracleCheck(a) => oracle_check(&a),
    }
}

fn dispatch(m: &ModelArgs, f: impl FnOnce(Precision) -> anyhow::Result<()>) -> anyhow::Result<()> {
    if ![m.mu, m.t, m.delta].iter().all(|x| x.is_finite()) {
        return usage("couplings must be finite");
    }
    if let Some(b) = m.beta {
        if !(b > 0.0 && b.is_finite()) {
            return usage("beta must be positive and finite");
        }
    }
    f(m.precision)
}

fn model_spec<T: Real>(m: &ModelArgs) -> ModelSpec<T> {
    ModelSpec::new(m.model, T::lit(m.mu), T::lit(m.t), T::lit(m.delta))
}

fn options<T: Real>(m: &ModelArgs) -> GrowthOptions<T> {
    GrowthOptions { beta: m.beta.map(T::lit), parallel: true }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            std::io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn sweep(a: SweepArgs) -> anyhow::Result<()> {
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return usage("workers must be at least 1");
    }
    let spec = SweepSpec {
        model: a.model,
        size: a.n,
        t: a.t,
        mu: a.mu,
        delta: a.delta,
        quantities: a.quantities,
        epsilon: a.epsilon,
        prefactor: a.prefactor,
        beta: a.beta,
    };
    if let Err(e) = spec.validate() {
        return usage(e.to_string());
    }
    let result = match a.precision {
        Precision::F64 => run_sweep::<f64>(&spec, workers)?,
        Precision::Extended => run_sweep::<Extended>(&spec, workers)?,
    };
    let text = match a.format {
        Format::Csv => result.to_csv_string(),
        Format::Json => result.to_json_string() + "\n",
    };
    emit(a.out.as_deref(), &text)
}

fn scaling<T: Real>(a: &ScalingArgs) -> anyhow::Result<()> {
    let sizes = &a.sizes.0;
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return usage("sizes must be positive and strictly ascending");
    }
    let mut q = ScalingQuantities { eta_site: false, eta_half: false };
    for &quantity in &a.quantities {
        match quantity {
            Quantity::Gap => {}
            Quantity::EtaSite | Quantity::Lambda1Site => q.eta_site = true,
            Quantity::EtaHalf => q.eta_half = true,
            other => return usage(format!("scaling does not tabulate {other}")),
        }
    }
    let table = scaling_study(&model_spec::<T>(&a.model), sizes, q, options(&a.model))?;
    let fits = &table.fits;
    let describe = |f: Option<fermvac_core::pipeline::LinearFit>| {
        f.map_or("n/a".to_string(), |f| format!("slope {:.6} R^2 {:.6}", f.slope, f.r_squared))
    };
    eprintln!("log-log: {}", describe(fits.loglog));
    eprintln!("semilog: {}", describe(fits.semilog));
    eprintln!("classification: {}", fits.classification);
    emit(a.out.as_deref(), &table.to_csv())
}

fn build_series<T: Real>(m: &ModelArgs, scheme: SchemeArg, n0: usize, n_max: usize) -> anyhow::Result<GrowthSeries<T>> {
    let model = model_spec::<T>(m);
    let series = match scheme {
        SchemeArg::Site => {
            if n0 < 1 || n0 >= n_max {
                return usage("need 1 <= n0 < n-max");
            }
            site_by_site_series(&model, n0, n_max, options(m))?
        }
        SchemeArg::Half => {
            if n_max < 2 || !n_max.is_multiple_of(2) {
                return usage("half-half needs an even n-max >= 2");
            }
            half_half_series(&model, n_max, options(m))?
        }
    };
    Ok(series)
}

fn series<T: Real>(a: &SeriesArgs) -> anyhow::Result<()> {
    let s = build_series::<T>(&a.model, a.scheme, a.n0, a.n_max)?;
    let mut out = String::from("n,gap,eta,lambda1,flags\n");
    for i in 0..s.len() {
        let mut flags = Vec::new();
        if s.degenerate[i] {
            flags.push("degenerate_gap");
        }
        if s.underflow_clamped[i] {
            flags.push("underflow_clamped");
        }
        writeln!(
            out,
            "{},{},{},{},{}",
            s.sizes[i],
            s.gaps[i].as_f64(),
            s.overlaps[i].as_f64(),
            s.lambda1s[i].as_f64(),
            flags.join(";")
        )?;
    }
    emit(a.out.as_deref(), &out)
}

fn schmidt<T: Real>(a: &SchmidtArgs) -> anyhow::Result<()> {
    let model = model_spec::<T>(&a.model);
    if a.n < 2 {
        return usage("need at least 2 sites");
    }
    let cut: Vec<usize> = if a.cut.is_empty() { (0..a.n - 1).collect() } else { a.cut.clone() };
    if cut.windows(2).any(|w| w[0] >= w[1]) || cut.iter().any(|&c| c >= a.n) || cut.len() >= a.n {
        return usage("cut must be a strictly increasing proper subset of the sites");
    }
    let h = model.hamiltonian(a.n)?;
    let (_, g) = ground_state(&h)?;
    let spec = entanglement_spectrum(&g, &cut)?;
    let lambda1 = largest_schmidt(&spec);

    let mut out = String::new();
    let nus: Vec<String> = spec.nus.iter().map(|x| x.as_f64().to_string()).collect();
    writeln!(out, "nu: {}", nus.join(" "))?;
    writeln!(out, "lambda1: {}", lambda1.as_f64())?;
    for (name, order) in [
        ("S0", RenyiOrder::Finite(T::zero())),
        ("S1", RenyiOrder::Finite(T::one())),
        ("S2", RenyiOrder::Finite(T::lit(2.0))),
        ("Sinf", RenyiOrder::Infinity),
    ] {
        writeln!(out, "{name}: {}", renyi_entropy(&spec, order, T::lit(DEFAULT_RANK_TOL))?.as_f64())?;
    }
    // the cut's own ground state, when it is a region of the model
    let region = h.restricted(&cut)?;
    let (_, g_region) = ground_state(&region)?;
    let fidelity = fidelity_pure_mixed(&g_region, &reduce(&g, &cut)?)?;
    writeln!(out, "fidelity: {}", fidelity.as_f64())?;
    writeln!(out, "eta: {}", fidelity.sqrt().as_f64())?;
    print!("{out}");
    Ok(())
}

fn complexity<T: Real>(a: &ComplexityArgs) -> anyhow::Result<()> {
    if !(a.epsilon > 0.0 && a.epsilon <= 1.0) {
        return usage("epsilon must lie in (0, 1]");
    }
    if !(a.prefactor >= 0.0 && a.prefactor.is_finite()) {
        return usage("prefactor must be finite and nonnegative");
    }
    let s = build_series::<T>(&a.model, a.scheme, a.n0, a.n_max)?;
    let cost = complexity_estimate(&s, a.epsilon, a.prefactor)?;
    println!("{}", serde_json_string(&cost)?);
    Ok(())
}

fn serde_json_string<S: serde::Serialize>(v: &S) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn oracle_check(a: &OracleArgs) -> anyhow::Result<()> {
    if a.max_n < 2 || a.max_n > fermvac_oracle::MAX_SITES {
        return usage(format!("max-n must lie in 2..={}", fermvac_oracle::MAX_SITES));
    }
    if a.trials == 0 {
        return usage("trials must be at least 1");
    }
    let cfg = SuiteConfig { trials: a.trials, max_n: a.max_n, seed: a.seed, beta: a.beta, ..Default::default() };
    let report = run_equivalence_suite(&cfg)?;
    for (name, d) in &report.deviations {
        println!("{name:<28} checks {:>4}  max deviation {:.3e}", d.checks, d.max);
    }
    println!("near-degenerate draws (gap only): {}", report.near_degenerate);
    let max = report.max_deviation();
    println!("max deviation: {max:.3e}");
    if !(max < a.tolerance) {
        bail!("max deviation {max:.3e} exceeds {:.1e}", a.tolerance);
    }
    Ok(())
}
