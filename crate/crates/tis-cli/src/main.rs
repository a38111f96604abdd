//! `tis`: plan design, plan checking, interval estimation, exact pmf, and
//! Monte Carlo simulation for truncated inverse sampling.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use output::Format;
use tis_core::design::{
    check_plan_binomial, check_plan_finite, explicit_plan_binomial, explicit_plan_bounded,
    explicit_plan_finite, refined_plan, CheckOptions, PlanCertificate, PlanMethod, PlanVariant,
    RefinedSearch,
};
use tis_core::dist::{exact_pmf, BoundedSpec, PopulationModel};
use tis_core::intervals::{ci_binomial, ci_bounded, ci_finite, ci_poisson};
use tis_core::model::{PrecisionSpec, SamplingPlan};
use tis_core::sim::{run_trials, run_trials_with_dump, SimConfig};
use tis_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "tis",
    version,
    about = "Truncated inverse sampling: sample until the running sum reaches gamma or the count reaches n",
    long_about = "Designs (gamma, n) sampling plans with guaranteed precision and confidence, \
checks plans against the worst-case tail conditions, computes exact confidence intervals \
and estimator distributions, and verifies everything by deterministic Monte Carlo.\n\n\
Examples:\n  tis plan --variant binomial --eps-a 0.05 --eps-r 0.2 --delta 0.05 --method explicit\n  \
tis plan --variant binomial --eps-a 0.05 --eps-r 0.2 --delta 0.05 --method refined\n  \
tis check --variant finite --population 200 --gamma 12 --n 40 --eps-a 0.1 --eps-r 0.3 --delta 0.1\n  \
tis ci --variant binomial --k 0 --n-stop 10 --delta 0.05\n  \
tis ci --variant poisson --k 0 --n-stop 2 --gamma 3 --n 2 --delta 0.05\n  \
tis pmf --variant binomial --p 0.5 --gamma 2 --n 3 --format csv\n  \
tis simulate --variant bounded --bounded-kind beta --alpha 2 --beta 5 --gamma 173 --n 577 \
--eps-a 0.05 --eps-r 0.2 --delta 0.05 --trials 100000 --seed 42 --threads 8"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a sampling plan from precision/confidence targets
    Plan(PlanArgs),
    /// Check a given plan against the worst-case tail conditions
    Check(CheckArgs),
    /// Confidence interval from an observed (n_stop, k)
    Ci(CiArgs),
    /// Exact pmf of the estimator over its support
    Pmf(PmfArgs),
    /// Monte Carlo verification of coverage and sample-number behavior
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Table,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Table => Format::Table,
        }
    }
}

#[derive(Args)]
struct IoArgs {
    /// Output format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write the result to this file instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON file with defaults for the flags of this subcommand; explicit
    /// flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    /// binomial | finite | bounded
    #[arg(long)]
    variant: Option<String>,
    /// Absolute error margin (decimal, e.g. 0.05)
    #[arg(long)]
    eps_a: Option<String>,
    /// Relative error margin (decimal)
    #[arg(long)]
    eps_r: Option<String>,
    /// Risk level (decimal)
    #[arg(long)]
    delta: Option<String>,
    /// explicit | refined
    #[arg(long)]
    method: Option<String>,
    /// Population size (finite variant)
    #[arg(long)]
    population: Option<u64>,
    /// Lower end of the zeta search window (refined)
    #[arg(long)]
    zeta_lo: Option<f64>,
    /// Upper end of the zeta search window (refined)
    #[arg(long)]
    zeta_hi: Option<f64>,
    /// Bisection budget (refined)
    #[arg(long)]
    max_iter: Option<u32>,
    /// Alternative candidate grouping: keep the whole shifted support
    #[arg(long)]
    alt_grouping: bool,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct CheckArgs {
    /// binomial | finite
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    gamma: Option<u64>,
    /// Maximum sample size
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    eps_a: Option<String>,
    #[arg(long)]
    eps_r: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    population: Option<u64>,
    /// Alternative candidate grouping: keep the whole shifted support
    #[arg(long)]
    alt_grouping: bool,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct CiArgs {
    /// binomial | finite | poisson | bounded
    #[arg(long)]
    variant: Option<String>,
    /// Observed raw sample sum
    #[arg(long)]
    k: Option<f64>,
    /// Observed stop time
    #[arg(long)]
    n_stop: Option<u64>,
    #[arg(long)]
    delta: Option<String>,
    /// Population size (finite variant)
    #[arg(long)]
    population: Option<u64>,
    /// Plan threshold (poisson/bounded variants)
    #[arg(long)]
    gamma: Option<f64>,
    /// Plan maximum sample size (poisson/bounded variants)
    #[arg(long)]
    n: Option<u64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct PmfArgs {
    /// binomial | finite | poisson
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    gamma: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    /// Success probability (binomial)
    #[arg(long, conflicts_with_all = ["population", "marked", "lambda"])]
    p: Option<f64>,
    /// Population size (finite)
    #[arg(long)]
    population: Option<u64>,
    /// Marked units (finite)
    #[arg(long)]
    marked: Option<u64>,
    /// Mean (poisson)
    #[arg(long, conflicts_with_all = ["population", "marked"])]
    lambda: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// binomial | finite | poisson | bounded
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, conflicts_with_all = ["population", "marked", "lambda", "bounded_kind"])]
    p: Option<f64>,
    #[arg(long)]
    population: Option<u64>,
    #[arg(long)]
    marked: Option<u64>,
    #[arg(long, conflicts_with_all = ["population", "marked", "bounded_kind"])]
    lambda: Option<f64>,
    /// two-point | uniform | beta (bounded variant)
    #[arg(long, conflicts_with_all = ["population", "marked"])]
    bounded_kind: Option<String>,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    /// Weight on the upper point (two-point)
    #[arg(long)]
    weight_hi: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Plan threshold (real for bounded, integer otherwise)
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    eps_a: Option<String>,
    #[arg(long)]
    eps_r: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to TIS_THREADS or 1
    #[arg(long)]
    threads: Option<usize>,
    /// Write one CSV row per trial to this file
    #[arg(long)]
    dump_trials: Option<PathBuf>,
    #[command(flatten)]
    io: IoArgs,
}

// ---------------------------------------------------------------------------
// error handling and config-file merging
// ---------------------------------------------------------------------------

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SearchExhausted(_) => CliError::internal(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Flag defaults loaded from `--config`; keys use the long flag names.
struct ConfigDoc(Value);

impl ConfigDoc {
    fn load(path: &Option<PathBuf>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self(Value::Null));
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {path:?}: {e}")))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {path:?} is not valid JSON: {e}")))?;
        if !value.is_object() {
            return Err(CliError::usage(format!(
                "config {path:?} must hold a single JSON object"
            )));
        }
        Ok(Self(value))
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key).or_else(|| self.0.get(&key.replace('-', "_")))
    }

    fn string(&self, key: &str) -> Option<String> {
        self.get(key).map(|v| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| CliError::usage(format!("config key {key:?} must be a number"))),
        }
    }

    fn u64(&self, key: &str) -> CliResult<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_u64().map(Some).ok_or_else(|| {
                CliError::usage(format!("config key {key:?} must be a non-negative integer"))
            }),
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("missing required value for --{flag}")))
}

fn resolve_spec(
    eps_a: Option<String>,
    eps_r: Option<String>,
    delta: Option<String>,
    cfg: &ConfigDoc,
) -> CliResult<PrecisionSpec> {
    let ea = require(eps_a.or_else(|| cfg.string("eps-a")), "eps-a")?;
    let er = require(eps_r.or_else(|| cfg.string("eps-r")), "eps-r")?;
    let d = require(delta.or_else(|| cfg.string("delta")), "delta")?;
    Ok(PrecisionSpec::from_decimals(&ea, &er, &d)?)
}

fn resolve_threads(flag: Option<usize>, cfg: &ConfigDoc) -> CliResult<usize> {
    if let Some(t) = flag {
        return Ok(t);
    }
    if let Some(t) = cfg.u64("threads")? {
        return Ok(t as usize);
    }
    if let Ok(env) = std::env::var("TIS_THREADS") {
        return env
            .parse()
            .map_err(|_| CliError::usage(format!("TIS_THREADS is not an integer: {env:?}")));
    }
    Ok(1)
}

struct RenderSet {
    json: Value,
    csv: String,
    table: String,
}

fn emit(io: &IoArgs, cfg: &ConfigDoc, rendered: RenderSet) -> CliResult<()> {
    let format: Format = io
        .format
        .or_else(|| match cfg.string("format").as_deref() {
            Some("json") => Some(FormatArg::Json),
            Some("csv") => Some(FormatArg::Csv),
            Some("table") => Some(FormatArg::Table),
            _ => None,
        })
        .unwrap_or(FormatArg::Json)
        .into();
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rendered.json)
                .map_err(|e| CliError::internal(format!("serialization failed: {e}")))?;
            s.push('\n');
            s
        }
        Format::Csv => rendered.csv,
        Format::Table => rendered.table,
    };
    match &io.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::internal(format!("cannot write {path:?}: {e}"))),
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                Ok(()) => Ok(()),
                // a closed pipe downstream is not our failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(CliError::internal(format!("cannot write output: {e}"))),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

fn cmd_plan(args: PlanArgs) -> CliResult<()> {
    let cfg = ConfigDoc::load(&args.io.config)?;
    let variant = require(args.variant.or_else(|| cfg.string("variant")), "variant")?;
    let method = args
        .method
        .or_else(|| cfg.string("method"))
        .unwrap_or_else(|| "explicit".into());
    let spec = resolve_spec(args.eps_a, args.eps_r, args.delta, &cfg)?;
    let delta = spec.delta();
    let options = CheckOptions {
        wide_grouping: args.alt_grouping,
    };

    let (cert, capped) = match (variant.as_str(), method.as_str()) {
        ("binomial", "explicit") => {
            let plan = explicit_plan_binomial(&spec)?;
            (
                explicit_certificate(plan, &spec, PlanVariant::Binomial),
                None,
            )
        }
        ("finite", "explicit") => {
            let population = require(args.population.or(cfg.u64("population")?), "population")?;
            let fp = explicit_plan_finite(&spec, population)?;
            (
                explicit_certificate(fp.plan, &spec, PlanVariant::Finite { population }),
                Some(fp.capped),
            )
        }
        ("bounded", "explicit") => {
            let plan = explicit_plan_bounded(&spec)?;
            (
                explicit_certificate(plan, &spec, PlanVariant::Binomial),
                None,
            )
        }
        ("bounded", "refined") => {
            return Err(CliError::usage(
                "refined search exists only for the binomial and finite variants",
            ));
        }
        (v @ ("binomial" | "finite"), "refined") => {
            let defaults = RefinedSearch::default();
            let search = RefinedSearch {
                zeta_range: (
                    args.zeta_lo
                        .or(cfg.f64("zeta-lo")?)
                        .unwrap_or(defaults.zeta_range.0),
                    args.zeta_hi
                        .or(cfg.f64("zeta-hi")?)
                        .unwrap_or(defaults.zeta_range.1),
                ),
                max_iter: args
                    .max_iter
                    .or(cfg.u64("max-iter")?.map(|x| x as u32))
                    .unwrap_or(defaults.max_iter),
            };
            let plan_variant = if v == "finite" {
                let population =
                    require(args.population.or(cfg.u64("population")?), "population")?;
                PlanVariant::Finite { population }
            } else {
                PlanVariant::Binomial
            };
            (refined_plan(&spec, plan_variant, search, options)?, None)
        }
        (v, "explicit" | "refined") => {
            return Err(CliError::usage(format!(
                "unknown variant {v:?} (expected binomial, finite, or bounded)"
            )));
        }
        (_, m) => {
            return Err(CliError::usage(format!(
                "unknown method {m:?} (expected explicit or refined)"
            )));
        }
    };

    if capped == Some(true) {
        eprintln!(
            "warning: the formula exceeds the population size; n was capped and the \
explicit guarantee no longer applies"
        );
    }
    let json = output::certificate_json(&cert, delta, capped);
    emit(
        &args.io,
        &cfg,
        RenderSet {
            csv: output::certificate_csv(&cert),
            table: output::certificate_table(&cert, delta),
            json,
        },
    )
}

fn explicit_certificate(
    plan: SamplingPlan,
    spec: &PrecisionSpec,
    variant: PlanVariant,
) -> PlanCertificate {
    PlanCertificate {
        plan,
        spec: spec.clone(),
        variant,
        method: PlanMethod::Explicit,
        zeta: None,
        checks: Vec::new(),
        passed: true,
    }
}

fn cmd_check(args: CheckArgs) -> CliResult<()> {
    let cfg = ConfigDoc::load(&args.io.config)?;
    let variant = require(args.variant.or_else(|| cfg.string("variant")), "variant")?;
    let gamma = require(args.gamma.or(cfg.u64("gamma")?), "gamma")?;
    let n = require(args.n.or(cfg.u64("n")?), "n")?;
    let spec = resolve_spec(args.eps_a, args.eps_r, args.delta, &cfg)?;
    let delta = spec.delta();
    let plan = SamplingPlan::with_integer_gamma(gamma, n)?;
    let options = CheckOptions {
        wide_grouping: args.alt_grouping,
    };
    let cert = match variant.as_str() {
        "binomial" => check_plan_binomial(&plan, &spec, delta, options)?,
        "finite" => {
            let population = require(args.population.or(cfg.u64("population")?), "population")?;
            check_plan_finite(&plan, &spec, delta, population, options)?
        }
        v => {
            return Err(CliError::usage(format!(
                "unknown variant {v:?} (expected binomial or finite)"
            )));
        }
    };
    let json = output::certificate_json(&cert, delta, None);
    emit(
        &args.io,
        &cfg,
        RenderSet {
            csv: output::certificate_csv(&cert),
            table: output::certificate_table(&cert, delta),
            json,
        },
    )
}

fn parse_delta(delta: &str) -> CliResult<f64> {
    let spec = PrecisionSpec::from_decimals("0.1", "0.5", delta)
        .map_err(|_| CliError::usage(format!("delta is not a decimal in (0, 1): {delta:?}")))?;
    Ok(spec.delta())
}

fn integer_k(k: f64, variant: &str) -> CliResult<u64> {
    if k.fract() != 0.0 || k < 0.0 {
        return Err(CliError::usage(format!(
            "the {variant} variant requires a non-negative integer k, got {k}"
        )));
    }
    Ok(k as u64)
}

fn cmd_ci(args: CiArgs) -> CliResult<()> {
    let cfg = ConfigDoc::load(&args.io.config)?;
    let variant = require(args.variant.or_else(|| cfg.string("variant")), "variant")?;
    let k = require(args.k.or(cfg.f64("k")?), "k")?;
    let n_stop = require(args.n_stop.or(cfg.u64("n-stop")?), "n-stop")?;
    let delta_s = require(args.delta.or_else(|| cfg.string("delta")), "delta")?;
    let delta = parse_delta(&delta_s)?;

    let render = match variant.as_str() {
        "binomial" => {
            let ci = ci_binomial(n_stop, integer_k(k, "binomial")?, delta)?;
            RenderSet {
                json: output::interval_json("binomial", &ci),
                csv: output::interval_csv(&ci),
                table: output::interval_table(&ci),
            }
        }
        "finite" => {
            let population = require(args.population.or(cfg.u64("population")?), "population")?;
            let fi = ci_finite(population, n_stop, integer_k(k, "finite")?, delta)?;
            RenderSet {
                json: output::finite_interval_json(&fi),
                csv: output::finite_interval_csv(&fi),
                table: output::finite_interval_table(&fi),
            }
        }
        "poisson" => {
            let gamma = require(args.gamma.or(cfg.f64("gamma")?), "gamma")?;
            let n = require(args.n.or(cfg.u64("n")?), "n")?;
            let plan = SamplingPlan::new(gamma, n)?;
            let ci = ci_poisson(&plan, n_stop, integer_k(k, "poisson")?, delta)?;
            RenderSet {
                json: output::interval_json("poisson", &ci),
                csv: output::interval_csv(&ci),
                table: output::interval_table(&ci),
            }
        }
        "bounded" => {
            let gamma = require(args.gamma.or(cfg.f64("gamma")?), "gamma")?;
            let n = require(args.n.or(cfg.u64("n")?), "n")?;
            let plan = SamplingPlan::new(gamma, n)?;
            let ci = ci_bounded(&plan, n_stop, k, delta)?;
            RenderSet {
                json: output::interval_json("bounded", &ci),
                csv: output::interval_csv(&ci),
                table: output::interval_table(&ci),
            }
        }
        v => {
            return Err(CliError::usage(format!(
                "unknown variant {v:?} (expected binomial, finite, poisson, or bounded)"
            )));
        }
    };
    emit(&args.io, &cfg, render)
}

fn cmd_pmf(args: PmfArgs) -> CliResult<()> {
    let cfg = ConfigDoc::load(&args.io.config)?;
    let variant = require(args.variant.or_else(|| cfg.string("variant")), "variant")?;
    let gamma = require(args.gamma.or(cfg.u64("gamma")?), "gamma")?;
    let n = require(args.n.or(cfg.u64("n")?), "n")?;
    let plan = SamplingPlan::with_integer_gamma(gamma, n)?;
    let model = match variant.as_str() {
        "binomial" => PopulationModel::Bernoulli {
            p: require(args.p.or(cfg.f64("p")?), "p")?,
        },
        "finite" => PopulationModel::FinitePopulation {
            population: require(args.population.or(cfg.u64("population")?), "population")?,
            marked: require(args.marked.or(cfg.u64("marked")?), "marked")?,
        },
        "poisson" => PopulationModel::Poisson {
            lambda: require(args.lambda.or(cfg.f64("lambda")?), "lambda")?,
        },
        v => {
            return Err(CliError::usage(format!(
                "unknown variant {v:?} (expected binomial, finite, or poisson)"
            )));
        }
    };
    let table = exact_pmf(&plan, &model)?;
    emit(
        &args.io,
        &cfg,
        RenderSet {
            json: output::pmf_json(&variant, &table),
            csv: output::pmf_csv(&table),
            table: output::pmf_table(&table),
        },
    )
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let cfg = ConfigDoc::load(&args.io.config)?;
    let variant = require(args.variant.or_else(|| cfg.string("variant")), "variant")?;
    let model = match variant.as_str() {
        "binomial" => PopulationModel::Bernoulli {
            p: require(args.p.or(cfg.f64("p")?), "p")?,
        },
        "finite" => PopulationModel::FinitePopulation {
            population: require(args.population.or(cfg.u64("population")?), "population")?,
            marked: require(args.marked.or(cfg.u64("marked")?), "marked")?,
        },
        "poisson" => PopulationModel::Poisson {
            lambda: require(args.lambda.or(cfg.f64("lambda")?), "lambda")?,
        },
        "bounded" => {
            let kind = require(
                args.bounded_kind.or_else(|| cfg.string("bounded-kind")),
                "bounded-kind",
            )?;
            let spec = match kind.as_str() {
                "two-point" => BoundedSpec::TwoPoint {
                    lo: require(args.lo.or(cfg.f64("lo")?), "lo")?,
                    hi: require(args.hi.or(cfg.f64("hi")?), "hi")?,
                    weight_hi: require(args.weight_hi.or(cfg.f64("weight-hi")?), "weight-hi")?,
                },
                "uniform" => BoundedSpec::Uniform {
                    lo: require(args.lo.or(cfg.f64("lo")?), "lo")?,
                    hi: require(args.hi.or(cfg.f64("hi")?), "hi")?,
                },
                "beta" => BoundedSpec::Beta {
                    alpha: require(args.alpha.or(cfg.f64("alpha")?), "alpha")?,
                    beta: require(args.beta.or(cfg.f64("beta")?), "beta")?,
                },
                other => {
                    return Err(CliError::usage(format!(
                        "unknown bounded kind {other:?} (expected two-point, uniform, or beta)"
                    )));
                }
            };
            PopulationModel::Bounded(spec)
        }
        v => {
            return Err(CliError::usage(format!(
                "unknown variant {v:?} (expected binomial, finite, poisson, or bounded)"
            )));
        }
    };
    let gamma = require(args.gamma.or(cfg.f64("gamma")?), "gamma")?;
    let n = require(args.n.or(cfg.u64("n")?), "n")?;
    let spec = resolve_spec(args.eps_a, args.eps_r, args.delta, &cfg)?;
    let config = SimConfig {
        model,
        plan: SamplingPlan::new(gamma, n)?,
        spec,
        trials: args.trials.or(cfg.u64("trials")?).unwrap_or(10_000),
        seed: args.seed.or(cfg.u64("seed")?).unwrap_or(0),
        parallelism: resolve_threads(args.threads, &cfg)?,
    };

    let report = if let Some(dump_path) = &args.dump_trials {
        let (report, records) = run_trials_with_dump(&config)?;
        fs::write(dump_path, output::trials_csv(&records))
            .map_err(|e| CliError::internal(format!("cannot write {dump_path:?}: {e}")))?;
        report
    } else {
        run_trials(&config)?
    };
    emit(
        &args.io,
        &cfg,
        RenderSet {
            json: output::sim_json(&report),
            csv: output::sim_csv(&report),
            table: output::sim_table(&report),
        },
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Check(args) => cmd_check(args),
        Command::Ci(args) => cmd_ci(args),
        Command::Pmf(args) => cmd_pmf(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
