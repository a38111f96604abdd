//! Monte Carlo verification harness.
//!
//! Every trial draws its randomness from a counter-based substream
//! (`seed`, trial index), so results are bit-identical for a fixed config no
//! matter how many worker threads run the trials. Aggregation sums integer
//! indicators, which makes the reduction order irrelevant.

use std::collections::HashMap;

use num::rational::Ratio;
use num::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::{BoundedSpec, PopulationModel};
use crate::error::{Error, Result};
use crate::intervals;
use crate::model::{big_ratio, run_stop_rule, PrecisionSpec, Rational, SamplingPlan};

/// Full description of a simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: PopulationModel,
    pub plan: SamplingPlan,
    pub spec: PrecisionSpec,
    pub trials: u64,
    pub seed: u64,
    pub parallelism: usize,
}

/// A point estimate with its standard error (undefined for a single trial).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Aggregated simulation results with three-sigma pass flags.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub trials: u64,
    /// Empirical probability of the precision event.
    pub coverage: Estimate,
    /// Empirical probability that the matching confidence interval contains
    /// the true parameter.
    pub ci_coverage: Estimate,
    pub mean_n: Estimate,
    /// `min(n, gamma/theta)` for 0/1 populations, `min(n, gamma/theta + 1)`
    /// otherwise.
    pub expected_n_bound: f64,
    /// `coverage >= 1 - delta - 3 SE`.
    pub coverage_pass: Option<bool>,
    pub ci_coverage_pass: Option<bool>,
    /// `mean_n + 3 SE < bound`.
    pub mean_n_bound_pass: Option<bool>,
}

/// Per-trial dump row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub n_stop: u64,
    pub k_sum: f64,
    pub estimate: f64,
    pub covered: bool,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub ci_covered: bool,
}

/// Fills `out` with `length` fresh samples from the model.
fn fill_path<R: Rng>(
    model: &PopulationModel,
    length: usize,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<()> {
    out.clear();
    match *model {
        PopulationModel::Bernoulli { p } => {
            for _ in 0..length {
                out.push(if rng.gen::<f64>() < p { 1.0 } else { 0.0 });
            }
        }
        PopulationModel::FinitePopulation { population, marked } => {
            if length as u64 > population {
                return Err(Error::Domain(format!(
                    "cannot draw {length} without replacement from {population} units"
                )));
            }
            // sequential urn updates match the joint law of draws without
            // replacement directly
            let mut remaining = population;
            let mut marked_left = marked;
            for _ in 0..length {
                let hit = rng.gen_range(0..remaining) < marked_left;
                if hit {
                    marked_left -= 1;
                    out.push(1.0);
                } else {
                    out.push(0.0);
                }
                remaining -= 1;
            }
        }
        PopulationModel::Poisson { lambda } => {
            for _ in 0..length {
                out.push(sample_poisson(lambda, rng) as f64);
            }
        }
        PopulationModel::Bounded(spec) => match spec {
            BoundedSpec::TwoPoint { lo, hi, weight_hi } => {
                for _ in 0..length {
                    out.push(if rng.gen::<f64>() < weight_hi { hi } else { lo });
                }
            }
            BoundedSpec::Uniform { lo, hi } => {
                for _ in 0..length {
                    out.push(lo + (hi - lo) * rng.gen::<f64>());
                }
            }
            BoundedSpec::Beta { alpha, beta } => {
                let ga = rand_distr::Gamma::new(alpha, 1.0)
                    .map_err(|e| Error::Domain(format!("gamma sampler: {e}")))?;
                let gb = rand_distr::Gamma::new(beta, 1.0)
                    .map_err(|e| Error::Domain(format!("gamma sampler: {e}")))?;
                for _ in 0..length {
                    loop {
                        let x = rng.sample(ga);
                        let y = rng.sample(gb);
                        if x + y > 0.0 {
                            out.push(x / (x + y));
                            break;
                        }
                    }
                }
            }
        },
    }
    Ok(())
}

/// Draws one sample path of the given length.
pub fn generate_path<R: Rng>(
    model: &PopulationModel,
    length: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    model.validate()?;
    let mut out = Vec::with_capacity(length);
    fill_path(model, length, rng, &mut out)?;
    Ok(out)
}

/// Inversion walk below 10, rejection sampler above.
fn sample_poisson<R: Rng>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 10.0 {
        let u: f64 = rng.gen();
        let mut k = 0u64;
        let mut pmf = (-lambda).exp();
        let mut cdf = pmf;
        while u >= cdf && k < 1_000_000 {
            k += 1;
            pmf *= lambda / k as f64;
            cdf += pmf;
        }
        k
    } else {
        let d = rand_distr::Poisson::new(lambda).expect("validated lambda");
        rng.sample(d) as u64
    }
}

/// Exact indicator of the precision event for a rational estimate.
fn covered_exact(estimate: Ratio<u64>, theta: &Rational, spec: &PrecisionSpec) -> bool {
    let dev = (big_ratio(estimate) - theta).abs();
    &dev < spec.eps_a_exact() || dev < spec.eps_r_exact() * theta
}

fn covered_float(estimate: f64, theta: f64, spec: &PrecisionSpec) -> bool {
    let dev = (estimate - theta).abs();
    dev < spec.eps_a() || dev < spec.eps_r() * theta
}

#[derive(Clone, Copy)]
struct OutcomeVerdict {
    covered: bool,
    ci_lower: f64,
    ci_upper: f64,
    ci_covered: bool,
}

/// Computes the verdict for one discrete outcome class `(n_stop, k)`.
fn discrete_verdict(
    config: &SimConfig,
    n_stop: u64,
    k: u64,
    theta_exact: &Rational,
) -> Result<OutcomeVerdict> {
    let gamma = config.plan.integer_gamma().expect("discrete models need integer gamma");
    let estimate = Ratio::new(k.min(gamma), n_stop);
    let covered = covered_exact(estimate, theta_exact, &config.spec);
    let delta = config.spec.delta();
    let (ci_lower, ci_upper, ci_covered) = match config.model {
        PopulationModel::Bernoulli { p } => {
            let ci = intervals::ci_binomial(n_stop, k, delta)?;
            (ci.lower, ci.upper, ci.lower < p && p < ci.upper)
        }
        PopulationModel::FinitePopulation { population, marked } => {
            let ci = intervals::ci_finite(population, n_stop, k, delta)?;
            let prop = ci.proportions();
            (prop.lower, prop.upper, ci.contains(marked))
        }
        PopulationModel::Poisson { lambda } => {
            let ci = intervals::ci_poisson(&config.plan, n_stop, k, delta)?;
            (ci.lower, ci.upper, ci.lower < lambda && lambda < ci.upper)
        }
        PopulationModel::Bounded(_) => unreachable!("bounded outcomes are continuous"),
    };
    Ok(OutcomeVerdict {
        covered,
        ci_lower,
        ci_upper,
        ci_covered,
    })
}

/// Precomputed verdicts for every reachable discrete outcome class. Early
/// stops always carry `k >= gamma` but the estimate and intervals only see
/// `min(k, gamma)`, so `(n_stop, min(k, gamma))` keys the whole table.
fn build_verdict_table(
    config: &SimConfig,
    theta_exact: &Rational,
) -> Result<HashMap<(u64, u64), OutcomeVerdict>> {
    let gamma = config.plan.integer_gamma().ok_or_else(|| {
        Error::Domain("this population model requires an integer threshold".into())
    })?;
    let n = config.plan.n_max();
    let mut table = HashMap::new();
    let jump_distributed = matches!(config.model, PopulationModel::Poisson { .. });
    for m in 1..=n {
        // early stop at m (for 0/1 samples only possible once m >= gamma)
        if m < n && (jump_distributed || m >= gamma) {
            table.insert((m, gamma), discrete_verdict(config, m, gamma, theta_exact)?);
        }
    }
    for k in 0..=gamma.min(n) {
        table.insert((n, k), discrete_verdict(config, n, k, theta_exact)?);
    }
    Ok(table)
}

struct Tally {
    covered: u64,
    ci_covered: u64,
    n_sum: u64,
    n_sq_sum: u128,
}

impl Tally {
    fn zero() -> Self {
        Tally {
            covered: 0,
            ci_covered: 0,
            n_sum: 0,
            n_sq_sum: 0,
        }
    }

    fn merge(a: Tally, b: Tally) -> Tally {
        Tally {
            covered: a.covered + b.covered,
            ci_covered: a.ci_covered + b.ci_covered,
            n_sum: a.n_sum + b.n_sum,
            n_sq_sum: a.n_sq_sum + b.n_sq_sum,
        }
    }
}

fn validate_config(config: &SimConfig) -> Result<()> {
    config.model.validate()?;
    if config.trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if config.parallelism == 0 {
        return Err(Error::Domain("parallelism must be at least 1".into()));
    }
    if let PopulationModel::FinitePopulation { population, .. } = config.model {
        if config.plan.n_max() > population {
            return Err(Error::Domain(format!(
                "plan draws {} samples but the population holds {population}",
                config.plan.n_max()
            )));
        }
    }
    Ok(())
}

fn run_one_trial(
    config: &SimConfig,
    template: &ChaCha8Rng,
    trial: u64,
    table: Option<&HashMap<(u64, u64), OutcomeVerdict>>,
    theta: f64,
    buf: &mut Vec<f64>,
) -> Result<TrialRecord> {
    let mut rng = template.clone();
    rng.set_stream(trial);
    fill_path(&config.model, config.plan.n_max() as usize, &mut rng, buf)?;
    let outcome = run_stop_rule(buf, &config.plan)?;
    let verdict = match table {
        Some(table) => {
            let gamma = config.plan.integer_gamma().unwrap();
            let k = (outcome.k_sum() as u64).min(gamma);
            *table
                .get(&(outcome.n_stop(), k))
                .expect("every reachable outcome is tabulated")
        }
        None => {
            let covered = covered_float(outcome.estimate(), theta, &config.spec);
            let ci = intervals::ci_bounded(
                &config.plan,
                outcome.n_stop(),
                outcome.k_sum(),
                config.spec.delta(),
            )?;
            OutcomeVerdict {
                covered,
                ci_lower: ci.lower,
                ci_upper: ci.upper,
                ci_covered: ci.lower < theta && theta < ci.upper,
            }
        }
    };
    Ok(TrialRecord {
        trial,
        n_stop: outcome.n_stop(),
        k_sum: outcome.k_sum(),
        estimate: outcome.estimate(),
        covered: verdict.covered,
        ci_lower: verdict.ci_lower,
        ci_upper: verdict.ci_upper,
        ci_covered: verdict.ci_covered,
    })
}

fn summarize(config: &SimConfig, tally: &Tally) -> SimReport {
    let t = config.trials as f64;
    let theta = config.model.mean();
    let binom_se = |hits: u64| {
        if config.trials < 2 {
            return None;
        }
        let p = hits as f64 / t;
        Some((p * (1.0 - p) / t).sqrt())
    };
    let coverage = Estimate {
        value: tally.covered as f64 / t,
        std_error: binom_se(tally.covered),
    };
    let ci_coverage = Estimate {
        value: tally.ci_covered as f64 / t,
        std_error: binom_se(tally.ci_covered),
    };
    let mean = tally.n_sum as f64 / t;
    let mean_se = if config.trials < 2 {
        None
    } else {
        let var = (tally.n_sq_sum as f64 - t * mean * mean) / (t - 1.0);
        Some((var.max(0.0) / t).sqrt())
    };
    let mean_n = Estimate {
        value: mean,
        std_error: mean_se,
    };
    let n = config.plan.n_max() as f64;
    let expected_n_bound = match config.model {
        PopulationModel::Bernoulli { .. } | PopulationModel::FinitePopulation { .. } => {
            n.min(config.plan.gamma() / theta)
        }
        _ => n.min(config.plan.gamma() / theta + 1.0),
    };
    let floor = 1.0 - config.spec.delta();
    SimReport {
        trials: config.trials,
        coverage_pass: coverage
            .std_error
            .map(|se| coverage.value >= floor - 3.0 * se),
        ci_coverage_pass: ci_coverage
            .std_error
            .map(|se| ci_coverage.value >= floor - 3.0 * se),
        mean_n_bound_pass: mean_n
            .std_error
            .map(|se| mean_n.value + 3.0 * se < expected_n_bound),
        coverage,
        ci_coverage,
        mean_n,
        expected_n_bound,
    }
}

/// Runs the configured trials and aggregates coverage, CI coverage, and the
/// sample-number statistics.
pub fn run_trials(config: &SimConfig) -> Result<SimReport> {
    Ok(run_trials_inner(config, false)?.0)
}

/// Like [`run_trials`], additionally returning the per-trial records in
/// trial order.
pub fn run_trials_with_dump(config: &SimConfig) -> Result<(SimReport, Vec<TrialRecord>)> {
    let (report, records) = run_trials_inner(config, true)?;
    Ok((report, records.expect("dump requested")))
}

fn run_trials_inner(
    config: &SimConfig,
    dump: bool,
) -> Result<(SimReport, Option<Vec<TrialRecord>>)> {
    validate_config(config)?;
    let theta = config.model.mean();
    let table = match config.model {
        PopulationModel::Bounded(_) => None,
        _ => {
            let theta_exact = config.model.mean_rational()?;
            Some(build_verdict_table(config, &theta_exact)?)
        }
    };
    let template = ChaCha8Rng::seed_from_u64(config.seed);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;

    let run = |trial: u64, buf: &mut Vec<f64>| -> Result<TrialRecord> {
        run_one_trial(config, &template, trial, table.as_ref(), theta, buf)
    };

    if dump {
        let records: Vec<TrialRecord> = pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map_with(Vec::new(), |buf, trial| run(trial, buf))
                .collect::<Result<Vec<_>>>()
        })?;
        let mut tally = Tally::zero();
        for r in &records {
            tally.covered += u64::from(r.covered);
            tally.ci_covered += u64::from(r.ci_covered);
            tally.n_sum += r.n_stop;
            tally.n_sq_sum += u128::from(r.n_stop) * u128::from(r.n_stop);
        }
        Ok((summarize(config, &tally), Some(records)))
    } else {
        let tally = pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map_with(Vec::new(), |buf, trial| {
                    run(trial, buf).map(|r| Tally {
                        covered: u64::from(r.covered),
                        ci_covered: u64::from(r.ci_covered),
                        n_sum: r.n_stop,
                        n_sq_sum: u128::from(r.n_stop) * u128::from(r.n_stop),
                    })
                })
                .try_reduce(Tally::zero, |a, b| Ok(Tally::merge(a, b)))
        })?;
        Ok((summarize(config, &tally), None))
    }
}
