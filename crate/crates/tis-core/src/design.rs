//! Sampling-plan design.
//!
//! Explicit plans come straight from the `mb`/`mi` exponent formulas. The
//! refined route shrinks them with a slack factor `zeta` inside
//! `ln(zeta * delta)` and certifies the result by checking the four
//! worst-case tail conditions on the finite candidate sets derived from the
//! estimator support; a bisection drives `zeta` as high as certification
//! allows. Bisection assumes pass/fail is monotone in `zeta` only for search
//! efficiency: the final plan is always re-certified, so correctness never
//! rests on that assumption.

use std::collections::HashMap;

use num::bigint::BigInt;
use num::{One, ToPrimitive, Zero};

use crate::bounds;
use crate::dist::{cdf_le_rational, ccdf_ge_rational, PopulationModel};
use crate::error::{Error, Result};
use crate::model::{
    shifted_supports, shifted_supports_finite, PrecisionSpec, Rational,
    SamplingPlan,
};

/// Which population the plan is designed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanVariant {
    Binomial,
    Finite { population: u64 },
}

/// How the certified plan was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMethod {
    /// Closed-form conservative plan; carries no condition checks.
    Explicit,
    /// Slack-search plan; every check passed and `zeta` is recorded.
    Refined,
    /// A user-supplied plan run through the checker as-is.
    Checked,
}

/// The four worst-case conditions, for infinite and finite populations.
///
/// `AbsUpper` bounds `Pr{estimate >= p + eps_a}`, `AbsLower` bounds
/// `Pr{estimate <= p - eps_a}` (both on `(0, p*]`); `RelUpper` bounds
/// `Pr{estimate >= p(1 + eps_r)}`, `RelLower` bounds
/// `Pr{estimate <= p(1 - eps_r)}` (both on `(p*, 1)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConditionId {
    AbsUpper,
    AbsLower,
    RelUpper,
    RelLower,
    FiniteAbsUpper,
    FiniteAbsLower,
    FiniteRelUpper,
    FiniteRelLower,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::AbsUpper => "abs-upper",
            ConditionId::AbsLower => "abs-lower",
            ConditionId::RelUpper => "rel-upper",
            ConditionId::RelLower => "rel-lower",
            ConditionId::FiniteAbsUpper => "finite-abs-upper",
            ConditionId::FiniteAbsLower => "finite-abs-lower",
            ConditionId::FiniteRelUpper => "finite-rel-upper",
            ConditionId::FiniteRelLower => "finite-rel-lower",
        }
    }
}

/// One evaluated candidate point of one condition.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub condition: ConditionId,
    /// Parameter point (`p`, or `M` for finite populations) as a float.
    pub point: f64,
    /// The same point as an exact numerator/denominator pair.
    pub point_num: String,
    pub point_den: String,
    pub tail: f64,
    /// `delta / 2`.
    pub bound: f64,
    pub pass: bool,
    /// Within 1e-14 of the bound; the non-strict comparison decided it.
    pub borderline: bool,
}

/// A plan together with the evidence that it meets (or fails) the
/// worst-case conditions.
#[derive(Debug, Clone)]
pub struct PlanCertificate {
    pub plan: SamplingPlan,
    pub spec: PrecisionSpec,
    pub variant: PlanVariant,
    pub method: PlanMethod,
    pub zeta: Option<f64>,
    pub checks: Vec<ConditionCheck>,
    pub passed: bool,
}

impl PlanCertificate {
    pub fn failing_checks(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Candidate-set construction switch for the condition checker.
///
/// The default groups the conditions as `(support-set u {p*}) intersected
/// with the interval`. The alternative reading binds the intersection
/// tighter — `support-set u ({p*} n interval)` — which leaves the whole
/// shifted support in play; invalid parameter points are still dropped.
#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions {
    pub wide_grouping: bool,
}

fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn half_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(delta / 2.0)
}

// ---------------------------------------------------------------------------
// explicit plans
// ---------------------------------------------------------------------------

fn check_half_side_condition(spec: &PrecisionSpec) -> Result<()> {
    let sum = spec.p_star_exact() + spec.eps_a_exact();
    if sum > Rational::new(BigInt::from(1), BigInt::from(2)) {
        return Err(Error::SideCondition(format!(
            "eps_a/eps_r + eps_a = {} > 1/2",
            rational_to_f64(&sum)
        )));
    }
    Ok(())
}

fn explicit_bounds(spec: &PrecisionSpec, delta: f64) -> Result<(f64, f64)> {
    let p_star = spec.p_star();
    let z = rational_to_f64(&(spec.p_star_exact() + spec.eps_a_exact()));
    let ln_half = half_delta(delta)?.ln();
    let n_bound = ln_half / bounds::mb(z, p_star)?;
    let gamma_bound = ln_half / bounds::mi(z, p_star)?;
    Ok((gamma_bound, n_bound))
}

/// Smallest `(gamma, n)` strictly exceeding the explicit binomial formulas.
pub fn explicit_plan_binomial(spec: &PrecisionSpec) -> Result<SamplingPlan> {
    check_half_side_condition(spec)?;
    let (gamma_bound, n_bound) = explicit_bounds(spec, spec.delta())?;
    SamplingPlan::with_integer_gamma(gamma_bound.floor() as u64 + 1, n_bound.floor() as u64 + 1)
}

/// Explicit finite-population plan; the same formulas, with `n` capped at
/// the population size when the formula exceeds it.
#[derive(Debug, Clone, Copy)]
pub struct FinitePlan {
    pub plan: SamplingPlan,
    /// True when the formula asked for more draws than the population holds;
    /// the capped plan is weaker than the guarantee.
    pub capped: bool,
}

pub fn explicit_plan_finite(spec: &PrecisionSpec, population: u64) -> Result<FinitePlan> {
    if population == 0 {
        return Err(Error::Domain("population size must be at least 1".into()));
    }
    let plan = explicit_plan_binomial(spec)?;
    if plan.n_max() > population {
        let gamma = plan.integer_gamma().unwrap().min(population);
        Ok(FinitePlan {
            plan: SamplingPlan::with_integer_gamma(gamma, population)?,
            capped: true,
        })
    } else {
        Ok(FinitePlan {
            plan,
            capped: false,
        })
    }
}

/// Bounded-variable plan: `n` as in the binomial case, `gamma` the smallest
/// integer meeting all three threshold conditions, found by an upward scan
/// from the binomial `gamma` (the middle condition references `gamma`
/// itself, so it is re-evaluated each step).
pub fn explicit_plan_bounded(spec: &PrecisionSpec) -> Result<SamplingPlan> {
    check_half_side_condition(spec)?;
    let delta = spec.delta();
    let (gamma_bound, n_bound) = explicit_bounds(spec, delta)?;
    let n = n_bound.floor() as u64 + 1;
    let ln_half = (delta / 2.0).ln();
    let p_star = spec.p_star();

    let one = Rational::one();
    let ratio_floor = ((&one - spec.eps_r_exact()) / spec.eps_r_exact())
        .floor()
        .to_integer()
        .to_u64()
        .unwrap_or(0);
    let mut gamma = (ratio_floor + 1).max(gamma_bound.floor() as u64 + 1);

    let p_star_exact = spec.p_star_exact();
    let lo_shift = &p_star_exact - spec.eps_a_exact(); // p*(1 - eps_r)
    for _ in 0..10_000_000u64 {
        let g = Rational::from_integer(BigInt::from(gamma));
        let denom = &g - &one + spec.eps_r_exact();
        let w = rational_to_f64(&(&g * &lo_shift / denom));
        let self_bound = ln_half / bounds::mi(w, p_star)?;
        if (gamma as f64) > self_bound {
            return SamplingPlan::with_integer_gamma(gamma, n);
        }
        gamma += 1;
    }
    Err(Error::SearchExhausted(
        "no gamma satisfied the self-referential threshold condition within 1e7 steps".into(),
    ))
}

// ---------------------------------------------------------------------------
// condition checker
// ---------------------------------------------------------------------------

fn push_check(
    checks: &mut Vec<ConditionCheck>,
    condition: ConditionId,
    point: &Rational,
    tail: f64,
    bound: f64,
) {
    checks.push(ConditionCheck {
        condition,
        point: rational_to_f64(point),
        point_num: point.numer().to_string(),
        point_den: point.denom().to_string(),
        tail,
        bound,
        pass: tail <= bound,
        borderline: (tail - bound).abs() <= 1e-14,
    });
}

fn binomial_tail_at(
    plan: &SamplingPlan,
    condition: ConditionId,
    p: &Rational,
    spec: &PrecisionSpec,
) -> Result<f64> {
    let model = PopulationModel::Bernoulli {
        p: rational_to_f64(p),
    };
    let one = Rational::one();
    match condition {
        ConditionId::AbsUpper => ccdf_ge_rational(plan, &model, &(p + spec.eps_a_exact())),
        ConditionId::AbsLower => cdf_le_rational(plan, &model, &(p - spec.eps_a_exact())),
        ConditionId::RelUpper => ccdf_ge_rational(plan, &model, &(p * (&one + spec.eps_r_exact()))),
        ConditionId::RelLower => cdf_le_rational(plan, &model, &(p * (&one - spec.eps_r_exact()))),
        _ => unreachable!("finite conditions use integer candidates"),
    }
}

fn dedup_sorted(mut v: Vec<Rational>) -> Vec<Rational> {
    v.sort();
    v.dedup();
    v
}

/// Candidate parameter points for one binomial condition.
fn binomial_candidates(
    shifted: &[Rational],
    spec: &PrecisionSpec,
    absolute_side: bool,
    options: CheckOptions,
) -> Vec<Rational> {
    let p_star = spec.p_star_exact();
    let one = Rational::one();
    let zero = Rational::zero();
    let in_interval = |p: &Rational| {
        if absolute_side {
            p > &zero && p <= &p_star
        } else {
            p > &p_star && p < &one
        }
    };
    let mut out: Vec<Rational> = if options.wide_grouping {
        // intersection binds tighter: the shifted support is kept whole,
        // restricted only to valid parameter points
        shifted
            .iter()
            .filter(|p| *p > &zero && *p < &one)
            .cloned()
            .collect()
    } else {
        shifted.iter().filter(|p| in_interval(p)).cloned().collect()
    };
    if absolute_side {
        // the crossover point is part of both absolute conditions
        out.push(p_star.clone());
    }
    dedup_sorted(out)
}

/// Evaluates the four binomial conditions at every candidate point.
///
/// Failure is a failing certificate, not an error.
pub fn check_plan_binomial(
    plan: &SamplingPlan,
    spec: &PrecisionSpec,
    delta: f64,
    options: CheckOptions,
) -> Result<PlanCertificate> {
    let bound = half_delta(delta)?;
    plan.require_integer_gamma()?;
    let shifted = shifted_supports(plan, spec)?;
    let mut checks = Vec::new();
    let conds = [
        (ConditionId::AbsUpper, &shifted.a_minus, true),
        (ConditionId::AbsLower, &shifted.a_plus, true),
        (ConditionId::RelUpper, &shifted.r_plus, false),
        (ConditionId::RelLower, &shifted.r_minus, false),
    ];
    for (cond, points, absolute_side) in conds {
        for p in binomial_candidates(points, spec, absolute_side, options) {
            let tail = binomial_tail_at(plan, cond, &p, spec)?;
            push_check(&mut checks, cond, &p, tail, bound);
        }
    }
    let passed = checks.iter().all(|c| c.pass);
    Ok(PlanCertificate {
        plan: *plan,
        spec: spec.clone(),
        variant: PlanVariant::Binomial,
        method: PlanMethod::Checked,
        zeta: None,
        checks,
        passed,
    })
}

fn finite_tail_at(
    plan: &SamplingPlan,
    condition: ConditionId,
    marked: u64,
    population: u64,
    spec: &PrecisionSpec,
) -> Result<f64> {
    let model = PopulationModel::FinitePopulation { population, marked };
    let p = Rational::new(BigInt::from(marked), BigInt::from(population));
    let one = Rational::one();
    match condition {
        ConditionId::FiniteAbsUpper => ccdf_ge_rational(plan, &model, &(&p + spec.eps_a_exact())),
        ConditionId::FiniteAbsLower => cdf_le_rational(plan, &model, &(&p - spec.eps_a_exact())),
        ConditionId::FiniteRelUpper => {
            ccdf_ge_rational(plan, &model, &(&p * (&one + spec.eps_r_exact())))
        }
        ConditionId::FiniteRelLower => {
            cdf_le_rational(plan, &model, &(&p * (&one - spec.eps_r_exact())))
        }
        _ => unreachable!("infinite conditions use rational candidates"),
    }
}

/// Candidate marked-unit counts for one finite condition.
fn finite_candidates(
    shifted: &[i64],
    spec: &PrecisionSpec,
    population: u64,
    absolute_side: bool,
    options: CheckOptions,
) -> Vec<u64> {
    let n_p_star = Rational::from_integer(BigInt::from(population)) * spec.p_star_exact();
    let floor_np = n_p_star.floor().to_integer().to_i64().unwrap();
    let augment = if absolute_side { floor_np } else { floor_np + 1 };
    let in_interval = |m: i64| {
        let mr = Rational::from_integer(BigInt::from(m));
        if absolute_side {
            m > 0 && mr <= n_p_star
        } else {
            mr > n_p_star && m < population as i64
        }
    };
    let mut out: Vec<i64> = if options.wide_grouping {
        shifted
            .iter()
            .copied()
            .filter(|&m| m >= 0 && m <= population as i64)
            .collect()
    } else {
        shifted.iter().copied().filter(|&m| in_interval(m)).collect()
    };
    if in_interval(augment) || options.wide_grouping && (0..=population as i64).contains(&augment) {
        out.push(augment);
    }
    out.sort_unstable();
    out.dedup();
    out.into_iter().map(|m| m as u64).collect()
}

/// Finite-population counterpart of [`check_plan_binomial`], with integer
/// candidate sets and hypergeometric tails.
pub fn check_plan_finite(
    plan: &SamplingPlan,
    spec: &PrecisionSpec,
    delta: f64,
    population: u64,
    options: CheckOptions,
) -> Result<PlanCertificate> {
    let bound = half_delta(delta)?;
    plan.require_integer_gamma()?;
    if plan.n_max() > population {
        return Err(Error::Domain(format!(
            "plan draws {} samples but the population holds {population}",
            plan.n_max()
        )));
    }
    let shifted = shifted_supports_finite(plan, spec, population)?;
    let mut checks = Vec::new();
    let conds = [
        (ConditionId::FiniteAbsUpper, &shifted.a_minus, true),
        (ConditionId::FiniteAbsLower, &shifted.a_plus, true),
        (ConditionId::FiniteRelUpper, &shifted.r_plus, false),
        (ConditionId::FiniteRelLower, &shifted.r_minus, false),
    ];
    for (cond, points, absolute_side) in conds {
        for m in finite_candidates(points, spec, population, absolute_side, options) {
            let tail = finite_tail_at(plan, cond, m, population, spec)?;
            let point = Rational::from_integer(BigInt::from(m));
            push_check(&mut checks, cond, &point, tail, bound);
        }
    }
    let passed = checks.iter().all(|c| c.pass);
    Ok(PlanCertificate {
        plan: *plan,
        spec: spec.clone(),
        variant: PlanVariant::Finite { population },
        method: PlanMethod::Checked,
        zeta: None,
        checks,
        passed,
    })
}

// ---------------------------------------------------------------------------
// refined search
// ---------------------------------------------------------------------------

/// Search window and budget for the `zeta` bisection.
#[derive(Debug, Clone, Copy)]
pub struct RefinedSearch {
    /// `(low, high)` with `0 < low <= high` and `high * delta < 1`.
    pub zeta_range: (f64, f64),
    pub max_iter: u32,
}

impl Default for RefinedSearch {
    fn default() -> Self {
        Self {
            zeta_range: (1e-4, 0.5),
            max_iter: 60,
        }
    }
}

fn plan_for_zeta(zeta: f64, spec: &PrecisionSpec) -> Result<Option<SamplingPlan>> {
    let scaled = zeta * spec.delta();
    if !(scaled > 0.0 && scaled < 1.0) {
        return Ok(None);
    }
    let p_star = spec.p_star();
    let z = rational_to_f64(&(spec.p_star_exact() + spec.eps_a_exact()));
    let ln_zd = scaled.ln();
    let n = (ln_zd / bounds::mb(z, p_star)?).floor();
    let gamma = (ln_zd / bounds::mi(z, p_star)?).floor();
    if gamma < 1.0 || n < 1.0 {
        return Ok(None);
    }
    Ok(Some(SamplingPlan::with_integer_gamma(
        gamma as u64,
        n as u64,
    )?))
}

/// Maximizes `zeta` whose floored plan passes certification, then
/// re-certifies and returns the final plan's certificate.
pub fn refined_plan(
    spec: &PrecisionSpec,
    variant: PlanVariant,
    search: RefinedSearch,
    options: CheckOptions,
) -> Result<PlanCertificate> {
    let (z_lo, z_hi) = search.zeta_range;
    if !(z_lo > 0.0 && z_lo <= z_hi) {
        return Err(Error::Domain(format!(
            "zeta range must satisfy 0 < low <= high, got ({z_lo}, {z_hi})"
        )));
    }
    let delta = spec.delta();
    let certify = |plan: &SamplingPlan| -> Result<PlanCertificate> {
        match variant {
            PlanVariant::Binomial => check_plan_binomial(plan, spec, delta, options),
            PlanVariant::Finite { population } => {
                check_plan_finite(plan, spec, delta, population, options)
            }
        }
    };
    let mut memo: HashMap<(u64, u64), bool> = HashMap::new();
    let mut passes = |zeta: f64| -> Result<(bool, Option<SamplingPlan>)> {
        let Some(plan) = plan_for_zeta(zeta, spec)? else {
            return Ok((false, None));
        };
        if let PlanVariant::Finite { population } = variant {
            if plan.n_max() > population {
                return Ok((false, Some(plan)));
            }
        }
        let key = (plan.integer_gamma().unwrap(), plan.n_max());
        if let Some(&ok) = memo.get(&key) {
            return Ok((ok, Some(plan)));
        }
        let ok = certify(&plan)?.passed;
        memo.insert(key, ok);
        Ok((ok, Some(plan)))
    };

    let (mut lo, mut hi) = (z_lo, z_hi);
    let final_zeta = if passes(hi)?.0 {
        hi
    } else {
        let (lo_ok, lo_plan) = passes(lo)?;
        if !lo_ok {
            let attempt = lo_plan
                .map(|p| format!("gamma = {}, n = {}", p.gamma(), p.n_max()))
                .unwrap_or_else(|| "no feasible plan".into());
            return Err(Error::SearchExhausted(format!(
                "no zeta in [{z_lo}, {z_hi}] certifies; best attempt at zeta = {z_lo}: {attempt}"
            )));
        }
        for _ in 0..search.max_iter {
            let mid = 0.5 * (lo + hi);
            if passes(mid)?.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    let plan = plan_for_zeta(final_zeta, spec)?.expect("final zeta yields a plan");
    let mut cert = certify(&plan)?;
    debug_assert!(cert.passed, "memoized pass must re-certify");
    cert.method = PlanMethod::Refined;
    cert.zeta = Some(final_zeta);
    Ok(cert)
}

// ---------------------------------------------------------------------------
// worst-case scan
// ---------------------------------------------------------------------------

/// Grid-vs-candidates comparison for one condition.
#[derive(Debug, Clone, Copy)]
pub struct ConditionScan {
    pub condition: ConditionId,
    pub grid_max: f64,
    pub grid_argmax: f64,
    pub candidate_max: f64,
    pub candidate_argmax: f64,
    /// `grid_max <= candidate_max + 1e-12`.
    pub dominated: bool,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub conditions: Vec<ConditionScan>,
    pub dominated: bool,
}

const SCAN_SLACK: f64 = 1e-12;

fn scan_condition(
    condition: ConditionId,
    candidates: &[Rational],
    grid: impl Iterator<Item = Rational>,
    tail: &dyn Fn(&Rational) -> Result<f64>,
) -> Result<ConditionScan> {
    let mut candidate_max = f64::NEG_INFINITY;
    let mut candidate_argmax = f64::NAN;
    for p in candidates {
        let t = tail(p)?;
        if t > candidate_max {
            candidate_max = t;
            candidate_argmax = rational_to_f64(p);
        }
    }
    let mut grid_max = f64::NEG_INFINITY;
    let mut grid_argmax = f64::NAN;
    for p in grid {
        let t = tail(&p)?;
        if t > grid_max {
            grid_max = t;
            grid_argmax = rational_to_f64(&p);
        }
    }
    // an empty interval passes vacuously
    let dominated = grid_max == f64::NEG_INFINITY || grid_max <= candidate_max + SCAN_SLACK;
    Ok(ConditionScan {
        condition,
        grid_max: grid_max.max(0.0),
        grid_argmax,
        candidate_max: candidate_max.max(0.0),
        candidate_argmax,
        dominated,
    })
}

/// Validates the support-maximum principle on a dense parameter grid: for
/// each condition the grid maximum of the tail may not exceed the maximum
/// over the candidate set (plus closure endpoints) by more than 1e-12.
pub fn worst_case_scan(
    plan: &SamplingPlan,
    spec: &PrecisionSpec,
    delta: f64,
    grid_size: u32,
) -> Result<ScanReport> {
    half_delta(delta)?;
    if grid_size < 10 {
        return Err(Error::Domain(format!(
            "grid size must be at least 10, got {grid_size}"
        )));
    }
    let shifted = shifted_supports(plan, spec)?;
    let p_star = spec.p_star_exact();
    let one = Rational::one();
    let zero = Rational::zero();
    let mut conditions = Vec::new();
    let conds = [
        (ConditionId::AbsUpper, &shifted.a_minus, true),
        (ConditionId::AbsLower, &shifted.a_plus, true),
        (ConditionId::RelUpper, &shifted.r_plus, false),
        (ConditionId::RelLower, &shifted.r_minus, false),
    ];
    for (cond, points, absolute_side) in conds {
        let mut candidates =
            binomial_candidates(points, spec, absolute_side, CheckOptions::default());
        if !absolute_side {
            // left closure endpoint of (p*, 1)
            candidates.push(p_star.clone());
        }
        let candidates = dedup_sorted(candidates);
        let in_interval = |p: &Rational| {
            if absolute_side {
                p > &zero && p <= &p_star
            } else {
                p > &p_star && p < &one
            }
        };
        let denom = BigInt::from(grid_size + 1);
        let grid = (1..=grid_size)
            .map(move |i| Rational::new(BigInt::from(i), denom.clone()))
            .filter(in_interval);
        let tail = |p: &Rational| binomial_tail_at(plan, cond, p, spec);
        conditions.push(scan_condition(cond, &candidates, grid, &tail)?);
    }
    let dominated = conditions.iter().all(|c| c.dominated);
    Ok(ScanReport {
        conditions,
        dominated,
    })
}

/// Finite-population scan: exhaustive over every integer `M` in each
/// condition's interval.
pub fn worst_case_scan_finite(
    plan: &SamplingPlan,
    spec: &PrecisionSpec,
    delta: f64,
    population: u64,
) -> Result<ScanReport> {
    half_delta(delta)?;
    if plan.n_max() > population {
        return Err(Error::Domain(format!(
            "plan draws {} samples but the population holds {population}",
            plan.n_max()
        )));
    }
    let shifted = shifted_supports_finite(plan, spec, population)?;
    let n_p_star = Rational::from_integer(BigInt::from(population)) * spec.p_star_exact();
    let floor_np = n_p_star.floor().to_integer().to_i64().unwrap().max(0) as u64;
    let mut conditions = Vec::new();
    let conds = [
        (ConditionId::FiniteAbsUpper, &shifted.a_minus, true),
        (ConditionId::FiniteAbsLower, &shifted.a_plus, true),
        (ConditionId::FiniteRelUpper, &shifted.r_plus, false),
        (ConditionId::FiniteRelLower, &shifted.r_minus, false),
    ];
    for (cond, points, absolute_side) in conds {
        let mut candidates: Vec<u64> =
            finite_candidates(points, spec, population, absolute_side, CheckOptions::default());
        // closure endpoints of the integer interval
        let (m_lo, m_hi) = if absolute_side {
            (1u64, floor_np)
        } else {
            (floor_np + 1, population.saturating_sub(1))
        };
        if m_lo <= m_hi {
            candidates.push(m_lo);
            candidates.push(m_hi);
        }
        candidates.sort_unstable();
        candidates.dedup();
        let cand_rationals: Vec<Rational> = candidates
            .iter()
            .map(|&m| Rational::from_integer(BigInt::from(m)))
            .collect();
        let grid = (m_lo..=m_hi).map(|m| Rational::from_integer(BigInt::from(m)));
        let tail = |p: &Rational| {
            let m = p.to_integer().to_u64().unwrap();
            finite_tail_at(plan, cond, m, population, spec)
        };
        conditions.push(scan_condition(cond, &cand_rationals, grid, &tail)?);
    }
    let dominated = conditions.iter().all(|c| c.dominated);
    Ok(ScanReport {
        conditions,
        dominated,
    })
}
