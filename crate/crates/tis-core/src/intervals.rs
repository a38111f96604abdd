//! Exact confidence intervals after truncated inverse sampling.
//!
//! The binomial interval generalizes Clopper-Pearson, the Poisson one
//! Garwood; the finite-population interval has integer endpoints in the
//! marked-unit count, and the bounded-mean interval inverts the `mb`/`mi`
//! exponents. Every endpoint comes from bracketing bisection against a
//! monotone tail, never from derivatives.

use crate::bounds::{mb_raw, mi_raw};
use crate::error::{Error, Result};
use crate::model::SamplingPlan;
use crate::special;

/// Two-sided interval with open endpoints; `upper` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    /// Nominal level `1 - delta`.
    pub level: f64,
    pub kind: IntervalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    RealValued,
    IntegerValued,
}

/// Closed integer interval `[m_lower, m_upper]` for the marked-unit count of
/// a finite population, with the proportion interval attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteInterval {
    pub m_lower: u64,
    pub m_upper: u64,
    pub population: u64,
    pub level: f64,
}

impl FiniteInterval {
    pub fn proportions(&self) -> ConfidenceInterval {
        ConfidenceInterval {
            lower: self.m_lower as f64 / self.population as f64,
            upper: self.m_upper as f64 / self.population as f64,
            level: self.level,
            kind: IntervalKind::IntegerValued,
        }
    }

    pub fn contains(&self, marked: u64) -> bool {
        self.m_lower <= marked && marked <= self.m_upper
    }
}

fn check_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(delta / 2.0)
}

/// Bisection for `f(x) = target` on `(lo, hi)` where `f` is monotone;
/// endpoints are never evaluated.
fn bisect(
    f: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    increasing: bool,
) -> f64 {
    for _ in 0..240 {
        if hi - lo <= abs_tol + rel_tol * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if (f(mid) < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Doubles `hi` until `f(hi)` has crossed `target`; returns the bracket end.
fn grow_bracket(f: impl Fn(f64) -> f64, target: f64, increasing: bool) -> Result<f64> {
    let mut hi = 1.0;
    for _ in 0..1100 {
        let v = f(hi);
        if (v > target) == increasing {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::SearchExhausted(
        "no finite bracket for the confidence-limit equation".into(),
    ))
}

/// Exact binomial interval from the observed `(n_stop, k)`.
///
/// Lower limit: `0` for `k = 0`, else the root of
/// `Pr{Bin(n_stop, p) >= k} = delta/2`; upper limit symmetric with the lower
/// tail, `1` for `k = n_stop`.
pub fn ci_binomial(n_stop: u64, k: u64, delta: f64) -> Result<ConfidenceInterval> {
    let half = check_delta(delta)?;
    if n_stop == 0 {
        return Err(Error::Domain("n_stop must be at least 1".into()));
    }
    if k > n_stop {
        return Err(Error::InconsistentOutcome(format!(
            "k = {k} exceeds the sample count {n_stop}"
        )));
    }
    let lower = if k == 0 {
        0.0
    } else {
        bisect(
            |p| special::binom_tail_ge(n_stop, p, k as i64),
            half,
            0.0,
            1.0,
            1e-12,
            0.0,
            true,
        )
    };
    let upper = if k == n_stop {
        1.0
    } else {
        bisect(
            |p| special::binom_tail_le(n_stop, p, k as i64),
            half,
            0.0,
            1.0,
            1e-12,
            0.0,
            false,
        )
    };
    Ok(ConfidenceInterval {
        lower,
        upper,
        level: 1.0 - delta,
        kind: IntervalKind::RealValued,
    })
}

/// Exact finite-population interval on the marked-unit count.
///
/// `m_lower` is the smallest `M` with `Pr{Hyp(N, M, n) >= k} > delta/2`,
/// `m_upper` the largest with `Pr{Hyp(N, M, n) <= k} > delta/2`; both exist
/// because the tails are monotone in `M` and reach 1 at the ends.
pub fn ci_finite(population: u64, n_stop: u64, k: u64, delta: f64) -> Result<FiniteInterval> {
    let half = check_delta(delta)?;
    if n_stop == 0 || n_stop > population {
        return Err(Error::Domain(format!(
            "n_stop must lie in 1..={population}, got {n_stop}"
        )));
    }
    if k > n_stop {
        return Err(Error::InconsistentOutcome(format!(
            "k = {k} exceeds the sample count {n_stop}"
        )));
    }
    let ge = |m: u64| special::hyper_tail_ge(population, m, n_stop, k as i64).unwrap();
    let le = |m: u64| special::hyper_tail_le(population, m, n_stop, k as i64).unwrap();

    // first M with ge(M) > half; ge is non-decreasing in M
    let (mut lo, mut hi) = (0u64, population);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ge(mid) > half {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let m_lower = lo;
    // last M with le(M) > half; le is non-increasing in M
    let (mut lo, mut hi) = (0u64, population);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if le(mid) > half {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let m_upper = lo;

    // the monotonicity the search relies on, re-verified at the neighbors
    debug_assert!(ge(m_lower) > half && (m_lower == 0 || ge(m_lower - 1) <= half));
    debug_assert!(le(m_upper) > half && (m_upper == population || le(m_upper + 1) <= half));

    Ok(FiniteInterval {
        m_lower,
        m_upper,
        population,
        level: 1.0 - delta,
    })
}

/// Exact Poisson interval from the stop time and raw sample sum.
///
/// Case selection follows the estimate `min(k, gamma)/n_stop` relative to
/// `gamma/n_max`; the upper limit is infinite after a single draw.
pub fn ci_poisson(
    plan: &SamplingPlan,
    n_stop: u64,
    k: u64,
    delta: f64,
) -> Result<ConfidenceInterval> {
    let half = check_delta(delta)?;
    let gamma = plan.require_integer_gamma()?;
    let n = plan.n_max();
    if n_stop == 0 || n_stop > n {
        return Err(Error::InconsistentOutcome(format!(
            "stop time {n_stop} outside 1..={n}"
        )));
    }
    if n_stop < n && k < gamma {
        return Err(Error::InconsistentOutcome(format!(
            "stopped early at {n_stop} with sum {k} below gamma {gamma}"
        )));
    }
    // lambda_hat >= gamma/n exactly when min(k, gamma) * n >= gamma * n_stop
    let high_estimate = k.min(gamma) as u128 * n as u128 >= gamma as u128 * n_stop as u128;

    let lower = if k == 0 {
        0.0
    } else if high_estimate {
        let f = |lam: f64| special::pois_tail_ge(n_stop as f64 * lam, gamma as i64);
        let hi = grow_bracket(f, half, true)?;
        bisect(f, half, 0.0, hi, 0.0, 1e-10, true)
    } else {
        let f = |lam: f64| special::pois_tail_ge(n as f64 * lam, k as i64);
        let hi = grow_bracket(f, half, true)?;
        bisect(f, half, 0.0, hi, 0.0, 1e-10, true)
    };

    let upper = if n_stop == 1 {
        f64::INFINITY
    } else if high_estimate {
        let f = |lam: f64| special::pois_tail_le((n_stop - 1) as f64 * lam, gamma as i64 - 1);
        let hi = grow_bracket(f, half, false)?;
        bisect(f, half, 0.0, hi, 0.0, 1e-10, false)
    } else {
        let f = |lam: f64| special::pois_tail_le(n as f64 * lam, k as i64);
        let hi = grow_bracket(f, half, false)?;
        bisect(f, half, 0.0, hi, 0.0, 1e-10, false)
    };

    Ok(ConfidenceInterval {
        lower,
        upper,
        level: 1.0 - delta,
        kind: IntervalKind::RealValued,
    })
}

/// Bounded-mean interval by inverting the `mb`/`mi` exponents at
/// `ln(delta/2)/n` and `ln(delta/2)/gamma`.
pub fn ci_bounded(
    plan: &SamplingPlan,
    n_stop: u64,
    k_sum: f64,
    delta: f64,
) -> Result<ConfidenceInterval> {
    let half = check_delta(delta)?;
    let gamma = plan.gamma();
    let n = plan.n_max();
    if n_stop == 0 || n_stop > n {
        return Err(Error::InconsistentOutcome(format!(
            "stop time {n_stop} outside 1..={n}"
        )));
    }
    if !(k_sum >= 0.0) || k_sum > n_stop as f64 {
        return Err(Error::InconsistentOutcome(format!(
            "sum {k_sum} impossible for {n_stop} samples bounded by 1"
        )));
    }
    if n_stop < n && k_sum < gamma {
        return Err(Error::InconsistentOutcome(format!(
            "stopped early at {n_stop} with sum {k_sum} below gamma {gamma}"
        )));
    }
    let mu_hat = k_sum.min(gamma) / n_stop as f64;
    let target_n = half.ln() / n as f64;
    let target_g = half.ln() / gamma;
    let gamma_over_n = gamma / n as f64;

    let lower = if mu_hat == 0.0 {
        0.0
    } else if mu_hat < gamma_over_n {
        bisect(|mu| mb_raw(mu_hat, mu), target_n, 0.0, mu_hat, 1e-12, 0.0, true)
    } else {
        bisect(|mu| mi_raw(mu_hat, mu), target_g, 0.0, mu_hat, 1e-12, 0.0, true)
    };

    let upper = if mu_hat >= gamma / (gamma + 1.0) {
        1.0
    } else if mu_hat < gamma_over_n {
        bisect(|mu| mb_raw(mu_hat, mu), target_n, mu_hat, 1.0, 1e-12, 0.0, false)
    } else {
        let w = mu_hat * gamma / (gamma - mu_hat);
        bisect(|mu| mi_raw(w, mu), target_g, w, 1.0, 1e-12, 0.0, false)
    };

    Ok(ConfidenceInterval {
        lower,
        upper,
        level: 1.0 - delta,
        kind: IntervalKind::RealValued,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_abs(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "actual {actual} vs expected {expected}"
        );
    }

    fn plan(gamma: u64, n: u64) -> SamplingPlan {
        SamplingPlan::with_integer_gamma(gamma, n).unwrap()
    }

    #[test]
    fn binomial_corners() {
        let ci = ci_binomial(10, 0, 0.05).unwrap();
        assert_eq!(ci.lower, 0.0);
        // closed form: 1 - 0.025^(1/10)
        assert_abs(ci.upper, 0.3084971078187608200681, 1e-9);
        assert_abs(ci.level, 0.95, 1e-15);

        let ci = ci_binomial(10, 10, 0.05).unwrap();
        assert_eq!(ci.upper, 1.0);
        assert_abs(ci.lower, 1.0 - 0.3084971078187608200681, 1e-9);
    }

    #[test]
    fn binomial_interior_reference() {
        let ci = ci_binomial(20, 7, 0.05).unwrap();
        assert_abs(ci.lower, 0.15390920478454116, 1e-9);
        assert_abs(ci.upper, 0.592188534532828118, 1e-9);
        assert!(ci.lower < 7.0 / 20.0 && 7.0 / 20.0 < ci.upper);
    }

    #[test]
    fn binomial_validation() {
        assert!(ci_binomial(0, 0, 0.05).is_err());
        assert!(ci_binomial(10, 11, 0.05).is_err());
        assert!(ci_binomial(10, 5, 0.0).is_err());
        assert!(ci_binomial(10, 5, 1.0).is_err());
    }

    #[test]
    fn binomial_residuals_and_monotonicity() {
        let n = 23;
        let mut prev = (0.0, 0.0);
        for k in 0..=n {
            let ci = ci_binomial(n, k, 0.05).unwrap();
            if k > 0 {
                let r = special::binom_tail_ge(n, ci.lower, k as i64);
                assert_abs(r, 0.025, 1e-9);
                assert!(ci.lower >= prev.0 - 1e-12);
            }
            if k < n {
                let r = special::binom_tail_le(n, ci.upper, k as i64);
                assert_abs(r, 0.025, 1e-9);
                assert!(ci.upper >= prev.1 - 1e-12);
            }
            prev = (ci.lower, ci.upper);
        }
    }

    #[test]
    fn finite_census_corners() {
        let ci = ci_finite(12, 12, 0, 0.1).unwrap();
        assert_eq!(ci.m_lower, 0);
        assert_eq!(ci.m_upper, 0);
        let ci = ci_finite(12, 12, 12, 0.1).unwrap();
        assert_eq!((ci.m_lower, ci.m_upper), (12, 12));
    }

    #[test]
    fn finite_reference_and_exhaustive_agreement() {
        // frozen from an exact rational exhaustive M loop
        let ci = ci_finite(10, 4, 2, 0.1).unwrap();
        assert_eq!((ci.m_lower, ci.m_upper), (2, 8));
        let prop = ci.proportions();
        assert_abs(prop.lower, 0.2, 1e-15);
        assert_abs(prop.upper, 0.8, 1e-15);

        // binary search must agree with a plain scan
        for (population, n, k, delta) in
            [(17u64, 9u64, 4u64, 0.05), (25, 10, 0, 0.1), (9, 3, 3, 0.2)]
        {
            let ci = ci_finite(population, n, k, delta).unwrap();
            let half = delta / 2.0;
            let ml = (0..=population)
                .find(|&m| special::hyper_tail_ge(population, m, n, k as i64).unwrap() > half)
                .unwrap();
            let mu = (0..=population)
                .rev()
                .find(|&m| special::hyper_tail_le(population, m, n, k as i64).unwrap() > half)
                .unwrap();
            assert_eq!((ci.m_lower, ci.m_upper), (ml, mu));
        }
    }

    #[test]
    fn poisson_corners() {
        // estimate zero pins the lower limit at zero
        let ci = ci_poisson(&plan(3, 2), 2, 0, 0.05).unwrap();
        assert_eq!(ci.lower, 0.0);
        // closed form: exp(-2 lambda) = 0.025
        assert_abs(ci.upper, 1.844439727056968123671, 1e-9);

        // a single draw leaves the upper limit unbounded
        let ci = ci_poisson(&plan(1, 1), 1, 5, 0.05).unwrap();
        assert!(ci.upper.is_infinite());
        assert!(ci.lower > 0.0);
    }

    #[test]
    fn poisson_reference_values() {
        let ci = ci_poisson(&plan(3, 10), 4, 3, 0.05).unwrap();
        assert_abs(ci.lower, 0.154668030723900322, 1e-8);
        assert_abs(ci.upper, 2.40822922257465361, 1e-7);

        let ci = ci_poisson(&plan(5, 8), 8, 2, 0.1).unwrap();
        assert_abs(ci.lower, 0.0444201888373327565, 1e-9);
        assert_abs(ci.upper, 0.786974202733998718, 1e-8);
    }

    #[test]
    fn poisson_case_boundary_agreement() {
        // at (n_stop = n, k = gamma) the high-estimate lower equation and the
        // truncated-sum lower equation coincide
        let p = plan(4, 12);
        let ci_a = ci_poisson(&p, 12, 4, 0.05).unwrap();
        let f = |lam: f64| special::pois_tail_ge(12.0 * lam, 4);
        let hi = grow_bracket(f, 0.025, true).unwrap();
        let direct = bisect(f, 0.025, 0.0, hi, 0.0, 1e-10, true);
        assert_abs(ci_a.lower, direct, 1e-8);
    }

    #[test]
    fn poisson_validation() {
        // early stop with k below gamma is impossible
        assert!(ci_poisson(&plan(3, 10), 4, 2, 0.05).is_err());
        assert!(ci_poisson(&plan(3, 10), 0, 3, 0.05).is_err());
        assert!(ci_poisson(&plan(3, 10), 11, 3, 0.05).is_err());
        // non-integer gamma is rejected for the Poisson variant
        let p = SamplingPlan::new(2.5, 10).unwrap();
        assert!(ci_poisson(&p, 10, 1, 0.05).is_err());
    }

    #[test]
    fn poisson_residuals() {
        for (pl, n_stop, k) in [
            (plan(3, 10), 4u64, 3u64),
            (plan(3, 10), 10, 1),
            (plan(2, 6), 6, 2),
            (plan(7, 30), 22, 9),
        ] {
            let ci = ci_poisson(&pl, n_stop, k, 0.05).unwrap();
            let gamma = pl.integer_gamma().unwrap();
            let high = k.min(gamma) * pl.n_max() >= gamma * n_stop;
            if ci.lower > 0.0 {
                let r = if high {
                    special::pois_tail_ge(n_stop as f64 * ci.lower, gamma as i64)
                } else {
                    special::pois_tail_ge(pl.n_max() as f64 * ci.lower, k as i64)
                };
                assert_abs(r, 0.025, 1e-9);
            }
            if ci.upper.is_finite() {
                let r = if high {
                    special::pois_tail_le((n_stop - 1) as f64 * ci.upper, gamma as i64 - 1)
                } else {
                    special::pois_tail_le(pl.n_max() as f64 * ci.upper, k as i64)
                };
                assert_abs(r, 0.025, 1e-9);
            }
        }
    }

    #[test]
    fn bounded_corners() {
        let p = SamplingPlan::new(10.0, 100).unwrap();
        let ci = ci_bounded(&p, 100, 0.0, 0.05).unwrap();
        assert_eq!(ci.lower, 0.0);

        // estimate at or above gamma/(gamma+1) pins the upper limit at 1
        let p1 = SamplingPlan::new(2.0, 2).unwrap();
        let ci = ci_bounded(&p1, 2, 2.0, 0.05).unwrap();
        assert_eq!(ci.upper, 1.0);
    }

    #[test]
    fn bounded_reference_values() {
        // truncated regime: both limits are roots of mb(0.2, mu) = ln(0.025)/100
        let p = SamplingPlan::new(30.0, 100).unwrap();
        let ci = ci_bounded(&p, 100, 20.0, 0.05).unwrap();
        assert_abs(ci.lower, 0.1072358386760979099968, 1e-9);
        assert_abs(ci.upper, 0.3215772374572441467446, 1e-9);

        // threshold regime: mi equations at ln(0.025)/gamma
        let p = SamplingPlan::new(10.0, 100).unwrap();
        let ci = ci_bounded(&p, 50, 10.0, 0.05).unwrap();
        assert_abs(ci.lower, 0.07859136526170505170852, 1e-9);
        assert_abs(ci.upper, 0.3844387158430566734256, 1e-9);
    }

    #[test]
    fn bounded_residuals() {
        let p = SamplingPlan::new(30.0, 100).unwrap();
        let ci = ci_bounded(&p, 100, 20.0, 0.05).unwrap();
        let target = (0.025f64).ln() / 100.0;
        assert_abs(mb_raw(0.2, ci.lower), target, 1e-9);
        assert_abs(mb_raw(0.2, ci.upper), target, 1e-9);
    }

    #[test]
    fn bounded_validation() {
        let p = SamplingPlan::new(10.0, 100).unwrap();
        // sums above the sample count are impossible for [0,1] values
        assert!(ci_bounded(&p, 50, 51.0, 0.05).is_err());
        assert!(ci_bounded(&p, 30, 5.0, 0.05).is_err());
        assert!(ci_bounded(&p, 0, 0.0, 0.05).is_err());
    }

    #[test]
    fn interval_brackets_the_estimate() {
        // lower <= estimate <= upper across a spread of outcomes
        for (n, k) in [(10u64, 3u64), (40, 0), (40, 40), (7, 7)] {
            let ci = ci_binomial(n, k, 0.1).unwrap();
            let est = k as f64 / n as f64;
            assert!(ci.lower <= est + 1e-12 && est <= ci.upper + 1e-12);
        }
        let p = SamplingPlan::new(10.0, 100).unwrap();
        for (n_stop, k) in [(100u64, 20.0f64), (50, 10.0), (100, 3.5)] {
            let ci = ci_bounded(&p, n_stop, k, 0.1).unwrap();
            let est = k.min(10.0) / n_stop as f64;
            assert!(ci.lower <= est && est <= ci.upper);
        }
    }
}
