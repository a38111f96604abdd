//! The truncated inverse sampling scheme: plans, precision targets, outcomes,
//! and the finite support of the estimator.
//!
//! Sampling continues until the running sum reaches the threshold `gamma` or
//! the sample count reaches `n_max`, whichever happens first. The estimator
//! is `min(sum, gamma) / stop_time`.

use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{BigRational, One, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Exact rational type used for support points and precision margins.
pub type Rational = BigRational;

pub(crate) fn big_ratio(r: Ratio<u64>) -> Rational {
    Rational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Parses a decimal string (optionally signed, optional fraction and
/// exponent) into an exact rational, e.g. `"0.05"` -> `1/20`.
pub(crate) fn rational_from_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().ok()?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits_joined = format!("{int_part}{frac_part}");
    let numer: BigInt = digits_joined.parse().ok()?;
    let scale = frac_part.len() as i64 - exp10;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer * sign);
    if scale > 0 {
        value /= Rational::from_integer(num::pow::pow(ten, scale as usize));
    } else if scale < 0 {
        value *= Rational::from_integer(num::pow::pow(ten, (-scale) as usize));
    }
    Some(value)
}

/// Interprets an `f64` as the shortest decimal that round-trips to it, so
/// `0.1` means exactly `1/10` rather than the binary approximation.
pub(crate) fn rational_from_f64_decimal(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    rational_from_decimal(&format!("{x}"))
}

/// Stopping-rule parameters: threshold `gamma` and maximum sample size.
///
/// `gamma` may be any positive real for bounded-variable sampling but must be
/// a positive integer for the Bernoulli, finite-population, and Poisson
/// variants. `gamma > n_max` is permitted; for 0/1-valued samples it
/// degenerates to fixed-size sampling and is flagged by
/// [`SamplingPlan::is_degenerate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    gamma: f64,
    n_max: u64,
}

impl SamplingPlan {
    pub fn new(gamma: f64, n_max: u64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "threshold gamma must be positive and finite, got {gamma}"
            )));
        }
        if n_max == 0 {
            return Err(Error::Domain("maximum sample size must be at least 1".into()));
        }
        Ok(Self { gamma, n_max })
    }

    pub fn with_integer_gamma(gamma: u64, n_max: u64) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::Domain("integer gamma must be at least 1".into()));
        }
        Self::new(gamma as f64, n_max)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// `Some(gamma)` when the threshold is a positive integer.
    pub fn integer_gamma(&self) -> Option<u64> {
        if self.gamma.fract() == 0.0 && self.gamma >= 1.0 && self.gamma <= 2f64.powi(53) {
            Some(self.gamma as u64)
        } else {
            None
        }
    }

    pub(crate) fn require_integer_gamma(&self) -> Result<u64> {
        self.integer_gamma().ok_or_else(|| {
            Error::Domain(format!(
                "this variant requires an integer threshold, got gamma = {}",
                self.gamma
            ))
        })
    }

    /// True when the threshold can never be reached before truncation for
    /// 0/1-valued samples (`gamma > n_max`).
    pub fn is_degenerate(&self) -> bool {
        self.gamma > self.n_max as f64
    }
}

/// Precision/confidence targets `(eps_a, eps_r, delta)`.
///
/// The goal event is `|estimate - theta| < eps_a` or
/// `|estimate - theta| < eps_r * theta`, required to hold with probability
/// above `1 - delta`. Margins are held as exact rationals; plain-`f64`
/// constructors interpret their arguments as shortest round-trip decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionSpec {
    eps_a: Rational,
    eps_r: Rational,
    delta: Rational,
}

impl PrecisionSpec {
    pub fn new(eps_a: f64, eps_r: f64, delta: f64) -> Result<Self> {
        let ea = rational_from_f64_decimal(eps_a)
            .ok_or_else(|| Error::Domain(format!("eps_a must be finite, got {eps_a}")))?;
        let er = rational_from_f64_decimal(eps_r)
            .ok_or_else(|| Error::Domain(format!("eps_r must be finite, got {eps_r}")))?;
        let d = rational_from_f64_decimal(delta)
            .ok_or_else(|| Error::Domain(format!("delta must be finite, got {delta}")))?;
        Self::from_rationals(ea, er, d)
    }

    pub fn from_decimals(eps_a: &str, eps_r: &str, delta: &str) -> Result<Self> {
        let parse = |s: &str, name: &str| {
            rational_from_decimal(s)
                .ok_or_else(|| Error::Domain(format!("{name} is not a decimal number: {s:?}")))
        };
        Self::from_rationals(
            parse(eps_a, "eps_a")?,
            parse(eps_r, "eps_r")?,
            parse(delta, "delta")?,
        )
    }

    pub fn from_rationals(eps_a: Rational, eps_r: Rational, delta: Rational) -> Result<Self> {
        let one = Rational::one();
        if !(eps_a.is_positive() && eps_a < eps_r && eps_r < one) {
            return Err(Error::Domain(
                "margins must satisfy 0 < eps_a < eps_r < 1".into(),
            ));
        }
        if !(delta.is_positive() && delta < one) {
            return Err(Error::Domain("risk delta must lie in (0, 1)".into()));
        }
        Ok(Self {
            eps_a,
            eps_r,
            delta,
        })
    }

    pub fn eps_a(&self) -> f64 {
        self.eps_a.to_f64().unwrap()
    }

    pub fn eps_r(&self) -> f64 {
        self.eps_r.to_f64().unwrap()
    }

    pub fn delta(&self) -> f64 {
        self.delta.to_f64().unwrap()
    }

    pub fn eps_a_exact(&self) -> &Rational {
        &self.eps_a
    }

    pub fn eps_r_exact(&self) -> &Rational {
        &self.eps_r
    }

    pub fn delta_exact(&self) -> &Rational {
        &self.delta
    }

    /// Crossover parameter `p* = eps_a / eps_r` where the absolute and
    /// relative margins coincide.
    pub fn p_star_exact(&self) -> Rational {
        &self.eps_a / &self.eps_r
    }

    pub fn p_star(&self) -> f64 {
        self.p_star_exact().to_f64().unwrap()
    }
}

/// Observed result of running the stopping rule: stop time, raw sample sum,
/// and the clipped estimate `min(k, gamma) / n`.
///
/// `k_sum` is the untruncated sum; clipping happens only in `estimate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    n_stop: u64,
    k_sum: f64,
    estimate: f64,
}

impl Outcome {
    pub fn new(plan: &SamplingPlan, n_stop: u64, k_sum: f64) -> Result<Self> {
        if n_stop == 0 || n_stop > plan.n_max() {
            return Err(Error::InconsistentOutcome(format!(
                "stop time {n_stop} outside 1..={}",
                plan.n_max()
            )));
        }
        if !(k_sum >= 0.0) {
            return Err(Error::InconsistentOutcome(format!(
                "sample sum must be non-negative, got {k_sum}"
            )));
        }
        if n_stop < plan.n_max() && k_sum < plan.gamma() {
            return Err(Error::InconsistentOutcome(format!(
                "stopped at {n_stop} < {} with sum {k_sum} below gamma {}",
                plan.n_max(),
                plan.gamma()
            )));
        }
        Ok(Self {
            n_stop,
            k_sum,
            estimate: k_sum.min(plan.gamma()) / n_stop as f64,
        })
    }

    pub fn n_stop(&self) -> u64 {
        self.n_stop
    }

    pub fn k_sum(&self) -> f64 {
        self.k_sum
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }
}

/// Applies the stopping rule to a concrete sample prefix.
///
/// The sequence must contain at least `n_max` values so the truncation branch
/// is always decidable.
pub fn run_stop_rule(samples: &[f64], plan: &SamplingPlan) -> Result<Outcome> {
    let n_max = plan.n_max();
    if (samples.len() as u64) < n_max {
        return Err(Error::InsufficientSamples {
            needed: n_max,
            got: samples.len(),
        });
    }
    let mut sum = 0.0;
    let mut n_stop = n_max;
    for (i, &x) in samples[..n_max as usize].iter().enumerate() {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!(
                "samples must be non-negative, got {x} at index {i}"
            )));
        }
        sum += x;
        if sum >= plan.gamma() {
            n_stop = i as u64 + 1;
            break;
        }
    }
    Outcome::new(plan, n_stop, sum)
}

/// Strictly increasing, deduplicated set of exact rational support points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    values: Vec<Ratio<u64>>,
}

impl SupportSet {
    fn from_set(set: BTreeSet<Ratio<u64>>) -> Self {
        Self {
            values: set.into_iter().collect(),
        }
    }

    pub fn values(&self) -> &[Ratio<u64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Ratio<u64>> {
        self.values.iter()
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
            .collect()
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.values.iter().map(|&r| big_ratio(r)).collect()
    }
}

/// The support of the estimator: `{j/n : j = 0..gamma} u {gamma/m : m =
/// gamma..n-1}`, or `{j/n : j = 0..n}` in the degenerate `gamma > n` case.
pub fn estimator_support(plan: &SamplingPlan) -> Result<SupportSet> {
    let gamma = plan.require_integer_gamma()?;
    let n = plan.n_max();
    let mut set = BTreeSet::new();
    if gamma <= n {
        for j in 0..=gamma {
            set.insert(Ratio::new(j, n));
        }
        for m in gamma..n {
            set.insert(Ratio::new(gamma, m));
        }
    } else {
        for j in 0..=n {
            set.insert(Ratio::new(j, n));
        }
    }
    Ok(SupportSet::from_set(set))
}

/// The four shifted supports of Theorem-5-style conditions, before interval
/// intersection (values may fall outside `[0, 1]`).
#[derive(Debug, Clone)]
pub struct ShiftedSupports {
    /// `{v - eps_a}`
    pub a_minus: Vec<Rational>,
    /// `{v + eps_a}`
    pub a_plus: Vec<Rational>,
    /// `{v / (1 + eps_r)}`
    pub r_plus: Vec<Rational>,
    /// `{v / (1 - eps_r)}`
    pub r_minus: Vec<Rational>,
}

pub fn shifted_supports(plan: &SamplingPlan, spec: &PrecisionSpec) -> Result<ShiftedSupports> {
    let support = estimator_support(plan)?.to_rationals();
    let one = Rational::one();
    let shift = |f: &dyn Fn(&Rational) -> Rational| -> Vec<Rational> {
        let set: BTreeSet<Rational> = support.iter().map(f).collect();
        set.into_iter().collect()
    };
    Ok(ShiftedSupports {
        a_minus: shift(&|v| v - spec.eps_a_exact()),
        a_plus: shift(&|v| v + spec.eps_a_exact()),
        r_plus: shift(&|v| v / (&one + spec.eps_r_exact())),
        r_minus: shift(&|v| v / (&one - spec.eps_r_exact())),
    })
}

/// Integer-transformed shifted supports for the finite-population conditions:
/// `floor(N(v - eps_a))`, `ceil(N(v + eps_a))`, `floor(Nv / (1 + eps_r))`,
/// `ceil(Nv / (1 - eps_r))`.
#[derive(Debug, Clone)]
pub struct ShiftedSupportsFinite {
    pub a_minus: Vec<i64>,
    pub a_plus: Vec<i64>,
    pub r_plus: Vec<i64>,
    pub r_minus: Vec<i64>,
}

pub fn shifted_supports_finite(
    plan: &SamplingPlan,
    spec: &PrecisionSpec,
    population: u64,
) -> Result<ShiftedSupportsFinite> {
    if population == 0 {
        return Err(Error::Domain("population size must be at least 1".into()));
    }
    let support = estimator_support(plan)?.to_rationals();
    let n_big = Rational::from_integer(BigInt::from(population));
    let one = Rational::one();
    let collect = |f: &dyn Fn(&Rational) -> Rational, ceil: bool| -> Vec<i64> {
        let set: BTreeSet<i64> = support
            .iter()
            .map(|v| {
                let scaled = &n_big * f(v);
                let int = if ceil { scaled.ceil() } else { scaled.floor() };
                int.to_integer().to_i64().expect("support point fits i64")
            })
            .collect();
        set.into_iter().collect()
    };
    Ok(ShiftedSupportsFinite {
        a_minus: collect(&|v| v - spec.eps_a_exact(), false),
        a_plus: collect(&|v| v + spec.eps_a_exact(), true),
        r_plus: collect(&|v| v / (&one + spec.eps_r_exact()), false),
        r_minus: collect(&|v| v / (&one - spec.eps_r_exact()), true),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn plan(gamma: u64, n: u64) -> SamplingPlan {
        SamplingPlan::with_integer_gamma(gamma, n).unwrap()
    }

    fn spec_dec(ea: &str, er: &str, d: &str) -> PrecisionSpec {
        PrecisionSpec::from_decimals(ea, er, d).unwrap()
    }

    #[test]
    fn decimal_parsing() {
        let r = rational_from_decimal("0.05").unwrap();
        assert_eq!(r, Rational::new(BigInt::from(1), BigInt::from(20)));
        assert_eq!(
            rational_from_decimal("2.5e-3").unwrap(),
            Rational::new(BigInt::from(1), BigInt::from(400))
        );
        assert_eq!(
            rational_from_decimal("-3").unwrap(),
            Rational::from_integer(BigInt::from(-3))
        );
        assert!(rational_from_decimal("abc").is_none());
        assert!(rational_from_decimal("").is_none());
        // shortest round-trip decimal of the f64 0.1 is "0.1"
        assert_eq!(
            rational_from_f64_decimal(0.1).unwrap(),
            Rational::new(BigInt::from(1), BigInt::from(10))
        );
    }

    #[test]
    fn plan_validation() {
        assert!(SamplingPlan::new(0.0, 5).is_err());
        assert!(SamplingPlan::new(-1.0, 5).is_err());
        assert!(SamplingPlan::new(2.0, 0).is_err());
        assert!(SamplingPlan::with_integer_gamma(0, 5).is_err());
        let p = SamplingPlan::new(2.5, 5).unwrap();
        assert_eq!(p.integer_gamma(), None);
        assert_eq!(plan(3, 5).integer_gamma(), Some(3));
        assert!(plan(6, 5).is_degenerate());
        assert!(!plan(5, 5).is_degenerate());
    }

    #[test]
    fn precision_spec_validation() {
        assert!(PrecisionSpec::new(0.05, 0.2, 0.05).is_ok());
        // eps_r must be strictly below 1
        assert!(PrecisionSpec::new(0.5, 1.0, 0.05).is_err());
        // eps_a must be strictly below eps_r
        assert!(PrecisionSpec::new(0.2, 0.2, 0.05).is_err());
        assert!(PrecisionSpec::new(0.0, 0.2, 0.05).is_err());
        assert!(PrecisionSpec::new(0.05, 0.2, 0.0).is_err());
        assert!(PrecisionSpec::new(0.05, 0.2, 1.0).is_err());
        let s = spec_dec("0.05", "0.2", "0.05");
        assert_eq!(s.p_star(), 0.25);
    }

    #[test]
    fn stop_rule_examples() {
        let p = plan(2, 5);
        let out = run_stop_rule(&[1.0, 1.0, 0.0, 0.0, 0.0], &p).unwrap();
        assert_eq!((out.n_stop(), out.k_sum(), out.estimate()), (2, 2.0, 1.0));

        let out = run_stop_rule(&[0.0; 5], &p).unwrap();
        assert_eq!((out.n_stop(), out.k_sum(), out.estimate()), (5, 0.0, 0.0));

        let out = run_stop_rule(&[0.0, 1.0, 0.0, 1.0, 1.0], &p).unwrap();
        assert_eq!((out.n_stop(), out.k_sum(), out.estimate()), (4, 2.0, 0.5));

        assert!(matches!(
            run_stop_rule(&[0.0; 3], &p),
            Err(Error::InsufficientSamples { needed: 5, got: 3 })
        ));
        assert!(run_stop_rule(&[0.0, -1.0, 0.0, 0.0, 0.0], &p).is_err());
    }

    #[test]
    fn stop_rule_matches_naive_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let n = rng.gen_range(1..=12u64);
            let gamma = rng.gen_range(1..=6u64);
            let p = plan(gamma, n);
            let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0f64)).collect();

            // naive reference loop
            let mut sum = 0.0;
            let mut stop = n;
            for (i, &x) in samples.iter().enumerate() {
                sum += x;
                if sum >= gamma as f64 {
                    stop = i as u64 + 1;
                    break;
                }
            }
            let ksum: f64 = samples[..stop as usize].iter().sum();

            let out = run_stop_rule(&samples, &p).unwrap();
            assert_eq!(out.n_stop(), stop);
            assert!((out.k_sum() - ksum).abs() < 1e-12);
            // stopping-rule dichotomy
            assert!(out.n_stop() == n || out.k_sum() >= gamma as f64);
        }
    }

    #[test]
    fn support_examples() {
        let s = estimator_support(&plan(2, 4)).unwrap();
        let want = [(0u64, 1u64), (1, 4), (1, 2), (2, 3), (1, 1)];
        assert_eq!(
            s.values(),
            want.map(|(a, b)| Ratio::new(a, b)).as_slice()
        );

        let s = estimator_support(&plan(1, 1)).unwrap();
        assert_eq!(s.values(), [Ratio::new(0, 1), Ratio::new(1, 1)].as_slice());

        let s = estimator_support(&plan(3, 6)).unwrap();
        let want = [(0u64, 1u64), (1, 6), (1, 3), (1, 2), (3, 5), (3, 4), (1, 1)];
        assert_eq!(
            s.values(),
            want.map(|(a, b)| Ratio::new(a, b)).as_slice()
        );

        assert!(estimator_support(&SamplingPlan::new(2.5, 4).unwrap()).is_err());
    }

    #[test]
    fn support_matches_exhaustive_paths() {
        // every length-n 0/1 path, exact stop rule, collected estimates
        for (gamma, n) in [(1u64, 4u64), (2, 6), (3, 9), (2, 16)] {
            let p = plan(gamma, n);
            let mut seen = BTreeSet::new();
            for mask in 0u32..(1 << n) {
                let mut sum = 0u64;
                let mut stop = n;
                for i in 0..n {
                    sum += (mask >> i) as u64 & 1;
                    if sum >= gamma {
                        stop = i + 1;
                        break;
                    }
                }
                let k: u64 = (0..stop).map(|i| (mask >> i) as u64 & 1).sum();
                seen.insert(Ratio::new(k.min(gamma), stop));
            }
            let s = estimator_support(&p).unwrap();
            assert_eq!(s.values(), seen.into_iter().collect::<Vec<_>>().as_slice());
            assert!(s.len() as u64 <= n + 1);
        }
    }

    #[test]
    fn shifted_support_example() {
        let p = plan(2, 4);
        let spec = spec_dec("0.1", "0.3", "0.1");
        let sh = shifted_supports(&p, &spec).unwrap();
        let tenth = Rational::new(BigInt::from(1), BigInt::from(10));
        let want: Vec<Rational> = [
            Rational::zero() - &tenth,
            Rational::new(BigInt::from(1), BigInt::from(4)) - &tenth,
            Rational::new(BigInt::from(1), BigInt::from(2)) - &tenth,
            Rational::new(BigInt::from(2), BigInt::from(3)) - &tenth,
            Rational::one() - &tenth,
        ]
        .to_vec();
        assert_eq!(sh.a_minus, want);

        let p11 = plan(1, 1);
        let spec2 = spec_dec("0.2", "0.5", "0.1");
        let sh2 = shifted_supports(&p11, &spec2).unwrap();
        let fifth = Rational::new(BigInt::from(1), BigInt::from(5));
        assert_eq!(
            sh2.a_plus,
            vec![fifth.clone(), Rational::one() + &fifth]
        );
    }

    #[test]
    fn shifted_support_finite_example() {
        let p = plan(2, 4);
        let spec = spec_dec("0.1", "0.3", "0.1");
        let sh = shifted_supports_finite(&p, &spec, 10).unwrap();
        assert_eq!(sh.a_minus, vec![-1, 1, 4, 5, 9]);

        let sh1 = shifted_supports_finite(&p, &spec, 1).unwrap();
        for set in [&sh1.a_minus, &sh1.a_plus, &sh1.r_plus, &sh1.r_minus] {
            assert!(set.iter().all(|&m| (-1..=2).contains(&m)), "{set:?}");
        }
    }

    #[test]
    fn outcome_validation() {
        let p = plan(2, 5);
        assert!(Outcome::new(&p, 0, 0.0).is_err());
        assert!(Outcome::new(&p, 6, 2.0).is_err());
        // early stop with sum below gamma is impossible
        assert!(Outcome::new(&p, 3, 1.0).is_err());
        let ok = Outcome::new(&p, 3, 2.0).unwrap();
        assert!((ok.estimate() - 2.0 / 3.0).abs() < 1e-15);
        // raw sum above gamma clips in the estimate only
        let clipped = Outcome::new(&p, 5, 4.0).unwrap();
        assert_eq!(clipped.k_sum(), 4.0);
        assert_eq!(clipped.estimate(), 2.0 / 5.0);
    }
}
