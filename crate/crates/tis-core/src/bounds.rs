//! Chernoff-Hoeffding bound exponents for fixed-size and inverse sampling.
//!
//! `mb(z, mu) = z ln(mu/z) + (1-z) ln((1-mu)/(1-z))` is the large-deviation
//! exponent for a sample mean of `[0,1]`-valued variables; `mi(z, mu) =
//! mb(z, mu) / z` is its counterpart for sum-threshold (inverse) sampling.
//! Both are `<= 0` with equality exactly at `z == mu`.

use crate::error::{Error, Result};

/// Validated `(z, mu)` argument pair: `z` in `[0, 1]`, `mu` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundArg {
    z: f64,
    mu: f64,
}

impl BoundArg {
    pub fn new(z: f64, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&z) || z.is_nan() {
            return Err(Error::Domain(format!("z must lie in [0, 1], got {z}")));
        }
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::Domain(format!("mu must lie in (0, 1), got {mu}")));
        }
        Ok(Self { z, mu })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `ln(1 + x) - x`, accurate for small `x` where the direct form cancels.
fn ln_1p_minus_x(x: f64) -> f64 {
    if x.abs() > 0.5 {
        return x.ln_1p() - x;
    }
    // sum_{k>=2} (-1)^{k+1} x^k / k, geometric convergence for |x| <= 1/2
    let mut acc = 0.0;
    let mut xp = x * x;
    let mut sign = -1.0;
    for k in 2..200u32 {
        let term = sign * xp / f64::from(k);
        acc += term;
        if term.abs() <= 1e-18 * acc.abs() {
            break;
        }
        xp *= x;
        sign = -sign;
    }
    acc
}

pub(crate) fn mb_raw(z: f64, mu: f64) -> f64 {
    if z == mu {
        return 0.0;
    }
    if z == 0.0 {
        return (-mu).ln_1p();
    }
    if z == 1.0 {
        return mu.ln();
    }
    let d = z - mu;
    let r1 = d / mu;
    let r2 = -d / (1.0 - mu);
    if r1.abs() <= 0.5 && r2.abs() <= 0.5 {
        // Near z == mu the two logs cancel against each other; pulling out the
        // linear parts leaves terms that are all O(d^2).
        return -z * ln_1p_minus_x(r1) - (1.0 - z) * ln_1p_minus_x(r2)
            - d * d / (mu * (1.0 - mu));
    }
    // Far regime: each log ratio gets whichever form keeps its argument
    // well-conditioned (log1p near 1, plain log difference otherwise).
    let t1 = if r1.abs() <= 0.5 {
        -z * r1.ln_1p()
    } else {
        z * (mu.ln() - z.ln())
    };
    let r2p = d / (1.0 - z);
    let t2 = if r2p.abs() <= 0.5 {
        (1.0 - z) * r2p.ln_1p()
    } else {
        (1.0 - z) * ((-mu).ln_1p() - (-z).ln_1p())
    };
    t1 + t2
}

/// Fixed-size sampling exponent `M_B(z, mu)`.
///
/// Returns the continuous limits `ln(1-mu)` at `z = 0` and `ln(mu)` at
/// `z = 1`, and exactly `0` at `z = mu`.
pub fn mb(z: f64, mu: f64) -> Result<f64> {
    let arg = BoundArg::new(z, mu)?;
    Ok(mb_raw(arg.z, arg.mu))
}

/// Inverse-sampling exponent `M_I(z, mu) = M_B(z, mu) / z`, `z` in `(0, 1]`.
pub fn mi(z: f64, mu: f64) -> Result<f64> {
    if z == 0.0 {
        return Err(Error::Domain("mi is undefined at z = 0".into()));
    }
    let arg = BoundArg::new(z, mu)?;
    Ok(mb_raw(arg.z, arg.mu) / arg.z)
}

pub(crate) fn mi_raw(z: f64, mu: f64) -> f64 {
    mb_raw(z, mu) / z
}
