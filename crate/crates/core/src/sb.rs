//! Spearman-Brown algebra: the prophecy formula, its inverse, rescaling to
//! unit length, and length-to-length prediction.
//!
//! Everything here is pure and stateless. Length factors are kept as exact
//! integer ratios so that chained predictions across a length grid do not
//! accumulate drift from repeated float division.

use crate::error::{Error, Result};

/// A reliability coefficient, guaranteed to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Reliability(f64);

impl Reliability {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) || value.is_nan() {
            return Err(Error::Domain(format!(
                "reliability must lie in [0, 1], got {value}"
            )));
        }
        Ok(Reliability(value))
    }

    /// Clamp a float into `[0, 1]`. Intended for values that are in range up
    /// to rounding (e.g. a variance ratio computed as `tv / (tv + ev)`).
    pub fn saturating(value: f64) -> Self {
        Reliability(value.clamp(0.0, 1.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// A test-length ratio (target length over base length) as an exact
/// positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthFactor {
    num: u64,
    den: u64,
}

impl LengthFactor {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Domain(format!(
                "length factor must be a positive ratio, got {num}/{den}"
            )));
        }
        Ok(LengthFactor { num, den })
    }

    /// The factor `to_len / from_len` for a change of test length.
    pub fn from_lengths(to_len: u64, from_len: u64) -> Result<Self> {
        Self::new(to_len, from_len)
    }

    /// Whole-number factor `n / 1`.
    pub fn whole(n: u64) -> Result<Self> {
        Self::new(n, 1)
    }

    /// Reciprocal factor `1 / n`, used to rescale a length-n reliability
    /// back to unit length.
    pub fn unit_rescale(n: u64) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn inverse(self) -> Self {
        LengthFactor {
            num: self.den,
            den: self.num,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::ops::Mul for LengthFactor {
    type Output = LengthFactor;

    fn mul(self, rhs: LengthFactor) -> LengthFactor {
        // Reduce by the cross gcds so chained factors over the study grids
        // (lengths <= a few hundred) stay far from overflow.
        let g1 = gcd(self.num, rhs.den);
        let g2 = gcd(rhs.num, self.den);
        LengthFactor {
            num: (self.num / g1) * (rhs.num / g2),
            den: (self.den / g2) * (rhs.den / g1),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// The Spearman-Brown prophecy value `n x / (1 + (n - 1) x)`.
///
/// Monotone increasing in `x` for any fixed factor, and in the factor for
/// any `x` strictly inside `(0, 1)`. `x = 1` maps to 1 for every factor,
/// including factors below one, directly from the closed form.
pub fn spearman_brown(x: Reliability, n: LengthFactor) -> Reliability {
    Reliability::saturating(sb_value(x.get(), n.value()))
}

/// Inverse of [`spearman_brown`] in `x` for a fixed factor: applying the
/// reciprocal factor undoes the first application.
pub fn spearman_brown_inverse(x: Reliability, n: LengthFactor) -> Reliability {
    spearman_brown(x, n.inverse())
}

/// Predict the mean reliability at `to_len` from the mean reliability at
/// `from_len`. Forward prediction when `to_len > from_len`, backward
/// otherwise.
pub fn predict(mean_rho: Reliability, from_len: u64, to_len: u64) -> Result<Reliability> {
    let factor = LengthFactor::from_lengths(to_len, from_len)?;
    Ok(spearman_brown(mean_rho, factor))
}

/// Raw formula on unchecked floats; callers are expected to have validated
/// `x` in `[0, 1]` and `n > 0`. The denominator `1 + (n - 1) x` is computed
/// as `(1 - x) + n x`, which avoids cancellation as `x` approaches 1 and
/// makes the fixed point at `x = 1` exact for every factor.
pub(crate) fn sb_value(x: f64, n: f64) -> f64 {
    n * x / ((1.0 - x) + n * x)
}
