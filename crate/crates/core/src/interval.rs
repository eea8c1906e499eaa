//! Closed `f64` intervals with outward rounding.
//!
//! Every arithmetic result is widened by one ulp in each direction after the
//! round-to-nearest operation, which makes the enclosure valid without
//! switching the FPU rounding mode. Transcendental functions (`exp`, `ln`)
//! are widened by [`TRANSCENDENTAL_ULPS`] ulps: the platform libm is accurate
//! to well under one ulp, so this is a generous error budget.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Widening applied to `exp` and `ln` results.
pub const TRANSCENDENTAL_ULPS: u32 = 2;

#[inline]
pub(crate) fn down(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x.next_down()
    }
}

#[inline]
pub(crate) fn up(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x.next_up()
    }
}

#[inline]
fn down_n(mut x: f64, n: u32) -> f64 {
    for _ in 0..n {
        x = down(x);
    }
    x
}

#[inline]
fn up_n(mut x: f64, n: u32) -> f64 {
    for _ in 0..n {
        x = up(x);
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    /// Degenerate interval; only valid when `x` is exactly the intended value.
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// One-ulp enclosure of a value that was rounded to nearest.
    pub fn around(x: f64) -> Self {
        Self { lo: down(x), hi: up(x) }
    }

    pub fn hull(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Enclosure of `min(x, y)` for `x ∈ self`, `y ∈ other`.
    pub fn min(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn max(self, other: Self) -> Self {
        Self {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `true` when the whole interval lies strictly above `x`.
    pub fn certainly_gt(&self, x: f64) -> bool {
        self.lo > x
    }

    pub fn certainly_lt(&self, x: f64) -> bool {
        self.hi < x
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn recip(self) -> Self {
        assert!(self.lo > 0.0 || self.hi < 0.0, "reciprocal of interval containing 0");
        Self {
            lo: down(1.0 / self.hi),
            hi: up(1.0 / self.lo),
        }
    }

    pub fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }

    pub fn scale(self, k: f64) -> Self {
        self * Interval::point(k)
    }

    pub fn exp(self) -> Self {
        let lo = down_n(self.lo.exp(), TRANSCENDENTAL_ULPS).max(0.0);
        let hi = up_n(self.hi.exp(), TRANSCENDENTAL_ULPS);
        Self { lo, hi }
    }

    /// Natural log; the interval must be strictly positive.
    pub fn ln(self) -> Self {
        assert!(self.lo > 0.0, "ln of non-positive interval [{}, {}]", self.lo, self.hi);
        Self {
            lo: down_n(self.lo.ln(), TRANSCENDENTAL_ULPS),
            hi: up_n(self.hi.ln(), TRANSCENDENTAL_ULPS),
        }
    }

    /// `self^e` for a strictly positive base.
    pub fn pow(self, e: Self) -> Self {
        (self.ln() * e).exp()
    }

    /// `self^k` for a non-negative base and small integer exponent, by
    /// repeated outward-rounded multiplication.
    pub fn powi(self, k: u32) -> Self {
        debug_assert!(self.lo >= 0.0);
        let mut acc = Interval::point(1.0);
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }

    pub fn ln2() -> Self {
        Interval::around(std::f64::consts::LN_2)
    }

    /// Outward enclosure of an exact rational.
    pub fn from_rational(r: &BigRational) -> Self {
        match r.to_f64() {
            Some(x) if x.is_finite() && (x.abs() >= f64::MIN_POSITIVE || r.is_zero()) => {
                if r.is_zero() {
                    Interval::point(0.0)
                } else {
                    Interval::around(x)
                }
            }
            _ => {
                // Magnitude outside f64: fall back to the log route.
                if r.is_zero() {
                    Interval::point(0.0)
                } else if r.is_positive() {
                    ln_rational(r).exp()
                } else {
                    -ln_rational(&-r.clone()).exp()
                }
            }
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Self) -> Self {
        Self {
            lo: down(self.lo + rhs.lo),
            hi: up(self.hi + rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Self) -> Self {
        Self {
            lo: down(self.lo - rhs.hi),
            hi: up(self.hi - rhs.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Self) -> Self {
        let c = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Products that are exactly representable (e.g. 0 * x) need no widening,
        // but widening anyway is harmless.
        Self { lo: down(lo), hi: up(hi) }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}

/// Enclosure of `ln x` for an arbitrary-precision positive integer.
pub fn ln_biguint(x: &BigUint) -> Interval {
    assert!(!x.is_zero(), "ln of zero");
    let bits = x.bits();
    if bits <= 53 {
        let v = x.to_u64().unwrap() as f64;
        return Interval::point(v).ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64().unwrap() as f64;
    // x ∈ [top, top + 1) * 2^shift
    let mantissa = Interval::new(top, top + 1.0).ln();
    mantissa + Interval::ln2() * Interval::point(shift as f64)
}

/// Enclosure of `ln r` for a positive rational.
pub fn ln_rational(r: &BigRational) -> Interval {
    assert!(r.is_positive(), "ln of non-positive rational");
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    ln_biguint(num) - ln_biguint(den)
}

/// Directed-rounding sum of non-negative intervals.
pub fn sum<I: IntoIterator<Item = Interval>>(items: I) -> Interval {
    items
        .into_iter()
        .fold(Interval::point(0.0), |acc, x| acc + x)
}

/// Enclosure of `ln(Σ exp(xᵢ))` given enclosures of the `xᵢ`.
///
/// Returns `None` for an empty input.
pub fn log_sum_exp(terms: &[Interval]) -> Option<Interval> {
    match terms {
        [] => return None,
        [t] => return Some(*t),
        _ => {}
    }
    let m_lo = terms.iter().map(|t| t.lo).fold(f64::NEG_INFINITY, f64::max);
    let m_hi = terms.iter().map(|t| t.hi).fold(f64::NEG_INFINITY, f64::max);
    let mut s_lo = 0.0f64;
    let mut s_hi = 0.0f64;
    for t in terms {
        let e_lo = Interval::point(down(t.lo - m_lo)).exp().lo;
        let e_hi = Interval::point(up(t.hi - m_hi)).exp().hi;
        s_lo = down(s_lo + e_lo);
        s_hi = up(s_hi + e_hi);
    }
    // The largest term contributes exp(0) = 1 to each sum, so both are >= 1
    // up to rounding.
    let s_lo = s_lo.max(down(1.0));
    let lo = down(Interval::point(s_lo).ln().lo + m_lo);
    let hi = up(Interval::point(s_hi).ln().hi + m_hi);
    Some(Interval::new(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn arithmetic_encloses_exact_results() {
        let third = Interval::point(1.0).div(Interval::point(3.0));
        assert!(third.lo < 1.0 / 3.0 + 1e-17 && third.hi > 1.0 / 3.0 - 1e-17);
        let x = third * Interval::point(3.0);
        assert!(x.contains(1.0));
        let d = Interval::point(0.1) + Interval::point(0.2);
        assert!(d.lo <= 0.3 && d.hi >= 0.1f64 + 0.2f64);
    }

    #[test]
    fn ln_of_huge_integer() {
        let x = BigUint::from(10u32).pow(400);
        let l = ln_biguint(&x);
        let expected = 400.0 * std::f64::consts::LN_10;
        assert!(l.lo <= expected && expected <= l.hi, "{l}");
        assert!(l.width() < 1e-10);
    }

    #[test]
    fn rational_outside_f64_range() {
        let big = BigInt::from(10).pow(400);
        let r = BigRational::new(BigInt::from(1), big);
        let i = Interval::from_rational(&r);
        assert!(i.lo >= 0.0 && i.hi < 1e-300);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [0.5f64, 0.25, 0.125, 1e-3];
        let terms: Vec<_> = xs.iter().map(|x| Interval::point(*x).ln()).collect();
        let l = log_sum_exp(&terms).unwrap();
        let direct: f64 = xs.iter().sum::<f64>().ln();
        assert!(l.contains(direct), "{l} vs {direct}");
        assert!(l.width() < 1e-14);
    }

    #[test]
    fn pow_and_powi_agree() {
        let b = Interval::point(7.0);
        let a = b.powi(2);
        let c = b.pow(Interval::point(2.0));
        assert!(a.contains(49.0) && c.contains(49.0));
    }
}
