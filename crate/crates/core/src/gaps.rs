//! Gap-length sequences `ℓₙ = |Jₙ|`, `n ∈ ℤ`.
//!
//! Every model is a base shape that is non-increasing in `|n|`, optionally
//! overridden on a sparse index set, divided by its total mass so that
//! `Σ ℓₙ = 1`. Queries return outward-rounded enclosures; range queries work
//! on either `i64` or `BigInt` indices through [`GapIndex`].

use std::collections::BTreeMap;
use std::fmt::{self, Debug};
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{ln_biguint, Interval};

/// Terms summed explicitly before the integral tail bracket when computing
/// normalizers.
pub const NORMALIZER_TERMS: usize = 100_000;

/// Terms summed explicitly in [`GapSequence::tail_sum`] before bracketing.
pub const TAIL_TERMS: u64 = 4_000;

/// Integer types usable as gap indices.
pub trait GapIndex:
    Clone + Ord + Debug + Integer + Signed + ToPrimitive + From<i64> + Into<BigInt>
{
}

impl<T> GapIndex for T where
    T: Clone + Ord + Debug + Integer + Signed + ToPrimitive + From<i64> + Into<BigInt>
{
}

/// Enclosure of the Riemann zeta function at a real point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ZetaValue {
    pub s: f64,
    pub value: Interval,
    pub terms_used: usize,
}

/// ζ(s) from a partial sum plus a certified bracket on the remainder
/// (see [`convex_tail`]), which lies inside the integral bracket
/// `∫_{M+1}^∞ x^{-s} ≤ Σ_{n>M} n^{-s} ≤ ∫_M^∞ x^{-s}`.
pub fn zeta_interval(s: f64, terms: usize) -> Result<ZetaValue> {
    if !(s > 1.0) {
        return Err(Error::DivergentZeta(s));
    }
    if s <= 1.0 + 1e-6 {
        return Err(Error::InvalidArgument(format!("zeta: s = {s} too close to 1")));
    }
    if terms < 10 {
        return Err(Error::InvalidArgument("zeta: at least 10 terms required".into()));
    }
    Ok(ZetaValue {
        s,
        value: zeta_bracket(Interval::point(s), terms),
        terms_used: terms,
    })
}

/// `n^{-s}` for an exact positive integer `n < 2^53`.
fn inv_pow(n: f64, s: Interval) -> Interval {
    if s.lo == s.hi && s.lo.fract() == 0.0 && s.lo > 0.0 && s.lo <= 64.0 {
        Interval::point(n).powi(s.lo as u32).recip()
    } else {
        Interval::point(n).pow(-s)
    }
}

/// `∫_a^∞ x^{-s} dx = a^{1-s}/(s-1)`.
fn power_tail_integral(a: f64, s: Interval) -> Interval {
    let one = Interval::point(1.0);
    Interval::point(a).pow(one - s).div(s - one)
}

/// `Σ_{m≥a} f(m)` for convex decreasing `f`, from
/// `∫_a^∞ f + f(a)/2 ≤ Σ ≤ ∫_{a−1/2}^∞ f` (trapezoid and midpoint rules).
fn convex_tail(f_a: Interval, int_a: Interval, int_a_half: Interval) -> Interval {
    let lo = (int_a + f_a.scale(0.5)).lo;
    Interval::new(lo, int_a_half.hi.max(lo))
}

/// ζ over an interval of exponents (ζ is decreasing in s).
pub(crate) fn zeta_bracket(s: Interval, terms: usize) -> Interval {
    assert!(s.lo > 1.0);
    let mut acc = Interval::point(0.0);
    for n in (1..=terms).rev() {
        acc = acc + inv_pow(n as f64, s);
    }
    let a = (terms + 1) as f64;
    acc + convex_tail(inv_pow(a, s), power_tail_integral(a, s), power_tail_integral(a - 0.5, s))
}

/// `∫_a^∞ x^{-3} ln x dx = (2 ln a + 1)/(4a²)`.
fn logcubed_tail_integral(a: f64) -> Interval {
    let ai = Interval::point(a);
    (Interval::point(2.0) * ai.ln() + Interval::point(1.0)).div(Interval::point(4.0) * ai * ai)
}

/// Shape of the unnormalized lengths before overrides.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseShape {
    /// `(|n|+1)^{-1/δ}`.
    Classical { delta: f64, s: Interval },
    /// `(|n|+2)^{-3} ln(|n|+2)`.
    LogCubed,
}

impl BaseShape {
    pub fn classical(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0,1)")));
        }
        let s = Interval::point(1.0).div(Interval::point(delta));
        // Collapse to the exact value when 1/δ is an exactly representable
        // result, e.g. δ = 1/2 or 1/4.
        let s = if 1.0 / delta * delta == 1.0 && (1.0 / delta).fract() == 0.0 {
            Interval::point(1.0 / delta)
        } else {
            s
        };
        Ok(BaseShape::Classical { delta, s })
    }

    /// The integer argument `|n| + shift` used by the shape.
    fn shift(&self) -> i64 {
        match self {
            BaseShape::Classical { .. } => 1,
            BaseShape::LogCubed => 2,
        }
    }

    /// `f(m)` for the shifted argument `m = |n| + shift` (exact integer).
    fn at(&self, m: f64) -> Interval {
        match self {
            BaseShape::Classical { s, .. } => inv_pow(m, *s),
            BaseShape::LogCubed => {
                let mi = Interval::point(m);
                mi.ln().div(mi.powi(3))
            }
        }
    }

    fn ln_at_big(&self, m: &BigUint) -> Interval {
        let l = ln_biguint(m);
        match self {
            BaseShape::Classical { s, .. } => -(*s * l),
            BaseShape::LogCubed => l.ln() - Interval::point(3.0) * l,
        }
    }

    /// `Σ_{m ≥ a} f(m)` for an integer `a ≥ 2`.
    fn tail_from(&self, a: u64) -> Interval {
        let mut acc = Interval::point(0.0);
        let end = a + TAIL_TERMS;
        for m in (a..end).rev() {
            acc = acc + self.at(m as f64);
        }
        acc + self.convex_tail_from(end as f64)
    }

    /// `Σ_{m≥a} f(m)` by the convex bracket; `f` is convex for `m ≥ 2`.
    fn convex_tail_from(&self, a: f64) -> Interval {
        match self {
            BaseShape::Classical { s, .. } => convex_tail(
                self.at(a),
                power_tail_integral(a, *s),
                power_tail_integral(a - 0.5, *s),
            ),
            BaseShape::LogCubed => convex_tail(
                self.at(a),
                logcubed_tail_integral(a),
                logcubed_tail_integral(a - 0.5),
            ),
        }
    }

    /// Total unnormalized mass `Σ_{n∈ℤ} f(|n| + shift)`.
    fn mass(&self) -> Interval {
        match self {
            BaseShape::Classical { s, .. } => {
                Interval::point(2.0) * zeta_bracket(*s, NORMALIZER_TERMS) - Interval::point(1.0)
            }
            BaseShape::LogCubed => {
                // 2 Σ_{m≥2} m^{-3} ln m − 2^{-3} ln 2
                let mut acc = Interval::point(0.0);
                for m in (2..=NORMALIZER_TERMS).rev() {
                    acc = acc + self.at(m as f64);
                }
                acc = acc + self.convex_tail_from((NORMALIZER_TERMS + 1) as f64);
                Interval::point(2.0) * acc - self.at(2.0)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BaseShape::Classical { delta, .. } => format!("classical:{delta}"),
            BaseShape::LogCubed => "logcubed".into(),
        }
    }
}

/// Sparse replacements of the base shape.
#[derive(Clone, Debug, PartialEq)]
pub enum ExceptionRule {
    /// `ℓ_{±4^k} = 7^{-k}` for k ≥ 1 (before normalization).
    Pow4To7,
    /// Explicit unnormalized weights.
    List(BTreeMap<i64, f64>),
}

impl ExceptionRule {
    fn describe(&self) -> String {
        match self {
            ExceptionRule::Pow4To7 => "pow4to7".into(),
            ExceptionRule::List(m) => format!("list({} entries)", m.len()),
        }
    }
}

/// Monotonicity metadata driving the range-minimum logic.
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    DecreasingInAbs,
    DecreasingWithExceptions { exceptions: String },
}

#[derive(Clone, Debug)]
pub struct GapSequence {
    spec: String,
    base: BaseShape,
    exceptions: Option<ExceptionRule>,
    /// Unnormalized total mass.
    mass: Interval,
    /// Multiplier applied after normalization (1 for a Denjoy sequence).
    scale: f64,
    /// ln(scale / mass).
    ln_factor: Interval,
    factor: Interval,
}

fn is_pow4(m: &BigUint) -> Option<u64> {
    if m.is_zero() || m.count_ones() != 1 {
        return None;
    }
    let tz = m.trailing_zeros()?;
    (tz % 2 == 0 && tz >= 2).then_some(tz / 2)
}

fn pow4_i64(v: u64) -> Option<u64> {
    (v >= 4 && v.is_power_of_two() && v.trailing_zeros() % 2 == 0).then(|| (v.trailing_zeros() / 2) as u64)
}

fn ln7() -> Interval {
    Interval::point(7.0).ln()
}

fn saturating_i64<I: GapIndex>(x: &I) -> i64 {
    x.to_i64().unwrap_or(if x.is_negative() { i64::MIN } else { i64::MAX })
}

impl GapSequence {
    fn build(spec: String, base: BaseShape, exceptions: Option<ExceptionRule>) -> Result<Self> {
        let mut mass = base.mass();
        match &exceptions {
            None => {}
            Some(ExceptionRule::Pow4To7) => {
                let BaseShape::Classical { s, .. } = &base else {
                    return Err(Error::ModelSpec {
                        spec,
                        reason: "pow4to7 requires a classical base".into(),
                    });
                };
                // 2 Σ_{k≥1} (7^{-k} − (4^k+1)^{-s})
                let sevens = Interval::point(1.0).div(Interval::point(6.0));
                let mut replaced = Interval::point(0.0);
                let k_max = 40u32;
                for k in 1..=k_max {
                    replaced = replaced + inv_pow(4f64.powi(k as i32) + 1.0, *s);
                }
                // (4^k+1)^{-s} < 4^{-ks}: geometric remainder.
                let r = Interval::point(4.0).pow(-*s);
                let rem = r.pow(Interval::point((k_max + 1) as f64)).div(Interval::point(1.0) - r);
                let replaced = replaced + Interval::new(0.0, rem.hi);
                mass = mass + Interval::point(2.0) * (sevens - replaced);
            }
            Some(ExceptionRule::List(map)) => {
                for (&i, &w) in map {
                    if !(w > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "exception value at {i} must be positive, got {w}"
                        )));
                    }
                    let m = i.unsigned_abs() as f64 + base.shift() as f64;
                    mass = mass + Interval::point(w) - base.at(m);
                }
            }
        }
        assert!(mass.lo > 0.0, "non-positive mass {mass}");
        let factor = Interval::point(1.0).div(mass);
        Ok(Self {
            spec,
            base,
            exceptions,
            mass,
            scale: 1.0,
            ln_factor: factor.ln(),
            factor,
        })
    }

    /// Classical Denjoy sequence `ℓₙ = (|n|+1)^{-1/δ}/c_δ`, `c_δ = 2ζ(1/δ) − 1`.
    pub fn classical(delta: f64) -> Result<Self> {
        let base = BaseShape::classical(delta)?;
        Self::build(format!("classical:{delta}"), base, None)
    }

    /// `ℓₙ ∝ (|n|+2)^{-3} ln(|n|+2)`, the square-growth companion sequence.
    pub fn logcubed() -> Result<Self> {
        Self::build("logcubed".into(), BaseShape::LogCubed, None)
    }

    /// Replace the base lengths on a sparse index set and renormalize.
    pub fn perturbed(base: &GapSequence, rule: ExceptionRule) -> Result<Self> {
        if base.exceptions.is_some() {
            return Err(Error::InvalidArgument("base sequence already has exceptions".into()));
        }
        let spec = match &rule {
            ExceptionRule::Pow4To7 => format!("perturbed:{};pow4to7", base.base.describe()),
            ExceptionRule::List(_) => format!("perturbed:{};{}", base.base.describe(), rule.describe()),
        };
        Self::build(spec, base.base.clone(), Some(rule))
    }

    /// Explicit table of unnormalized weights, extended by the classical
    /// shape `(|n|+1)^{-1/δ}` off the table.
    pub fn table(entries: BTreeMap<i64, f64>, tail_delta: f64, label: &str) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Table("no entries".into()));
        }
        let base = BaseShape::classical(tail_delta)?;
        Self::build(format!("table:{label}"), base, Some(ExceptionRule::List(entries)))
    }

    /// Read a `table:FILE` model: a `tail=classical:DELTA` line, then a CSV
    /// with header `index,length`.
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        let (first, rest) = text.split_once('\n').unwrap_or((text.as_str(), ""));
        let delta = first
            .trim()
            .strip_prefix("tail=classical:")
            .ok_or_else(|| Error::Table("first line must be `tail=classical:DELTA`".into()))?
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Table(format!("tail delta: {e}")))?;
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rest.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["index", "length"] {
            return Err(Error::Table(format!("expected header `index,length`, got {headers:?}")));
        }
        let mut entries = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Table(e.to_string()))?;
            let i: i64 = rec[0].parse().map_err(|e| Error::Table(format!("index `{}`: {e}", &rec[0])))?;
            let w: f64 = rec[1].parse().map_err(|e| Error::Table(format!("length `{}`: {e}", &rec[1])))?;
            if !(w > 0.0) {
                return Err(Error::Table(format!("length at index {i} must be positive")));
            }
            if entries.insert(i, w).is_some() {
                return Err(Error::Table(format!("duplicate index {i}")));
            }
        }
        Self::table(entries, delta, &path.display().to_string())
    }

    /// Parse `classical:DELTA | perturbed:classical:DELTA;pow4to7 | logcubed | table:FILE`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let fail = |reason: String| Error::ModelSpec { spec: spec.to_string(), reason };
        let s = spec.trim();
        let parse_delta = |d: &str| -> Result<f64> {
            let v: f64 = d.trim().parse().map_err(|e| fail(format!("delta `{d}`: {e}")))?;
            if !(v > 0.0 && v < 1.0) {
                return Err(fail(format!("delta {v} must lie in (0,1)")));
            }
            Ok(v)
        };
        if s == "logcubed" {
            Self::logcubed()
        } else if let Some(d) = s.strip_prefix("classical:") {
            Self::classical(parse_delta(d)?)
        } else if let Some(rest) = s.strip_prefix("perturbed:") {
            let (base, rule) = rest
                .split_once(';')
                .ok_or_else(|| fail("expected perturbed:classical:DELTA;pow4to7".into()))?;
            let d = base
                .strip_prefix("classical:")
                .ok_or_else(|| fail("perturbed base must be classical:DELTA".into()))?;
            if rule.trim() != "pow4to7" {
                return Err(fail(format!("unknown exception rule `{rule}`")));
            }
            Self::perturbed(&Self::classical(parse_delta(d)?)?, ExceptionRule::Pow4To7)
        } else if let Some(file) = s.strip_prefix("table:") {
            Self::from_table_file(Path::new(file.trim()))
        } else {
            Err(fail(format!("expected one of: {}", Self::GRAMMAR)))
        }
    }

    pub const GRAMMAR: &'static str =
        "classical:DELTA | perturbed:classical:DELTA;pow4to7 | logcubed | table:FILE";

    /// The same shape with every length multiplied by `lambda` (so Σℓ = λ).
    pub fn scaled(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0);
        let mut out = self.clone();
        out.scale = self.scale * lambda;
        out.factor = self.factor * Interval::point(lambda);
        out.ln_factor = out.factor.ln();
        out.spec = format!("{}*{lambda}", self.spec);
        out
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn base(&self) -> &BaseShape {
        &self.base
    }

    pub fn exceptions(&self) -> Option<&ExceptionRule> {
        self.exceptions.as_ref()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The unnormalized total mass; for the classical model this is
    /// `c_δ = 2ζ(1/δ) − 1`.
    pub fn normalizer(&self) -> Interval {
        self.mass
    }

    /// Nominal smoothness class. For `logcubed` this is the class implied by
    /// `ln|ℓₙ−ℓₙ₊₁|/ln ℓₙ → 4/3`, i.e. δ = 1/3.
    pub fn delta(&self) -> f64 {
        match &self.base {
            BaseShape::Classical { delta, .. } => *delta,
            BaseShape::LogCubed => 1.0 / 3.0,
        }
    }

    pub fn structure(&self) -> Structure {
        match &self.exceptions {
            None => Structure::DecreasingInAbs,
            Some(r) => Structure::DecreasingWithExceptions { exceptions: r.describe() },
        }
    }

    fn exception_ln<I: GapIndex>(&self, n: &I) -> Option<Interval> {
        match self.exceptions.as_ref()? {
            ExceptionRule::Pow4To7 => {
                let k = match n.abs().to_u64() {
                    Some(v) => pow4_i64(v)?,
                    None => is_pow4(n.clone().into().magnitude())?,
                };
                Some(-(ln7() * Interval::point(k as f64)))
            }
            ExceptionRule::List(map) => map.get(&n.to_i64()?).map(|w| Interval::point(*w).ln()),
        }
    }

    fn exception_value(&self, n: i64) -> Option<Interval> {
        match self.exceptions.as_ref()? {
            ExceptionRule::Pow4To7 => {
                let k = pow4_i64(n.unsigned_abs())?;
                Some(Interval::point(7.0).powi(k as u32).recip())
            }
            ExceptionRule::List(map) => map.get(&n).map(|w| Interval::point(*w)),
        }
    }

    fn is_exception<I: GapIndex>(&self, n: &I) -> bool {
        match &self.exceptions {
            None => false,
            Some(ExceptionRule::Pow4To7) => match n.abs().to_u64() {
                Some(v) => pow4_i64(v).is_some(),
                None => is_pow4(n.clone().into().magnitude()).is_some(),
            },
            Some(ExceptionRule::List(map)) => n.to_i64().is_some_and(|v| map.contains_key(&v)),
        }
    }

    /// Unnormalized length at `n`.
    pub fn unnormalized(&self, n: i64) -> Interval {
        if let Some(v) = self.exception_value(n) {
            return v;
        }
        let m = n.unsigned_abs() + self.base.shift() as u64;
        if m < (1u64 << 53) {
            self.base.at(m as f64)
        } else {
            self.base.ln_at_big(&BigUint::from(m)).exp()
        }
    }

    /// Normalized length `ℓₙ`.
    pub fn length(&self, n: i64) -> Interval {
        self.unnormalized(n) * self.factor
    }

    fn ln_unnormalized<I: GapIndex>(&self, n: &I) -> Interval {
        if let Some(v) = self.exception_ln(n) {
            return v;
        }
        match n.abs().to_u64() {
            Some(v) if v < (1u64 << 52) => self.base.at((v + self.base.shift() as u64) as f64).ln(),
            _ => {
                let m = n.clone().into().magnitude() + BigUint::from(self.base.shift() as u64);
                self.base.ln_at_big(&m)
            }
        }
    }

    /// Enclosure of `ln ℓₙ`, valid for indices of any size.
    pub fn ln_length<I: GapIndex>(&self, n: &I) -> Interval {
        self.ln_unnormalized(n) + self.ln_factor
    }

    /// Up to `count` non-exception indices of `[lo, hi]`, by decreasing `|n|`
    /// (so by increasing base length).
    fn base_candidates<I: GapIndex>(&self, lo: &I, hi: &I, count: usize) -> Vec<I> {
        let zero = I::zero();
        let one = I::one();
        let pos_stop = if *lo > zero { lo.clone() } else { zero.clone() };
        let neg_stop = if *hi < -one.clone() { hi.clone() } else { -one.clone() };
        let mut pos = (*hi >= zero).then(|| hi.clone());
        let mut neg = (*lo < zero).then(|| lo.clone());
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let take_pos = match (&pos, &neg) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(p), Some(n)) => p.abs() >= n.abs(),
            };
            let idx = if take_pos {
                let p = pos.take().unwrap();
                let next = p.clone() - one.clone();
                pos = (next >= pos_stop).then_some(next);
                p
            } else {
                let n = neg.take().unwrap();
                let next = n.clone() + one.clone();
                neg = (next <= neg_stop).then_some(next);
                n
            };
            if !self.is_exception(&idx) {
                out.push(idx);
            }
        }
        out
    }

    fn exceptions_in<I: GapIndex>(&self, lo: &I, hi: &I) -> Vec<I> {
        match &self.exceptions {
            None => Vec::new(),
            Some(ExceptionRule::Pow4To7) => {
                let bound = if lo.abs() > hi.abs() { lo.abs() } else { hi.abs() };
                let four = I::from(4);
                let mut p = four.clone();
                let mut out = Vec::new();
                while p <= bound {
                    let neg = -p.clone();
                    if neg >= *lo && neg <= *hi {
                        out.push(neg);
                    }
                    if p >= *lo && p <= *hi {
                        out.push(p.clone());
                    }
                    p = p * four.clone();
                }
                out
            }
            Some(ExceptionRule::List(map)) => {
                let (a, b) = (saturating_i64(lo), saturating_i64(hi));
                map.range(a..=b).map(|(&i, _)| I::from(i)).collect()
            }
        }
    }

    /// Enclosures of `ln` of the `m` smallest lengths on `[lo, hi]`, ascending.
    pub fn range_k_smallest_ln<I: GapIndex>(&self, lo: &I, hi: &I, m: usize) -> Result<Vec<Interval>> {
        if lo > hi {
            return Err(Error::EmptyRange { lo: format!("{lo:?}"), hi: format!("{hi:?}") });
        }
        if m == 0 {
            return Err(Error::InvalidArgument("m must be >= 1".into()));
        }
        let mut values: Vec<Interval> = self
            .base_candidates(lo, hi, m)
            .iter()
            .chain(self.exceptions_in(lo, hi).iter())
            .map(|i| self.ln_length(i))
            .collect();
        if values.len() < m {
            return Err(Error::InvalidArgument(format!(
                "range [{lo:?}, {hi:?}] has fewer than {m} indices"
            )));
        }
        // The i-th order statistic is enclosed by the i-th smallest lower and
        // the i-th smallest upper endpoint.
        let mut los: Vec<f64> = values.iter().map(|v| v.lo).collect();
        let mut his: Vec<f64> = values.iter().map(|v| v.hi).collect();
        los.sort_by(f64::total_cmp);
        his.sort_by(f64::total_cmp);
        values.clear();
        Ok((0..m).map(|i| Interval::new(los[i], his[i])).collect())
    }

    /// Enclosure of `ln min{ℓᵢ : lo ≤ i ≤ hi}`.
    pub fn range_min_ln<I: GapIndex>(&self, lo: &I, hi: &I) -> Result<Interval> {
        Ok(self.range_k_smallest_ln(lo, hi, 1)?[0])
    }

    /// Enclosure of `min{ℓᵢ : lo ≤ i ≤ hi}`.
    pub fn range_min(&self, lo: i64, hi: i64) -> Result<Interval> {
        Ok(self.range_min_ln(&lo, &hi)?.exp())
    }

    /// The `m` smallest lengths on `[lo, hi]` (with multiplicity), ascending.
    pub fn range_k_smallest(&self, lo: i64, hi: i64, m: usize) -> Result<Vec<Interval>> {
        Ok(self
            .range_k_smallest_ln(&lo, &hi, m)?
            .into_iter()
            .map(Interval::exp)
            .collect())
    }

    /// Enclosure of `Σ_{|k|>n} ℓ_k`.
    pub fn tail_sum(&self, n: u64) -> Result<Interval> {
        if n < 1 {
            return Err(Error::InvalidArgument("tail_sum needs n >= 1".into()));
        }
        let two = Interval::point(2.0);
        let shift = self.base.shift() as u64;
        let mut tail = two * self.base.tail_from(n + 1 + shift);
        match &self.exceptions {
            None => {}
            Some(ExceptionRule::Pow4To7) => {
                let BaseShape::Classical { s, .. } = &self.base else { unreachable!() };
                // First k with 4^k > n.
                let mut k0 = 1u32;
                while 4f64.powi(k0 as i32) <= n as f64 {
                    k0 += 1;
                }
                // Σ_{k≥k0} 7^{-k} = 7^{1-k0}/6
                let sevens = Interval::point(7.0).powi(k0 - 1).recip().div(Interval::point(6.0));
                let mut replaced = Interval::point(0.0);
                let k_max = k0 + 40;
                for k in k0..=k_max {
                    replaced = replaced + inv_pow(4f64.powi(k as i32) + 1.0, *s);
                }
                let r = Interval::point(4.0).pow(-*s);
                let rem = r.pow(Interval::point((k_max + 1) as f64)).div(Interval::point(1.0) - r);
                let replaced = replaced + Interval::new(0.0, rem.hi);
                tail = tail + two * (sevens - replaced);
            }
            Some(ExceptionRule::List(map)) => {
                for (&i, &w) in map {
                    if i.unsigned_abs() > n {
                        let m = i.unsigned_abs() + shift;
                        tail = tail + Interval::point(w) - self.base.at(m as f64);
                    }
                }
            }
        }
        let tail = Interval::new(tail.lo.max(0.0), tail.hi);
        Ok(tail * self.factor)
    }

    /// `Σ_{|k|≤n} ℓ_k + tail_sum(n)`, which must contain the total length
    /// (1 for an unscaled sequence). The partial sum is evaluated directly,
    /// independently of the normalizer's ζ route.
    pub fn total_check(&self, n: u64) -> Result<Interval> {
        let n = n as i64;
        let mut acc = Interval::point(0.0);
        for k in (1..=n).rev() {
            acc = acc + self.unnormalized(k) + self.unnormalized(-k);
        }
        acc = acc + self.unnormalized(0);
        Ok(acc * self.factor + self.tail_sum(n as u64)?)
    }

    /// Finite-window estimate of the Denjoy class `liminf ln|ℓₙ−ℓₙ₊₁|/ln ℓₙ`.
    pub fn denjoy_class_estimate(&self, window: (i64, i64)) -> Result<DenjoyClassEstimate> {
        let (lo, hi) = window;
        if lo > hi {
            return Err(Error::EmptyRange { lo: lo.to_string(), hi: hi.to_string() });
        }
        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        let mut inf = f64::INFINITY;
        for n in lo..=hi {
            let a = self.length(n).mid();
            let b = self.length(n + 1).mid();
            if a == b {
                skipped.push(n);
                continue;
            }
            let r = (a - b).abs().ln() / a.ln();
            inf = inf.min(r);
            rows.push(DenjoyClassRow { n, ratio: r, running_inf: inf });
        }
        Ok(DenjoyClassEstimate {
            window,
            rows,
            skipped,
            infimum: inf,
            label: "finite-window estimate of 1 + delta (liminf of ln|l_n - l_{n+1}| / ln l_n)",
        })
    }
}

impl fmt::Display for GapSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DenjoyClassRow {
    pub n: i64,
    pub ratio: f64,
    pub running_inf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DenjoyClassEstimate {
    pub window: (i64, i64),
    pub rows: Vec<DenjoyClassRow>,
    /// Indices skipped because ℓₙ = ℓₙ₊₁.
    pub skipped: Vec<i64>,
    pub infimum: f64,
    pub label: &'static str,
}

/// Free-function forms mirroring the module's operation list.
pub fn classical_sequence(delta: f64) -> Result<GapSequence> {
    GapSequence::classical(delta)
}

pub fn perturbed_sequence(base: &GapSequence, rule: ExceptionRule) -> Result<GapSequence> {
    GapSequence::perturbed(base, rule)
}

/// Convenience for building a `BigInt` index.
pub fn big(i: i64) -> BigInt {
    BigInt::from(i)
}

#[allow(dead_code)]
fn _assert_index_types() {
    fn is_index<T: GapIndex>() {}
    is_index::<i64>();
    is_index::<BigInt>();
    let _ = BigInt::one();
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI2_6: f64 = 1.6449340668482264;
    const ZETA3: f64 = 1.2020569031595942;
    const C_HALF: f64 = 2.0 * PI2_6 - 1.0; // 2.289868…

    /// Independent oracle: direct partial sum plus the midpoint of the
    /// integral bracket, in plain f64.
    fn zeta_oracle(s: f64, m: usize) -> f64 {
        let partial: f64 = (1..=m).map(|n| (n as f64).powf(-s)).sum();
        let lo = ((m + 1) as f64).powf(1.0 - s) / (s - 1.0);
        let hi = (m as f64).powf(1.0 - s) / (s - 1.0);
        partial + 0.5 * (lo + hi)
    }

    #[test]
    fn zeta_examples() {
        let z2 = zeta_interval(2.0, 10_000).unwrap();
        assert!(z2.value.contains(PI2_6), "{}", z2.value);
        assert!((zeta_oracle(2.0, 10_000) - PI2_6).abs() < 1e-9);
        let tail_diff = 1.0 / 10_000.0 - 1.0 / 10_001.0;
        assert!(z2.value.width() <= tail_diff + 1e-10);
        assert!(z2.value.width() < 1e-10);
        let z3 = zeta_interval(3.0, 10_000).unwrap();
        assert!(z3.value.contains(ZETA3));
        let coarse = zeta_interval(2.0, 10).unwrap();
        assert!(coarse.value.contains(PI2_6) && coarse.value.contains_interval(&z2.value));
        assert!(matches!(zeta_interval(1.0, 100), Err(Error::DivergentZeta(_))));
        assert!(zeta_interval(0.5, 100).is_err());
        let z125 = zeta_interval(1.25, 10_000).unwrap();
        let oracle = zeta_oracle(1.25, 2_000_000);
        assert!((z125.value.mid() - oracle).abs() < 1e-8, "{} vs {oracle}", z125.value);
    }

    #[test]
    fn classical_examples() {
        let seq = GapSequence::classical(0.5).unwrap();
        assert!(seq.normalizer().contains(C_HALF), "{}", seq.normalizer());
        assert!(seq.length(0).contains(1.0 / C_HALF));
        assert!((seq.length(0).mid() - 0.436706).abs() < 1e-6);
        let l6 = seq.length(6);
        assert!(l6.contains(1.0 / (49.0 * C_HALF)));
        assert!((l6.mid() - 0.0089123).abs() < 1e-7);
        assert!(GapSequence::classical(1.0).is_err());
        assert!(GapSequence::classical(0.0).is_err());
    }

    #[test]
    fn perturbed_examples() {
        let base = GapSequence::classical(0.5).unwrap();
        let p = GapSequence::perturbed(&base, ExceptionRule::Pow4To7).unwrap();
        assert!(p.unnormalized(4).contains(1.0 / 7.0));
        assert!(p.unnormalized(-4).contains(1.0 / 7.0));
        assert!(p.unnormalized(3).contains(0.0625));
        assert!(p.unnormalized(16).contains(1.0 / 49.0));
        assert!(p.unnormalized(8).contains(1.0 / 81.0));
        // Normalizer: c_δ + 2 Σ_k (7^{-k} − (4^k+1)^{-2}).
        let adj: f64 = (1..30).map(|k| 7f64.powi(-k) - (4f64.powi(k) + 1.0).powi(-2)).sum();
        assert!(p.normalizer().contains(C_HALF + 2.0 * adj) || (p.normalizer().mid() - (C_HALF + 2.0 * adj)).abs() < 1e-12);
        let mut bad = BTreeMap::new();
        bad.insert(3, -1.0);
        assert!(GapSequence::perturbed(&base, ExceptionRule::List(bad)).is_err());
    }

    #[test]
    fn range_min_examples() {
        let seq = GapSequence::classical(0.5).unwrap();
        let m = seq.range_min(-6, 6).unwrap();
        assert!(m.contains(1.0 / (49.0 * C_HALF)));
        let m1 = seq.range_min(-1, 1).unwrap();
        assert!((m1.mid() - 0.109176).abs() < 1e-6);
        let single = seq.range_k_smallest(0, 0, 1).unwrap();
        assert_eq!(single.len(), 1);
        assert!(single[0].contains(1.0 / C_HALF));
        assert!(seq.range_min(3, 2).is_err());
        assert!(seq.range_k_smallest(0, 1, 3).is_err());
    }

    #[test]
    fn range_min_with_big_indices() {
        let seq = GapSequence::classical(0.5).unwrap();
        let n = BigInt::from(10).pow(40);
        let l = seq.range_min_ln(&-n.clone(), &n).unwrap();
        // ln((10^40+1)^{-2}/c)
        let expected = -2.0 * 40.0 * std::f64::consts::LN_10 - C_HALF.ln();
        assert!((l.mid() - expected).abs() < 1e-9);
        let small = seq.range_min_ln(&big(-6), &big(6)).unwrap();
        assert!(small.exp().contains(1.0 / (49.0 * C_HALF)));
    }

    #[test]
    fn tail_sum_examples() {
        let seq = GapSequence::classical(0.5).unwrap();
        let t = seq.tail_sum(10).unwrap();
        // Σ_{j≥12} j^{-2} = ψ'(12) = 0.0869040…
        let trigamma12 = PI2_6 - (1..=11).map(|j| 1.0 / (j * j) as f64).sum::<f64>();
        assert!(t.contains(2.0 * trigamma12 / C_HALF), "{t}");
        assert!(t.lo >= 2.0 / (12.0 * C_HALF) && t.hi <= 2.0 / (11.0 * C_HALF));
        assert!(t.width() < 1e-9);
        let far = seq.tail_sum(1_000_000_000).unwrap();
        assert!(far.hi < 1e-9);
    }

    #[test]
    fn perturbed_tail_is_exactly_adjusted() {
        let base = GapSequence::classical(0.5).unwrap();
        let p = GapSequence::perturbed(&base, ExceptionRule::Pow4To7).unwrap();
        let n = 3u64;
        let base_tail_unnorm = 2.0 * (PI2_6 - 1.0 - 0.25 - 1.0 / 9.0 - 1.0 / 16.0);
        let adj: f64 = 2.0 * (1..30).map(|k| 7f64.powi(-k) - (4f64.powi(k) + 1.0).powi(-2)).sum::<f64>();
        let expected = (base_tail_unnorm + adj) / p.normalizer().mid();
        let t = p.tail_sum(n).unwrap();
        assert!((t.mid() - expected).abs() < 1e-9, "{t} vs {expected}");
    }

    #[test]
    fn normalization_contains_one() {
        let mut models = vec![
            GapSequence::classical(0.5).unwrap(),
            GapSequence::classical(0.25).unwrap(),
            GapSequence::classical(0.8).unwrap(),
            GapSequence::logcubed().unwrap(),
            GapSequence::perturbed(&GapSequence::classical(0.8).unwrap(), ExceptionRule::Pow4To7).unwrap(),
        ];
        let mut table = BTreeMap::new();
        table.insert(0, 2.0);
        table.insert(1, 0.5);
        table.insert(-1, 0.4);
        models.push(GapSequence::table(table, 0.5, "inline").unwrap());
        for m in &models {
            for n in [2u64, 50, 1000] {
                let total = m.total_check(n).unwrap();
                assert!(total.contains(1.0), "{}: n={n} {total}", m.spec());
                assert!(total.width() < 1e-6, "{}: {total}", m.spec());
            }
        }
    }

    #[test]
    fn denjoy_class_asymptotics() {
        // Oracle: the exact ratio for the closed-form classical lengths.
        let oracle = |delta: f64, n: f64| {
            let s = 1.0 / delta;
            let c = 2.0 * zeta_oracle(s, 100_000) - 1.0;
            let a = (n + 1.0).powf(-s) / c;
            let b = (n + 2.0).powf(-s) / c;
            (a - b).ln() / a.ln()
        };
        for delta in [0.5, 0.25] {
            let seq = GapSequence::classical(delta).unwrap();
            let e = seq.denjoy_class_estimate((1000, 1000)).unwrap();
            let r = e.rows[0].ratio;
            assert!((r - oracle(delta, 1000.0)).abs() < 1e-6, "{r}");
            // Approaches 1 + δ from below, slowly (logarithmically).
            assert!(r < 1.0 + delta && r > 1.0 + delta - 0.08);
            let far = seq.denjoy_class_estimate((1_000_000, 1_000_000)).unwrap().rows[0].ratio;
            assert!(far > r && far < 1.0 + delta);
        }
        let p = GapSequence::perturbed(&GapSequence::classical(0.5).unwrap(), ExceptionRule::Pow4To7).unwrap();
        let e = p.denjoy_class_estimate((2, 70)).unwrap();
        assert!(e.infimum < 1.2, "exception indices pull the running infimum down: {}", e.infimum);
    }

    #[test]
    fn table_file_roundtrip() {
        let dir = std::env::temp_dir().join(format!("denjoy-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        std::fs::write(&path, "tail=classical:0.5\nindex,length\n0,1.0\n1,0.3\n-1,0.3\n2,0.01\n").unwrap();
        let seq = GapSequence::from_spec(&format!("table:{}", path.display())).unwrap();
        // min over [-3, 3]: table entry at 2 (0.01) beats base (4)^{-2} = 0.0625
        let m = seq.range_min(-3, 3).unwrap();
        assert!(m.contains(0.01 * seq.length(0).mid() / 1.0) || (m.mid() / seq.length(0).mid() - 0.01).abs() < 1e-12);
        std::fs::write(&path, "index,length\n0,1\n").unwrap();
        assert!(GapSequence::from_spec(&format!("table:{}", path.display())).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn spec_grammar() {
        assert!(GapSequence::from_spec("classical:0.5").is_ok());
        assert!(GapSequence::from_spec("perturbed:classical:0.8;pow4to7").is_ok());
        assert!(GapSequence::from_spec("logcubed").is_ok());
        for bad in ["classical:1.5", "classical", "perturbed:logcubed;pow4to7", "foo", "perturbed:classical:0.5;x"] {
            assert!(GapSequence::from_spec(bad).is_err(), "{bad}");
        }
    }
}
