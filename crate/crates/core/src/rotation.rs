//! Continued-fraction engine for irrational rotation numbers.
//!
//! A rotation number α ∈ (0,1) is never held as a float. It is a lazily
//! extended stream of partial quotients `a₁, a₂, …` from which convergents
//! `pₙ/qₙ`, certified enclosures of `‖qₙα‖`, and the thresholds
//! `Nₙ = ⌊(qₙ+qₙ₊₁)/2⌋`, `Qₙ = qₙ+qₙ₊₁` are derived exactly.
//!
//! Knowing `a₁..a_m` pins α between `p_m/q_m` and the mediant
//! `(p_m+p_{m-1})/(q_m+q_{m-1})` (the unknown tail is ≥ 1); that enclosure
//! is what every certified comparison below is evaluated on.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{ln_biguint, ln_rational, Interval};

/// Deepest refinement attempted when deciding the sign of a linear form.
pub const MAX_REFINE_DEPTH: usize = 20_000;

/// Where the partial quotients come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlphaSource {
    /// (√5 − 1)/2, all quotients 1.
    Golden,
    /// √3 − 1, quotients 1, 2, 1, 2, …
    Sqrt3m1,
    /// Fractional part of (A + B√D)/C.
    Quadratic { a: i64, b: i64, c: i64, d: i64 },
    /// The listed quotients repeated forever.
    Periodic(Vec<u64>),
    /// A finite prefix, then the constant `then` forever; `None` means the
    /// expansion is only known up to the prefix.
    PrefixThen { prefix: Vec<u64>, then: Option<u64> },
    /// a₁ = q₁ and aₙ₊₁ = qₙ, so qₙ₊₁ = qₙ² + qₙ₋₁ (Diophantine class 2).
    SquareGrowth { q1: u64 },
}

impl AlphaSource {
    pub const GRAMMAR: &'static str = "golden | sqrt3m1 | quad:A,B,C,D | cf:a1,a2,... | \
cfonce:a1,...,ak[;then:m] | squaregrowth:q1";

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            AlphaSource::Golden | AlphaSource::Sqrt3m1 => Ok(()),
            AlphaSource::Quadratic { b, c, d, .. } => {
                if *c == 0 {
                    return Err("C must be non-zero".into());
                }
                if *b == 0 {
                    return Err("B must be non-zero".into());
                }
                if *d <= 1 {
                    return Err("D must exceed 1".into());
                }
                let r = (*d as u64).sqrt();
                if r * r == *d as u64 {
                    return Err("D is a perfect square; the value is rational".into());
                }
                Ok(())
            }
            AlphaSource::Periodic(list) => {
                if list.is_empty() {
                    return Err("empty quotient list".into());
                }
                if list.contains(&0) {
                    return Err("partial quotients must be >= 1".into());
                }
                Ok(())
            }
            AlphaSource::PrefixThen { prefix, then } => {
                if prefix.iter().any(|&a| a == 0) || *then == Some(0) {
                    return Err("partial quotients must be >= 1".into());
                }
                if prefix.is_empty() && then.is_none() {
                    return Err("empty expansion".into());
                }
                Ok(())
            }
            AlphaSource::SquareGrowth { q1 } => {
                if *q1 < 1 {
                    return Err("q1 must be >= 1".into());
                }
                Ok(())
            }
        }
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<u64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

impl FromStr for AlphaSource {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let fail = |reason: String| Error::AlphaSpec {
            spec: spec.to_string(),
            reason,
        };
        let s = spec.trim();
        let source = if s == "golden" {
            AlphaSource::Golden
        } else if s == "sqrt3m1" {
            AlphaSource::Sqrt3m1
        } else if let Some(rest) = s.strip_prefix("quad:") {
            let v: Vec<i64> = rest
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| fail(e.to_string()))?;
            if v.len() != 4 {
                return Err(fail("expected quad:A,B,C,D".into()));
            }
            AlphaSource::Quadratic { a: v[0], b: v[1], c: v[2], d: v[3] }
        } else if let Some(rest) = s.strip_prefix("cfonce:") {
            let (head, then) = match rest.split_once(";then:") {
                Some((h, t)) => (h, Some(t.trim().parse::<u64>().map_err(|e| fail(e.to_string()))?)),
                None => (rest, None),
            };
            let prefix = if head.trim().is_empty() { Vec::new() } else { parse_list(head).map_err(fail)? };
            AlphaSource::PrefixThen { prefix, then }
        } else if let Some(rest) = s.strip_prefix("cf:") {
            AlphaSource::Periodic(parse_list(rest).map_err(fail)?)
        } else if let Some(rest) = s.strip_prefix("squaregrowth:") {
            let q1 = rest.trim().parse::<u64>().map_err(|e| fail(e.to_string()))?;
            AlphaSource::SquareGrowth { q1 }
        } else {
            return Err(fail(format!("expected one of: {}", Self::GRAMMAR)));
        };
        source.validate().map_err(fail)?;
        Ok(source)
    }
}

impl fmt::Display for AlphaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            AlphaSource::Golden => write!(f, "golden"),
            AlphaSource::Sqrt3m1 => write!(f, "sqrt3m1"),
            AlphaSource::Quadratic { a, b, c, d } => write!(f, "quad:{a},{b},{c},{d}"),
            AlphaSource::Periodic(v) => write!(f, "cf:{}", join(v)),
            AlphaSource::PrefixThen { prefix, then: Some(m) } => {
                write!(f, "cfonce:{};then:{m}", join(prefix))
            }
            AlphaSource::PrefixThen { prefix, then: None } => write!(f, "cfonce:{}", join(prefix)),
            AlphaSource::SquareGrowth { q1 } => write!(f, "squaregrowth:{q1}"),
        }
    }
}

/// Generator state behind a source.
#[derive(Clone, Debug)]
enum Stream {
    Cycle { list: Vec<u64>, pos: usize },
    Prefix { prefix: Vec<u64>, pos: usize, then: Option<u64> },
    /// x = (p + √d)/q with q | d − p².
    Quadratic { p: BigInt, q: BigInt, d: BigInt, root: BigInt },
    SquareGrowth { q_prev: BigUint, q_cur: BigUint, started: bool, q1: u64 },
}

impl Stream {
    fn new(source: &AlphaSource) -> Self {
        match source {
            AlphaSource::Golden => Stream::Cycle { list: vec![1], pos: 0 },
            AlphaSource::Sqrt3m1 => Stream::Cycle { list: vec![1, 2], pos: 0 },
            AlphaSource::Periodic(list) => Stream::Cycle { list: list.clone(), pos: 0 },
            AlphaSource::PrefixThen { prefix, then } => Stream::Prefix {
                prefix: prefix.clone(),
                pos: 0,
                then: *then,
            },
            AlphaSource::Quadratic { a, b, c, d } => {
                let (mut p, mut q) = if *b < 0 {
                    (BigInt::from(-*a), BigInt::from(-*c))
                } else {
                    (BigInt::from(*a), BigInt::from(*c))
                };
                let bb = BigInt::from(*b);
                let mut disc = &bb * &bb * BigInt::from(*d);
                if !(&disc - &p * &p).is_multiple_of(&q) {
                    let aq = q.abs();
                    p *= &aq;
                    disc *= &q * &q;
                    q *= &aq;
                }
                let root = disc.sqrt();
                let mut st = Stream::Quadratic { p, q, d: disc, root };
                // Discard the integer part.
                st.next_quadratic();
                st
            }
            AlphaSource::SquareGrowth { q1 } => Stream::SquareGrowth {
                q_prev: BigUint::one(),
                q_cur: BigUint::from(*q1),
                started: false,
                q1: *q1,
            },
        }
    }

    fn next_quadratic(&mut self) -> BigInt {
        let Stream::Quadratic { p, q, d, root } = self else {
            unreachable!()
        };
        let a = if q.is_positive() {
            (&*p + &*root).div_floor(q)
        } else {
            (-&*p - &*root - BigInt::one()).div_floor(&-q.clone())
        };
        let p_next = &a * &*q - &*p;
        let q_next = (&*d - &p_next * &p_next) / &*q;
        *p = p_next;
        *q = q_next;
        a
    }

    fn next(&mut self) -> Option<BigUint> {
        match self {
            Stream::Cycle { list, pos } => {
                let a = list[*pos % list.len()];
                *pos += 1;
                Some(BigUint::from(a))
            }
            Stream::Prefix { prefix, pos, then } => {
                if *pos < prefix.len() {
                    *pos += 1;
                    Some(BigUint::from(prefix[*pos - 1]))
                } else {
                    then.map(BigUint::from)
                }
            }
            Stream::Quadratic { .. } => {
                let a = self.next_quadratic();
                Some(a.to_biguint().expect("partial quotient of a quadratic irrational is positive"))
            }
            Stream::SquareGrowth { q_prev, q_cur, started, q1 } => {
                if !*started {
                    *started = true;
                    return Some(BigUint::from(*q1));
                }
                let a = q_cur.clone();
                let next = &a * &*q_cur + &*q_prev;
                *q_prev = std::mem::replace(q_cur, next);
                Some(a)
            }
        }
    }
}

/// An irrational α ∈ (0,1) given by its partial-quotient stream, with cached
/// convergents. Extension mutates the cache, so sharing across threads goes
/// through an immutable [`ConvergentTable`] snapshot.
#[derive(Clone, Debug)]
pub struct RotationNumber {
    source: AlphaSource,
    stream: Stream,
    exhausted: bool,
    /// a[k] = a_k, a[0] unused.
    a: Vec<BigUint>,
    /// p[k + 1] = p_k for k >= -1.
    p: Vec<BigUint>,
    q: Vec<BigUint>,
}

impl RotationNumber {
    pub fn new(source: AlphaSource) -> Self {
        let stream = Stream::new(&source);
        Self {
            source,
            stream,
            exhausted: false,
            a: vec![BigUint::zero()],
            p: vec![BigUint::one(), BigUint::zero()],
            q: vec![BigUint::zero(), BigUint::one()],
        }
    }

    pub fn golden() -> Self {
        Self::new(AlphaSource::Golden)
    }

    pub fn sqrt3m1() -> Self {
        Self::new(AlphaSource::Sqrt3m1)
    }

    pub fn parse(spec: &str) -> Result<Self> {
        Ok(Self::new(spec.parse()?))
    }

    pub fn source(&self) -> &AlphaSource {
        &self.source
    }

    /// Number of partial quotients generated so far.
    pub fn known_terms(&self) -> usize {
        self.a.len() - 1
    }

    /// Generate quotients through `a_n`; fails if the stream ends first.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.known_terms() < n {
            if self.exhausted {
                return Err(Error::InsufficientExpansion {
                    needed: n,
                    available: self.known_terms(),
                });
            }
            match self.stream.next() {
                Some(a) => {
                    let k = self.a.len();
                    let pk = &a * &self.p[k] + &self.p[k - 1];
                    let qk = &a * &self.q[k] + &self.q[k - 1];
                    self.a.push(a);
                    self.p.push(pk);
                    self.q.push(qk);
                }
                None => self.exhausted = true,
            }
        }
        Ok(())
    }

    /// Extend while `pred(self)` holds and the stream has terms, up to `cap`.
    fn extend_while(&mut self, cap: usize, mut pred: impl FnMut(&Self) -> bool) {
        while self.known_terms() < cap && pred(self) {
            if self.extend_to(self.known_terms() + 1).is_err() {
                break;
            }
        }
    }

    pub fn quotient(&mut self, n: usize) -> Result<&BigUint> {
        assert!(n >= 1);
        self.extend_to(n)?;
        Ok(&self.a[n])
    }

    /// q_n for n >= -1.
    pub fn q(&mut self, n: isize) -> Result<&BigUint> {
        if n > 0 {
            self.extend_to(n as usize)?;
        }
        Ok(&self.q[(n + 1) as usize])
    }

    pub fn p(&mut self, n: isize) -> Result<&BigUint> {
        if n > 0 {
            self.extend_to(n as usize)?;
        }
        Ok(&self.p[(n + 1) as usize])
    }

    /// Rational enclosure of α from `a₁..a_m`, as `(lo, hi)`.
    pub fn alpha_enclosure(&mut self, m: usize) -> Result<RatInterval> {
        assert!(m >= 1);
        self.extend_to(m)?;
        Ok(self.enclosure_at(m))
    }

    fn enclosure_at(&self, m: usize) -> RatInterval {
        let i = m + 1;
        let conv = BigRational::new(to_int(&self.p[i]), to_int(&self.q[i]));
        let med = BigRational::new(
            to_int(&(&self.p[i] + &self.p[i - 1])),
            to_int(&(&self.q[i] + &self.q[i - 1])),
        );
        RatInterval::hull(conv, med)
    }

    /// Snapshot of convergents `1..=depth` with certified `‖qₙα‖`.
    ///
    /// Needs `a₁..a_{depth+2}`; when the stream allows it, α is refined
    /// further so that every `θₙ` has relative width at most `2/qₙ₊₂`.
    pub fn convergents(&mut self, depth: usize) -> Result<ConvergentTable> {
        if depth == 0 {
            return Err(Error::InvalidArgument("depth must be >= 1".into()));
        }
        let min_m = depth + 2;
        self.extend_to(min_m)?;
        // 64 extra bits keep the f64 views of θₙ near full precision.
        let target = (&self.q[depth + 1] * &self.q[depth + 2] * &self.q[depth + 3]) << 64u32;
        // α-enclosure width at depth m is 1/(q_m (q_m + q_{m-1})).
        let width_ok = |r: &Self, m: usize| -> bool {
            let qm = &r.q[m + 1];
            qm * (qm + &r.q[m]) >= target
        };
        self.extend_while(MAX_REFINE_DEPTH, |r| !width_ok(r, r.known_terms()));
        let m = self.known_terms();
        let m = if width_ok(self, m) {
            // The smallest m that satisfies the width target.
            (min_m..=m).find(|&k| width_ok(self, k)).unwrap_or(m)
        } else {
            m
        };
        Ok(ConvergentTable {
            source: self.source.to_string(),
            depth,
            refine_depth: m,
            a: self.a[..=m].to_vec(),
            p: self.p[..=m + 1].to_vec(),
            q: self.q[..=m + 1].to_vec(),
            alpha: self.enclosure_at(m),
        })
    }

    /// Certified sign of `coef·α − offset`, refining the expansion as needed.
    pub fn sign_of(&mut self, form: &LinearForm) -> Result<Ordering> {
        if form.coef.is_zero() {
            return Ok(form.offset.cmp(&BigInt::zero()).reverse());
        }
        let mut m = 1usize;
        loop {
            if self.extend_to(m).is_err() {
                return Err(Error::Undecidable(self.known_terms()));
            }
            let i = m + 1;
            let s1 = form.sign_at(&to_int(&self.p[i]), &to_int(&self.q[i]));
            let s2 = form.sign_at(
                &to_int(&(&self.p[i] + &self.p[i - 1])),
                &to_int(&(&self.q[i] + &self.q[i - 1])),
            );
            // α lies strictly between the two endpoints and the form is affine.
            let pos = s1 == Ordering::Greater || s2 == Ordering::Greater;
            let neg = s1 == Ordering::Less || s2 == Ordering::Less;
            if pos && !neg {
                return Ok(Ordering::Greater);
            }
            if neg && !pos {
                return Ok(Ordering::Less);
            }
            if m >= MAX_REFINE_DEPTH {
                return Err(Error::Undecidable(m));
            }
            m += 1;
        }
    }

    /// Certified `floor(k·α)`.
    pub fn floor_mul(&mut self, k: &BigInt) -> Result<BigInt> {
        if k.is_zero() {
            return Ok(BigInt::zero());
        }
        let mut m = 1usize;
        loop {
            if self.extend_to(m).is_err() {
                return Err(Error::Undecidable(self.known_terms()));
            }
            let i = m + 1;
            let f1 = (k * to_int(&self.p[i])).div_floor(&to_int(&self.q[i]));
            let num2 = k * to_int(&(&self.p[i] + &self.p[i - 1]));
            let den2 = to_int(&(&self.q[i] + &self.q[i - 1]));
            let f2 = num2.div_floor(&den2);
            // kα lies strictly between the endpoint values.
            if f1 == f2 {
                return Ok(f1);
            }
            if m >= MAX_REFINE_DEPTH {
                return Err(Error::Undecidable(m));
            }
            m += 1;
        }
    }

    /// Double-precision value, for oracles only.
    pub fn to_f64(&mut self) -> f64 {
        let _ = self.extend_to(1);
        self.extend_while(200, |r| r.q.last().map_or(0, |q| q.bits()) < 128);
        self.enclosure_at(self.known_terms().max(1)).mid_f64()
    }
}

pub(crate) fn to_int(x: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, x.clone())
}

/// The affine form `coef·α − offset`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearForm {
    pub coef: BigInt,
    pub offset: BigInt,
}

impl LinearForm {
    pub fn new(coef: impl Into<BigInt>, offset: impl Into<BigInt>) -> Self {
        Self { coef: coef.into(), offset: offset.into() }
    }

    /// Sign of the form at α = num/den (den > 0).
    fn sign_at(&self, num: &BigInt, den: &BigInt) -> Ordering {
        (&self.coef * num - &self.offset * den).cmp(&BigInt::zero())
    }

    pub fn eval(&self, alpha: &RatInterval) -> RatInterval {
        let c = BigRational::from_integer(self.coef.clone());
        let o = BigRational::from_integer(self.offset.clone());
        RatInterval::hull(&c * &alpha.lo - &o, &c * &alpha.hi - &o)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coef: &self.coef - &other.coef,
            offset: &self.offset - &other.offset,
        }
    }
}

/// Closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    pub fn hull(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn abs(&self) -> Self {
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = if -self.lo.clone() > self.hi { -self.lo.clone() } else { self.hi.clone() };
            Self { lo: BigRational::zero(), hi: m }
        } else if self.hi <= BigRational::zero() {
            Self { lo: -self.hi.clone(), hi: -self.lo.clone() }
        } else {
            self.clone()
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn to_interval(&self) -> Interval {
        let lo = Interval::from_rational(&self.lo).lo;
        let hi = Interval::from_rational(&self.hi).hi;
        Interval::new(lo.max(if self.lo.is_negative() { f64::NEG_INFINITY } else { 0.0 }), hi)
    }

    /// Enclosure of `ln x` over a strictly positive rational interval.
    pub fn ln(&self) -> Interval {
        assert!(self.lo.is_positive());
        Interval::new(ln_rational(&self.lo).lo, ln_rational(&self.hi).hi)
    }

    pub fn mid_f64(&self) -> f64 {
        let two = BigRational::from_integer(BigInt::from(2));
        ((&self.lo + &self.hi) / two).to_f64().unwrap_or(f64::NAN)
    }
}

/// One convergent with its derived quantities.
#[derive(Clone, Debug, Serialize)]
pub struct Convergent {
    pub n: usize,
    pub a: String,
    pub p: String,
    pub q: String,
    /// Enclosure of ‖qₙα‖.
    pub theta: Interval,
    /// ⌊(qₙ+qₙ₊₁)/2⌋.
    pub big_n: String,
    /// qₙ+qₙ₊₁.
    pub big_q: String,
}

/// Immutable snapshot of an expansion; safe to share across threads.
#[derive(Clone, Debug)]
pub struct ConvergentTable {
    source: String,
    depth: usize,
    refine_depth: usize,
    a: Vec<BigUint>,
    p: Vec<BigUint>,
    q: Vec<BigUint>,
    alpha: RatInterval,
}

impl ConvergentTable {
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Largest n with a certified θₙ.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Depth of the α-enclosure used for θ.
    pub fn refine_depth(&self) -> usize {
        self.refine_depth
    }

    /// Largest n for which qₙ is stored.
    pub fn max_index(&self) -> usize {
        self.refine_depth
    }

    pub fn alpha(&self) -> &RatInterval {
        &self.alpha
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.mid_f64()
    }

    pub fn a(&self, n: usize) -> &BigUint {
        assert!(n >= 1 && n <= self.refine_depth, "a_{n} not in table");
        &self.a[n]
    }

    /// qₙ for -1 <= n <= max_index.
    pub fn q(&self, n: isize) -> &BigUint {
        assert!(n >= -1 && n <= self.refine_depth as isize, "q_{n} not in table");
        &self.q[(n + 1) as usize]
    }

    pub fn p(&self, n: isize) -> &BigUint {
        assert!(n >= -1 && n <= self.refine_depth as isize, "p_{n} not in table");
        &self.p[(n + 1) as usize]
    }

    /// Nₙ = ⌊(qₙ+qₙ₊₁)/2⌋.
    pub fn big_n(&self, n: usize) -> BigUint {
        self.big_q(n) >> 1
    }

    /// Qₙ = qₙ+qₙ₊₁.
    pub fn big_q(&self, n: usize) -> BigUint {
        assert!(n < self.refine_depth, "q_{} not in table", n + 1);
        self.q(n as isize) + self.q(n as isize + 1)
    }

    /// Exact enclosure of ‖qₙα‖ = |qₙα − pₙ|, for n <= depth.
    pub fn theta_exact(&self, n: usize) -> RatInterval {
        assert!(n <= self.depth, "theta_{n} beyond table depth {}", self.depth);
        LinearForm::new(to_int(self.q(n as isize)), to_int(self.p(n as isize)))
            .eval(&self.alpha)
            .abs()
    }

    pub fn theta(&self, n: usize) -> Interval {
        self.theta_exact(n).to_interval()
    }

    pub fn convergent(&self, n: usize) -> Convergent {
        assert!(n >= 1 && n <= self.depth);
        Convergent {
            n,
            a: self.a(n).to_string(),
            p: self.p(n as isize).to_string(),
            q: self.q(n as isize).to_string(),
            theta: self.theta(n),
            big_n: self.big_n(n).to_string(),
            big_q: self.big_q(n).to_string(),
        }
    }

    pub fn convergents(&self) -> Vec<Convergent> {
        (1..=self.depth).map(|n| self.convergent(n)).collect()
    }

    /// `ln qₙ` enclosure.
    pub fn ln_q(&self, n: usize) -> Interval {
        ln_biguint(self.q(n as isize))
    }

    /// Checks the chain 1/((aₙ₊₁+2)qₙ) < 1/(qₙ₊₁+qₙ) < θₙ < 1/qₙ₊₁ < 1/(aₙ₊₁qₙ)
    /// with the whole θ enclosure strictly inside.
    pub fn chain_holds(&self, n: usize) -> bool {
        let theta = self.theta_exact(n);
        let qn = to_int(self.q(n as isize));
        let qn1 = to_int(self.q(n as isize + 1));
        let an1 = to_int(self.a(n + 1));
        let one = BigInt::one();
        let r = |d: BigInt| BigRational::new(one.clone(), d);
        let b0 = r((&an1 + BigInt::from(2)) * &qn);
        let b1 = r(&qn1 + &qn);
        let b2 = r(qn1.clone());
        let b3 = r(&an1 * &qn);
        b0 < b1 && b1 < theta.lo && theta.hi < b2 && b2 <= b3
    }
}

/// Free-function form of [`RotationNumber::convergents`].
pub fn convergents(alpha: &mut RotationNumber, depth: usize) -> Result<Vec<Convergent>> {
    Ok(alpha.convergents(depth)?.convergents())
}

/// Certified enclosure of ‖qₙα‖.
pub fn norm_q_alpha(alpha: &mut RotationNumber, n: usize) -> Result<Interval> {
    Ok(alpha.convergents(n.max(1))?.theta(n))
}

/// Nₙ = ⌊(qₙ+qₙ₊₁)/2⌋.
pub fn three_gap_threshold(alpha: &mut RotationNumber, n: usize) -> Result<BigUint> {
    let qn = alpha.q(n as isize)?.clone();
    let qn1 = alpha.q(n as isize + 1)?.clone();
    Ok((qn + qn1) >> 1)
}

/// Finite-window estimate of the Diophantine class from convergent growth.
#[derive(Clone, Debug, Serialize)]
pub struct DiophantineEstimate {
    pub window: (usize, usize),
    /// (n, ln qₙ₊₁ / ln qₙ)
    pub ratios: Vec<(usize, f64)>,
    pub nu_hat: f64,
    pub label: &'static str,
}

pub const DIOPHANTINE_LABEL: &str =
    "finite-window estimate: max of ln q_{n+1}/ln q_n over the window";

pub fn diophantine_class_estimate(
    alpha: &mut RotationNumber,
    window: (usize, usize),
) -> Result<DiophantineEstimate> {
    let (lo, hi) = window;
    if lo < 2 || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "diophantine window {lo}..{hi} must satisfy 2 <= start <= end"
        )));
    }
    alpha.extend_to(hi + 1)?;
    let mut ratios = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        let qn = alpha.q(n as isize)?.clone();
        let qn1 = alpha.q(n as isize + 1)?.clone();
        let r = ln_biguint(&qn1).mid() / ln_biguint(&qn).mid();
        ratios.push((n, r));
    }
    let nu_hat = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(DiophantineEstimate {
        window,
        ratios,
        nu_hat,
        label: DIOPHANTINE_LABEL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(alpha: &mut RotationNumber, depth: usize) -> Vec<u64> {
        let t = alpha.convergents(depth).unwrap();
        (1..=depth).map(|n| t.q(n as isize).to_u64().unwrap()).collect()
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        assert_eq!(qs(&mut RotationNumber::golden(), 5), vec![1, 2, 3, 5, 8]);
    }

    #[test]
    fn sqrt3m1_denominators() {
        assert_eq!(qs(&mut RotationNumber::sqrt3m1(), 6), vec![1, 3, 4, 11, 15, 41]);
    }

    #[test]
    fn sqrt2m1_denominators() {
        assert_eq!(qs(&mut RotationNumber::parse("cf:2").unwrap(), 4), vec![2, 5, 12, 29]);
    }

    #[test]
    fn quadratic_sources_reproduce_presets() {
        let mut g = RotationNumber::parse("quad:-1,1,2,5").unwrap();
        let mut s = RotationNumber::parse("quad:-1,1,1,3").unwrap();
        let mut r2 = RotationNumber::parse("quad:0,1,1,2").unwrap();
        let mut neg = RotationNumber::parse("quad:3,-1,1,5").unwrap(); // 3 - √5 = 0.7639…
        for n in 1..=30 {
            assert_eq!(g.quotient(n).unwrap(), &BigUint::one());
            let want = if n % 2 == 1 { 1u32 } else { 2 };
            assert_eq!(s.quotient(n).unwrap(), &BigUint::from(want));
            assert_eq!(r2.quotient(n).unwrap(), &BigUint::from(2u32));
        }
        // 3 - √5 = [0; 1, 3, 4, 4, 4, ...]: 1/0.7639 = 1.309, 1/0.309 = 3.236, 1/0.236 = 4.236
        let v: Vec<u64> = (1..=6).map(|n| neg.quotient(n).unwrap().to_u64().unwrap()).collect();
        assert_eq!(v, vec![1, 3, 4, 4, 4, 4]);
        assert!((neg.to_f64() - (3.0 - 5f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn square_growth_denominators() {
        let mut a = RotationNumber::parse("squaregrowth:2").unwrap();
        let t = a.convergents(3).unwrap();
        let q: Vec<String> = (1..=5).map(|n| t.q(n).to_string()).collect();
        assert_eq!(q, vec!["2", "5", "27", "734", "538783"]);
    }

    #[test]
    fn finite_prefix_reports_needed_depth() {
        let mut a = RotationNumber::parse("cfonce:1,2,3").unwrap();
        match a.convergents(2) {
            Err(Error::InsufficientExpansion { needed, available }) => {
                assert_eq!((needed, available), (4, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut b = RotationNumber::parse("cfonce:1,2,3;then:5").unwrap();
        let t = b.convergents(4).unwrap();
        assert_eq!(t.a(4), &BigUint::from(5u32));
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in ["", "gold", "cf:", "cf:1,0", "quad:1,1,1,4", "quad:1,1,0,5", "squaregrowth:x"] {
            assert!(bad.parse::<AlphaSource>().is_err(), "{bad}");
        }
        for good in ["golden", "sqrt3m1", "cf:1,2,3", "cfonce:1,2;then:3", "squaregrowth:2"] {
            let s: AlphaSource = good.parse().unwrap();
            assert_eq!(s.to_string(), good);
        }
    }

    #[test]
    fn norm_examples() {
        let g = norm_q_alpha(&mut RotationNumber::golden(), 1).unwrap();
        assert!((g.mid() - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15, "{g}");
        let g2 = norm_q_alpha(&mut RotationNumber::golden(), 2).unwrap();
        assert!((g2.mid() - (5f64.sqrt() - 2.0)).abs() < 1e-15, "{g2}");
        let s = norm_q_alpha(&mut RotationNumber::sqrt3m1(), 4).unwrap();
        let expected = 11.0 * (3f64.sqrt() - 1.0) - 8.0;
        assert!((s.mid() - expected).abs() < 1e-12 && s.width() < 1e-10, "{s}");
    }

    #[test]
    fn norm_relative_width_bound() {
        for spec in ["golden", "sqrt3m1", "cf:2", "squaregrowth:2", "cf:1,5,2"] {
            let mut a = RotationNumber::parse(spec).unwrap();
            let depth = if spec.starts_with("square") { 4 } else { 25 };
            let t = a.convergents(depth).unwrap();
            for n in 1..=depth {
                let th = t.theta_exact(n);
                let rel = th.width() / &th.lo;
                let bound = BigRational::new(BigInt::from(2), to_int(t.q(n as isize + 2)));
                assert!(rel <= bound, "{spec} n={n}");
            }
        }
    }

    #[test]
    fn thresholds() {
        let mut g = RotationNumber::golden();
        assert_eq!(three_gap_threshold(&mut g, 4).unwrap(), BigUint::from(6u32));
        assert_eq!(three_gap_threshold(&mut g, 1).unwrap(), BigUint::from(1u32));
        let mut s = RotationNumber::sqrt3m1();
        assert_eq!(three_gap_threshold(&mut s, 4).unwrap(), BigUint::from(13u32));
    }

    #[test]
    fn diophantine_estimates() {
        let g = diophantine_class_estimate(&mut RotationNumber::golden(), (10, 30)).unwrap();
        assert!(g.ratios.iter().all(|&(_, r)| r <= 1.11));
        assert!(g.ratios.iter().filter(|r| r.0 >= 11).all(|&(_, r)| r <= 1.10));
        assert!((g.ratios.last().unwrap().1 - 1.0) < 0.04);

        let mut sg = RotationNumber::parse("squaregrowth:2").unwrap();
        let e = diophantine_class_estimate(&mut sg, (2, 5)).unwrap();
        // q = 2, 5, 27, 734, 538783, 538783² + 734
        let q6 = 538783f64 * 538783.0 + 734.0;
        let oracle = [
            27f64.ln() / 5f64.ln(),
            734f64.ln() / 27f64.ln(),
            538783f64.ln() / 734f64.ln(),
            q6.ln() / 538783f64.ln(),
        ];
        for (got, want) in e.ratios.iter().zip(oracle) {
            assert!((got.1 - want).abs() < 1e-12, "{got:?} vs {want}");
        }
        assert!((e.nu_hat - oracle[0]).abs() < 1e-12);

        let k = diophantine_class_estimate(&mut RotationNumber::parse("cf:3").unwrap(), (20, 60)).unwrap();
        assert!(k.ratios.last().unwrap().1 < 1.03);
        assert!(diophantine_class_estimate(&mut RotationNumber::golden(), (1, 4)).is_err());
    }

    #[test]
    fn sign_and_floor_are_certified() {
        let mut g = RotationNumber::golden();
        // 5α − 3 = 0.0901… > 0, 8α − 5 = −0.0557… < 0
        assert_eq!(g.sign_of(&LinearForm::new(5, 3)).unwrap(), Ordering::Greater);
        assert_eq!(g.sign_of(&LinearForm::new(8, 5)).unwrap(), Ordering::Less);
        assert_eq!(g.floor_mul(&BigInt::from(-7)).unwrap(), BigInt::from(-5));
        assert_eq!(g.floor_mul(&BigInt::from(100)).unwrap(), BigInt::from(61));
    }
}
