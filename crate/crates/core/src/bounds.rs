//! Lower and upper bounds on `H_β(Ω)` built from convergent denominators and
//! gap-length range minima.
//!
//! All lower-bound values are `qₙ·S^β` where `S` is a sum of block minima;
//! they are computed in the log domain so that huge `qₙ` and tiny gaps stay
//! representable. Lower endpoints of lower-bound intervals and upper
//! endpoints of upper-bound intervals are the safe ones.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaps::{zeta_interval, GapIndex, GapSequence};
use crate::interval::{ln_biguint, log_sum_exp, Interval};
use crate::rotation::{diophantine_class_estimate, to_int, ConvergentTable, RotationNumber};

/// Offsets tried exhaustively up to this block length.
pub const FULL_OFFSET_LIMIT: u64 = 10_000;
/// Evenly spaced offsets tried beyond [`FULL_OFFSET_LIMIT`].
pub const SAMPLED_OFFSETS: usize = 64;
/// Default positivity threshold τ for the bisection predicate.
pub const DEFAULT_TAU: f64 = 1e-6;
/// Slopes below this magnitude count as flat.
const FLAT_SLOPE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    A,
    B,
    C,
    OrderStat(u32),
    UpperCover,
}

impl Method {
    pub fn direction(&self) -> Direction {
        match self {
            Method::UpperCover => Direction::Upper,
            _ => Direction::Lower,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::A => f.write_str("A"),
            Method::B => f.write_str("B"),
            Method::C => f.write_str("C"),
            Method::OrderStat(m) => write!(f, "order-stat({m})"),
            Method::UpperCover => f.write_str("upper-cover"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "a" => Ok(Method::A),
            "b" => Ok(Method::B),
            "c" => Ok(Method::C),
            "upper" | "upper-cover" => Ok(Method::UpperCover),
            _ => {
                let m = t
                    .strip_prefix("os:")
                    .or_else(|| t.strip_prefix("order-stat:"))
                    .and_then(|m| m.parse::<u32>().ok())
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown method `{s}` (a | b | c | os:M | upper)"))
                    })?;
                Ok(Method::OrderStat(m))
            }
        }
    }
}

/// Which block offsets φ are tried by methods C and order-stat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OffsetPolicy {
    /// All residues when the block length is at most [`FULL_OFFSET_LIMIT`],
    /// otherwise [`SAMPLED_OFFSETS`] evenly spaced ones plus the symmetric one.
    Auto,
    /// Only `φ = −⌊P/2⌋` for block length P.
    Symmetric,
    /// `k` evenly spaced residues plus the symmetric one.
    Sampled(usize),
    /// Explicit offsets.
    Fixed(Vec<i64>),
}

impl FromStr for OffsetPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "auto" => Ok(OffsetPolicy::Auto),
            "symmetric" => Ok(OffsetPolicy::Symmetric),
            _ => {
                if let Some(k) = t.strip_prefix("sampled:") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad offset policy `{s}`")))?;
                    return Ok(OffsetPolicy::Sampled(k.max(1)));
                }
                if let Some(list) = t.strip_prefix("fixed:") {
                    let v: std::result::Result<Vec<i64>, _> = list.split(',').map(|x| x.trim().parse()).collect();
                    return v
                        .map(OffsetPolicy::Fixed)
                        .map_err(|_| Error::InvalidArgument(format!("bad offset list `{list}`")));
                }
                Err(Error::InvalidArgument(format!(
                    "unknown offset policy `{s}` (auto | symmetric | sampled:K | fixed:a,b,..)"
                )))
            }
        }
    }
}

impl OffsetPolicy {
    fn offsets(&self, block: &BigUint) -> Vec<BigInt> {
        let p = to_int(block);
        let sym: BigInt = -(&p >> 1u32);
        let spaced = |k: usize| -> Vec<BigInt> {
            let mut v: Vec<BigInt> = (0..k).map(|i| &sym + (&p * BigInt::from(i)) / BigInt::from(k)).collect();
            v.sort();
            v.dedup();
            v
        };
        match self {
            OffsetPolicy::Symmetric => vec![sym],
            OffsetPolicy::Fixed(list) => list.iter().map(|&x| BigInt::from(x)).collect(),
            OffsetPolicy::Sampled(k) => spaced(*k),
            OffsetPolicy::Auto => match block.to_u64() {
                Some(b) if b <= FULL_OFFSET_LIMIT => (0..b).map(|j| &sym + BigInt::from(j)).collect(),
                _ => spaced(SAMPLED_OFFSETS),
            },
        }
    }
}

/// Index type usable for block arithmetic, convertible from `BigInt`.
trait BlockIndex: GapIndex + TryFrom<BigInt> + Send + Sync {}
impl<T: GapIndex + TryFrom<BigInt> + Send + Sync> BlockIndex for T {}

fn conv<I: BlockIndex>(x: &BigInt) -> I {
    I::try_from(x.clone()).ok().expect("index fits")
}

/// Whether block arithmetic up to `reach` stays comfortably inside i64.
fn fits_i64(reach: &BigUint) -> bool {
    reach.bits() < 60
}

fn ln_sum_of_block_mins<I: BlockIndex>(seq: &GapSequence, blocks: &[(I, I)]) -> Result<Interval> {
    let terms: Result<Vec<Interval>> = blocks.iter().map(|(a, b)| seq.range_min_ln(a, b)).collect();
    Ok(log_sum_exp(&terms?).expect("at least one block"))
}

fn b_blocks<I: BlockIndex>(big_n: &BigInt, l: u64) -> Vec<(I, I)> {
    let n: I = conv(big_n);
    let l = l as i64;
    (-l..=l)
        .map(|k| (n.clone() * I::from(2 * k - 1), n.clone() * I::from(2 * k + 1)))
        .collect()
}

fn periodic_blocks<I: BlockIndex>(phi: &BigInt, len: &BigInt, l: u64) -> Vec<(I, I)> {
    let phi: I = conv(phi);
    let len: I = conv(len);
    let l = l as i64;
    (-l..=l)
        .map(|k| {
            let start = phi.clone() + len.clone() * I::from(k);
            let end = start.clone() + len.clone() - I::from(1);
            (start, end)
        })
        .collect()
}

/// `ln Σ_blocks (sum of the m smallest lengths in the block)`.
fn ln_sum_of_block_order_stats<I: BlockIndex>(seq: &GapSequence, blocks: &[(I, I)], m: usize) -> Result<Interval> {
    let mut terms = Vec::with_capacity(blocks.len() * m);
    for (a, b) in blocks {
        terms.extend(seq.range_k_smallest_ln(a, b, m)?);
    }
    Ok(log_sum_exp(&terms).expect("at least one block"))
}

/// `ln(qₙ S^β) = ln qₙ + β ln S`.
fn combine(table: &ConvergentTable, n: usize, beta: f64, ln_s: Interval) -> Interval {
    table.ln_q(n) + Interval::point(beta) * ln_s
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be positive")));
    }
    Ok(())
}

fn check_n(table: &ConvergentTable, n: usize) -> Result<()> {
    if n < 1 || n + 1 > table.depth() {
        return Err(Error::InvalidArgument(format!(
            "n = {n} needs a convergent table of depth >= {} (have {})",
            n + 1,
            table.depth()
        )));
    }
    Ok(())
}

/// Log-domain enclosure of `qₙ·min{ℓᵢ : |i| ≤ Nₙ}^β`.
pub fn bound_a_ln(table: &ConvergentTable, seq: &GapSequence, beta: f64, n: usize) -> Result<Interval> {
    check_beta(beta)?;
    check_n(table, n)?;
    let big_n = to_int(&table.big_n(n));
    let min = if fits_i64(&table.big_n(n)) {
        let v = big_n.to_i64().unwrap();
        seq.range_min_ln(&-v, &v)?
    } else {
        seq.range_min_ln(&-big_n.clone(), &big_n)?
    };
    Ok(combine(table, n, beta, min))
}

/// `qₙ·min{ℓᵢ : −Nₙ ≤ i ≤ Nₙ}^β`.
pub fn bound_a(table: &ConvergentTable, seq: &GapSequence, beta: f64, n: usize) -> Result<Interval> {
    Ok(bound_a_ln(table, seq, beta, n)?.exp())
}

/// Log-domain `qₙ·(Σ_{|l|≤L} min{ℓᵢ : (2l−1)Nₙ ≤ i ≤ (2l+1)Nₙ})^β`.
pub fn bound_b_ln(table: &ConvergentTable, seq: &GapSequence, beta: f64, n: usize, l: u64) -> Result<Interval> {
    check_beta(beta)?;
    check_n(table, n)?;
    let nb = table.big_n(n);
    let big_n = to_int(&nb);
    let reach = &nb * BigUint::from(2 * l + 2);
    let s = if fits_i64(&reach) {
        ln_sum_of_block_mins::<i64>(seq, &b_blocks(&big_n, l))?
    } else {
        ln_sum_of_block_mins::<BigInt>(seq, &b_blocks(&big_n, l))?
    };
    Ok(combine(table, n, beta, s))
}

pub fn bound_b(table: &ConvergentTable, seq: &GapSequence, beta: f64, n: usize, l: u64) -> Result<Interval> {
    Ok(bound_b_ln(table, seq, beta, n, l)?.exp())
}

/// Result of a sup over block offsets.
#[derive(Clone, Debug, Serialize)]
pub struct OffsetBound {
    /// Log-domain enclosure of the supremum over tried offsets.
    pub ln_value: Interval,
    pub value: Interval,
    /// Offset with the largest lower endpoint.
    pub best_offset: String,
    pub offsets_tried: usize,
    /// Log-domain value at the worst tried offset.
    pub worst_ln_value: Interval,
}

fn sup_over_offsets<F>(offsets: &[BigInt], eval: F) -> Result<OffsetBound>
where
    F: Fn(&BigInt) -> Result<Interval> + Sync,
{
    let vals: Result<Vec<Interval>> = offsets.par_iter().map(&eval).collect();
    let vals = vals?;
    let (best, _) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.lo.total_cmp(&b.1.lo))
        .expect("at least one offset");
    let sup = Interval::new(
        vals.iter().map(|v| v.lo).fold(f64::NEG_INFINITY, f64::max),
        vals.iter().map(|v| v.hi).fold(f64::NEG_INFINITY, f64::max),
    );
    let worst = Interval::new(
        vals.iter().map(|v| v.lo).fold(f64::INFINITY, f64::min),
        vals.iter().map(|v| v.hi).fold(f64::INFINITY, f64::min),
    );
    Ok(OffsetBound {
        ln_value: sup,
        value: sup.exp(),
        best_offset: offsets[best].to_string(),
        offsets_tried: offsets.len(),
        worst_ln_value: worst,
    })
}

/// `qₙ·sup_φ (Σ_{|l|≤L} min{ℓᵢ : φ+lQₙ ≤ i < φ+(l+1)Qₙ})^β` over the offsets
/// selected by `policy`.
pub fn bound_c(
    table: &ConvergentTable,
    seq: &GapSequence,
    beta: f64,
    n: usize,
    l: u64,
    policy: &OffsetPolicy,
) -> Result<OffsetBound> {
    bound_order_stat(table, seq, beta, n, 1, l, policy)
}

/// Blocks of length `m·Qₙ`, each contributing the sum of its `m` smallest
/// lengths; `m = 1` is method C.
pub fn bound_order_stat(
    table: &ConvergentTable,
    seq: &GapSequence,
    beta: f64,
    n: usize,
    m: u32,
    l: u64,
    policy: &OffsetPolicy,
) -> Result<OffsetBound> {
    check_beta(beta)?;
    check_n(table, n)?;
    if m == 0 {
        return Err(Error::InvalidArgument("multiplicity m must be >= 1".into()));
    }
    let block = table.big_q(n) * BigUint::from(m);
    let len = to_int(&block);
    let offsets = policy.offsets(&block);
    let max_off = offsets.iter().map(|o| o.magnitude().clone()).max().unwrap_or_default();
    let reach = &block * BigUint::from(2 * l + 3) + max_off;
    let small = fits_i64(&reach);
    sup_over_offsets(&offsets, |phi| {
        let s = if small {
            ln_sum_of_block_order_stats::<i64>(seq, &periodic_blocks(phi, &len, l), m as usize)?
        } else {
            ln_sum_of_block_order_stats::<BigInt>(seq, &periodic_blocks(phi, &len, l), m as usize)?
        };
        Ok(combine(table, n, beta, s))
    })
}

/// `(2n+1)^{1−δ}·(Σ_{|k|>n} ℓ_k)^δ`, an upper bound for the δ-measure of the
/// cover by the `2n+1` hulls left after removing `J_k`, `|k| ≤ n`.
pub fn upper_bound_cover(seq: &GapSequence, delta: f64, n: u64) -> Result<Interval> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0,1)")));
    }
    let tail = seq.tail_sum(n)?;
    let d = Interval::point(delta);
    let count = Interval::point((2 * n + 1) as f64);
    Ok((count.ln() * (Interval::point(1.0) - d) + tail.ln() * d).exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub n: u64,
    pub q_n: String,
    pub big_n: String,
    pub big_q: String,
    pub value: Interval,
    pub ln_value: Interval,
    pub truncation_l: Option<u64>,
    pub offset: Option<String>,
    pub offsets_tried: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundSeries {
    pub alpha: String,
    pub model: String,
    pub method: Method,
    pub direction: Direction,
    pub beta: f64,
    pub rows: Vec<BoundRow>,
    pub liminf: Option<LiminfReport>,
}

impl BoundSeries {
    pub fn row(&self, n: u64) -> Option<&BoundRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Options shared by the series builders.
#[derive(Clone, Debug)]
pub struct SeriesOptions {
    pub l: u64,
    pub policy: OffsetPolicy,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { l: 1000, policy: OffsetPolicy::Auto }
    }
}

/// One row per `n` in `[n_lo, n_hi]`, computed in parallel.
pub fn bound_series(
    table: &ConvergentTable,
    seq: &GapSequence,
    method: Method,
    beta: f64,
    (n_lo, n_hi): (usize, usize),
    opts: &SeriesOptions,
) -> Result<BoundSeries> {
    if n_lo < 1 || n_lo > n_hi {
        return Err(Error::EmptyRange { lo: n_lo.to_string(), hi: n_hi.to_string() });
    }
    let rows: Result<Vec<BoundRow>> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| -> Result<BoundRow> {
            let mut row = BoundRow {
                n: n as u64,
                q_n: table.q(n as isize).to_string(),
                big_n: String::new(),
                big_q: String::new(),
                value: Interval::point(0.0),
                ln_value: Interval::point(0.0),
                truncation_l: None,
                offset: None,
                offsets_tried: None,
            };
            if method != Method::UpperCover {
                row.big_n = table.big_n(n).to_string();
                row.big_q = table.big_q(n).to_string();
            }
            let ln = match method {
                Method::A => bound_a_ln(table, seq, beta, n)?,
                Method::B => {
                    row.truncation_l = Some(opts.l);
                    bound_b_ln(table, seq, beta, n, opts.l)?
                }
                Method::C | Method::OrderStat(_) => {
                    let m = if let Method::OrderStat(m) = method { m } else { 1 };
                    let r = bound_order_stat(table, seq, beta, n, m, opts.l, &opts.policy)?;
                    row.truncation_l = Some(opts.l);
                    row.offset = Some(r.best_offset);
                    row.offsets_tried = Some(r.offsets_tried);
                    r.ln_value
                }
                Method::UpperCover => upper_bound_cover(seq, beta, n as u64)?.ln(),
            };
            row.ln_value = ln;
            row.value = ln.exp();
            Ok(row)
        })
        .collect();
    Ok(BoundSeries {
        alpha: table.source().to_string(),
        model: seq.spec().to_string(),
        method,
        direction: method.direction(),
        beta,
        rows: rows?,
        liminf: None,
    })
}

/// Upper-cover rows at explicit `n` values (not tied to convergents).
pub fn upper_series(seq: &GapSequence, delta: f64, ns: &[u64]) -> Result<BoundSeries> {
    let rows: Result<Vec<BoundRow>> = ns
        .par_iter()
        .map(|&n| {
            let v = upper_bound_cover(seq, delta, n)?;
            Ok(BoundRow {
                n,
                q_n: String::new(),
                big_n: String::new(),
                big_q: String::new(),
                value: v,
                ln_value: v.ln(),
                truncation_l: None,
                offset: None,
                offsets_tried: None,
            })
        })
        .collect();
    Ok(BoundSeries {
        alpha: String::new(),
        model: seq.spec().to_string(),
        method: Method::UpperCover,
        direction: Direction::Upper,
        beta: delta,
        rows: rows?,
        liminf: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LiminfReport {
    pub window: (u64, u64),
    /// Minimum of the safe endpoints over the window.
    pub infimum: f64,
    pub argmin: u64,
    /// Least-squares slope of `ln value` against `n`.
    pub trend_slope: f64,
    pub label: &'static str,
}

pub const LIMINF_LABEL: &str = "finite-stage proxy: infimum over the window plus a least-squares trend; not a certified liminf";

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

pub fn liminf_report(series: &BoundSeries, (lo, hi): (u64, u64)) -> Result<LiminfReport> {
    let rows: Vec<&BoundRow> = series.rows.iter().filter(|r| r.n >= lo && r.n <= hi).collect();
    if rows.is_empty() {
        return Err(Error::EmptyRange { lo: lo.to_string(), hi: hi.to_string() });
    }
    let safe = |r: &BoundRow| match series.direction {
        Direction::Lower => r.value.lo,
        Direction::Upper => r.value.hi,
    };
    let best = rows
        .iter()
        .min_by(|a, b| safe(a).total_cmp(&safe(b)))
        .unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ln_value.mid()).collect();
    Ok(LiminfReport {
        window: (lo, hi),
        infimum: safe(best),
        argmin: best.n,
        trend_slope: ls_slope(&xs, &ys),
        label: LIMINF_LABEL,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BisectStatus {
    Ok,
    /// β* reached the top of the search range.
    AtUpperLimit,
    /// β* is below the bottom of the search range.
    AtLowerLimit,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct PredicateSample {
    pub beta: f64,
    pub infimum: f64,
    pub trend_slope: f64,
    pub positive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BisectReport {
    pub method: Method,
    pub window: (u64, u64),
    pub tol: f64,
    pub tau: f64,
    /// Bracket for β*; the lower endpoint is the reported lower bound.
    pub bracket: Interval,
    pub status: BisectStatus,
    pub trace: Vec<PredicateSample>,
    pub note: &'static str,
}

#[derive(Clone, Debug)]
pub struct BisectOptions {
    pub tol: f64,
    pub tau: f64,
    pub series: SeriesOptions,
    /// Grid points for the monotonicity scan.
    pub scan: usize,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self {
            tol: 0.01,
            tau: DEFAULT_TAU,
            series: SeriesOptions { l: 1000, policy: OffsetPolicy::Auto },
            scan: 20,
            beta_min: 1e-3,
            beta_max: 1.0,
        }
    }
}

/// The predicate "liminf over the window is positive": a positive trend
/// counts as positive; a flat trend counts when the infimum is at least τ.
fn predicate(
    table: &ConvergentTable,
    seq: &GapSequence,
    method: Method,
    beta: f64,
    window: (usize, usize),
    opts: &BisectOptions,
) -> Result<PredicateSample> {
    let s = bound_series(table, seq, method, beta, window, &opts.series)?;
    let r = liminf_report(&s, (window.0 as u64, window.1 as u64))?;
    let positive = r.trend_slope > FLAT_SLOPE || (r.trend_slope >= -FLAT_SLOPE && r.infimum >= opts.tau);
    Ok(PredicateSample { beta, infimum: r.infimum, trend_slope: r.trend_slope, positive })
}

fn bisect_once(
    table: &ConvergentTable,
    seq: &GapSequence,
    method: Method,
    window: (usize, usize),
    opts: &BisectOptions,
    trace: &mut Vec<PredicateSample>,
) -> Result<Option<(Interval, BisectStatus)>> {
    let k = opts.scan.max(2);
    let grid: Vec<f64> = (0..=k)
        .map(|i| opts.beta_min + (opts.beta_max - opts.beta_min) * i as f64 / k as f64)
        .collect();
    let samples: Result<Vec<PredicateSample>> =
        grid.par_iter().map(|&b| predicate(table, seq, method, b, window, opts)).collect();
    let samples = samples?;
    trace.extend(samples.iter().cloned());
    // Expect positive…positive negative…negative.
    let first_neg = samples.iter().position(|s| !s.positive).unwrap_or(samples.len());
    if samples[first_neg..].iter().any(|s| s.positive) {
        return Ok(None);
    }
    if first_neg == samples.len() {
        return Ok(Some((Interval::new(opts.beta_max - opts.tol, opts.beta_max), BisectStatus::AtUpperLimit)));
    }
    if first_neg == 0 {
        return Ok(Some((Interval::new(0.0, opts.beta_min), BisectStatus::AtLowerLimit)));
    }
    let (mut lo, mut hi) = (grid[first_neg - 1], grid[first_neg]);
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        let s = predicate(table, seq, method, mid, window, opts)?;
        if s.positive {
            lo = mid;
        } else {
            hi = mid;
        }
        trace.push(s);
    }
    Ok(Some((Interval::new(lo, hi), BisectStatus::Ok)))
}

/// Bisection on β for the sign change of the empirical liminf predicate.
pub fn dim_lower_bisect(
    table: &ConvergentTable,
    seq: &GapSequence,
    method: Method,
    window: (usize, usize),
    opts: &BisectOptions,
) -> Result<BisectReport> {
    if !(opts.tol >= 1e-3) {
        return Err(Error::InvalidArgument(format!("tol = {} must be >= 1e-3", opts.tol)));
    }
    if !matches!(method, Method::A | Method::B | Method::C) {
        return Err(Error::InvalidArgument(format!("bisection supports methods A, B, C, not {method}")));
    }
    let mut trace = Vec::new();
    let mut used = window;
    let mut result = bisect_once(table, seq, method, window, opts, &mut trace)?;
    if result.is_none() {
        // Widen the window once, as far as the table allows.
        let width = window.1 - window.0;
        let hi = (window.1 + width.max(1)).min(table.depth() - 1);
        used = (window.0, hi);
        if hi > window.1 {
            result = bisect_once(table, seq, method, used, opts, &mut trace)?;
        }
    }
    let (bracket, status) = result.unwrap_or((Interval::new(opts.beta_min, opts.beta_max), BisectStatus::Indeterminate));
    Ok(BisectReport {
        method,
        window: (used.0 as u64, used.1 as u64),
        tol: opts.tol,
        tau: opts.tau,
        bracket,
        status,
        trace,
        note: "empirical: predicate evaluated on a finite window of convergents",
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedForm {
    pub delta: f64,
    pub nu_hat: f64,
    pub value: f64,
    pub label: String,
}

/// `δ/ν̂`.
pub fn dim_lower_closed_form(delta: f64, nu_hat: f64, provenance: &str) -> Result<ClosedForm> {
    if !(delta > 0.0 && delta < 1.0) || !(nu_hat >= 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < delta < 1 and nu >= 1 (got {delta}, {nu_hat})")));
    }
    Ok(ClosedForm {
        delta,
        nu_hat,
        value: delta / nu_hat,
        label: format!("delta / nu_hat; depends on the estimate of nu ({provenance})"),
    })
}

/// Limit constants of the cover bound for the classical model.
#[derive(Clone, Debug, Serialize)]
pub struct UpperLimit {
    pub delta: f64,
    /// `c_δ = 2ζ(1/δ) − 1`.
    pub c_delta: Interval,
    /// Limit for the normalized sequence: `2(δ/((1−δ)c_δ))^δ`.
    pub normalized: Interval,
    /// Limit for the unnormalized convention: `2(δc_δ/(1−δ))^δ`.
    pub unnormalized: Interval,
    /// The printed constant uses `δ/(δ−1)`, which is negative for δ < 1.
    pub printed_factor: f64,
}

pub fn upper_limit_constants(delta: f64) -> Result<UpperLimit> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0,1)")));
    }
    let c = GapSequence::classical(delta)?.normalizer();
    let d = Interval::point(delta);
    let r = d.div(Interval::point(1.0) - d);
    let two = Interval::point(2.0);
    Ok(UpperLimit {
        delta,
        c_delta: c,
        normalized: two * (r.div(c)).pow(d),
        unnormalized: two * (r * c).pow(d),
        printed_factor: delta / (delta - 1.0),
    })
}

/// Reference constants of the golden-ratio classical example.
#[derive(Clone, Debug, Serialize)]
pub struct GoldenConstants {
    pub delta: f64,
    pub c_delta: Interval,
    /// `8c_δ^δ(1+√5)^{-2}`
    pub a_printed: f64,
    /// `2/((1+φ)c_δ^δ)`: the limit of method A for the normalized sequence.
    pub a_normalized: f64,
    /// `(1 + 2(ζ(s) − 1 − 2^{-s}ζ(s)))^δ`, s = 1/δ.
    pub b_factor: f64,
    pub b_printed: f64,
    pub b_normalized: f64,
    /// `(8/5)c_δ^δ(1+√5)^{-2}`
    pub order_stat_printed: f64,
}

pub fn golden_constants(delta: f64) -> Result<GoldenConstants> {
    let c = GapSequence::classical(delta)?.normalizer();
    let cd = c.mid().powf(delta);
    let s5 = 5f64.sqrt();
    let phi = (1.0 + s5) / 2.0;
    let z = zeta_interval(1.0 / delta, 100_000)?.value.mid();
    let s = 1.0 / delta;
    let b_factor = (1.0 + 2.0 * (z - 1.0 - 2f64.powf(-s) * z)).powf(delta);
    let a_printed = 8.0 * cd / (1.0 + s5).powi(2);
    let a_normalized = 2.0 / ((1.0 + phi) * cd);
    Ok(GoldenConstants {
        delta,
        c_delta: c,
        a_printed,
        a_normalized,
        b_factor,
        b_printed: a_printed * b_factor,
        b_normalized: a_normalized * b_factor,
        order_stat_printed: 1.6 * cd / (1.0 + s5).powi(2),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryRow {
    pub eps: f64,
    /// `1 − 1/(δ+ε)`
    pub exponent: f64,
    /// `max_n tail(n)/n^exponent` over the samples.
    pub fitted_c: f64,
    /// Least-squares slope of `ln(tail(n)/n^exponent)` against `ln n`.
    pub slope: f64,
    pub bounded: bool,
    /// `δ + ε ≥ 1`: the exponent is non-negative and the check is vacuous.
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryCheck {
    pub delta: f64,
    pub samples: Vec<u64>,
    pub rows: Vec<CorollaryRow>,
    pub label: &'static str,
}

/// Empirical test of `tail(n) ≤ C·n^{1−1/(δ+ε)}` along sampled `n`.
pub fn upper_corollary_check(seq: &GapSequence, delta: f64, eps_list: &[f64], samples: &[u64]) -> Result<CorollaryCheck> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let tails: Result<Vec<f64>> = samples.iter().map(|&n| Ok(seq.tail_sum(n)?.hi)).collect();
    let tails = tails?;
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let e = 1.0 - 1.0 / (delta + eps);
            let lnc: Vec<f64> = samples
                .iter()
                .zip(&tails)
                .map(|(&n, &t)| t.ln() - e * (n as f64).ln())
                .collect();
            let xs: Vec<f64> = samples.iter().map(|&n| (n as f64).ln()).collect();
            let slope = ls_slope(&xs, &lnc);
            let degenerate = delta + eps >= 1.0;
            CorollaryRow {
                eps,
                exponent: e,
                fitted_c: lnc.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp(),
                slope,
                bounded: degenerate || slope <= 1e-9,
                degenerate,
            }
        })
        .collect();
    Ok(CorollaryCheck {
        delta,
        samples: samples.to_vec(),
        rows,
        label: "heuristic evidence along sampled n; not a proof of dim = delta",
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub alpha: String,
    pub model: String,
    pub method: Method,
    pub window: (u64, u64),
    pub tol: f64,
    pub beta_star_lower: BisectReport,
    pub closed_form_lower: Option<ClosedForm>,
    pub upper_jensen: Option<Interval>,
    pub upper_corollary_check: Option<CorollaryCheck>,
}

impl DimensionReport {
    pub fn beta_star(&self) -> Interval {
        self.beta_star_lower.bracket
    }
}

/// Bisection report plus the closed form `δ/ν̂` (ν̂ from the same window).
pub fn dimension_report(
    alpha: &mut RotationNumber,
    seq: &GapSequence,
    method: Method,
    window: (usize, usize),
    opts: &BisectOptions,
) -> Result<DimensionReport> {
    // Room to widen the window, unless qₙ grows too fast to make that cheap.
    let mut depth = window.1 + 2;
    while depth < window.1 * 2 + 2 && alpha.q(depth as isize).is_ok_and(|q| q.bits() < 1 << 14) {
        depth += 1;
    }
    let table = alpha.convergents(depth).or_else(|_| alpha.convergents(window.1 + 1))?;
    let bis = dim_lower_bisect(&table, seq, method, window, opts)?;
    let closed = if window.0 >= 2 {
        diophantine_class_estimate(alpha, (window.0, window.1))
            .ok()
            .and_then(|d| dim_lower_closed_form(seq.delta(), d.nu_hat.max(1.0), d.label).ok())
    } else {
        None
    };
    Ok(DimensionReport {
        alpha: alpha.source().to_string(),
        model: seq.spec().to_string(),
        method,
        window: (window.0 as u64, window.1 as u64),
        tol: opts.tol,
        beta_star_lower: bis,
        closed_form_lower: closed,
        upper_jensen: None,
        upper_corollary_check: None,
    })
}

pub const CSV_HEADER: [&str; 11] = [
    "n", "q_n", "N_n", "Q_n", "method", "beta", "value_lo", "value_hi", "truncation_L", "offset", "direction",
];

/// Write series rows as CSV.
pub fn write_series_csv<W: Write>(series: &[BoundSeries], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for s in series {
        for r in &s.rows {
            w.write_record([
                r.n.to_string(),
                r.q_n.clone(),
                r.big_n.clone(),
                r.big_q.clone(),
                s.method.to_string(),
                s.beta.to_string(),
                format!("{:e}", r.value.lo),
                format!("{:e}", r.value.hi),
                r.truncation_l.map(|l| l.to_string()).unwrap_or_default(),
                r.offset.clone().unwrap_or_default(),
                s.direction.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(())
}

/// `ln qₙ` as a convenience for reports.
pub fn ln_q(q: &BigUint) -> Interval {
    if q.is_zero() {
        Interval::point(f64::NEG_INFINITY)
    } else {
        ln_biguint(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_table(depth: usize) -> ConvergentTable {
        RotationNumber::golden().convergents(depth).unwrap()
    }

    #[test]
    fn bound_a_golden_n4() {
        let t = golden_table(10);
        let seq = GapSequence::classical(0.5).unwrap();
        let v = bound_a(&t, &seq, 0.5, 4).unwrap();
        let c = 2.0 * std::f64::consts::PI.powi(2) / 6.0 - 1.0;
        let oracle = 5.0 * (1.0 / (49.0 * c)).sqrt();
        assert!(v.contains(oracle), "{v} vs {oracle}");
        assert!((v.mid() - 0.4721).abs() < 1e-4);
        // β → 0⁺ gives qₙ.
        let tiny = bound_a(&t, &seq, 1e-12, 4).unwrap();
        assert!((tiny.mid() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn b_at_l0_equals_a() {
        let t = golden_table(20);
        let seq = GapSequence::classical(0.5).unwrap();
        for n in 1..15 {
            assert_eq!(bound_a_ln(&t, &seq, 0.5, n).unwrap(), bound_b_ln(&t, &seq, 0.5, n, 0).unwrap());
        }
    }

    #[test]
    fn method_parsing() {
        assert_eq!("a".parse::<Method>().unwrap(), Method::A);
        assert_eq!("os:2".parse::<Method>().unwrap(), Method::OrderStat(2));
        assert_eq!("upper".parse::<Method>().unwrap(), Method::UpperCover);
        assert!("os:0".parse::<Method>().is_err());
        assert!("z".parse::<Method>().is_err());
        assert_eq!("sampled:8".parse::<OffsetPolicy>().unwrap(), OffsetPolicy::Sampled(8));
        assert_eq!("fixed:-3,4".parse::<OffsetPolicy>().unwrap(), OffsetPolicy::Fixed(vec![-3, 4]));
    }

    #[test]
    fn offsets_cover_residues() {
        let offs = OffsetPolicy::Auto.offsets(&BigUint::from(13u32));
        assert_eq!(offs.len(), 13);
        assert_eq!(offs[0], BigInt::from(-6));
        let sampled = OffsetPolicy::Auto.offsets(&BigUint::from(100_000u32));
        assert_eq!(sampled.len(), SAMPLED_OFFSETS);
        assert!(sampled.contains(&BigInt::from(-50_000)));
    }

    #[test]
    fn upper_cover_example() {
        let seq = GapSequence::classical(0.5).unwrap();
        let v = upper_bound_cover(&seq, 0.5, 1000).unwrap();
        let c = seq.normalizer().mid();
        // tail ≈ 2 Σ_{j≥1002} j^{-2} / c
        let tail: f64 = 2.0 * (1.0 / 1001.5) / c;
        assert!((v.mid() - (2001.0 * tail).sqrt()).abs() < 1e-3, "{v}");
        let lim = upper_limit_constants(0.5).unwrap();
        assert!((lim.unnormalized.mid() - 3.0265).abs() < 1e-3);
        assert!((lim.normalized.mid() - 2.0 / c.sqrt()).abs() < 1e-9);
        assert!(lim.printed_factor < 0.0);
        assert!(upper_limit_constants(0.999).unwrap().unnormalized.mid() > 50.0);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(dim_lower_closed_form(0.5, 1.0, "x").unwrap().value, 0.5);
        assert_eq!(dim_lower_closed_form(0.5, 2.0, "x").unwrap().value, 0.25);
        assert!(dim_lower_closed_form(0.5, 0.5, "x").is_err());
    }

    #[test]
    fn golden_reference_constants() {
        let g = golden_constants(0.5).unwrap();
        assert!((g.a_printed - 1.1560).abs() < 1e-3);
        assert!((g.b_factor - 1.2114).abs() < 1e-3);
        assert!((g.b_printed - 1.4003).abs() < 2e-3);
        // The two conventions differ by c_δ^{2δ}.
        assert!((g.a_printed / g.a_normalized - g.c_delta.mid()).abs() < 1e-9);
    }

    #[test]
    fn liminf_trend_signs() {
        let t = golden_table(32);
        let seq = GapSequence::classical(0.5).unwrap();
        let opts = SeriesOptions::default();
        for (beta, sign) in [(0.6, -1.0), (0.4, 1.0)] {
            let s = bound_series(&t, &seq, Method::A, beta, (10, 30), &opts).unwrap();
            let r = liminf_report(&s, (10, 30)).unwrap();
            assert!(r.trend_slope * sign > 0.0, "beta {beta}: {}", r.trend_slope);
        }
        let s = bound_series(&t, &seq, Method::A, 0.5, (10, 30), &opts).unwrap();
        assert!(liminf_report(&s, (40, 50)).is_err());
    }

    #[test]
    fn corollary_examples() {
        let seq = GapSequence::classical(0.5).unwrap();
        let samples = [100, 1_000, 10_000, 100_000, 1_000_000];
        let c = upper_corollary_check(&seq, 0.5, &[0.05, 0.6], &samples).unwrap();
        assert!(c.rows[0].bounded && !c.rows[0].degenerate);
        assert!(c.rows[1].degenerate && c.rows[1].bounded);
        let lc = GapSequence::logcubed().unwrap();
        let c = upper_corollary_check(&lc, 0.2, &[0.05], &samples).unwrap();
        assert!(!c.rows[0].bounded);
    }

    #[test]
    fn csv_schema() {
        let t = golden_table(10);
        let seq = GapSequence::classical(0.5).unwrap();
        let s = bound_series(&t, &seq, Method::A, 0.5, (2, 4), &SeriesOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&[s], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "n,q_n,N_n,Q_n,method,beta,value_lo,value_hi,truncation_L,offset,direction");
        assert!(lines.next().unwrap().starts_with("2,2,2,5,A,0.5,"));
    }
}
