//! Gap structure of rotation orbits `{tα mod 1}`.
//!
//! Every gap between consecutive orbit points is an exact affine form
//! `cα − d` with integer `c, d`. Since α is irrational, two gaps have the same
//! length iff their forms coincide, so classes are grouped exactly.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rotation::{to_int, LinearForm, RatInterval, RotationNumber};

/// Maximum number of orbit points enumerated explicitly.
pub const ENUMERATION_BUDGET: u64 = 1_000_000;

/// Fixed-point precisions (fractional bits) tried in turn when ordering
/// orbit points.
const PRECISIONS: [u64; 4] = [100, 256, 1024, 4096];

fn display<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapClass {
    /// The gap length is `coef·α − offset`.
    #[serde(serialize_with = "display")]
    pub coef: BigInt,
    #[serde(serialize_with = "display")]
    pub offset: BigInt,
    pub length: Interval,
    #[serde(serialize_with = "display")]
    pub multiplicity: BigUint,
}

impl GapClass {
    pub fn form(&self) -> LinearForm {
        LinearForm::new(self.coef.clone(), self.offset.clone())
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Orbit {
    /// `{tα : 0 ≤ t ≤ K}`
    Forward,
    /// `{tα : −N ≤ t ≤ N}`
    Symmetric,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Analytic,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceNorm {
    pub n: usize,
    /// `‖qₙα‖`
    pub value: Interval,
    /// Whether the maximal gap is at most `‖qₙα‖` (decided exactly).
    pub max_gap_within: bool,
}

/// A single gap whose length differs from all others, as produced by an odd
/// number of symmetric points.
#[derive(Clone, Debug, Serialize)]
pub struct Anomaly {
    pub length: Interval,
    /// Orbit indices of the points bounding the gap.
    pub left: i64,
    pub right: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreeGapReport {
    pub alpha: String,
    pub orbit: Orbit,
    /// K for forward orbits, N for symmetric ones.
    #[serde(serialize_with = "display")]
    pub extent: BigUint,
    #[serde(serialize_with = "display")]
    pub points: BigUint,
    pub mode: Mode,
    /// Sorted by increasing length.
    pub classes: Vec<GapClass>,
    pub max_gap: Interval,
    /// `Σ length × multiplicity`; contains 1.
    pub total_length: Interval,
    pub reference_norm: Option<ReferenceNorm>,
    pub anomaly: Option<Anomaly>,
}

impl ThreeGapReport {
    pub fn max_class(&self) -> &GapClass {
        self.classes.last().expect("at least one class")
    }

    pub fn multiplicities(&self) -> Vec<BigUint> {
        self.classes.iter().map(|c| c.multiplicity.clone()).collect()
    }
}

/// An orbit point `tα = floor + frac`.
#[derive(Clone, Copy, Debug)]
pub struct OrbitPoint {
    pub t: i64,
    pub floor: i64,
}

fn try_sort_i128(t_lo: i64, t_hi: i64, a: i128, bits: u32) -> Option<Vec<OrbitPoint>> {
    let mut pts = Vec::with_capacity((t_hi - t_lo + 1) as usize);
    for t in t_lo..=t_hi {
        let base = (t as i128) * a;
        let lo = base + (t as i128).min(0);
        let hi = base + (t as i128).max(0);
        let f = lo >> bits;
        if hi >> bits != f {
            return None;
        }
        let off = f << bits;
        pts.push((lo - off, hi - off, t, f as i64));
    }
    pts.sort_unstable_by_key(|p| p.0);
    if pts.windows(2).any(|w| w[0].1 >= w[1].0) {
        return None;
    }
    Some(pts.into_iter().map(|p| OrbitPoint { t: p.2, floor: p.3 }).collect())
}

fn try_sort_big(t_lo: i64, t_hi: i64, a: &BigInt, bits: u64) -> Option<Vec<OrbitPoint>> {
    let mut pts = Vec::with_capacity((t_hi - t_lo + 1) as usize);
    for t in t_lo..=t_hi {
        let tb = BigInt::from(t);
        let base = &tb * a;
        let lo = &base + BigInt::from(t.min(0));
        let hi = &base + BigInt::from(t.max(0));
        let f: BigInt = &lo >> bits;
        if (&hi >> bits) != f {
            return None;
        }
        let off: BigInt = &f << bits;
        pts.push((lo - &off, hi - &off, t, f.to_i64()?));
    }
    pts.sort_unstable_by(|x, y| x.0.cmp(&y.0));
    if pts.windows(2).any(|w| w[0].1 >= w[1].0) {
        return None;
    }
    Some(pts.into_iter().map(|p| OrbitPoint { t: p.2, floor: p.3 }).collect())
}

/// Orbit points `t_lo..=t_hi` sorted by `{tα}`, with certified ordering.
pub fn sorted_orbit(alpha: &mut RotationNumber, t_lo: i64, t_hi: i64) -> Result<Vec<OrbitPoint>> {
    if t_lo > t_hi {
        return Err(Error::EmptyRange { lo: t_lo.to_string(), hi: t_hi.to_string() });
    }
    let count = (t_hi as i128 - t_lo as i128 + 1) as u128;
    if count > ENUMERATION_BUDGET as u128 {
        return Err(Error::BudgetExceeded { points: count, budget: ENUMERATION_BUDGET });
    }
    let span = t_lo.unsigned_abs().max(t_hi.unsigned_abs());
    for bits in PRECISIONS {
        let a = alpha.floor_mul(&(BigInt::one() << bits))?;
        // i128 suffices while |t|·2^bits stays below 2^126.
        let sorted = if bits == 100 && span < (1 << 25) {
            try_sort_i128(t_lo, t_hi, a.to_i128().expect("fits"), bits as u32)
        } else {
            try_sort_big(t_lo, t_hi, &a, bits)
        };
        if let Some(s) = sorted {
            return Ok(s);
        }
    }
    Err(Error::Undecidable(alpha.known_terms()))
}

/// Gap forms between cyclically consecutive sorted points; entry `i` is the
/// gap following point `i`.
fn gap_forms(pts: &[OrbitPoint]) -> Vec<(i64, i64)> {
    if pts.len() == 1 {
        return vec![(0, -1)];
    }
    (0..pts.len())
        .map(|i| {
            let a = pts[i];
            if i + 1 < pts.len() {
                let b = pts[i + 1];
                (b.t - a.t, b.floor - a.floor)
            } else {
                let b = pts[0];
                (b.t - a.t, b.floor - a.floor - 1)
            }
        })
        .collect()
}

fn tight_alpha(alpha: &mut RotationNumber) -> Result<RatInterval> {
    alpha.extend_to(1)?;
    // Enclosure width below 2^-200.
    let mut m = alpha.known_terms();
    loop {
        let enc = alpha.alpha_enclosure(m)?;
        let w = enc.width();
        let small = w.numer().bits() + 200 <= w.denom().bits();
        if small || alpha.extend_to(m + 1).is_err() {
            return Ok(enc);
        }
        m += 1;
    }
}

/// Sort classes by exact length comparison.
fn sort_classes(alpha: &mut RotationNumber, classes: &mut [GapClass]) -> Result<()> {
    // Insertion sort: at most a handful of classes, and the comparator can fail.
    for i in 1..classes.len() {
        let mut j = i;
        while j > 0 {
            let ord = alpha.sign_of(&classes[j - 1].form().sub(&classes[j].form()))?;
            if ord == Ordering::Greater {
                classes.swap(j - 1, j);
                j -= 1;
            } else {
                break;
            }
        }
    }
    Ok(())
}

fn total_length(classes: &[GapClass]) -> Interval {
    classes.iter().fold(Interval::point(0.0), |acc, c| {
        let m = Interval::from_rational(&num_rational::BigRational::from_integer(to_int(&c.multiplicity)));
        acc + c.length * m
    })
}

/// `θₙ` as the exact positive form `(−1)ⁿ(qₙα − pₙ)`, for n ≥ −1.
pub fn theta_form(alpha: &mut RotationNumber, n: isize) -> Result<LinearForm> {
    let q = to_int(alpha.q(n)?);
    let p = to_int(alpha.p(n)?);
    Ok(if n.rem_euclid(2) == 0 { LinearForm::new(q, p) } else { LinearForm::new(-q, -p) })
}

/// `qₙ + qₙ₊₁`.
fn big_q(alpha: &mut RotationNumber, n: isize) -> Result<BigUint> {
    let qn = alpha.q(n)?.clone();
    Ok(qn + alpha.q(n + 1)?)
}

/// Largest n ≥ 1 with `qₙ + qₙ₊₁ ≤ points`.
fn reference_index(alpha: &mut RotationNumber, points: &BigUint) -> Result<Option<usize>> {
    let mut best = None;
    let mut n = 1usize;
    loop {
        let s = big_q(alpha, n as isize)?;
        if &s > points {
            return Ok(best);
        }
        best = Some(n);
        n += 1;
    }
}

fn reference_norm(
    alpha: &mut RotationNumber,
    n: Option<usize>,
    max: &GapClass,
    enc: &RatInterval,
) -> Result<Option<ReferenceNorm>> {
    let Some(n) = n else { return Ok(None) };
    let th = theta_form(alpha, n as isize)?;
    let within = alpha.sign_of(&max.form().sub(&th))? != Ordering::Greater;
    Ok(Some(ReferenceNorm { n, value: th.eval(enc).to_interval(), max_gap_within: within }))
}

fn classes_from_orbit(
    alpha: &mut RotationNumber,
    pts: &[OrbitPoint],
    enc: &RatInterval,
) -> Result<(Vec<GapClass>, BTreeMap<(i64, i64), usize>)> {
    let forms = gap_forms(pts);
    let mut groups: BTreeMap<(i64, i64), (u64, usize)> = BTreeMap::new();
    for (i, f) in forms.iter().enumerate() {
        groups.entry(*f).or_insert((0, i)).0 += 1;
    }
    let mut first = BTreeMap::new();
    let mut classes: Vec<GapClass> = groups
        .into_iter()
        .map(|((c, o), (m, i))| {
            first.insert((c, o), i);
            let form = LinearForm::new(c, o);
            GapClass {
                length: form.eval(enc).to_interval(),
                coef: form.coef,
                offset: form.offset,
                multiplicity: BigUint::from(m),
            }
        })
        .collect();
    sort_classes(alpha, &mut classes)?;
    Ok((classes, first))
}

fn exact_report(alpha: &mut RotationNumber, orbit: Orbit, extent: u64) -> Result<ThreeGapReport> {
    let (t_lo, t_hi) = match orbit {
        Orbit::Forward => (0i64, extent as i64),
        Orbit::Symmetric => (-(extent as i64), extent as i64),
    };
    let pts = sorted_orbit(alpha, t_lo, t_hi)?;
    let enc = tight_alpha(alpha)?;
    let (classes, first) = classes_from_orbit(alpha, &pts, &enc)?;
    let points = BigUint::from(pts.len());
    let n_ref = match orbit {
        Orbit::Forward => reference_index(alpha, &points)?,
        Orbit::Symmetric => symmetric_reference_index(alpha, extent)?,
    };
    let max = classes.last().unwrap().clone();
    let reference_norm = reference_norm(alpha, n_ref, &max, &enc)?;
    let anomaly = if orbit == Orbit::Symmetric && classes.len() == 3 {
        classes.iter().find(|c| c.multiplicity.is_one()).map(|c| {
            let i = first[&(c.coef.to_i64().unwrap(), c.offset.to_i64().unwrap())];
            Anomaly {
                length: c.length,
                left: pts[i].t,
                right: pts[(i + 1) % pts.len()].t,
            }
        })
    } else {
        None
    };
    Ok(ThreeGapReport {
        alpha: alpha.source().to_string(),
        orbit,
        extent: BigUint::from(extent),
        points,
        mode: Mode::Exact,
        total_length: total_length(&classes),
        max_gap: max.length,
        classes,
        reference_norm,
        anomaly,
    })
}

/// Largest n ≥ 1 with `Nₙ ≤ N`.
fn symmetric_reference_index(alpha: &mut RotationNumber, n_ext: u64) -> Result<Option<usize>> {
    let n_ext = BigUint::from(n_ext);
    let mut best = None;
    let mut n = 1usize;
    loop {
        let big_n: BigUint = big_q(alpha, n as isize)? >> 1;
        if big_n > n_ext {
            return Ok(best);
        }
        best = Some(n);
        n += 1;
    }
}

/// Exact gap classes of `{kα : 0 ≤ k ≤ K}`.
pub fn forward_gap_structure(alpha: &mut RotationNumber, k: u64) -> Result<ThreeGapReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    if k >= ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded { points: k as u128 + 1, budget: ENUMERATION_BUDGET });
    }
    exact_report(alpha, Orbit::Forward, k)
}

/// Exact gap classes of `{tα : −N ≤ t ≤ N}`.
pub fn symmetric_gap_structure(alpha: &mut RotationNumber, n: u64) -> Result<ThreeGapReport> {
    if 2 * n as u128 + 1 > ENUMERATION_BUDGET as u128 {
        return Err(Error::BudgetExceeded { points: 2 * n as u128 + 1, budget: ENUMERATION_BUDGET });
    }
    exact_report(alpha, Orbit::Symmetric, n)
}

/// The maximal gap of `{tα : −N ≤ t ≤ N}` as an exact form with its length.
pub fn symmetric_max_gap(alpha: &mut RotationNumber, n: u64) -> Result<GapClass> {
    Ok(symmetric_gap_structure(alpha, n)?.max_class().clone())
}

/// Gap classes of `points` consecutive orbit points from the continued
/// fraction alone, without enumeration.
///
/// With `qₙ + qₙ₊₁ ≤ P < qₙ₊₁ + qₙ₊₂`, write `P − qₙ − qₙ₊₁ = i·qₙ₊₁ + j`.
/// The classes are `θₙ − iθₙ₊₁` (×`qₙ₊₁ − j`), `θₙ₊₁` (×`qₙ + iqₙ₊₁ + j`)
/// and `θₙ − (i+1)θₙ₊₁` (×`j`).
pub fn analytic_classes(alpha: &mut RotationNumber, points: &BigUint) -> Result<Vec<GapClass>> {
    if points < &BigUint::from(2u32) {
        return Err(Error::InvalidArgument("analytic mode needs at least 2 points".into()));
    }
    let mut n: isize = -1;
    loop {
        let upper = big_q(alpha, n + 1)?;
        if points < &upper {
            break;
        }
        n += 1;
    }
    let qn = alpha.q(n)?.clone();
    let qn1 = alpha.q(n + 1)?.clone();
    let d = points - (&qn + &qn1);
    let (i, j) = d.div_rem(&qn1);
    let fn0 = theta_form(alpha, n)?;
    let fn1 = theta_form(alpha, n + 1)?;
    let scaled = |k: &BigUint| LinearForm::new(&fn1.coef * to_int(k), &fn1.offset * to_int(k));
    let long = fn0.sub(&scaled(&i));
    let split = fn0.sub(&scaled(&(&i + 1u32)));
    let enc = tight_alpha(alpha)?;
    let mk = |f: LinearForm, m: BigUint| GapClass {
        length: f.eval(&enc).to_interval(),
        coef: f.coef,
        offset: f.offset,
        multiplicity: m,
    };
    let mut classes = vec![
        mk(long, &qn1 - &j),
        mk(fn1.clone(), &qn + &i * &qn1 + &j),
        mk(split, j),
    ];
    classes.retain(|c| !c.multiplicity.is_zero());
    sort_classes(alpha, &mut classes)?;
    Ok(classes)
}

/// Report for `{kα : 0 ≤ k ≤ K}` with lengths and counts from the analytic
/// classes; works for any K.
pub fn forward_gap_structure_analytic(alpha: &mut RotationNumber, k: &BigUint) -> Result<ThreeGapReport> {
    if k.is_zero() {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    let points = k + 1u32;
    let classes = analytic_classes(alpha, &points)?;
    let enc = tight_alpha(alpha)?;
    let n_ref = reference_index(alpha, &points)?;
    let max = classes.last().unwrap().clone();
    let reference_norm = reference_norm(alpha, n_ref, &max, &enc)?;
    Ok(ThreeGapReport {
        alpha: alpha.source().to_string(),
        orbit: Orbit::Forward,
        extent: k.clone(),
        points,
        mode: Mode::Analytic,
        total_length: total_length(&classes),
        max_gap: max.length,
        classes,
        reference_norm,
        anomaly: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub big_n: u64,
    /// Max gap of the symmetric orbit at `Nₙ` is ≤ `‖qₙα‖`.
    pub holds_at_threshold: bool,
    /// Max gap at `Nₙ − 1` is > `‖qₙα‖`.
    pub fails_below: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdTable {
    pub alpha: String,
    pub rows: Vec<ThresholdRow>,
    /// Set when the table stops early because of the enumeration budget.
    pub notice: Option<String>,
}

/// Check both directions of "max gap of `{tα}_{|t|≤N}` is ≤ ‖qₙα‖ iff N ≥ Nₙ".
pub fn threshold_check(alpha: &mut RotationNumber, n_lo: usize, n_hi: usize) -> Result<ThresholdTable> {
    if n_lo < 1 || n_lo > n_hi {
        return Err(Error::InvalidArgument(format!("bad index range {n_lo}..{n_hi}")));
    }
    let mut rows = Vec::new();
    let mut notice = None;
    for n in n_lo..=n_hi {
        let big_n: BigUint = big_q(alpha, n as isize)? >> 1;
        let big_n = match big_n.to_u64().filter(|&v| 2 * v < ENUMERATION_BUDGET) {
            Some(v) => v,
            None => {
                notice = Some(format!("stopped at n = {n}: N_n = {big_n} exceeds the enumeration budget"));
                break;
            }
        };
        let th = theta_form(alpha, n as isize)?;
        let at = symmetric_max_gap(alpha, big_n)?;
        let holds = alpha.sign_of(&at.form().sub(&th))? != Ordering::Greater;
        let below = if big_n == 0 {
            true
        } else {
            let b = symmetric_max_gap(alpha, big_n - 1)?;
            alpha.sign_of(&b.form().sub(&th))? == Ordering::Greater
        };
        rows.push(ThresholdRow { n, big_n, holds_at_threshold: holds, fails_below: below });
    }
    Ok(ThresholdTable { alpha: alpha.source().to_string(), rows, notice })
}

/// One orbit point for plotting: position on the circle and the gap that
/// follows it counterclockwise.
#[derive(Clone, Debug, Serialize)]
pub struct PlotRow {
    pub t: i64,
    pub position: f64,
    pub gap_after: f64,
    /// Index into the report's classes (sorted by length).
    pub class: usize,
}

pub fn orbit_plot_rows(alpha: &mut RotationNumber, t_lo: i64, t_hi: i64) -> Result<Vec<PlotRow>> {
    let pts = sorted_orbit(alpha, t_lo, t_hi)?;
    let enc = tight_alpha(alpha)?;
    let (classes, _) = classes_from_orbit(alpha, &pts, &enc)?;
    let a = enc.mid_f64();
    let forms = gap_forms(&pts);
    Ok(pts
        .iter()
        .zip(forms)
        .map(|(p, (c, o))| {
            let class = classes
                .iter()
                .position(|k| k.coef == BigInt::from(c) && k.offset == BigInt::from(o))
                .unwrap();
            let x = p.t as f64 * a;
            PlotRow { t: p.t, position: x - x.floor(), gap_after: classes[class].length.mid(), class }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mults(r: &ThreeGapReport) -> Vec<u64> {
        r.classes.iter().map(|c| c.multiplicity.to_u64().unwrap()).collect()
    }

    #[test]
    fn sqrt3m1_k25() {
        let mut a = RotationNumber::sqrt3m1();
        let r = forward_gap_structure(&mut a, 25).unwrap();
        assert_eq!(mults(&r), vec![11, 15]);
        assert!((r.classes[0].length.mid() - 0.019238).abs() < 1e-6);
        assert!((r.classes[1].length.mid() - 0.052559).abs() < 1e-6);
        assert!(r.total_length.contains(1.0));
        let reference = r.reference_norm.as_ref().unwrap();
        assert_eq!(reference.n, 4);
        assert!(reference.max_gap_within);
    }

    #[test]
    fn golden_k12_and_k1() {
        let mut g = RotationNumber::golden();
        let r = forward_gap_structure(&mut g, 12).unwrap();
        assert_eq!(mults(&r), vec![5, 8]);
        let r1 = forward_gap_structure(&mut g, 1).unwrap();
        assert_eq!(mults(&r1), vec![1, 1]);
        let a = g.to_f64();
        assert!(r1.classes[0].length.contains(1.0 - a) || (r1.classes[0].length.mid() - (1.0 - a)).abs() < 1e-15);
        assert!((r1.classes[1].length.mid() - a).abs() < 1e-15);
    }

    #[test]
    fn symmetric_anomaly_when_points_exceed_two_class_count() {
        let mut a = RotationNumber::sqrt3m1();
        let r = symmetric_gap_structure(&mut a, 13).unwrap();
        assert_eq!(r.classes.len(), 3);
        let an = r.anomaly.as_ref().unwrap();
        // 11 short + 15 long, with one long gap split into a short one and θ₄ − θ₅.
        assert_eq!(mults(&r), vec![12, 1, 14]);
        assert!(an.length.contains(r.classes[1].length.mid()));
        // Rotating by Nα maps the symmetric orbit onto {0..2N}.
        let fwd = forward_gap_structure(&mut a, 26).unwrap();
        let forms = |r: &ThreeGapReport| r.classes.iter().map(|c| (c.form(), c.multiplicity.clone())).collect::<Vec<_>>();
        assert_eq!(forms(&r), forms(&fwd));
        assert!(fwd.anomaly.is_none());
    }

    #[test]
    fn threshold_tables() {
        for (spec, lo, hi) in [("golden", 2, 8), ("sqrt3m1", 2, 7), ("cf:2", 2, 7)] {
            let mut a = RotationNumber::parse(spec).unwrap();
            let t = threshold_check(&mut a, lo, hi).unwrap();
            assert_eq!(t.rows.len(), hi - lo + 1);
            for row in &t.rows {
                assert!(row.holds_at_threshold && row.fails_below, "{spec} {row:?}");
            }
        }
    }

    #[test]
    fn golden_n4_threshold_values() {
        let mut g = RotationNumber::golden();
        let th = theta_form(&mut g, 4).unwrap();
        let at6 = symmetric_max_gap(&mut g, 6).unwrap();
        let at5 = symmetric_max_gap(&mut g, 5).unwrap();
        assert_ne!(g.sign_of(&at6.form().sub(&th)).unwrap(), Ordering::Greater);
        assert_eq!(g.sign_of(&at5.form().sub(&th)).unwrap(), Ordering::Greater);
    }

    #[test]
    fn analytic_matches_enumeration() {
        for spec in ["golden", "sqrt3m1", "cf:2", "cf:1,5,2", "cf:7", "squaregrowth:2"] {
            let mut a = RotationNumber::parse(spec).unwrap();
            for k in 1..=400u64 {
                let exact = forward_gap_structure(&mut a, k).unwrap();
                let analytic = analytic_classes(&mut a, &BigUint::from(k + 1)).unwrap();
                let e: Vec<_> = exact.classes.iter().map(|c| (c.form(), c.multiplicity.clone())).collect();
                let f: Vec<_> = analytic.iter().map(|c| (c.form(), c.multiplicity.clone())).collect();
                assert_eq!(e, f, "{spec} K={k}");
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut g = RotationNumber::golden();
        assert!(matches!(
            forward_gap_structure(&mut g, ENUMERATION_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
        let big = BigUint::from(10u32).pow(30);
        let r = forward_gap_structure_analytic(&mut g, &big).unwrap();
        assert!(r.classes.len() <= 3);
        assert!(r.total_length.contains(1.0));
    }

    #[test]
    fn plot_rows_cover_circle() {
        let mut a = RotationNumber::sqrt3m1();
        let rows = orbit_plot_rows(&mut a, -13, 13).unwrap();
        assert_eq!(rows.len(), 27);
        let total: f64 = rows.iter().map(|r| r.gap_after).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(rows.windows(2).all(|w| w[0].position < w[1].position));
    }
}
