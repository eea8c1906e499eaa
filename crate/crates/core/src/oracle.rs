//! Double-precision brute-force cross-checks: closest returns, sorted orbit
//! gaps, and distances on a truncated Denjoy circle.
//!
//! Nothing here is certified; tolerances are explicit and the exact modules
//! are what the checks validate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaps::GapSequence;
use crate::interval::Interval;

/// Clustering and comparison tolerance.
pub const ORACLE_TOL: f64 = 1e-9;
/// Distance below which a base point counts as lying on the orbit of 0.
pub const ORBIT_RESOLUTION: f64 = 1e-12;
pub const MAX_CLOSEST_RETURN_SCAN: u64 = 10_000_000;
pub const MAX_RECURRENCE_STEPS: u64 = 100_000;

/// `‖x‖`, the distance to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `(k, ‖kα‖)` at every strict running minimum of `‖kα‖`, `1 ≤ k ≤ q_max`.
pub fn brute_closest_returns(alpha: f64, q_max: u64) -> Result<Vec<(u64, f64)>> {
    if q_max > MAX_CLOSEST_RETURN_SCAN {
        return Err(Error::BudgetExceeded { points: q_max as u128, budget: MAX_CLOSEST_RETURN_SCAN });
    }
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for k in 1..=q_max {
        let d = dist_to_int(k as f64 * alpha);
        if d < best {
            best = d;
            out.push((k, d));
        }
    }
    Ok(out)
}

/// Gap lengths of `{kα : 0 ≤ k ≤ K}` by sorting, clustered within
/// [`ORACLE_TOL`]; `(length, multiplicity)` by increasing length.
pub fn sorted_gap_oracle(alpha: f64, k: u64) -> Result<Vec<(f64, u64)>> {
    if k > 1_000_000 {
        return Err(Error::BudgetExceeded { points: k as u128 + 1, budget: 1_000_000 });
    }
    let mut pos: Vec<f64> = (0..=k).map(|i| frac(i as f64 * alpha)).collect();
    pos.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = pos.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(1.0 + pos[0] - pos[pos.len() - 1]);
    gaps.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, u64)> = Vec::new();
    for g in gaps {
        match out.last_mut() {
            Some((len, m)) if (g - *len).abs() <= ORACLE_TOL => *m += 1,
            _ => out.push((g, 1)),
        }
    }
    Ok(out)
}

/// The Denjoy circle with gaps `J_k`, `|k| ≤ M`, kept explicitly; the rest is
/// accounted for by the certified tail mass.
#[derive(Clone, Debug)]
pub struct TruncatedCircle {
    alpha: f64,
    m: u64,
    /// Rotation-circle positions `{kα}`, sorted.
    pos: Vec<f64>,
    index: Vec<i64>,
    len: Vec<f64>,
    /// prefix[i] = Σ len[..i]
    prefix: Vec<f64>,
    /// sparse[j][i] = argmax of len over [i, i + 2^j)
    sparse: Vec<Vec<u32>>,
    tail: Interval,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    /// `[kept sum, kept sum + tail mass]`
    pub value: Interval,
    /// Whether the shorter arc is the positively oriented one from `x₀`.
    pub positive_arc: bool,
    /// Index of the largest kept gap inside the arc.
    pub k_star: Option<i64>,
    pub k_star_length: f64,
}

impl TruncatedCircle {
    pub fn new(alpha: f64, seq: &GapSequence, m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument("truncation M must be >= 2".into()));
        }
        let mi = m as i64;
        let mut pts: Vec<(f64, i64, f64)> =
            (-mi..=mi).map(|k| (frac(k as f64 * alpha), k, seq.length(k).mid())).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let pos: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let index: Vec<i64> = pts.iter().map(|p| p.1).collect();
        let len: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let mut prefix = Vec::with_capacity(len.len() + 1);
        prefix.push(0.0);
        for l in &len {
            prefix.push(prefix.last().unwrap() + l);
        }
        let n = len.len();
        let mut sparse = vec![(0..n as u32).collect::<Vec<u32>>()];
        let mut w = 1;
        while 2 * w <= n {
            let prev = sparse.last().unwrap();
            let next: Vec<u32> = (0..=n - 2 * w)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + w]);
                    if len[a as usize] >= len[b as usize] {
                        a
                    } else {
                        b
                    }
                })
                .collect();
            sparse.push(next);
            w *= 2;
        }
        Ok(Self { alpha, m, pos, index, len, prefix, sparse, tail: seq.tail_sum(m)? })
    }

    pub fn truncation(&self) -> u64 {
        self.m
    }

    pub fn tail_mass(&self) -> Interval {
        self.tail
    }

    pub fn kept_mass(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// Kept mass plus tail; should contain the total length.
    pub fn total_mass(&self) -> Interval {
        Interval::new(self.kept_mass() + self.tail.lo, self.kept_mass() + self.tail.hi)
    }

    fn argmax(&self, lo: usize, hi: usize) -> Option<usize> {
        if lo >= hi {
            return None;
        }
        let j = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        let a = self.sparse[j][lo] as usize;
        let b = self.sparse[j][hi - (1 << j)] as usize;
        Some(if self.len[a] >= self.len[b] { a } else { b })
    }

    /// Sorted-index ranges of kept points strictly inside the positively
    /// oriented arc from `a` to `b`.
    fn arc_ranges(&self, a: f64, b: f64) -> [(usize, usize); 2] {
        let after = |x: f64| self.pos.partition_point(|&p| p <= x);
        let before = |x: f64| self.pos.partition_point(|&p| p < x);
        if a <= b {
            [(after(a), before(b)), (0, 0)]
        } else {
            [(after(a), self.pos.len()), (0, before(b))]
        }
    }

    fn arc_sum(&self, a: f64, b: f64) -> f64 {
        self.arc_ranges(a, b)
            .iter()
            .map(|&(l, h)| if h > l { self.prefix[h] - self.prefix[l] } else { 0.0 })
            .sum()
    }

    fn arc_argmax(&self, a: f64, b: f64) -> Option<usize> {
        let [r1, r2] = self.arc_ranges(a, b);
        match (self.argmax(r1.0, r1.1), self.argmax(r2.0, r2.1)) {
            (Some(x), Some(y)) => Some(if self.len[x] >= self.len[y] { x } else { y }),
            (x, y) => x.or(y),
        }
    }

    fn check_off_orbit(&self, x: f64) -> Result<()> {
        let i = self.pos.partition_point(|&p| p < x);
        for j in [i.wrapping_sub(1), i, 0, self.pos.len() - 1] {
            if let Some(&p) = self.pos.get(j) {
                if dist_to_int(p - x) < ORBIT_RESOLUTION {
                    return Err(Error::OnOrbit { x0: x, k: self.index[j] });
                }
            }
        }
        Ok(())
    }

    /// `d(fⁿx₀, x₀)` on the Denjoy circle for a base point given by its
    /// rotation-circle coordinate.
    pub fn denjoy_distance(&self, x0: f64, n_iter: u64) -> Result<DistanceReport> {
        if n_iter == 0 {
            return Err(Error::InvalidArgument("n_iter must be >= 1".into()));
        }
        let x = frac(x0);
        self.check_off_orbit(x)?;
        let y = frac(x + frac(n_iter as f64 * self.alpha));
        let s_pos = self.arc_sum(x, y);
        let s_neg = self.kept_mass() - s_pos;
        // Ties go to the positive orientation.
        let positive = s_pos <= s_neg;
        let (s, (a, b)) = if positive { (s_pos, (x, y)) } else { (s_neg, (y, x)) };
        let k = self.arc_argmax(a, b);
        Ok(DistanceReport {
            value: Interval::new(s, s + self.tail.hi),
            positive_arc: positive,
            k_star: k.map(|i| self.index[i]),
            k_star_length: k.map_or(0.0, |i| self.len[i]),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceReport {
    pub beta: f64,
    pub n_max: u64,
    /// `(n, running min over m ≤ n of m·d(fᵐx₀,x₀)^β)` at every change.
    pub all_n: Vec<(u64, Interval)>,
    /// `(qₖ, qₖ·d(f^{qₖ}x₀,x₀)^β)` for closest-return times `qₖ ≤ n_max`.
    pub closest_returns: Vec<(u64, Interval)>,
    pub all_min: Interval,
    pub closest_min: Interval,
    /// The two minima agree within the tail slack.
    pub agree: bool,
}

fn scaled_pow(n: u64, d: Interval, beta: f64) -> Interval {
    let b = Interval::point(beta);
    let lo = if d.lo > 0.0 { (Interval::point(d.lo).ln() * b).exp().lo } else { 0.0 };
    let hi = (Interval::point(d.hi).ln() * b).exp().hi;
    Interval::new(lo, hi) * Interval::point(n as f64)
}

/// Running minimum of `n·d(fⁿx₀,x₀)^β` over all `n ≤ n_max` and along the
/// supplied closest-return times.
pub fn recurrence_rate(
    circle: &TruncatedCircle,
    x0: f64,
    beta: f64,
    n_max: u64,
    closest: &[u64],
) -> Result<RecurrenceReport> {
    if n_max > MAX_RECURRENCE_STEPS {
        return Err(Error::BudgetExceeded { points: n_max as u128, budget: MAX_RECURRENCE_STEPS });
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    let mut all = Vec::new();
    let mut best = Interval::point(f64::INFINITY);
    for n in 1..=n_max {
        let v = scaled_pow(n, circle.denjoy_distance(x0, n)?.value, beta);
        if v.lo < best.lo {
            best = v;
            all.push((n, v));
        }
    }
    let mut cr = Vec::new();
    let mut cr_best = Interval::point(f64::INFINITY);
    for &q in closest.iter().filter(|&&q| q >= 1 && q <= n_max) {
        let v = scaled_pow(q, circle.denjoy_distance(x0, q)?.value, beta);
        if v.lo < cr_best.lo {
            cr_best = v;
        }
        cr.push((q, v));
    }
    // Slack: the tail mass may hide the difference between the two minima.
    let agree = cr_best.lo <= best.hi && best.lo <= cr_best.hi;
    Ok(RecurrenceReport {
        beta,
        n_max,
        all_n: all,
        closest_returns: cr,
        all_min: best,
        closest_min: cr_best,
        agree,
    })
}
