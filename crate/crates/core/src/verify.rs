//! Cross-checks between the exact modules and the floating-point oracle.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::bound_a;
use crate::error::{Error, Result};
use crate::gaps::{ExceptionRule, GapSequence};
use crate::oracle::{brute_closest_returns, recurrence_rate, sorted_gap_oracle, TruncatedCircle, ORACLE_TOL};
use crate::rotation::RotationNumber;
use crate::threegap::forward_gap_structure;

pub const PRESETS: [&str; 3] = ["golden", "sqrt3m1", "cf:2"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(check: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { check: check.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub q_max: u64,
    pub base_points: usize,
    pub n_max: usize,
    pub truncation: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, q_max: 100_000, base_points: 100, n_max: 12, truncation: 10_000 }
    }
}

/// Uniform base points from a seeded generator.
fn base_points(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen::<f64>()).collect()
}

fn closest_returns(alpha: &mut RotationNumber, q_max: u64) -> Result<Check> {
    let name = format!("closest_returns:{}", alpha.source());
    let a = alpha.to_f64();
    let found: Vec<u64> = brute_closest_returns(a, q_max)?.into_iter().map(|x| x.0).collect();
    let mut expected = Vec::new();
    let mut n = 0isize;
    loop {
        let q = alpha.q(n)?.to_u64().unwrap_or(u64::MAX);
        if q > q_max {
            break;
        }
        if expected.last() != Some(&q) {
            expected.push(q);
        }
        n += 1;
    }
    Ok(Check::new(name, found == expected, format!("found {found:?}, convergents {expected:?}")))
}

fn kstar(alpha: &mut RotationNumber, opts: &VerifyOptions, seq: &GapSequence) -> Result<Check> {
    let name = format!("kstar_within_N:{}", alpha.source());
    let circle = TruncatedCircle::new(alpha.to_f64(), seq, opts.truncation)?;
    let table = alpha.convergents(opts.n_max + 1)?;
    let xs = base_points(opts.seed, opts.base_points);
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for n in 1..=opts.n_max {
        let q = table.q(n as isize).to_u64().unwrap();
        let big_n = table.big_n(n).to_i64().unwrap();
        let res: Vec<Result<Option<i64>>> = xs
            .par_iter()
            .map(|&x| match circle.denjoy_distance(x, q) {
                Ok(d) => Ok(d.k_star),
                Err(Error::OnOrbit { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect();
        for (x, r) in xs.iter().zip(res) {
            if let Some(k) = r? {
                checked += 1;
                if k.abs() > big_n {
                    failures.push(format!("n={n} x0={x} k*={k} N={big_n}"));
                }
            }
        }
    }
    Ok(Check::new(name, failures.is_empty(), format!("{checked} cases, failures: {failures:?}")))
}

fn sorted_gaps(alpha: &mut RotationNumber) -> Result<Check> {
    let name = format!("sorted_gap_oracle:{}", alpha.source());
    let a = alpha.to_f64();
    let mut ks = vec![1u64, 2, 25];
    for n in 1..=10 {
        let s = (alpha.q(n)?.clone() + alpha.q(n + 1)?).to_u64().unwrap();
        ks.push(s - 1);
    }
    let mut mismatches = Vec::new();
    for k in ks {
        let exact = forward_gap_structure(alpha, k)?;
        let oracle = sorted_gap_oracle(a, k)?;
        let e: Vec<u64> = exact.classes.iter().map(|c| c.multiplicity.to_u64().unwrap()).collect();
        let o: Vec<u64> = oracle.iter().map(|c| c.1).collect();
        let lengths_ok = exact
            .classes
            .iter()
            .zip(&oracle)
            .all(|(c, o)| (c.length.mid() - o.0).abs() <= ORACLE_TOL);
        if e != o || !lengths_ok {
            mismatches.push(format!("K={k}: exact {e:?} oracle {o:?}"));
        }
    }
    Ok(Check::new(name, mismatches.is_empty(), format!("mismatches: {mismatches:?}")))
}

/// `min{ℓᵢ : |i| ≤ Nₙ}` never exceeds the truncated return distance.
fn bound_below_distance(opts: &VerifyOptions) -> Result<Check> {
    let mut alpha = RotationNumber::golden();
    let seq = GapSequence::classical(0.5)?;
    let circle = TruncatedCircle::new(alpha.to_f64(), &seq, opts.truncation)?;
    let table = alpha.convergents(opts.n_max + 1)?;
    let xs = base_points(opts.seed.wrapping_add(1), opts.base_points);
    let mut failures = Vec::new();
    for n in 1..=opts.n_max {
        let q = table.q(n as isize).to_u64().unwrap();
        let per_q = bound_a(&table, &seq, 1.0, n)?.lo / q as f64;
        for &x in &xs {
            match circle.denjoy_distance(x, q) {
                Ok(d) if d.value.hi * (1.0 + 1e-9) < per_q => failures.push(format!("n={n} x0={x}")),
                Ok(_) | Err(Error::OnOrbit { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Check::new("bound_a_below_distance:golden", failures.is_empty(), format!("failures: {failures:?}")))
}

/// Closest-return recurrence values dominate the method-A rows.
fn recurrence_vs_bound(opts: &VerifyOptions) -> Result<Check> {
    let mut alpha = RotationNumber::golden();
    let seq = GapSequence::classical(0.5)?;
    let circle = TruncatedCircle::new(alpha.to_f64(), &seq, opts.truncation)?;
    let table = alpha.convergents(12)?;
    let qs: Vec<u64> = (1..=10).map(|n| table.q(n).to_u64().unwrap()).collect();
    let x0 = base_points(opts.seed.wrapping_add(2), 1)[0];
    let r = recurrence_rate(&circle, x0, 0.5, 100, &qs)?;
    let mut failures = Vec::new();
    for (n, &(q, v)) in r.closest_returns.iter().enumerate() {
        let a = bound_a(&table, &seq, 0.5, n + 1)?;
        if v.hi * (1.0 + 1e-9) < a.lo {
            failures.push(format!("q={q}: {v} < {a}"));
        }
    }
    Ok(Check::new(
        "recurrence_dominates_bound_a:golden",
        failures.is_empty(),
        format!("x0={x0}, minima all={} closest={}, failures: {failures:?}", r.all_min, r.closest_min),
    ))
}

fn distance_width(opts: &VerifyOptions) -> Result<Check> {
    let mut alpha = RotationNumber::golden();
    let seq = GapSequence::classical(0.5)?;
    let a = alpha.to_f64();
    let fine = TruncatedCircle::new(a, &seq, opts.truncation)?;
    let coarse = TruncatedCircle::new(a, &seq, (opts.truncation / 10).max(2))?;
    let xs = base_points(opts.seed.wrapping_add(3), opts.base_points);
    let mut failures = Vec::new();
    for &x in &xs {
        for n in [1u64, 5, 13, 89] {
            let (f, c) = match (fine.denjoy_distance(x, n), coarse.denjoy_distance(x, n)) {
                (Ok(f), Ok(c)) => (f, c),
                _ => continue,
            };
            let ok = f.value.width() <= fine.tail_mass().hi * (1.0 + 1e-12) && f.value.width() <= c.value.width();
            if !ok {
                failures.push(format!("x0={x} n={n}"));
            }
        }
    }
    Ok(Check::new("distance_width_le_tail", failures.is_empty(), format!("failures: {failures:?}")))
}

fn normalization() -> Result<Check> {
    let models = [
        GapSequence::classical(0.5)?,
        GapSequence::classical(0.25)?,
        GapSequence::logcubed()?,
        GapSequence::perturbed(&GapSequence::classical(0.8)?, ExceptionRule::Pow4To7)?,
    ];
    let mut bad = Vec::new();
    for m in &models {
        let t = m.total_check(1000)?;
        if !t.contains(1.0) {
            bad.push(format!("{}: {t}", m.spec()));
        }
    }
    Ok(Check::new("normalization_contains_one", bad.is_empty(), format!("failures: {bad:?}")))
}

/// Run every cross-check; errors inside a check are reported as failures.
pub fn run_suite(opts: &VerifyOptions) -> Vec<Check> {
    let seq = GapSequence::classical(0.5).expect("classical model");
    let mut out = Vec::new();
    let mut push = |name: &str, r: Result<Check>| {
        out.push(r.unwrap_or_else(|e| Check::new(name, false, format!("error: {e}"))));
    };
    for p in PRESETS {
        let mut a = RotationNumber::parse(p).expect("preset");
        push(&format!("closest_returns:{p}"), closest_returns(&mut a, opts.q_max));
        push(&format!("kstar_within_N:{p}"), kstar(&mut a, opts, &seq));
        push(&format!("sorted_gap_oracle:{p}"), sorted_gaps(&mut a));
    }
    push("bound_a_below_distance:golden", bound_below_distance(opts));
    push("recurrence_dominates_bound_a:golden", recurrence_vs_bound(opts));
    push("distance_width_le_tail", distance_width(opts));
    push("normalization_contains_one", normalization());
    out
}
