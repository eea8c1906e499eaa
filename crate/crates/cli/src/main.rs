use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use denjoy::bounds::{
    bound_series, dimension_report, liminf_report, upper_corollary_check, upper_limit_constants, upper_series,
    write_series_csv, BisectOptions, BoundSeries, Method, OffsetPolicy, SeriesOptions,
};
use denjoy::rotation::{diophantine_class_estimate, AlphaSource};
use denjoy::threegap::{
    forward_gap_structure, forward_gap_structure_analytic, orbit_plot_rows, symmetric_gap_structure,
    threshold_check, ENUMERATION_BUDGET,
};
use denjoy::verify::{run_suite, VerifyOptions};
use denjoy::{Error, GapSequence, Interval, RotationNumber};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "denjoy", version, about = "Hausdorff measure and dimension bounds for Denjoy minimal sets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Continued-fraction convergents, qₙ, Nₙ, ‖qₙα‖.
    Cf(Opts),
    /// Gap lengths, normalization and class estimate for a gap model.
    Gaps(Opts),
    /// Three-gap structure of an orbit segment.
    Threegap(Opts),
    /// Lower bounds on H_β (methods a, b, c, os:M).
    Lower(Opts),
    /// Bisection for the dimension lower bound.
    Dim(Opts),
    /// Jensen cover upper bounds.
    Upper(Opts),
    /// Oracle cross-checks, one JSON line per check.
    Verify(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// Rotation number: golden | sqrt3m1 | quad:A,B,C,D | cf:a1,.. | cfonce:a1,..;then:m | squaregrowth:q1
    #[arg(long)]
    alpha: Option<String>,
    /// Gap model: classical:DELTA | perturbed:classical:DELTA;pow4to7 | logcubed | table:FILE
    #[arg(long)]
    model: Option<String>,
    /// Exponent for the upper cover (defaults to the model's δ).
    #[arg(long)]
    delta: Option<f64>,
    /// Exponent β for lower bounds.
    #[arg(long)]
    beta: Option<f64>,
    /// Index window LO..HI (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    /// Block truncation L for method b and order statistics.
    #[arg(long = "L")]
    l: Option<u64>,
    /// Comma-separated methods: a, b, c, os:M.
    #[arg(long)]
    method: Option<String>,
    /// Offset policy: auto | symmetric | sampled:K | fixed:a,b,..
    #[arg(long)]
    offsets: Option<String>,
    /// Bisection tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// Output path (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for oracle base points.
    #[arg(long)]
    seed: Option<u64>,
    /// Forward orbit length K (points 0..=K).
    #[arg(long)]
    k: Option<String>,
    /// Symmetric orbit half-width (points −N..=N).
    #[arg(long)]
    sym: Option<u64>,
    /// Write orbit plot data (CSV) for the threegap segment.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// key=value file mirroring the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Compute(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::AlphaSpec { .. } => Failure::Usage(with_grammar(e.to_string(), "alpha", AlphaSource::GRAMMAR)),
            Error::ModelSpec { .. } => Failure::Usage(with_grammar(e.to_string(), "model", GapSequence::GRAMMAR)),
            Error::InvalidArgument(_) | Error::EmptyRange { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn with_grammar(msg: String, what: &str, grammar: &str) -> String {
    if msg.contains(grammar) {
        msg
    } else {
        format!("{msg}\n{what} grammar: {grammar}")
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Run<T> {
    Err(Failure::Usage(msg.into()))
}

const CONFIG_KEYS: [&str; 15] = [
    "alpha", "model", "delta", "beta", "n", "L", "method", "offsets", "tol", "format", "out", "seed", "k", "sym", "plot",
];

fn read_config(path: &PathBuf) -> Run<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key=value", i + 1));
        };
        let k = k.trim().trim_start_matches("--");
        if !CONFIG_KEYS.contains(&k) {
            return usage(format!("config line {}: unknown key `{k}`", i + 1));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn fill<T: FromStr>(slot: &mut Option<T>, cfg: &BTreeMap<String, String>, key: &str) -> Run<()>
where
    T::Err: std::fmt::Display,
{
    if slot.is_none() {
        if let Some(v) = cfg.get(key) {
            *slot = Some(v.parse().map_err(|e| Failure::Usage(format!("config `{key}`: {e}")))?);
        }
    }
    Ok(())
}

impl Opts {
    fn merge_config(&mut self) -> Run<()> {
        let Some(path) = self.config.clone() else { return Ok(()) };
        let c = read_config(&path)?;
        fill(&mut self.alpha, &c, "alpha")?;
        fill(&mut self.model, &c, "model")?;
        fill(&mut self.delta, &c, "delta")?;
        fill(&mut self.beta, &c, "beta")?;
        fill(&mut self.n, &c, "n")?;
        fill(&mut self.l, &c, "L")?;
        fill(&mut self.method, &c, "method")?;
        fill(&mut self.offsets, &c, "offsets")?;
        fill(&mut self.tol, &c, "tol")?;
        fill(&mut self.format, &c, "format")?;
        fill(&mut self.out, &c, "out")?;
        fill(&mut self.seed, &c, "seed")?;
        fill(&mut self.k, &c, "k")?;
        fill(&mut self.sym, &c, "sym")?;
        fill(&mut self.plot, &c, "plot")?;
        Ok(())
    }

    fn alpha(&self) -> Run<RotationNumber> {
        Ok(RotationNumber::parse(self.alpha.as_deref().unwrap_or("golden"))?)
    }

    fn model(&self) -> Run<GapSequence> {
        Ok(GapSequence::from_spec(self.model.as_deref().unwrap_or("classical:0.5"))?)
    }

    fn window(&self, default: (i64, i64)) -> Run<(i64, i64)> {
        let Some(s) = &self.n else { return Ok(default) };
        let parsed = match s.split_once("..") {
            Some((a, b)) => a.trim().parse::<i64>().ok().zip(b.trim().parse::<i64>().ok()),
            None => s.trim().parse::<i64>().ok().map(|v| (v, v)),
        };
        match parsed {
            Some((lo, hi)) if lo <= hi => Ok((lo, hi)),
            Some(_) => usage(format!("--n {s}: empty window")),
            None => usage(format!("--n {s}: expected LO..HI")),
        }
    }

    fn usize_window(&self, default: (usize, usize)) -> Run<(usize, usize)> {
        let (lo, hi) = self.window((default.0 as i64, default.1 as i64))?;
        if lo < 0 {
            return usage("--n: indices must be non-negative here");
        }
        Ok((lo as usize, hi as usize))
    }

    fn json(&self, default_json: bool) -> Run<bool> {
        match self.format.as_deref() {
            None => Ok(default_json),
            Some("json") => Ok(true),
            Some("csv") => Ok(false),
            Some(f) => usage(format!("--format {f}: expected csv or json")),
        }
    }

    fn methods(&self) -> Run<Vec<Method>> {
        let spec = self.method.as_deref().unwrap_or("a");
        spec.split(',').map(|m| m.trim().parse::<Method>().map_err(Failure::from)).collect()
    }

    fn series_options(&self) -> Run<SeriesOptions> {
        let mut o = SeriesOptions::default();
        if let Some(l) = self.l {
            o.l = l;
        }
        if let Some(p) = &self.offsets {
            o.policy = p.parse::<OffsetPolicy>()?;
        }
        Ok(o)
    }

    fn sink(&self) -> Run<Box<dyn Write>> {
        match &self.out {
            Some(p) => {
                let f = fs::File::create(p).map_err(|e| Failure::Compute(format!("{}: {e}", p.display())))?;
                Ok(Box::new(io::BufWriter::new(f)))
            }
            None => Ok(Box::new(io::stdout().lock())),
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> Failure {
    Failure::Compute(format!("write: {e}"))
}

fn emit_json<T: Serialize>(o: &Opts, value: &T) -> Run<()> {
    let mut w = o.sink()?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io_err)?;
    writeln!(w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn emit_csv(o: &Opts, header: &[&str], rows: Vec<Vec<String>>) -> Run<()> {
    let mut w = csv::Writer::from_writer(o.sink()?);
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn cmd_cf(o: &Opts) -> Run<()> {
    let mut alpha = o.alpha()?;
    let (lo, hi) = o.usize_window((1, 20))?;
    if lo == 0 {
        return usage("--n for cf starts at 1");
    }
    let table = alpha.convergents(hi + 1)?;
    let rows: Vec<_> = (lo..=hi).map(|n| table.convergent(n)).collect();
    if o.json(false)? {
        let dioph = if lo >= 2 && hi > lo { diophantine_class_estimate(&mut alpha, (lo, hi)).ok() } else { None };
        emit_json(o, &json!({ "alpha": alpha.source().to_string(), "convergents": rows, "diophantine": dioph }))
    } else {
        let header = ["n", "a_n", "p_n", "q_n", "theta_lo", "theta_hi", "N_n", "Q_n"];
        let rows = rows
            .into_iter()
            .map(|c| vec![c.n.to_string(), c.a, c.p, c.q, fmt(c.theta.lo), fmt(c.theta.hi), c.big_n, c.big_q])
            .collect();
        emit_csv(o, &header, rows)
    }
}

fn cmd_gaps(o: &Opts) -> Run<()> {
    let seq = o.model()?;
    let (lo, hi) = o.window((-10, 10))?;
    let lengths: Vec<(i64, Interval)> = (lo..=hi).map(|i| (i, seq.length(i))).collect();
    if o.json(false)? {
        let class_window = (lo.max(1).min(hi), hi.max(1));
        emit_json(
            o,
            &json!({
                "model": seq.spec(),
                "base": seq.base().describe(),
                "delta": seq.delta(),
                "normalizer": seq.normalizer(),
                "total_check": seq.total_check(1000)?,
                "lengths": lengths.iter().map(|(i, l)| json!({ "index": i, "length": l })).collect::<Vec<_>>(),
                "denjoy_class": seq.denjoy_class_estimate(class_window).ok(),
            }),
        )
    } else {
        let rows = lengths.into_iter().map(|(i, l)| vec![i.to_string(), fmt(l.lo), fmt(l.hi)]).collect();
        emit_csv(o, &["index", "length_lo", "length_hi"], rows)
    }
}

fn cmd_threegap(o: &Opts) -> Run<()> {
    let mut alpha = o.alpha()?;
    let (report, segment) = match (o.sym, &o.k) {
        (Some(_), Some(_)) => return usage("--k and --sym are exclusive"),
        (Some(n), None) => (symmetric_gap_structure(&mut alpha, n)?, (-(n as i64), n as i64)),
        (None, k) => {
            let k_str = k.as_deref().unwrap_or("25");
            let k: BigUint = k_str.parse().map_err(|_| Failure::Usage(format!("--k {k_str}: expected an integer")))?;
            if k < BigUint::from(ENUMERATION_BUDGET) {
                let k = u64::try_from(&k).unwrap();
                (forward_gap_structure(&mut alpha, k)?, (0, k as i64))
            } else {
                (forward_gap_structure_analytic(&mut alpha, &k)?, (0, -1))
            }
        }
    };
    let threshold = match &o.n {
        Some(_) => {
            let (lo, hi) = o.usize_window((2, 8))?;
            Some(threshold_check(&mut alpha, lo, hi)?)
        }
        None => None,
    };
    if let Some(path) = &o.plot {
        if segment.1 < segment.0 {
            return usage("--plot needs an enumerated segment (K below the enumeration budget)");
        }
        let rows = orbit_plot_rows(&mut alpha, segment.0, segment.1)?;
        let mut w = csv::Writer::from_path(path).map_err(io_err)?;
        w.write_record(["t", "position", "gap_after", "class"]).map_err(io_err)?;
        for r in rows {
            w.write_record([r.t.to_string(), fmt(r.position), fmt(r.gap_after), r.class.to_string()]).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    if o.json(true)? {
        emit_json(o, &json!({ "report": report, "threshold": threshold }))
    } else {
        let rows = report
            .classes
            .iter()
            .map(|c| {
                vec![c.coef.to_string(), c.offset.to_string(), fmt(c.length.lo), fmt(c.length.hi), c.multiplicity.to_string()]
            })
            .collect();
        emit_csv(o, &["coef", "offset", "length_lo", "length_hi", "multiplicity"], rows)
    }
}

fn cmd_lower(o: &Opts) -> Run<()> {
    let mut alpha = o.alpha()?;
    let seq = o.model()?;
    let beta = o.beta.unwrap_or_else(|| seq.delta());
    if !(beta > 0.0) {
        return usage("--beta must be positive");
    }
    let window = o.usize_window((2, 30))?;
    let opts = o.series_options()?;
    let methods = o.methods()?;
    if methods.iter().any(|m| matches!(m, Method::UpperCover)) {
        return usage("`upper` is not a lower-bound method; use the upper subcommand");
    }
    let table = alpha.convergents(window.1 + 2)?;
    let mut all: Vec<BoundSeries> = Vec::new();
    for m in methods {
        let mut s = bound_series(&table, &seq, m, beta, window, &opts)?;
        if window.1 > window.0 {
            s.liminf = liminf_report(&s, (window.0 as u64, window.1 as u64)).ok();
        }
        all.push(s);
    }
    if o.json(false)? {
        emit_json(o, &all)
    } else {
        write_series_csv(&all, o.sink()?)?;
        Ok(())
    }
}

fn cmd_dim(o: &Opts) -> Run<()> {
    let mut alpha = o.alpha()?;
    let seq = o.model()?;
    let squaregrowth = matches!(alpha.source(), AlphaSource::SquareGrowth { .. });
    let window = o.usize_window(if squaregrowth { (2, 11) } else { (10, 30) })?;
    let methods = o.methods()?;
    let [method] = methods[..] else { return usage("dim takes a single --method") };
    let mut opts = BisectOptions { series: o.series_options()?, ..BisectOptions::default() };
    if let Some(t) = o.tol {
        opts.tol = t;
    }
    let mut report = dimension_report(&mut alpha, &seq, method, window, &opts)?;
    let delta = o.delta.unwrap_or_else(|| seq.delta());
    if delta > 0.0 && delta < 1.0 {
        let samples: Vec<u64> = (1..=6).map(|e| 10u64.pow(e)).collect();
        let check = upper_corollary_check(&seq, delta, &[0.01, 0.05, 0.1], &samples)?;
        let cover = upper_series(&seq, delta, &samples)?;
        // A bounded cover at exponent δ gives dim ≤ δ.
        let last = cover.rows.last().map(|r| r.value.hi).unwrap_or(f64::INFINITY);
        if last.is_finite() && check.rows.iter().all(|r| r.bounded) {
            report.upper_jensen = Some(Interval::point(delta));
        }
        report.upper_corollary_check = Some(check);
    }
    emit_json(o, &report)
}

fn cmd_upper(o: &Opts) -> Run<()> {
    let seq = o.model()?;
    let delta = o.delta.unwrap_or_else(|| seq.delta());
    let (lo, hi) = o.window((1, 6))?;
    if lo < 0 || hi > 18 {
        return usage("--n for upper is a range of decimal exponents within 0..18");
    }
    let ns: Vec<u64> = (lo..=hi).map(|e| 10u64.pow(e as u32)).collect();
    let series = upper_series(&seq, delta, &ns)?;
    if o.json(false)? {
        let limit = upper_limit_constants(delta).ok();
        emit_json(o, &json!({ "series": series, "limit": limit }))
    } else {
        write_series_csv(&[series], o.sink()?)?;
        Ok(())
    }
}

fn cmd_verify(o: &Opts) -> Run<()> {
    let opts = VerifyOptions { seed: o.seed.unwrap_or(0), ..VerifyOptions::default() };
    let checks = run_suite(&opts);
    let mut w = o.sink()?;
    for c in &checks {
        serde_json::to_writer(&mut w, c).map_err(io_err)?;
        writeln!(w).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn run(cmd: Cmd) -> Run<()> {
    match cmd {
        Cmd::Cf(mut o) => o.merge_config().and_then(|_| cmd_cf(&o)),
        Cmd::Gaps(mut o) => o.merge_config().and_then(|_| cmd_gaps(&o)),
        Cmd::Threegap(mut o) => o.merge_config().and_then(|_| cmd_threegap(&o)),
        Cmd::Lower(mut o) => o.merge_config().and_then(|_| cmd_lower(&o)),
        Cmd::Dim(mut o) => o.merge_config().and_then(|_| cmd_dim(&o)),
        Cmd::Upper(mut o) => o.merge_config().and_then(|_| cmd_upper(&o)),
        Cmd::Verify(mut o) => o.merge_config().and_then(|_| cmd_verify(&o)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verify) => ExitCode::from(3),
    }
}
