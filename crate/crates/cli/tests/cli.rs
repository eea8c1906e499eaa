use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn denjoy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_denjoy")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn lower_csv_has_bounds_schema() {
    let o = denjoy(&[
        "lower", "--alpha", "golden", "--model", "classical:0.5", "--beta", "0.5", "--method", "a,b", "--n", "2..30",
        "--L", "1000", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["n", "q_n", "N_n", "Q_n", "method", "beta", "value_lo", "value_hi", "truncation_L", "offset", "direction"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 29);
    for row in &rows {
        assert_eq!(&row[10], "lower");
        let lo: f64 = row[6].parse().unwrap();
        let hi: f64 = row[7].parse().unwrap();
        assert!(0.0 < lo && lo <= hi);
        match &row[4] {
            "A" => assert_eq!(&row[8], ""),
            "B" => assert_eq!(&row[8], "1000"),
            m => panic!("unexpected method {m}"),
        }
    }
    let first = rows.iter().find(|r| &r[0] == "10" && &r[4] == "A").unwrap();
    assert_eq!(&first[1], "89");
}

#[test]
fn threegap_sqrt3m1_k25() {
    let o = denjoy(&["threegap", "--alpha", "sqrt3m1", "--k", "25", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let classes = v["report"]["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 2);
    let mut mult: Vec<u64> = classes.iter().map(|c| c["multiplicity"].as_str().unwrap().parse().unwrap()).collect();
    mult.sort();
    assert_eq!(mult, [11, 15]);
    // Lengths ‖15α‖ and ‖11α‖ with α = √3 − 1.
    let a = 3f64.sqrt() - 1.0;
    let norm = |q: f64| ((q * a) - (q * a).round()).abs();
    let lengths: Vec<f64> = classes.iter().map(|c| c["length"]["lo"].as_f64().unwrap()).collect();
    assert!((lengths[0] - norm(15.0)).abs() < 1e-9);
    assert!((lengths[1] - norm(11.0)).abs() < 1e-9);
}

#[test]
fn threegap_plot_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("orbit.csv");
    let o = denjoy(&["threegap", "--alpha", "golden", "--k", "12", "--n", "2..6", "--plot", plot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v["threshold"]["rows"].as_array().unwrap() {
        assert_eq!(row["holds_at_threshold"], Value::Bool(true));
        assert_eq!(row["fails_below"], Value::Bool(true));
    }
    let text = fs::read_to_string(&plot).unwrap();
    assert_eq!(text.lines().next(), Some("t,position,gap_after,class"));
    assert_eq!(text.lines().count(), 1 + 13);
}

#[test]
fn dim_square_growth_logcubed() {
    let o = denjoy(&["dim", "--alpha", "squaregrowth:2", "--model", "logcubed", "--tol", "0.02"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let b = &v["beta_star_lower"]["bracket"];
    let mid = 0.5 * (b["lo"].as_f64().unwrap() + b["hi"].as_f64().unwrap());
    assert!((mid - 1.0 / 6.0).abs() < 0.03, "beta* = {mid}");
    assert_eq!(v["beta_star_lower"]["status"], "ok");
}

#[test]
fn upper_rows_are_tagged_upper() {
    let o = denjoy(&["upper", "--model", "classical:0.5", "--n", "1..4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",upper")));
}

#[test]
fn unknown_specs_are_usage_errors_citing_the_grammar() {
    let o = denjoy(&["lower", "--alpha", "phi"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("squaregrowth:q1"));
    let o = denjoy(&["gaps", "--model", "classical:1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("logcubed"));
    let o = denjoy(&["lower", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = denjoy(&["lower", "--n", "9..3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn finite_expansion_is_a_computation_error() {
    let o = denjoy(&["lower", "--alpha", "cfonce:1,2,3", "--n", "2..10"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# threegap fixture\nalpha=sqrt3m1\nk=25\nformat=csv\n").unwrap();
    let o = denjoy(&["threegap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = denjoy(&["threegap", "--config", cfg.to_str().unwrap(), "--k", "3"]);
    let out = stdout(&o);
    let mult: Vec<&str> = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(mult, ["1", "3"]);

    fs::write(&cfg, "colour=blue\n").unwrap();
    let o = denjoy(&["threegap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = denjoy(&[
            "lower", "--method", "a,b,os:2", "--n", "2..14", "--L", "50", "--format", "json", "--out", p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(p).unwrap()
    };
    assert_eq!(run("one.json"), run("two.json"));
}

#[test]
fn verify_passes_and_is_reproducible() {
    let a = denjoy(&["verify", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let lines: Vec<Value> = stdout(&a).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() >= 10);
    assert!(lines.iter().all(|c| c["passed"] == Value::Bool(true)));
    let b = denjoy(&["verify", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}
