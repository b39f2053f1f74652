use std::path::Path;
use std::process::{Command, Output};

use chronoscale::discrete::{example_suite, ExampleName, ExampleParams};
use chronoscale::Rational;
use chronoscale_cli::{run_sweep, Report};
use serde_json::json;
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, doc: &serde_json::Value) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, doc.to_string()).unwrap();
    path
}

fn chronoscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chronoscale")).args(args).output().unwrap()
}

fn verify(config: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["verify", "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    chronoscale(&args)
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

fn identity_young() -> serde_json::Value {
    json!({"scale": [{"integers": [0, 10]}], "function": "identity", "checks": [{"type": "young"}]})
}

#[test]
fn exhaustive_young_on_integers() {
    let dir = TempDir::new().unwrap();
    let out = verify(&write(&dir, "c.json", &identity_young()), &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 121);
    for row in rows {
        let nums: Vec<i64> = row[1].split(' ').map(|kv| kv.split_once('=').unwrap().1.parse().unwrap()).collect();
        let (a, b) = (nums[0], nums[1]);
        assert_eq!(row[3].parse::<i64>().unwrap(), (a - b) * (a - b - 1) / 2);
        assert_eq!(row[6] == "true", b == a || b == a - 1);
        assert_eq!(row[7], "exact");
    }
}

#[test]
fn perturbed_middle_exits_one() {
    let dir = TempDir::new().unwrap();
    let mut doc = identity_young();
    doc["test_middle_offset"] = json!(-1);
    let out = verify(&write(&dir, "c.json", &doc), &[]);
    assert_eq!(out.status.code(), Some(1));
    let failing = csv_rows(&out).into_iter().filter(|r| r[5] == "false").count();
    assert_eq!(failing, 21);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let off_grid = json!({"scale": [{"integers": [0, 4]}], "function": "power 2", "checks": [{"type": "young", "a": [2], "b": [5]}]});
    let out = verify(&write(&dir, "a.json", &off_grid), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(csv_rows(&out)[0][5], "error");

    let malformed = dir.path().join("b.json");
    std::fs::write(&malformed, "{\"scale\": ").unwrap();
    assert_eq!(verify(&malformed, &[]).status.code(), Some(2));

    let not_monotone = json!({"scale": [{"interval": [-1, 1]}], "function": "power 2", "checks": [{"type": "young"}]});
    assert_eq!(verify(&write(&dir, "c.json", &not_monotone), &[]).status.code(), Some(2));

    let good = write(&dir, "d.json", &identity_young());
    assert_eq!(verify(&good, &["--format", "xml"]).status.code(), Some(2));
    assert_eq!(verify(&dir.path().join("missing.json"), &[]).status.code(), Some(2));
}

#[test]
fn json_report_rerenders_to_the_same_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        &json!({"scale": [{"integers": [0, 3]}], "function": "exp 3/2", "checks": [{"type": "sandwich"}]}),
    );
    let csv = verify(&cfg, &[]);
    let json_out = dir.path().join("r.json");
    assert_eq!(verify(&cfg, &["--format", "json", "--out", json_out.to_str().unwrap()]).status.code(), Some(0));
    let again = chronoscale(&["report", json_out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(csv.stdout, again.stdout);
    assert!(String::from_utf8(csv.stdout).unwrap().contains("27/8"));
}

#[test]
fn jobs_fall_back_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &identity_young());
    let base = verify(&cfg, &["--jobs", "1"]);
    let env = Command::new(env!("CARGO_BIN_EXE_chronoscale"))
        .args(["verify", "--config", cfg.to_str().unwrap()])
        .env("CHRONOSCALE_JOBS", "4")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(base.stdout, env.stdout);
    let zero = Command::new(env!("CARGO_BIN_EXE_chronoscale"))
        .args(["verify", "--config", cfg.to_str().unwrap()])
        .env("CHRONOSCALE_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn geometric_sweep_over_two_bases() {
    let doc = json!({
        "checks": [{"type": "examples", "example": "geometric_b", "base": 2, "range": [0, 12]}],
        "grid": {"/checks/0/base": [2, 3]}
    });
    let report = run_sweep(&doc, Some(4)).unwrap();
    assert_eq!(report.rows.len(), 2 * 91);
    assert_eq!(report.exit_code(), 0);
    for row in &report.rows {
        let field = |k: &str| -> i64 {
            row.inputs.split(' ').find_map(|kv| kv.strip_prefix(k)).unwrap().parse().unwrap()
        };
        let (a, alpha) = (field("a="), field("alpha="));
        assert_eq!(row.equality.any(), alpha == a || alpha == a - 1, "{row:?}");
    }
}

#[test]
fn example_sweep_matches_the_library_suites() {
    let cases = [
        (ExampleName::FallingFactorial, ExampleParams::k(3)),
        (ExampleName::GeometricB, ExampleParams::base(Rational::new(3, 2))),
        (ExampleName::LegendreB, ExampleParams::base(Rational::from(2))),
        (ExampleName::SineK, ExampleParams::k(4)),
        (ExampleName::BinomialK, ExampleParams::k(2)),
    ];
    let checks: Vec<serde_json::Value> = cases
        .iter()
        .map(|(name, p)| {
            let mut c = json!({"type": "examples", "example": name});
            if let Some(k) = p.k {
                c["k"] = json!(k);
            }
            if let Some(b) = &p.base {
                c["base"] = json!(b.to_string());
            }
            c
        })
        .collect();
    let doc = json!({"checks": [checks[0].clone()], "grid": {"/checks/0": checks}});
    let report = run_sweep(&doc, Some(3)).unwrap();
    assert_eq!(report.exit_code(), 0);

    let expected: Vec<_> = cases
        .iter()
        .flat_map(|(name, p)| example_suite(*name, p, None).unwrap())
        .collect();
    assert_eq!(report.rows.len(), expected.len());
    for (row, ex) in report.rows.iter().zip(&expected) {
        assert!(row.inputs.ends_with(&format!("{} {}", ex.example, ex.inputs())), "{} vs {}", row.inputs, ex.inputs());
        assert_eq!(row.lower.as_deref(), Some(ex.lhs.to_string().as_str()));
        assert_eq!(row.middle.as_deref(), Some(ex.mid.to_string().as_str()));
        assert_eq!(row.upper.as_deref(), Some(ex.rhs.to_string().as_str()));
        assert_eq!((row.holds, row.equality.any()), (ex.holds, ex.equality));
    }
}

#[test]
fn empty_sweep_prints_only_the_header() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &json!({"checks": [], "grid": {"/tolerance": []}}));
    let out = chronoscale(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "check,inputs,lower,middle,upper,holds,equality,regime\n");
}

#[test]
fn examples_subcommand_defaults() {
    let out = chronoscale(&["examples", "--example", "falling_factorial", "--k", "2", "--range", "1", "6", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 21);
    assert_eq!(chronoscale(&["examples", "--example", "nope"]).status.code(), Some(2));
}
