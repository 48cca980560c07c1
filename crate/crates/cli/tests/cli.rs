use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_spectral-bounds");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

struct Run {
    csv: String,
    rows: Vec<Vec<String>>,
    header: Vec<String>,
    sidecar: Value,
}

impl Run {
    fn col(&self, name: &str) -> Vec<&str> {
        let i = self.header.iter().position(|h| h == name).expect(name);
        self.rows.iter().map(|r| r[i].as_str()).collect()
    }

    fn num(&self, name: &str) -> Vec<f64> {
        self.col(name).iter().map(|s| s.parse().unwrap()).collect()
    }

    fn flag_codes(&self) -> Vec<&str> {
        self.sidecar["flags"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f["code"].as_str().unwrap())
            .collect()
    }
}

/// Runs with `--out` into `dir` and parses the CSV and sidecar.
fn run_ok(dir: &Path, name: &str, args: &[&str]) -> Run {
    let out = dir.join(format!("{name}.csv"));
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", out.to_str().unwrap()]);
    let o = run(&full);
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(json_path(&out)).unwrap()).unwrap();
    validate(&schema(), &sidecar, "$");
    Run {
        csv,
        rows,
        header,
        sidecar,
    }
}

fn json_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn schema() -> Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run-report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Checks the keywords the published schema uses.
fn validate(schema: &Value, v: &Value, at: &str) {
    let s = schema.as_object().unwrap();
    for key in s.keys() {
        assert!(
            [
                "$schema", "$id", "title", "type", "required", "properties",
                "additionalProperties", "items", "enum", "minimum", "pattern",
            ]
            .contains(&key.as_str()),
            "unsupported schema keyword {key}"
        );
    }
    if let Some(t) = s.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "integer" => v.is_u64() || v.is_i64(),
            "number" => v.is_number(),
            "boolean" => v.is_boolean(),
            other => panic!("unsupported type {other}"),
        };
        assert!(ok, "{at}: expected {t}, got {v}");
    }
    if let Some(e) = s.get("enum").and_then(Value::as_array) {
        assert!(e.contains(v), "{at}: {v} not in {e:?}");
    }
    if let Some(m) = s.get("minimum").and_then(Value::as_f64) {
        assert!(v.as_f64().unwrap() >= m, "{at}: below minimum");
    }
    if let Some(p) = s.get("pattern").and_then(Value::as_str) {
        let re = regex::Regex::new(p).unwrap();
        assert!(re.is_match(v.as_str().unwrap()), "{at}: {v} does not match {p}");
    }
    if let Some(req) = s.get("required").and_then(Value::as_array) {
        for r in req {
            let r = r.as_str().unwrap();
            assert!(v.get(r).is_some(), "{at}: missing {r}");
        }
    }
    if let Some(obj) = v.as_object() {
        let props = s.get("properties").and_then(Value::as_object);
        for (k, child) in obj {
            match (props.and_then(|p| p.get(k)), s.get("additionalProperties")) {
                (Some(sub), _) => validate(sub, child, &format!("{at}.{k}")),
                (None, Some(Value::Bool(false))) => panic!("{at}: unexpected field {k}"),
                (None, Some(sub @ Value::Object(_))) => validate(sub, child, &format!("{at}.{k}")),
                (None, _) => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(items, x, &format!("{at}[{i}]"));
        }
    }
}

#[test]
fn horn_sweep_has_requested_rows_and_constant_ratio() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(
        dir.path(),
        "horn",
        &["bound", "horn", "--d", "2", "--nu", "2", "--sigma", "1.5", "--lambda", "1:100:log25"],
    );
    assert_eq!(r.rows.len(), 25);
    assert_eq!(r.sidecar["row_count"], 25);
    assert_eq!(r.sidecar["command"], "bound horn");
    assert!(r.sidecar["flags"].as_array().unwrap().is_empty());
    let ratios = r.num("ratio");
    for q in &ratios {
        assert!((q - ratios[0]).abs() < 1e-12, "{q} vs {}", ratios[0]);
    }
    assert!((ratios[0] - 1.0).abs() < 1e-10);
    assert!(r.csv.contains("\r\n"));
}

#[test]
fn critical_horn_is_zero_below_threshold() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(
        dir.path(),
        "crit",
        &["bound", "horn", "--nu", "1", "--sigma", "1.5", "--lambda", "0.1:10:log12"],
    );
    let threshold = std::f64::consts::PI.powi(2) / 16.0;
    let mut below = 0;
    for (l, b) in r.num("lambda").iter().zip(r.num("bound")) {
        if *l <= threshold {
            assert_eq!(b, 0.0);
            below += 1;
        } else {
            assert!(b > 0.0);
        }
    }
    assert!(below >= 3);
}

#[test]
fn identical_invocations_give_identical_csv() {
    let dir = TempDir::new().unwrap();
    let args = ["bound", "urchin", "--kind", "geometric", "--delta", "0.5", "--sigma", "1.5", "--lambda", "10:10000:log9"];
    let a = run_ok(dir.path(), "a", &args);
    let b = run_ok(dir.path(), "b", &args);
    assert_eq!(a.csv, b.csv);
    assert_eq!(a.sidecar["rows_digest"], b.sidecar["rows_digest"]);
    // stdout carries the same bytes
    let o = run(&args);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), a.csv);
}

#[test]
fn urchin_sandwich_and_threshold() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(
        dir.path(),
        "urchin",
        &["bound", "urchin", "--kind", "linear", "--sigma", "1.5", "--lambda", "1,3.75,10,100,1000,10000"],
    );
    for (lo, up) in r.num("lower").iter().zip(r.num("upper")) {
        assert!(*lo <= up, "{lo} > {up}");
    }
    // r_1 = 1: nothing at or below 15/4
    let up = r.num("upper");
    assert_eq!((up[0], up[1]), (0.0, 0.0));
    assert_eq!(r.col("n_hat")[0], "0");
    assert!(up[2] > 0.0);
}

#[test]
fn failing_explicit_sequence_is_flagged_not_fatal() {
    let dir = TempDir::new().unwrap();
    let radii = dir.path().join("radii.txt");
    // r_2 > 2 r_1 breaks the doubling condition
    std::fs::write(&radii, "1 5 6 7 8\n9 10\n").unwrap();
    let r = run_ok(
        dir.path(),
        "explicit",
        &["bound", "urchin", "--kind", "explicit", "--radii", radii.to_str().unwrap(), "--sigma", "1.5", "--lambda", "1:1000:log6"],
    );
    assert_eq!(r.rows.len(), 6);
    assert!(r.flag_codes().contains(&"sequence"), "{:?}", r.sidecar["flags"]);
}

#[test]
fn lt1d_weak_well_has_no_spectrum_and_zero_bound() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(
        dir.path(),
        "weak",
        &["lt1d", "--potential", "well", "--depth", "2", "--sigma", "1.5,2"],
    );
    assert!(r.num("a").iter().all(|a| *a <= 2.0 * 3f64.ln()));
    assert!(r.num("bound").iter().all(|b| *b == 0.0));
    assert!(r.col("eigenvalue_count").iter().all(|c| *c == "0"));
    assert!(r.col("dominance").iter().all(|d| *d == "true"));
}

#[test]
fn lt1d_residual_and_dominance_on_deep_wells() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(
        dir.path(),
        "deep",
        &["lt1d", "--potential", "well", "--depth", "30", "--start", "0.2", "--end", "0.8", "--sigma", "1.5,2,3"],
    );
    let tol = r.sidecar["tolerances"]["gap_identity_rel"].as_f64().unwrap();
    assert!(r.num("gap_residual").iter().all(|g| *g <= tol));
    assert!(r.col("dominance").iter().all(|d| *d == "true"));
    let (solver, bound) = (r.num("solver_riesz"), r.num("bound"));
    assert!(solver.iter().zip(&bound).all(|(s, b)| s <= b));
    assert!(r.flag_codes().is_empty());
}

#[test]
fn lt1d_reads_sampled_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("v.txt");
    let body: String = (0..=100)
        .map(|i| {
            let t = i as f64 / 100.0;
            format!("{t} {}\n", 40.0 * (std::f64::consts::PI * t).sin().powi(2))
        })
        .collect();
    std::fs::write(&path, body).unwrap();
    let r = run_ok(
        dir.path(),
        "file",
        &["lt1d", "--potential", "file", "--file", path.to_str().unwrap(), "--sigma", "1.5"],
    );
    assert_eq!(r.col("dominance"), vec!["true"]);
    assert!(r.num("bound")[0] > 0.0);

    let missing = run(&["lt1d", "--potential", "file", "--file", "/nonexistent/v.txt"]);
    assert_eq!(code(&missing), 3);
    std::fs::write(&path, "0 1\n0.5 1\n2 1\n").unwrap();
    let uneven = run(&["lt1d", "--potential", "file", "--file", path.to_str().unwrap()]);
    assert_eq!(code(&uneven), 3);
    assert!(String::from_utf8_lossy(&uneven.stderr).contains("uniformly"));
}

#[test]
fn verify_horn_dominates_and_refinement_delta_shrinks() {
    let dir = TempDir::new().unwrap();
    let mut deltas = Vec::new();
    for h in ["0.2", "0.1", "0.05"] {
        let r = run_ok(
            dir.path(),
            &format!("verify{h}"),
            &["verify", "--domain", "horn", "--nu", "2", "--sigma", "1.5", "--lambda", "3,6", "--h", h],
        );
        assert!(r.col("dominance").iter().all(|d| *d == "true"));
        assert!(r.num("ratio").iter().all(|q| *q > 0.0 && *q <= 1.0));
        deltas.push(r.num("refinement_delta")[1].abs());
    }
    assert!(deltas[0] > deltas[1] && deltas[1] > deltas[2], "{deltas:?}");
}

#[test]
fn verify_critical_horn_is_empty_below_threshold() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(
        dir.path(),
        "crit",
        &["verify", "--domain", "critical", "--sigma", "0", "--lambda", "0.3,0.6", "--h", "0.1"],
    );
    assert!(r.num("empirical").iter().all(|v| *v == 0.0));
    assert!(r.num("refined").iter().all(|v| *v == 0.0));
}

#[test]
fn coarse_grid_exits_with_suggestion() {
    let o = run(&["verify", "--domain", "horn", "--nu", "2", "--sigma", "1.5", "--lambda", "10:80:log3", "--h", "0.3"]);
    assert_eq!(code(&o), 4);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("--h 0.07"), "{err}");
}

#[test]
fn lt2d_agreement_and_slope() {
    let dir = TempDir::new().unwrap();
    let r = run_ok(
        dir.path(),
        "lt2d",
        &["lt2d", "--alpha", "0.25", "--sigma", "1.5", "--lambda", "0.5:50:log5"],
    );
    assert!(r.num("agreement").iter().all(|a| *a <= 1e-6));
    let s = &r.sidecar["summary"];
    assert!(s["slope_error"].as_f64().unwrap() <= 0.01);
    let (closed, sect) = (r.num("closed_form"), r.num("sectioned_bound"));
    assert!(closed.iter().zip(&sect).all(|(c, b)| b < c));
}

#[test]
fn lt2d_large_alpha_is_flagged() {
    let dir = TempDir::new().unwrap();
    let divergent = run_ok(
        dir.path(),
        "div",
        &["lt2d", "--alpha", "0.45", "--sigma", "1.5", "--lambda", "1,2"],
    );
    assert_eq!(divergent.rows.len(), 2);
    assert!(divergent.col("closed_form").iter().all(|c| c.is_empty()));
    assert!(divergent.flag_codes().contains(&"divergent"));
    assert!(divergent.flag_codes().contains(&"hypothesis"));

    let finite = run_ok(
        dir.path(),
        "fin",
        &["lt2d", "--alpha", "0.45", "--sigma", "1", "--lambda", "1,2"],
    );
    assert!(finite.num("closed_form").iter().all(|c| *c > 0.0));
    let msgs: Vec<&str> = finite.sidecar["flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["message"].as_str().unwrap())
        .collect();
    assert!(msgs.contains(&"alpha >= 2/5"), "{msgs:?}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["bound", "horn", "--nu", "2", "--sigma", "1.5", "--lambda", "1:2:cube3"][..],
        &["bound", "horn", "--nu", "0.5", "--sigma", "1.5", "--lambda", "1"],
        &["bound", "horn", "--nu", "2", "--sigma", "-1", "--lambda", "1"],
        &["bound", "horn", "--nu", "2", "--lambda", "1"],
        &["bound", "urchin", "--kind", "geometric", "--sigma", "1.5", "--lambda", "1"],
        &["verify", "--domain", "horn", "--sigma", "1.5", "--lambda", "1", "--h", "0.1"],
        &["lt2d", "--alpha", "1.5", "--sigma", "1", "--lambda", "1"],
        &["frobnicate"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&run(&["--help"])), 0);
}
