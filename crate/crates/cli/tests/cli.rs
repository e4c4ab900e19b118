use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn nncap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nncap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/schemas")
        .join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(name)).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{doc:#}");
    assert_eq!(doc["schema_version"], 1);
}

fn json(o: &Output) -> Value {
    assert_eq!(
        o.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn tnk_prints_exact_integer() {
    let o = nncap(&["theory", "tnk", "--n", "4", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "14\n");

    let o = nncap(&["theory", "tnk", "--n", "100", "--k", "50", "--recursive"]);
    assert_eq!(stdout(&o), "633825300114114700748351602688\n");

    let doc = json(&nncap(&[
        "theory", "tnk", "--n", "4", "--k", "3", "--format", "json",
    ]));
    assert_valid("count", &doc);
    assert_eq!(doc["value"], "14");
}

#[test]
fn domain_error_exits_one() {
    let o = nncap(&["theory", "tnk", "--n", "0", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain"));
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_flags_print_usage_to_stderr() {
    for args in [
        &["theory", "tnk", "--n", "four", "--k", "3"][..],
        &["theory", "tnk", "--k", "3"],
        &["frobnicate"],
        &[
            "theory",
            "bounds",
            "--k",
            "2",
            "--hidden",
            "1",
            "--activation",
            "softmax",
        ],
    ] {
        let o = nncap(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
        assert!(o.stdout.is_empty());
    }
    let o = nncap(&["theory", "tnk", "--k", "3"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(nncap(&["--help"]).status.code(), Some(0));
}

#[test]
fn bounds_json() {
    let doc = json(&nncap(&["theory", "bounds", "--k", "3", "--hidden", "2"]));
    assert_valid("bounds", &doc);
    assert_eq!(
        (doc["lm"].as_u64(), doc["mk"].as_u64()),
        (Some(11), Some(22))
    );
    assert_eq!(doc["param_count"], 11);

    let doc = json(&nncap(&["theory", "bounds", "--k", "4", "--hidden", "3,2"]));
    assert_eq!(doc["param_count"], 26);
    let doc = json(&nncap(&["theory", "bounds", "--k", "5"]));
    assert_eq!(
        (doc["lm"].as_u64(), doc["mk"].as_u64()),
        (Some(6), Some(12))
    );
}

#[test]
fn theory_curve_csv_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let o = nncap(&[
        "theory",
        "curve",
        "--k",
        "3",
        "--n-max",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,k,x,fraction");
    assert_eq!(lines.len(), 9);
    let row: Vec<&str> = lines[6].split(',').collect();
    assert_eq!(row[..3], ["6", "3", "2.0"]);
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.5);
    // 17 significant digits
    let mantissa = row[3].split('e').next().unwrap().replace('.', "");
    assert_eq!(mantissa.len(), 17);

    let doc = json(&nncap(&[
        "theory", "curve", "--k", "2", "--n-max", "5", "--format", "json",
    ]));
    assert_valid("theory_curve", &doc);
    assert_eq!(doc["points"][3]["fraction"], 0.5);
}

#[test]
fn oracle_count_matches_formula() {
    let o = nncap(&[
        "oracle",
        "count",
        "--n",
        "6",
        "--k",
        "3",
        "--homogeneous",
        "--seed",
        "3",
    ]);
    assert_eq!(stdout(&o), "count 32\ntnk   32\n");
    let doc = json(&nncap(&[
        "oracle", "count", "--n", "4", "--k", "2", "--format", "json",
    ]));
    assert_valid("oracle_count", &doc);
    assert_eq!(doc["count"], "14");
    assert_eq!(doc["tnk"], "14");
    assert_eq!(
        nncap(&["oracle", "count", "--n", "23", "--k", "2"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn measure_lm_report() {
    let doc = json(&nncap(&[
        "measure",
        "lm",
        "--k",
        "2",
        "--hidden",
        "1",
        "--seed",
        "4",
        "--datasets",
        "4",
        "--restarts",
        "10",
        "--threads",
        "2",
    ]));
    assert_valid("measurement", &doc);
    assert_eq!(doc["kind"], "LM");
    assert_eq!(doc["measured"], 3);
    assert_eq!(doc["seed"], 4);
    assert_eq!(doc["config"]["datasets"], 4);
    assert_eq!(doc["theoretical"]["lm"], 5);
    assert_eq!(doc["partial"], false);
    assert!(doc.get("param_dumps").is_none());

    let text = stdout(&nncap(&[
        "measure",
        "lm",
        "--k",
        "2",
        "--hidden",
        "1",
        "--seed",
        "4",
        "--datasets",
        "4",
        "--restarts",
        "10",
        "--format",
        "text",
    ]));
    assert!(text
        .lines()
        .any(|l| l.split_whitespace().eq(["measured", "3"])));
}

#[test]
fn measure_mk_with_dumped_params() {
    let doc = json(&nncap(&[
        "measure",
        "mk",
        "--k",
        "2",
        "--hidden",
        "1",
        "--datasets",
        "3",
        "--restarts",
        "10",
        "--dump-params",
    ]));
    assert_valid("measurement", &doc);
    assert_eq!(doc["kind"], "MK");
    assert_eq!(doc["measured"], 6);
    assert_eq!(doc["per_n"][0]["n"], 6);
    let dumps = doc["param_dumps"].as_array().unwrap();
    assert!(!dumps.is_empty());
    assert_eq!(dumps[0]["params"].as_array().unwrap().len(), 5);

    let deep = nncap(&["measure", "mk", "--k", "2", "--hidden", "2,2"]);
    assert_eq!(deep.status.code(), Some(1));
}

#[test]
fn time_budget_gives_exit_two_and_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lm.json");
    let o = nncap(&[
        "measure",
        "lm",
        "--k",
        "3",
        "--hidden",
        "2",
        "--time-budget",
        "0.000001",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_valid("measurement", &doc);
    assert_eq!(doc["partial"], true);
}

#[test]
fn measured_curve_outputs() {
    let o = nncap(&[
        "measure", "curve", "--k", "2", "--hidden", "1", "--n-min", "2", "--n-max", "5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,x_theoretical,fraction,tested,exhaustive");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "2,0.4,1.0,2,true");
    assert!(lines[4].starts_with("5,1.0,"));

    let doc = json(&nncap(&[
        "measure", "curve", "--k", "2", "--hidden", "1", "--n-max", "4", "--format", "json",
    ]));
    assert_valid("measured_curve", &doc);
    assert_eq!(doc["points"].as_array().unwrap().len(), 4);
}

#[test]
fn compare_reports_match_across_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("compare.toml");
    std::fs::write(
        &cfg,
        "version = 1\n\n[[entry]]\nlabel = \"seed0\"\nk = 2\nhidden = [1]\ndatasets = 3\nrestarts = 10\n\n\
         [[entry]]\nlabel = \"seed9\"\nk = 2\nhidden = [1]\nseed = 9\ndatasets = 3\nrestarts = 10\n",
    )
    .unwrap();
    let json_path = dir.path().join("report.json");
    let o = nncap(&[
        "compare",
        cfg.to_str().unwrap(),
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_valid("comparison", &doc);
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert_eq!(e["theoretical_lm"], 5);
        assert_eq!(e["theoretical_mk"], 10);
        assert_eq!(e["measured_lm"], 3);
        assert_eq!(e["efficiency_lm"], 0.6);
        assert_eq!(e["lm_config"]["restarts"], 10);
    }
    assert_eq!(entries[1]["lm_config"]["base_seed"], 9);

    // Text and JSON carry the same numbers.
    let table = stdout(&o);
    for e in entries {
        let row = table
            .lines()
            .find(|l| l.starts_with(e["label"].as_str().unwrap()))
            .unwrap();
        let cells: Vec<&str> = row.split_whitespace().collect();
        let nums: Vec<f64> = cells[cells.len() - 6..]
            .iter()
            .map(|c| c.parse().unwrap())
            .collect();
        let expect: Vec<f64> = [
            "measured_lm",
            "theoretical_lm",
            "measured_mk",
            "theoretical_mk",
            "efficiency_lm",
            "efficiency_mk",
        ]
        .iter()
        .map(|k| e[*k].as_f64().unwrap())
        .collect();
        assert_eq!(nums, expect);
    }
}

#[test]
fn compare_rejects_empty_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "version = 1\n").unwrap();
    let o = nncap(&["compare", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no entries"));
    assert_eq!(
        nncap(&["compare", "/nonexistent/compare.toml"])
            .status
            .code(),
        Some(1)
    );
}
