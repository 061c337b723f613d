use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corefill"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const FIGURE: &str = r#"{"items": 2, "bidders": [
    {"id": 1, "bids": [{"bundle": [0], "value_micro": 60000000}]},
    {"id": 2, "bids": [{"bundle": [1], "value_micro": 100000000}]},
    {"id": 3, "bids": [{"bundle": [0, 1], "value_micro": 60000000}]},
    {"id": 4, "bids": [{"bundle": [0], "value_micro": 20000000}]},
    {"id": 5, "bids": [{"bundle": [1], "value_micro": 20000000}]}
]}"#;

const SLATE_CONFIG: &str = r#"{
    "family": "slate",
    "instances": 3,
    "advertisers": {"min": 3, "max": 5},
    "ads_per_advertiser": {"min": 2, "max": 4},
    "lines_per_ad": {"min": 1, "max": 6},
    "bid_cents": {"min": 10, "max": 400},
    "pclick_percent": {"min": 5, "max": 95},
    "h": 3,
    "m": 8
}"#;

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    write(&config, SLATE_CONFIG);

    for out in ["a", "b"] {
        let result = run(&[
            "generate",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            dir.path().join(out).to_str().unwrap(),
        ]);
        assert!(result.status.success(), "{}", stderr(&result));
    }
    for k in 0..3 {
        let name = format!("slate-{k:04}.json");
        let a = fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let other = run(&[
        "generate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "10",
        "--out",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert!(other.status.success());
    let a = fs::read(dir.path().join("a/slate-0000.json")).unwrap();
    let c = fs::read(dir.path().join("c/slate-0000.json")).unwrap();
    assert_ne!(a, c, "different seeds should differ");
}

#[test]
fn price_prints_the_outcome_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("figure.json");
    write(&instance, FIGURE);

    let result = run(&[
        "price",
        "--instance",
        instance.to_str().unwrap(),
        "--mechanism",
        "vcg",
        "--epsilon",
        "1000",
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let outcome: serde_json::Value = serde_json::from_str(&stdout(&result)).unwrap();
    assert_eq!(outcome["revenue"], 40_000_000);
    assert_eq!(outcome["payments"]["1"], 20_000_000);
    assert_eq!(outcome["payments"]["2"], 20_000_000);
    assert_eq!(outcome["meta"]["oracle_calls"], 6);
}

#[test]
fn price_core_writes_the_search_trace() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("figure.json");
    write(&instance, FIGURE);
    let trace = dir.path().join("trace.jsonl");

    let result = run(&[
        "price",
        "--instance",
        instance.to_str().unwrap(),
        "--mechanism",
        "core",
        "--epsilon",
        "1000",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));

    let text = fs::read_to_string(&trace).unwrap();
    let lines: Vec<serde_json::Value> =
        text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["winners"], serde_json::json!([1, 2]));
    assert_eq!(lines[1]["winners"], serde_json::json!([2, 4]));
    assert_eq!(lines[2]["winners"], serde_json::json!([3]));

    let outcome: serde_json::Value = serde_json::from_str(&stdout(&result)).unwrap();
    assert_eq!(outcome["revenue"], 60_000_256);
}

#[test]
fn compare_is_deterministic_outside_the_timing_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    write(&config, SLATE_CONFIG);
    let instances = dir.path().join("instances");
    let generated = run(&[
        "generate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        instances.to_str().unwrap(),
    ]);
    assert!(generated.status.success());
    write(&instances.join("figure.json"), FIGURE);

    let mut reports = Vec::new();
    for name in ["one.csv", "two.csv"] {
        let out = dir.path().join(name);
        let result = run(&[
            "compare",
            "--instances",
            instances.to_str().unwrap(),
            "--mechanisms",
            "all",
            "--epsilon",
            "10000",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success(), "{}", stderr(&result));
        // GSP cannot price the bundle instance; that is reported, not fatal.
        assert!(stderr(&result).contains("skipped gsp-opt on figure"));
        reports.push(fs::read_to_string(&out).unwrap());
    }

    let strip_timing = |text: &str| -> Vec<String> {
        text.lines()
            .map(|line| {
                let mut fields: Vec<&str> = line.split(',').collect();
                fields[6] = "-";
                fields.join(",")
            })
            .collect()
    };
    assert_eq!(strip_timing(&reports[0]), strip_timing(&reports[1]));

    let header = reports[0].lines().next().unwrap();
    assert_eq!(
        header,
        "instance_id,mechanism,welfare_micro,revenue_expected_micro,\
         revenue_literal_micro,revenue_vs_vcg,runtime_us,oracle_calls,fairness_ratio"
    );
    // 3 slates x 5 mechanisms + the bundle instance x 3 applicable ones.
    assert_eq!(reports[0].lines().count(), 1 + 15 + 3);
}

#[test]
fn verify_distinguishes_good_and_bad_points() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("figure.json");
    write(&instance, FIGURE);

    let good = dir.path().join("good.json");
    write(&good, r#"{"1": 40000000, "2": 60000000}"#);
    let result = run(&[
        "verify",
        "--instance",
        instance.to_str().unwrap(),
        "--point",
        good.to_str().unwrap(),
        "--epsilon",
        "1000",
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    assert!(stdout(&result).contains("in core: yes"));

    let outside = dir.path().join("outside.json");
    write(&outside, r#"{"1": 40000000, "2": 80000000}"#);
    let result = run(&[
        "verify",
        "--instance",
        instance.to_str().unwrap(),
        "--point",
        outside.to_str().unwrap(),
        "--epsilon",
        "1000",
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(stdout(&result).contains("in core: no"));
    assert!(stdout(&result).contains("coalition [3]"));

    let slack = dir.path().join("slack.json");
    write(&slack, r#"{"1": 40000000, "2": 50000000}"#);
    let result = run(&[
        "verify",
        "--instance",
        instance.to_str().unwrap(),
        "--point",
        slack.to_str().unwrap(),
        "--epsilon",
        "1000",
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(stdout(&result).contains("raisable: [2]"));
}

#[test]
fn errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("figure.json");
    write(&instance, FIGURE);

    let result = run(&[
        "price",
        "--instance",
        instance.to_str().unwrap(),
        "--mechanism",
        "gsp-opt",
        "--epsilon",
        "1000",
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr(&result).contains("slate"));

    let result = run(&[
        "price",
        "--instance",
        instance.to_str().unwrap(),
        "--mechanism",
        "nope",
        "--epsilon",
        "1000",
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr(&result).contains("unknown mechanism"));
}
