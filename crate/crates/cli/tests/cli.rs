use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn run_env(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_repdigit"));
    cmd.args(args).env_remove("REPDIGIT_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("REPDIGIT_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json_of(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"));
    let raw: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&raw).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let s = schema(name);
    let msgs: Vec<String> = match s.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect(),
    };
    panic!("{name}: {}", msgs.join("; "));
}

#[test]
fn table_a_text_matrix() {
    let o = run(&["table-a"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let row = |v: &str| {
        out.lines()
            .find(|l| l.split_whitespace().next() == Some(v))
            .unwrap()
            .split_whitespace()
            .skip(1)
            .collect::<String>()
    };
    assert_eq!(row("-4"), "OOXXX");
    assert_eq!(row("-11"), "OXXXX");
    assert_eq!(row("-16"), "OOOOX");
    assert_eq!(row("-2"), "XXXXX");
    assert!(out.contains("matches reference: yes"));
}

#[test]
fn table_a_json_and_extended_modulus() {
    let doc = json_of(&["table-a"]);
    assert_valid("table-a", &doc);
    assert_eq!(doc["matches_reference"], true);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 17);

    let doc = json_of(&["table-a", "--modulus-exp", "7"]);
    assert_valid("table-a", &doc);
    assert_eq!(doc["exponents"].as_array().unwrap().len(), 6);
    for row in doc["rows"].as_array().unwrap() {
        assert!(row["entries"].as_str().unwrap().ends_with('X'));
    }
}

#[test]
fn reduce_survivors() {
    let o = run(&["reduce"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o)
        .contains("survivors: 2_m+22, 2_m+99, 3_m+111, 4_m+77, 6_m+55, 7_m+99999, 8_m+33"));

    let doc = json_of(&["reduce"]);
    assert_valid("reduce", &doc);
    assert_eq!(doc["matches_reference"], true);
}

#[test]
fn reduce_verdicts_show_million_residues() {
    let out = stdout(&run(&["reduce", "--show-verdicts"]));
    for (family, r) in [
        ("3_m+11", 96),
        ("1_m+33", 296),
        ("2_m+222", 1996),
        ("1_m+333", 2996),
    ] {
        let line = out
            .lines()
            .find(|l| l.trim_start().starts_with(&format!("{family} ")))
            .unwrap();
        assert!(line.contains(&format!("= {r} mod 10^6: non-QR")), "{line}");
    }
}

#[test]
fn reduce_custom_pool_is_not_compared() {
    let doc = json_of(&["reduce", "--pool", "7,9"]);
    assert_valid("reduce", &doc);
    assert_eq!(doc["matches_reference"], Value::Null);
    assert!(doc["survivors"].as_array().unwrap().len() > 7);
}

#[test]
fn sieve_and_certify_json() {
    let doc = json_of(&["sieve", "--family", "8+33", "--modulus", "7"]);
    assert_valid("sieve", &doc);
    assert_eq!(doc["period"], 6);

    let doc = json_of(&["certify", "--family", "2+22", "--pool", "7,9,13,37,1000000"]);
    assert_valid("certify", &doc);
    let doc = json_of(&["certify", "--family", "7+99999"]);
    assert_valid("certify", &doc);
    assert_eq!(doc["certificates"][0]["status"]["kind"], "certified");
}

#[test]
fn mordell_example() {
    let o = run(&["mordell", "--family", "8+33", "--r", "2"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("y^2 = x^3 + 2890000"));
    for p in ["(-136, 612)", "(0, 1700)", "(200, 3300)", "(425, 8925)"] {
        assert!(out.contains(p), "{p}");
    }
    assert!(out.contains("x = 200 (l = 0, m = 2, k = 11)"));

    let doc = json_of(&["mordell", "--family", "8+33", "--r", "2"]);
    assert_valid("mordell", &doc);
    let rep = &doc["reports"][0];
    assert_eq!(rep["N"], "2890000");
    assert_eq!(rep["table_b_agreement"], true);
    assert_eq!(rep["table_b"]["bold"], serde_json::json!([200]));
}

#[test]
fn classify_reference_list() {
    let o = run(&["classify"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for line in [
        "11^2 = 99 + 22",
        "11^2 = 88 + 33",
        "11^2 = 77 + 44",
        "11^2 = 66 + 55",
        "12^2 = 111 + 33",
        "38^2 = 1111 + 333",
        "211^2 = 44444 + 77",
    ] {
        assert!(out.contains(line), "{line}");
    }
    let doc = json_of(&["classify"]);
    assert_valid("classify", &doc);
    assert_eq!(doc["enumeration"]["solutions"].as_array().unwrap().len(), 7);
}

#[test]
fn classify_csv() {
    let o = run(&["--format", "csv", "classify"]);
    assert_eq!(code(&o), 0);
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["base", "a", "m", "b", "n", "sum", "root"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().any(|r| &r[5] == "44521" && &r[6] == "211"));
}

#[test]
fn multibase_base7() {
    let o = run(&["multibase", "--base", "7", "--max-len", "13"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("48060^2 = (111111111111)_7 + (33333333)_7"));

    let doc = json_of(&["multibase", "--base", "7", "--max-len", "13"]);
    assert_valid("multibase", &doc);
    assert_eq!(doc["base7"]["displayed"]["equals_claimed_sum"], false);
    assert_eq!(doc["base7"]["found"][0]["root"], "48060");
}

#[test]
fn report_json_validates() {
    let doc = json_of(&["report", "--x-scan-bound", "20000", "--direct-bound", "40"]);
    assert_valid("report", &doc);
    assert_eq!(doc["survivors_match_reference"], true);
}

#[test]
fn deterministic_output() {
    for args in [
        &["--format", "json", "reduce"][..],
        &["--format", "json", "classify"],
        &[
            "--workers",
            "1",
            "--format",
            "json",
            "mordell",
            "--family",
            "4+77",
        ],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let one = run(&[
        "--workers",
        "1",
        "--format",
        "json",
        "mordell",
        "--family",
        "4+77",
    ]);
    let many = run(&[
        "--workers",
        "4",
        "--format",
        "json",
        "mordell",
        "--family",
        "4+77",
    ]);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn rejected_inputs_exit_3() {
    for args in [
        &["bogus"][..],
        &["mordell", "--family", "8+33", "--r", "5"],
        &["mordell", "--family", "0+33"],
        &["sieve", "--family", "8+33", "--modulus", "1"],
        &["sieve", "--family", "8+33", "--modulus", "100000000"],
        &["multibase", "--base", "7", "--max-len", "100"],
        &["multibase", "--base", "1"],
        &["classify", "--base", "1"],
        &["table-a", "--modulus-exp", "9"],
        &["--format", "csv", "reduce"],
        &["--workers", "0", "classify"],
        &["mordell", "--x-scan-bound", "100000000"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 3, "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn cache_is_written_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "mordell",
        "--family",
        "8+33",
        "--r",
        "2",
        "--x-scan-bound",
        "5000",
    ];
    let first = run_env(&args, Some(dir.path()));
    assert_eq!(code(&first), 0);
    let file = dir.path().join("points-N2890000-x5000.json");
    assert!(file.exists());
    let second = run_env(&args, Some(dir.path()));
    assert_eq!(first.stdout, second.stdout);

    // A cache missing a listed point is reported as a disagreement.
    fs::write(
        &file,
        r#"[{"x":"-136","y":"612"},{"x":"200","y":"3300"},{"x":"425","y":"8925"}]"#,
    )
    .unwrap();
    let o = run_env(&args, Some(dir.path()));
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("DISAGREES"));

    // A cache holding a point off the curve is rejected.
    fs::write(&file, r#"[{"x":"1","y":"1"}]"#).unwrap();
    assert_eq!(code(&run_env(&args, Some(dir.path()))), 3);
}
