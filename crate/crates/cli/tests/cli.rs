use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn family(name: &str) -> String {
    root().join("families").join(name).display().to_string()
}

fn pfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = root().join("schemas").join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, out: &Output) -> Value {
    let value: Value = serde_json::from_str(&stdout(out))
        .unwrap_or_else(|e| panic!("not json ({e}): {}", stdout(out)));
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}\n{value:#}");
    value
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pfc-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn count_prints_the_number() {
    let k23 = family("k23.json");
    let o = pfc(&[
        "count",
        "--family",
        &k23,
        "--index",
        "2",
        "--formula",
        "P1(x)",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "6\n");
}

#[test]
fn count_with_fixed_parameter() {
    let k23 = family("k23.json");
    let o = pfc(&[
        "count",
        "--family",
        &k23,
        "--index",
        "2",
        "--formula",
        "R(x,y)",
        "--at",
        "x=0",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = assert_valid("count", &o);
    assert_eq!(v["count"], 3);
    assert_eq!(v["parameter"], serde_json::json!(["x"]));
}

#[test]
fn fit_reports_rational_coefficient() {
    let k23 = family("k23.json");
    let args = [
        "fit",
        "--family",
        &k23,
        "--formula",
        "x = x",
        "--q",
        "P0(v)",
        "--indices",
        "1..12",
    ];
    let o = pfc(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("(5/2)*X"), "{}", stdout(&o));

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let o = pfc(&json_args);
    let v = assert_valid("fit", &o);
    assert_eq!(v["classes"][0]["polynomial"], "(5/2)*X");
    assert_eq!(v["classes"][0]["degree"], 1);
    assert_eq!(v["classes"][0]["leading_coefficient_positive"], true);
}

#[test]
fn fit_on_alternating_family_fails_with_diagnostic() {
    let alt = family("alternating.json");
    let o = pfc(&[
        "fit",
        "--family",
        &alt,
        "--formula",
        "Q(x)",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 2);
    let v = assert_valid("fit", &o);
    assert_eq!(v["polynomial_family"], false);
    assert!(!v["diagnostics"].as_array().unwrap().is_empty());

    let o = pfc(&[
        "fit",
        "--family",
        &alt,
        "--formula",
        "Q(x) & x = y",
        "--param",
        "y",
    ]);
    assert_eq!(code(&o), 2);
    assert!(
        stdout(&o).contains("unstable class count"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn mec_reports_class_sizes() {
    let k23 = family("k23.json");
    let o = pfc(&[
        "mec",
        "--family",
        &k23,
        "--formula",
        "R(x,y)",
        "--param",
        "y",
        "--q",
        "P0(v)",
        "--indices",
        "1..6",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = assert_valid("fit", &o);
    assert_eq!(v["command"], "mec");
    assert_eq!(v["classes"][0]["polynomial"], "2");
    assert_eq!(v["classes"][1]["polynomial"], "0");
    assert_eq!(
        v["classes"][0]["class_sizes"],
        serde_json::json!([3, 6, 9, 12, 15, 18])
    );
    assert_eq!(
        v["classes"][1]["class_sizes"],
        serde_json::json!([2, 4, 6, 8, 10, 12])
    );
}

#[test]
fn spectrum_json() {
    let k23 = family("k23.json");
    let o = pfc(&[
        "spectrum",
        "--family",
        &k23,
        "--index",
        "2",
        "--formula",
        "R(x,y)",
        "--object",
        "y",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = assert_valid("spectrum", &o);
    assert_eq!(v["classes"][0]["cardinality"], 3);
    assert_eq!(v["classes"][0]["members"].as_array().unwrap().len(), 4);
    assert_eq!(v["sum_identity"]["holds"], true);
    assert_eq!(v["quotient_identity"]["b"], 2);
    assert_eq!(v["quotient_identity"]["projection_count"], 6);
}

#[test]
fn ndim_certifies_and_rejects_wrong_dimension() {
    let k23 = family("k23.json");
    let base = [
        "ndim",
        "--family",
        &k23,
        "--formula",
        "P1(x)",
        "--q",
        "P0(v)",
        "--format",
        "json",
    ];
    let mut args = base.to_vec();
    args.extend(["--N", "1"]);
    let o = pfc(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = assert_valid("ndim", &o);
    assert_eq!(v["entries"][0]["mu_exact"], "3/5");
    assert_eq!(v["entries"][0]["d"], 1);

    let mut args = base.to_vec();
    args.extend(["--N", "2"]);
    let o = pfc(&args);
    assert_eq!(code(&o), 2);
    let v = assert_valid("failure", &o);
    assert!(v["error"].as_str().unwrap().contains("degree 1"));
}

#[test]
fn zero_one_scan_exit_codes() {
    let k23 = family("k23.json");
    let o = pfc(&[
        "zero-one",
        "--family",
        &k23,
        "--format",
        "json",
        "--formula",
        "forall x. P0(x) | P1(x)",
        "--formula",
        "forall x. forall y. R(x,y) -> P0(x) & P1(y)",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = assert_valid("zero-one", &o);
    assert_eq!(v["all_stabilized"], true);

    let alt = family("alternating.json");
    let o = pfc(&[
        "zero-one",
        "--family",
        &alt,
        "--formula",
        "exists x. Q(x)",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 2);
    let v = assert_valid("zero-one", &o);
    assert_eq!(v["sentences"][0]["stabilized"], false);
    assert_eq!(v["sentences"][0]["values"][0], true);

    let o = pfc(&["zero-one", "--family", &alt, "--formula", "Q(x)"]);
    assert_eq!(
        code(&o),
        1,
        "a formula with free variables is an input error"
    );
}

#[test]
fn num_bound_json() {
    let k23 = family("k23.json");
    let o = pfc(&[
        "num-bound",
        "--family",
        &k23,
        "--formula",
        "R(x,y)",
        "--param",
        "y",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = assert_valid("num-bound", &o);
    assert_eq!(v["bound"], 3);
    assert_eq!(v["caveat"], true);
}

#[test]
fn validate_reports_bad_members() {
    let o = pfc(&[
        "validate",
        "--family",
        &family("bipartite_3_4.json"),
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = assert_valid("validate", &o);
    assert_eq!(v["members"].as_array().unwrap().len(), 12);

    let broken = temp_file(
        "broken.json",
        r#"{"signature":{"relations":[{"name":"Q","arity":1}]},
            "generator":{"kind":"table","members":{
              "1":{"size":1,"relations":{"Q":[[0]]}},
              "2":{"size":2,"relations":{"Q":[[5]]}}}},
            "index_domain":[1,2]}"#,
    );
    let o = pfc(&[
        "validate",
        "--family",
        broken.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 2);
    let v = assert_valid("validate", &o);
    assert_eq!(v["valid"], false);
    let msg = v["members"][1]["violations"][0].as_str().unwrap();
    assert!(msg.contains("index 5 out of range"), "{msg}");
}

#[test]
fn input_errors_exit_one() {
    let k23 = family("k23.json");
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "count",
            "--family",
            "/nonexistent/family.json",
            "--index",
            "1",
            "--formula",
            "P0(x)",
        ],
        vec![
            "count",
            "--family",
            &k23,
            "--index",
            "1",
            "--formula",
            "P0(x) &",
        ],
        vec![
            "count",
            "--family",
            &k23,
            "--index",
            "1",
            "--formula",
            "S(x)",
        ],
        vec![
            "count",
            "--family",
            &k23,
            "--index",
            "1",
            "--formula",
            "R(x)",
        ],
        vec![
            "count",
            "--family",
            &k23,
            "--index",
            "0",
            "--formula",
            "P0(x)",
        ],
        vec![
            "fit",
            "--family",
            &k23,
            "--formula",
            "P0(x)",
            "--indices",
            "5..2",
        ],
        vec![
            "fit",
            "--family",
            &k23,
            "--formula",
            "P0(x)",
            "--indices",
            "1..5000",
        ],
        vec![
            "fit",
            "--family",
            &k23,
            "--formula",
            "P0(x)",
            "--indices",
            "one",
        ],
        vec![
            "ndim",
            "--family",
            &k23,
            "--formula",
            "P0(x)",
            "--N",
            "1",
            "--rel-tol",
            "0",
        ],
        vec![
            "count",
            "--family",
            &k23,
            "--index",
            "1",
            "--formula",
            "P0(x)",
            "--bogus",
        ],
        vec!["frobnicate"],
        vec![
            "count",
            "--family",
            &k23,
            "--index",
            "50",
            "--formula",
            "R(x,y) & R(z,w)",
            "--budget",
            "1000",
        ],
    ];
    for args in cases {
        let o = pfc(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    let o = pfc(&[
        "count",
        "--family",
        &k23,
        "--index",
        "1",
        "--formula",
        "P0(x) &",
    ]);
    assert!(stderr(&o).contains("position 7"), "{}", stderr(&o));
    let o = pfc(&[
        "count",
        "--family",
        &k23,
        "--index",
        "50",
        "--formula",
        "R(x,y) & R(z,w)",
        "--budget",
        "1000",
    ]);
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
}

#[test]
fn formula_from_file() {
    let p = temp_file("formula.txt", "P1(x) & !P0(x)\n");
    let arg = format!("@{}", p.display());
    let o = pfc(&[
        "count",
        "--family",
        &family("k23.json"),
        "--index",
        "3",
        "--formula",
        &arg,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "9\n");
}

#[test]
fn output_is_deterministic() {
    let k23 = family("k23.json");
    let run = |jobs: &str| {
        stdout(&pfc(&[
            "mec",
            "--family",
            &k23,
            "--formula",
            "R(x,y) | x = y",
            "--param",
            "y",
            "--q",
            "P0(v)",
            "--indices",
            "1..10",
            "--format",
            "json",
            "--jobs",
            jobs,
        ]))
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("4"));
    let spectrum = |_: u8| {
        stdout(&pfc(&[
            "spectrum",
            "--family",
            &k23,
            "--index",
            "3",
            "--formula",
            "R(x,y)",
            "--param",
            "y",
            "--format",
            "json",
        ]))
    };
    assert_eq!(spectrum(0), spectrum(1));
}

#[test]
fn csv_output() {
    let k23 = family("k23.json");
    let o = pfc(&[
        "fit",
        "--family",
        &k23,
        "--formula",
        "R(x,y)",
        "--param",
        "y",
        "--q",
        "P0(v)",
        "--indices",
        "1..3",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "index,size,q,class_0,class_1\n1,5,2,2,0\n2,10,4,2,0\n3,15,6,2,0\n"
    );
    let o = pfc(&[
        "count",
        "--family",
        &k23,
        "--index",
        "1",
        "--formula",
        "R(x,y)",
        "--format",
        "csv",
    ]);
    assert_eq!(stdout(&o), "index,formula,count\n1,\"R(x, y)\",6\n");
}

#[test]
fn shipped_families_match_schema() {
    let v = schema("family");
    for entry in std::fs::read_dir(root().join("families")).unwrap() {
        let path = entry.unwrap().path();
        let value: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let errors: Vec<String> = v.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(
            errors.is_empty(),
            "{}: {errors:?}",
            Path::new(&path).display()
        );
    }
}
