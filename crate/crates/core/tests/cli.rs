use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxplus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    let doc = serde_json::from_slice(&out.stdout).expect("valid JSON on stdout");
    (doc, out.status.code().unwrap())
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_reproduces_the_example_run() {
    let (a, b, x0) = (data("a.txt"), data("b.txt"), data("x0.txt"));
    let (doc, code) = json(&[
        "solve",
        "--a",
        path(&a),
        "--b",
        path(&b),
        "--x0",
        path(&x0),
        "--trace",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["status"], "solution");
    assert_eq!(strings(&doc["result"]["x"]), ["0", "1", "3"]);
    assert_eq!(doc["result"]["iterations"], 3);
    assert_eq!(doc["result"]["trace"].as_array().unwrap().len(), 4);
    assert_eq!(doc["number_type"], "integer");
    assert_eq!(doc["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn closure_with_alpha_13() {
    let (a, b) = (data("a.txt"), data("b.txt"));
    let (doc, code) = json(&["closure", "--a", path(&a), "--b", path(&b), "--alpha", "13"]);
    assert_eq!(code, 0);
    let r = &doc["result"];
    assert_eq!(r["alpha"], "13");
    let gens: Vec<Vec<String>> = r["span"].as_array().unwrap().iter().map(strings).collect();
    assert_eq!(gens.len(), 7);
    assert_eq!(gens[0], ["0", "-1", "1"]);
    assert_eq!(gens[3], ["0", "-3", "2"]);
    assert_eq!(r["projectively_bounded"], true);
    assert_eq!(r["certified_minplus_linear"], false);
}

#[test]
fn check_linearity_certifies_the_final_example() {
    let (a, b) = (data("a.txt"), data("b_linear.txt"));
    let (doc, code) = json(&["check-linearity", "--a", path(&a), "--b", path(&b)]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["certified_minplus_linear"], true);
    let first = &doc["result"]["row_diagnostics"][0];
    assert_eq!(first["k_a"], serde_json::json!([1, 2]));
    assert_eq!(first["k_b"], serde_json::json!([1]));
}

#[test]
fn member_reports_principal_coefficients() {
    let (g, x) = (data("gens.txt"), data("x.txt"));
    let (doc, code) = json(&["member", "--generators", path(&g), "--x", path(&x)]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["member"], true);
    assert_eq!(strings(&doc["result"]["coefficients"]), ["1", "0"]);
}

#[test]
fn verify_agrees_with_the_certificate() {
    let (a, b) = (data("a.txt"), data("b_linear.txt"));
    let (doc, code) = json(&["verify", "--a", path(&a), "--b", path(&b), "--range", "6"]);
    assert_eq!(code, 0);
    assert_eq!(doc["oracle"]["inclusion_holds"], true);
    assert_eq!(doc["oracle"]["sets_coincide"], true);
    assert!(doc["oracle"]["solutions"].as_u64().unwrap() > 0);
}

#[test]
fn points_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("points.txt");
    let (a, b) = (data("a.txt"), data("b_linear.txt"));
    let (doc, code) = json(&[
        "closure",
        "--a",
        path(&a),
        "--b",
        path(&b),
        "--points",
        path(&out),
        "--range",
        "4",
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().count() as u64,
        doc["result"]["span_points"]["count"].as_u64().unwrap()
    );
    assert!(text.lines().any(|l| l == "0 -1 0"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let zero = write("zero.txt", "0\n");
    let one = write("one.txt", "1\n");
    let bad = write("bad.txt", "0 x\n");
    let ragged = write("ragged.txt", "0 1\n2\n");

    assert_eq!(
        run(&["solve", "--a", path(&zero), "--b", path(&one)])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["closure", "--a", path(&zero), "--b", path(&one)])
            .status
            .code(),
        Some(1)
    );

    let (a, b, x0) = (data("a.txt"), data("b.txt"), data("x0.txt"));
    let capped = run(&[
        "solve",
        "--a",
        path(&a),
        "--b",
        path(&b),
        "--x0",
        path(&x0),
        "--max-iter",
        "1",
    ]);
    assert_eq!(capped.status.code(), Some(3));

    let out = run(&["solve", "--a", path(&bad), "--b", path(&b)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1, column 3"));
    let out = run(&["solve", "--a", path(&ragged), "--b", path(&b)]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["closure", "--a", path(&a), "--b", path(&b), "--alpha", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 1"));

    let (doc, code) = json(&["closure", "--a", path(&zero), "--b", path(&one)]);
    assert_eq!(code, 1);
    assert!(doc["error"]["stage"]
        .as_str()
        .unwrap()
        .starts_with("step 3"));
}

#[test]
fn output_is_deterministic() {
    let (a, b) = (data("a.txt"), data("b.txt"));
    for extra in [&[][..], &["--json"][..]] {
        let mut args = vec!["closure", "--a", path(&a), "--b", path(&b), "--alpha", "13"];
        args.extend_from_slice(extra);
        let first = run(&args).stdout;
        for _ in 0..3 {
            assert_eq!(run(&args).stdout, first);
        }
    }
}

#[test]
fn text_and_json_carry_the_same_fields() {
    let (a, b) = (data("a.txt"), data("b_linear.txt"));
    let text =
        String::from_utf8(run(&["check-linearity", "--a", path(&a), "--b", path(&b)]).stdout)
            .unwrap();
    let (doc, _) = json(&["check-linearity", "--a", path(&a), "--b", path(&b)]);
    for key in doc
        .as_object()
        .unwrap()
        .keys()
        .chain(doc["result"].as_object().unwrap().keys())
    {
        assert!(
            text.contains(&format!("{key}:")),
            "missing {key} in\n{text}"
        );
    }
}

#[test]
fn rational_and_float_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    std::fs::write(&a, "0 1/2 -1\n0 -5 -5\n0 4 6\n0 3 -2\n").unwrap();
    let b = data("b.txt");
    let (doc, code) = json(&["closure", "--a", path(&a), "--b", path(&b)]);
    assert_eq!(code, 0);
    assert_eq!(doc["number_type"], "rational");
    assert_eq!(strings(&doc["result"]["span"][0]), ["0", "-1/2", "1"]);

    let (doc, code) = json(&[
        "closure",
        "--a",
        path(&data("a.txt")),
        "--b",
        path(&b),
        "--float-tol",
        "1e-9",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["exact"], false);
    assert_eq!(doc["result"]["certified_minplus_linear"], false);
}
