use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn strnum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strnum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = strnum(&all);
    (code(&out), serde_json::from_slice(&out.stdout).expect("one json document"))
}

fn file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn check_reports_theory_and_free_variables() {
    let f = file(r#"(exists ((Z Str)) (and (= (concat "0" Z) (concat Z "0")) (numstr i Z)))"#);
    let out = strnum(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "theory: tsn\nfree variables: i:Num\n");
}

#[test]
fn check_rejects_bad_input() {
    let clash = file(r#"(and (= x "1") (< x 2))"#);
    let out = strnum(&["check", clash.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sort clash"));
    assert_eq!(code(&strnum(&["check", "-e", r#"(and (pi 4 1 2) (numstr 1 S))"#])), 2);
    assert_eq!(code(&strnum(&["check", "-e", "(and (= x"])), 2);
    assert_eq!(code(&strnum(&["check", "/no/such/file"])), 2);
    assert_eq!(code(&strnum(&["check"])), 2);
    assert_eq!(code(&strnum(&["frobnicate"])), 2);
}

#[test]
fn parse_errors_in_json_carry_spans() {
    let (c, doc) = json(&["check", "-e", "(and (< x 1)\n  (foo x))"]);
    assert_eq!(c, 2);
    assert_eq!(doc["error"]["kind"], "parse");
    assert_eq!(doc["error"]["line"], 2);
    assert!(doc["error"]["span"]["start"].as_u64().unwrap() > 0);
}

#[test]
fn solve_examples() {
    let out = strnum(&["solve", "-e", "(numstr 3 S)"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("S = \"11\""));
    let out = strnum(&["solve", "-e", "(and (numstr 3 S) (= (len S) 3))"]);
    assert!(stdout(&out).contains("S = \"011\""));
    let out = strnum(&["solve", "-e", "(= (len S) (+ (len S) 1))"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("unsat within bounds (max_str_len=6, max_num=64)"));
}

#[test]
fn solve_in_model_b() {
    let out = strnum(&["solve", "--model", "b", "-e", "(and (numstr 5 S) (< 2 (len S)))"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("S = \"101\""));
    let out = strnum(&["solve", "--model", "b", "-e", "(and (numstr 5 S) (< 3 (len S)))"]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&strnum(&["solve", "--model", "b", "-e", "(= S epsilon)"])), 2);
}

#[test]
fn solve_reads_standard_input() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_strnum"))
        .args(["solve", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"(< 62 n)").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(stdout(&out).contains("n = 63"));
}

#[test]
fn reduce_prints_targets_and_verifies() {
    let out = strnum(&["reduce", "tp-to-tsn", "-e", "(pi p x y)"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out).trim(),
        r#"(exists ((z!0 Str)) (exists ((xs!0 Str)) (and (= (concat "0" z!0) (concat z!0 "0")) (= (len z!0) y) (numstr p (concat xs!0 z!0)) (numstr x xs!0))))"#
    );
    let out = strnum(&["reduce", "tp-to-tsn", "-e", "(pi 6 3 1)", "--verify"]);
    assert!(stdout(&out).contains("equisat: agree (both sat)"));
    let out = strnum(&["reduce", "tp-to-tsn", "-e", "(pi 5 3 1)", "--verify"]);
    assert!(stdout(&out).contains("equisat: agree (both unsat)"));
    let out = strnum(&["reduce", "tsn-to-tpi", "-e", "(numstr i s)"]);
    assert!(stdout(&out).contains("(pi lu!0 1 t!0)"));
    assert_eq!(code(&strnum(&["reduce", "tsn-to-tpi", "-e", "(pi 6 3 1)"])), 2);
    assert_eq!(code(&strnum(&["reduce", "tp-to-tsn", "-e", "(numstr 3 S)"])), 2);
}

#[test]
fn reduce_json_trace_reparses() {
    let (c, doc) = json(&["reduce", "tp-to-tsn", "-e", "(or (pi a 3 b) (not (pi a 1 c)))", "--verify", "--max-num", "12"]);
    assert_eq!(c, 0);
    let trace = &doc["result"]["trace"];
    let target = strnum::parse(trace["target"].as_str().unwrap()).unwrap();
    assert_eq!(strnum::print(&target), trace["target"].as_str().unwrap());
    let rewrites = trace["rewrites"].as_array().unwrap();
    assert_eq!(rewrites.len(), 2);
    assert_eq!(rewrites[1]["negated"], true);
    for r in rewrites {
        strnum::parse(r["source_atom"].as_str().unwrap()).unwrap();
        strnum::parse(r["target"].as_str().unwrap()).unwrap();
    }
    assert_eq!(doc["result"]["equisat"]["verdict"], "agree");
    assert_eq!(doc["result"]["equisat"]["certified"], true);
}

#[test]
fn axioms_filter_and_mutation() {
    let out = strnum(&["axioms", "--filter", "LEN", "--max-str-len", "4", "--max-num", "16"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let ids: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(ids, ["LEN-15", "LEN-16", "LEN-17", "LEN-18"]);
    assert_eq!(code(&strnum(&["axioms", "--filter", "NOPE"])), 2);
    assert_eq!(code(&strnum(&["axioms", "--model", "b"])), 2);

    let mutated = file(
        "(axiom LEN-17 (forall ((x Str) (y Str)) (= (len (concat x y)) (+ (len x) (len y)))))\n\
         (axiom LEN-17-BAD (forall ((x Str) (y Str)) (= (len (concat x y)) (+ (len x) (len x)))))",
    );
    let out = strnum(&["axioms", "--axioms-file", mutated.path().to_str().unwrap(), "--max-str-len", "3"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("LEN-17-BAD  Counterexample [x = epsilon, y = \"0\"]"), "{text}");
}

#[test]
fn axiom_sweep_as_json() {
    let (c, doc) = json(&["axioms", "--max-str-len", "4", "--max-num", "16"]);
    assert_eq!(c, 0);
    let axioms = doc["result"]["axioms"].as_array().unwrap();
    assert!(axioms.len() >= 25);
    for a in axioms {
        let outcome = a["outcome"].as_str().unwrap();
        if a["id"] == "NUMSTR-24" {
            assert_eq!(outcome, "NotFullyCheckable");
            assert_eq!(a["surrogate"]["outcome"], "HoldsWithinBounds");
        } else {
            assert!(outcome == "HoldsWithinBounds" || outcome == "WitnessFound", "{a}");
        }
        strnum::parse(a["statement"].as_str().unwrap()).unwrap();
    }
}

#[test]
fn incompleteness_demo() {
    let out = strnum(&["demo-incompleteness"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("J is false"));
    assert!(text.contains("i = 3, s = \"11\", t = \"0011\""));
    assert!(text.contains("J is true"));
    assert!(text.contains("J distinguishes A from B within bounds"));

    let out = strnum(&["demo-incompleteness", "--max-num", "1", "--max-str-len", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bounds too small"));

    let (c, doc) = json(&["demo-incompleteness"]);
    assert_eq!(c, 0);
    assert_eq!(doc["result"]["model_a"]["j"], false);
    assert_eq!(doc["result"]["model_b"]["j"], true);
    assert_eq!(doc["result"]["counterexample"]["t"], "\"0011\"");
}

#[test]
fn corpus_is_seeded() {
    let a = stdout(&strnum(&["gen-corpus", "--count", "5", "--seed", "9"]));
    let b = stdout(&strnum(&["gen-corpus", "--count", "5", "--seed", "9"]));
    let c = stdout(&strnum(&["gen-corpus", "--count", "5", "--seed", "10"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 5);
    for line in a.lines() {
        strnum::parse(line).unwrap();
    }
    let any = stdout(&strnum(&["gen-corpus", "--kind", "any", "--count", "20"]));
    assert_eq!(any.lines().count(), 20);
}

#[test]
fn corpus_verification() {
    let out = strnum(&["gen-corpus", "--count", "10", "--seed", "4", "--verify", "--max-num", "12"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).ends_with("agree: 10, disagree: 0, inconclusive: 0\n"));
    assert_eq!(code(&strnum(&["gen-corpus", "--kind", "any", "--verify"])), 2);
}

#[test]
fn solve_output_is_identical_across_job_counts() {
    let f = "(and (numstr n S) (< 9 n) (= (len S) 5) (numstr m T) (< n m))";
    let runs: Vec<String> = ["1", "2", "8"]
        .iter()
        .map(|j| stdout(&strnum(&["solve", "-e", f, "--jobs", j])))
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]), "{runs:?}");
    assert_eq!(code(&strnum(&["solve", "-e", f, "--jobs", "0"])), 2);
}
