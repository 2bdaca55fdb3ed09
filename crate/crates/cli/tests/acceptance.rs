//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints its own line; exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use strnum::corpus::{formula_corpus, tp_corpus, TpShape};
use strnum::formula::{alpha_eq, free_vars};
use strnum::gamma::{check_all, gamma, incompleteness_demo, CheckVariant};
use strnum::reduce::{reduce_tp_to_tsn, reduce_tsn_to_tpi, sound_bounds_for_numstr_check};
use strnum::semantics::{numstr_holds, Evaluator, Value};
use strnum::solver::{check_reduction, Solver, Verdict};
use strnum::{parse, print, BigUint, Formula, Ident, ModelSpec, Sort, Strategy, Word};

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn word(len: usize, code: u32) -> Word {
    let text: String = (0..len).rev().map(|k| if code >> k & 1 == 1 { '1' } else { '0' }).collect();
    Word::new(&text).unwrap()
}

/// Plain positional reading, most significant digit first.
fn base2(s: &str) -> Option<u64> {
    if s.is_empty() {
        return None;
    }
    Some(s.chars().fold(0, |acc, c| acc * 2 + u64::from(c == '1')))
}

fn numstr_oracle() -> Result<String, String> {
    let mut pairs = 0u64;
    let mut bad = Vec::new();
    for len in 0..=10 {
        for code in 0..1u32 << len {
            let w = word(len, code);
            let expect = base2(w.as_str());
            for i in 0..1024u64 {
                pairs += 1;
                if numstr_holds(&i, w.as_bytes()) != (expect == Some(i)) {
                    bad.push(format!("({i}, {:?})", w.as_str()));
                }
            }
        }
    }
    ensure(bad.is_empty(), || format!("{} disagreements, first {}", bad.len(), bad[0]))?;
    Ok(format!("{pairs} pairs, 0 disagreements"))
}

fn compiled(f: &Formula, m: &ModelSpec) -> Evaluator<BigUint> {
    let free: Vec<(Ident, Sort)> = free_vars(f).into_iter().collect();
    Evaluator::new(f, &free, m, Strategy::Guided).unwrap()
}

fn slot(ev: &Evaluator<BigUint>, name: &str) -> usize {
    ev.free_vars().iter().position(|(v, _)| v.as_str() == name).unwrap()
}

fn pi_encoding_check() -> Result<String, String> {
    let trace = reduce_tp_to_tsn(&parse("(pi p x y)").unwrap()).map_err(|e| e.to_string())?;
    let ev = compiled(&trace.target, &ModelSpec::canonical(9, 255));
    let (ip, ix, iy) = (slot(&ev, "p"), slot(&ev, "x"), slot(&ev, "y"));
    let mut frame = ev.frame();
    let mut checked = 0;
    for p in 0..256u64 {
        for x in 0..16u64 {
            for y in 0..5u64 {
                ev.set(&mut frame, ip, &Value::Num(p.into()));
                ev.set(&mut frame, ix, &Value::Num(x.into()));
                ev.set(&mut frame, iy, &Value::Num(y.into()));
                let got = ev.eval(&mut frame).map_err(|e| e.to_string())?;
                ensure(got == (p == x << y), || format!("disagreement at p={p} x={x} y={y}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} triples, 0 disagreements"))
}

fn numstr_expressibility() -> Result<String, String> {
    let trace = reduce_tsn_to_tpi(&parse("(numstr i s)").unwrap()).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for len in 1..=5 {
        for i in 0..32u64 {
            let ev = compiled(&trace.target, &sound_bounds_for_numstr_check(i, len));
            let (ii, is) = (slot(&ev, "i"), slot(&ev, "s"));
            let mut frame = ev.frame();
            ev.set(&mut frame, ii, &Value::Num(i.into()));
            for code in 0..1u32 << len {
                let w = word(len, code);
                ev.set(&mut frame, is, &Value::Str(w.clone()));
                let got = ev.eval(&mut frame).map_err(|e| e.to_string())?;
                let want = numstr_holds(&i, w.as_bytes());
                ensure(got == want, || format!("disagreement at i={i} s={:?}", w.as_str()))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} pairs, 0 disagreements"))
}

fn differential_equisat() -> Result<String, String> {
    let corpus = tp_corpus(2024, 200, &TpShape::default());
    let m = ModelSpec::canonical(4, 15);
    let solver = Solver::default();
    let (mut agree, mut disagree, mut inconclusive) = (0, 0, 0);
    for f in &corpus {
        let trace = reduce_tp_to_tsn(f).map_err(|e| e.to_string())?;
        let report = check_reduction::<BigUint>(&solver, &trace, &m).map_err(|e| e.to_string())?;
        match report.verdict {
            Verdict::Agree => agree += 1,
            Verdict::Disagree => {
                disagree += 1;
                eprintln!("  disagree: {}", print(f));
            }
            Verdict::Inconclusive => inconclusive += 1,
        }
    }
    let summary = format!("agree {agree}, disagree {disagree}, inconclusive {inconclusive} of {}", corpus.len());
    ensure(disagree == 0 && agree * 10 >= corpus.len() * 9, || summary.clone())?;
    Ok(summary)
}

fn axiom_sweep() -> Result<String, String> {
    let m = ModelSpec::canonical(4, 16).with_numstr_closure().with_length_closure();
    let outcomes = check_all::<u64>(gamma(), &m, None).map_err(|e| e.to_string())?;
    for o in &outcomes {
        let ok = match (&o.variant, o.axiom_id.as_str()) {
            (CheckVariant::NotFullyCheckable { surrogate, .. }, "NUMSTR-24") => {
                **surrogate == CheckVariant::HoldsWithinBounds
            }
            (_, "NUMSTR-24") => false,
            (CheckVariant::HoldsWithinBounds | CheckVariant::WitnessFound(_), _) => true,
            _ => false,
        };
        ensure(ok, || format!("{}: {:?}", o.axiom_id, o.variant))?;
    }
    Ok(format!("{} axioms, 0 counterexamples, NUMSTR-24 not fully checkable", outcomes.len()))
}

fn incompleteness() -> Result<String, String> {
    let r = incompleteness_demo(6, 64).map_err(|e| e.to_string())?;
    ensure(!r.j_in_a && r.j_in_b, || format!("J in A: {}, J in B: {}", r.j_in_a, r.j_in_b))?;
    let d = &r.duplicate;
    ensure(d.i == 3 && d.s.as_str() == "11" && d.t.as_str() == "0011", || format!("pair {d:?}"))?;
    let out = Command::new(env!("CARGO_BIN_EXE_strnum")).arg("demo-incompleteness").output().unwrap();
    ensure(out.status.code() == Some(0), || format!("cli exit {:?}", out.status.code()))?;
    Ok("J false in A via numstr(3, \"11\") / numstr(3, \"0011\"), true in B, exit 0".into())
}

fn round_trip() -> Result<String, String> {
    let corpus = formula_corpus(77, 1000, 6);
    for f in &corpus {
        let text = print(f);
        let back = parse(&text).map_err(|e| format!("{text}: {e}"))?;
        ensure(alpha_eq(f, &back), || format!("changed: {text}"))?;
    }
    Ok(format!("{} of {} formulas", corpus.len(), corpus.len()))
}

const SOLVE_CORPUS: &[&str] = &[
    "(numstr 3 S)",
    "(and (numstr n S) (< 9 n) (= (len S) 5) (numstr m T) (< n m))",
    "(and (= (concat S T) (concat T S)) (< 0 (len S)) (< (len S) (len T)) (not (= S T)))",
    "(and (pi p x y) (< 2 x) (< 1 y))",
    "(exists ((Z Str)) (and (= (concat Z \"1\") S) (numstr 6 S)))",
    "(forall ((x Num)) (or (< x n) (< 5 x)))",
    "(= (len S) (+ (len S) 1))",
];

fn determinism() -> Result<String, String> {
    let mut runs = 0;
    for f in SOLVE_CORPUS {
        let mut outputs = Vec::new();
        for jobs in ["1", "1", "2", "4", "8"] {
            let args = ["solve", "-e", f, "--max-str-len", "5", "--max-num", "24", "--jobs", jobs, "--format", "json"];
            let out = Command::new(env!("CARGO_BIN_EXE_strnum")).args(args).output().unwrap();
            ensure(matches!(out.status.code(), Some(0 | 1)), || format!("{f}: exit {:?}", out.status.code()))?;
            outputs.push((jobs, out.stdout));
            runs += 1;
        }
        let base = outputs[0].1.clone();
        let json = |b: &[u8]| {
            let mut v: serde_json::Value = serde_json::from_slice(b).unwrap();
            v["config"]["jobs"] = serde_json::Value::Null;
            v
        };
        for (jobs, out) in &outputs {
            ensure(json(out) == json(&base), || format!("{f}: jobs {jobs} differs"))?;
        }
    }
    let solver_runs = |threads| {
        formula_corpus(5, 40, 4)
            .iter()
            .map(|f| Solver::new(Strategy::Guided, threads).solve::<BigUint>(f, &ModelSpec::canonical(2, 4)).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
    };
    let reference = solver_runs(Some(1))?;
    for threads in [Some(1), Some(3), None] {
        ensure(solver_runs(threads)? == reference, || format!("library solver differs at {threads:?} threads"))?;
    }
    Ok(format!("{runs} cli runs and 40 library solves identical across job counts"))
}

const CRITERIA: &[(&str, Check, Duration)] = &[
    ("numstr oracle equivalence", numstr_oracle, Duration::from_secs(30)),
    ("pi encoding correctness", pi_encoding_check, Duration::from_secs(60)),
    ("numstr expressibility", numstr_expressibility, Duration::from_secs(60)),
    ("differential equisatisfiability", differential_equisat, Duration::from_secs(300)),
    ("axiom sweep", axiom_sweep, Duration::from_secs(120)),
    ("incompleteness demo", incompleteness, Duration::from_secs(30)),
    ("print/parse round trip", round_trip, Duration::from_secs(10)),
    ("solver determinism", determinism, Duration::MAX),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (n, (name, check, limit)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed < *limit {
                Ok(msg)
            } else {
                Err(format!("{msg}; over the {}s limit", limit.as_secs()))
            }
        });
        match result {
            Ok(msg) => println!("criterion {} {name}: pass ({msg}; {:.2}s)", n + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({msg}; {:.2}s)", n + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
