use std::fs;
use std::io::Read;
use std::path::Path;

use serde_json::{json, Value as Json};

use strnum::corpus::{formula_corpus, tp_corpus, TpShape};
use strnum::formula::{free_vars, sort_check, theory_of};
use strnum::gamma::{self, check_all, incompleteness_demo, AxiomError, CheckVariant, DemoError};
use strnum::reduce::{reduce_tp_to_tsn, reduce_tsn_to_tpi, ReduceError, ReductionTrace};
use strnum::semantics::EvalError;
use strnum::solver::{check_reduction, EquisatReport, Outcome, SolveError, Solver, Verdict};
use strnum::{parse, print, BigUint, Formula, ParseError, Universe};

use crate::output;
use crate::{Cli, Command, Config, CorpusKind, DirectionArg, Format, Input};

struct Report {
    code: u8,
    text: String,
    result: Json,
}

enum Failure {
    Usage(String),
    Parse { error: ParseError, source: String, origin: String },
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Parse { .. } => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn text(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Internal(m) => format!("error: {m}"),
            Failure::Parse { error, source, origin } => output::parse_error_text(error, source, origin),
        }
    }

    fn json(&self) -> Json {
        match self {
            Failure::Usage(m) => json!({ "kind": "usage", "message": m }),
            Failure::Internal(m) => json!({ "kind": "internal", "message": m }),
            Failure::Parse { error, source, origin } => output::parse_error(error, source, origin),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Overflow => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Eval(e) => e.into(),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<ReduceError> for Failure {
    fn from(e: ReduceError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check(_) => "check",
        Command::Solve(_) => "solve",
        Command::Reduce { .. } => "reduce",
        Command::Axioms { .. } => "axioms",
        Command::DemoIncompleteness => "demo-incompleteness",
        Command::GenCorpus { .. } => "gen-corpus",
    }
}

fn config_json(c: &Config) -> Json {
    json!({
        "model": output::model(&c.model()),
        "strategy": match c.strategy() {
            strnum::Strategy::Literal => "literal",
            strnum::Strategy::Guided => "guided",
        },
        "seed": c.seed,
        "jobs": c.jobs,
    })
}

pub fn run(cli: &Cli) -> u8 {
    let outcome = match &cli.command {
        Command::Check(input) => check(input),
        Command::Solve(input) => solve(input, &cli.config),
        Command::Reduce { direction, input, verify } => reduce(*direction, input, *verify, &cli.config),
        Command::Axioms { filter, axioms_file } => axioms(filter.as_deref(), axioms_file.as_deref(), &cli.config),
        Command::DemoIncompleteness => demo(&cli.config),
        Command::GenCorpus {
            count,
            kind,
            depth,
            verify,
        } => gen_corpus(*count, *kind, *depth, *verify, &cli.config),
    };
    let mut doc = json!({
        "schema": output::SCHEMA,
        "command": command_name(&cli.command),
        "config": config_json(&cli.config),
    });
    let code = match &outcome {
        Ok(r) => {
            doc["exit_code"] = json!(r.code);
            doc["result"] = r.result.clone();
            if cli.config.format == Format::Text {
                println!("{}", r.text);
            }
            r.code
        }
        Err(f) => {
            doc["exit_code"] = json!(f.code());
            doc["error"] = f.json();
            if cli.config.format == Format::Text {
                eprintln!("{}", f.text());
            }
            f.code()
        }
    };
    if cli.config.format == Format::Json {
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    }
    code
}

fn read_input(input: &Input) -> Result<(String, String), Failure> {
    match (&input.expr, &input.file) {
        (Some(e), _) => Ok((e.clone(), "<expr>".to_owned())),
        (None, Some(p)) if p == Path::new("-") => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Usage(format!("reading standard input: {e}")))?;
            Ok((s, "<stdin>".to_owned()))
        }
        (None, Some(p)) => fs::read_to_string(p)
            .map(|s| (s, p.display().to_string()))
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        (None, None) => Err(Failure::Usage("give a formula file or -e EXPR".to_owned())),
    }
}

fn read_formula(input: &Input) -> Result<Formula, Failure> {
    let (source, origin) = read_input(input)?;
    let f = parse(&source).map_err(|error| Failure::Parse { error, source, origin })?;
    sort_check(&f).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(f)
}

fn check(input: &Input) -> Result<Report, Failure> {
    let f = read_formula(input)?;
    let theory = theory_of(&f).map_err(|e| Failure::Usage(format!("{e} (mixed theory)")))?;
    let free: Vec<_> = free_vars(&f).into_iter().collect();
    let shown = if free.is_empty() {
        "none".to_owned()
    } else {
        free.iter().map(|(v, s)| format!("{v}:{s}")).collect::<Vec<_>>().join(", ")
    };
    Ok(Report {
        code: 0,
        text: format!("theory: {theory}\nfree variables: {shown}"),
        result: json!({
            "formula": output::formula(&f),
            "theory": theory.to_string(),
            "free_vars": output::vars(&free),
        }),
    })
}

fn solver(c: &Config) -> Solver {
    Solver::new(c.strategy(), c.jobs)
}

fn solve(input: &Input, c: &Config) -> Result<Report, Failure> {
    let f = read_formula(input)?;
    let m = c.model();
    let r = solver(c).solve::<BigUint>(&f, &m)?;
    let bounds = format!("max_str_len={}, max_num={}", m.max_str_len, m.max_num);
    let (code, text, status, witness) = match &r.outcome {
        Outcome::Sat(a) => {
            let mut text = "sat".to_owned();
            for (k, v) in a {
                text.push_str(&format!("\n{k} = {v}"));
            }
            text.push_str(&format!("\nassignments tried: {}", r.assignments_tried));
            (0, text, "sat", output::assignment(a))
        }
        Outcome::Unsat => (
            1,
            format!("unsat within bounds ({bounds})\nassignments tried: {}", r.assignments_tried),
            "unsat",
            Json::Null,
        ),
    };
    Ok(Report {
        code,
        text,
        result: json!({
            "formula": output::formula(&f),
            "status": status,
            "witness": witness,
            "assignments_tried": r.assignments_tried,
            "bounds": output::model(&r.bounds_used),
        }),
    })
}

fn trace_json(t: &ReductionTrace) -> Json {
    json!({
        "direction": t.direction.to_string(),
        "source": output::formula(&t.source),
        "target": output::formula(&t.target),
        "rewrites": t.rewrites.iter().map(|r| json!({
            "source_atom": output::formula(&Formula::Atom(r.source_atom.clone())),
            "negated": r.negated,
            "fresh": output::vars(&r.fresh),
            "target": output::formula(&r.target),
            "side_conditions": r.side_conditions.iter().map(output::formula).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn status(o: &Outcome<BigUint>) -> &'static str {
    if o.is_sat() {
        "sat"
    } else {
        "unsat"
    }
}

fn equisat_line(r: &EquisatReport<BigUint>) -> String {
    let (s, t) = (status(&r.source.outcome), status(&r.target.outcome));
    match r.verdict {
        Verdict::Agree => format!("equisat: agree (both {s})"),
        Verdict::Disagree => format!("equisat: disagree (source {s}, target {t})"),
        Verdict::Inconclusive => {
            format!("equisat: inconclusive (source {s}, target {t}; bounds not certified for the target)")
        }
    }
}

fn equisat_json(r: &EquisatReport<BigUint>) -> Json {
    let side = |s: &strnum::solver::SolveResult<BigUint>| {
        json!({
            "status": status(&s.outcome),
            "witness": match &s.outcome {
                Outcome::Sat(a) => output::assignment(a),
                Outcome::Unsat => Json::Null,
            },
            "assignments_tried": s.assignments_tried,
            "bounds": output::model(&s.bounds_used),
        })
    };
    json!({
        "verdict": r.verdict.to_string(),
        "certified": r.certified,
        "source": side(&r.source),
        "target": side(&r.target),
    })
}

fn reduce_formula(direction: DirectionArg, f: &Formula) -> Result<ReductionTrace, ReduceError> {
    match direction {
        DirectionArg::TpToTsn => reduce_tp_to_tsn(f),
        DirectionArg::TsnToTpi => reduce_tsn_to_tpi(f),
    }
}

fn reduce(direction: DirectionArg, input: &Input, verify: bool, c: &Config) -> Result<Report, Failure> {
    let f = read_formula(input)?;
    let trace = reduce_formula(direction, &f)?;
    let mut text = print(&trace.target);
    let mut result = json!({ "trace": trace_json(&trace) });
    let mut code = 0;
    if verify {
        let r = check_reduction::<BigUint>(&solver(c), &trace, &c.model())?;
        text.push('\n');
        text.push_str(&equisat_line(&r));
        result["equisat"] = equisat_json(&r);
        if r.verdict == Verdict::Disagree {
            code = 1;
        }
    }
    Ok(Report { code, text, result })
}

fn variant_json(v: &CheckVariant<u64>) -> Json {
    let mut j = json!({ "outcome": v.name() });
    match v {
        CheckVariant::Counterexample(a) | CheckVariant::WitnessFound(a) => j["assignment"] = output::assignment(a),
        CheckVariant::NotFullyCheckable { reason, surrogate } => {
            j["reason"] = json!(reason);
            j["surrogate"] = variant_json(surrogate);
        }
        CheckVariant::HoldsWithinBounds | CheckVariant::NoWitness => {}
    }
    j
}

fn variant_text(v: &CheckVariant<u64>) -> String {
    match v {
        CheckVariant::Counterexample(a) | CheckVariant::WitnessFound(a) => {
            format!("{} [{}]", v.name(), output::bindings_text(a))
        }
        CheckVariant::NotFullyCheckable { surrogate, .. } => {
            format!("{} (arithmetic reading: {})", v.name(), variant_text(surrogate))
        }
        _ => v.name().to_owned(),
    }
}

fn axioms(filter: Option<&str>, file: Option<&Path>, c: &Config) -> Result<Report, Failure> {
    let mut m = c.model();
    if m.universe != Universe::CanonicalA {
        return Err(Failure::Usage(
            "axioms are checked in model A only (model B has no empty string, which several axioms mention)".to_owned(),
        ));
    }
    if c.witness_str_len.is_none() && c.witness_num.is_none() {
        m = m.with_numstr_closure().with_length_closure();
    }
    let owned;
    let list: &[gamma::Axiom] = match file {
        Some(p) => {
            let source = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            owned = gamma::axioms_from_text(&source).map_err(|error| Failure::Parse {
                error,
                source: source.clone(),
                origin: p.display().to_string(),
            })?;
            &owned
        }
        None => gamma::gamma(),
    };
    if let Some(p) = filter {
        if !list.iter().any(|a| a.id.starts_with(p)) {
            return Err(Failure::Usage(format!("no axiom id starts with {p:?}")));
        }
    }
    let outcomes = check_all::<u64>(list, &m, filter).map_err(|e| match e {
        AxiomError::NotCanonical => Failure::Usage(e.to_string()),
        AxiomError::Eval(e) => e.into(),
    })?;
    let failed = outcomes.iter().any(|o| o.variant.is_failure());
    let width = outcomes.iter().map(|o| o.axiom_id.len()).max().unwrap_or(0);
    let text = outcomes
        .iter()
        .map(|o| format!("{:width$}  {}  {}", o.axiom_id, variant_text(&o.variant), o.bounds))
        .collect::<Vec<_>>()
        .join("\n");
    let by_id = |id: &str| list.iter().find(|a| a.id == id);
    let result = json!({
        "bounds": output::model(&m),
        "axioms": outcomes.iter().map(|o| {
            let mut j = variant_json(&o.variant);
            j["id"] = json!(o.axiom_id);
            if let Some(a) = by_id(&o.axiom_id) {
                j["group"] = json!(a.group.to_string());
                j["statement"] = output::formula(&a.statement);
            }
            j
        }).collect::<Vec<_>>(),
    });
    Ok(Report {
        code: u8::from(failed),
        text,
        result,
    })
}

fn demo(c: &Config) -> Result<Report, Failure> {
    let r = match incompleteness_demo(c.max_str_len, c.max_num) {
        Ok(r) => r,
        Err(e @ DemoError::BoundsTooSmall { .. }) => return Err(Failure::Internal(format!("bounds too small: {e}"))),
        Err(DemoError::Eval(e)) => return Err(e.into()),
    };
    let verdict = |b: bool| if b { "true" } else { "false" };
    let d = &r.duplicate;
    let mut text = format!("J: {}\n", print(&r.sentence));
    text.push_str(&format!("{}: J is {}\n", r.model_a, verdict(r.j_in_a)));
    text.push_str(&format!(
        "  counterexample: i = {}, s = \"{}\", t = \"{}\" (both satisfy numstr)\n",
        d.i, d.s, d.t
    ));
    text.push_str(&format!(
        "  numbers up to {} with several representations: {}\n",
        c.max_num, r.ambiguous_in_a
    ));
    text.push_str(&format!("{}: J is {}\n", r.model_b, verdict(r.j_in_b)));
    if r.unique_in_b {
        text.push_str(&format!("  every number up to {} has exactly one representation\n", c.max_num));
    }
    text.push_str(&r.verdict);
    if r.distinguishes() {
        text.push_str("\nA and B disagree on J, so they are not elementarily equivalent and the axioms leave J undecided");
    }
    let result = json!({
        "sentence": output::formula(&r.sentence),
        "model_a": { "bounds": output::model(&r.model_a), "j": r.j_in_a, "ambiguous_numbers": r.ambiguous_in_a },
        "model_b": { "bounds": output::model(&r.model_b), "j": r.j_in_b, "unique_representations": r.unique_in_b },
        "counterexample": { "i": d.i.to_string(), "s": format!("\"{}\"", d.s), "t": format!("\"{}\"", d.t) },
        "verdict": r.verdict,
    });
    Ok(Report {
        code: if r.distinguishes() { 0 } else { 1 },
        text,
        result,
    })
}

fn gen_corpus(count: usize, kind: CorpusKind, depth: usize, verify: bool, c: &Config) -> Result<Report, Failure> {
    let formulas = match kind {
        CorpusKind::Tp => tp_corpus(c.seed, count, &TpShape::default()),
        CorpusKind::Any if verify => return Err(Failure::Usage("--verify needs --kind tp".to_owned())),
        CorpusKind::Any => formula_corpus(c.seed, count, depth),
    };
    if !verify {
        return Ok(Report {
            code: 0,
            text: formulas.iter().map(print).collect::<Vec<_>>().join("\n"),
            result: json!({ "seed": c.seed, "formulas": formulas.iter().map(output::formula).collect::<Vec<_>>() }),
        });
    }
    let m = c.model();
    let s = solver(c);
    let mut lines = Vec::new();
    let mut entries = Vec::new();
    let (mut agree, mut disagree, mut inconclusive) = (0, 0, 0);
    for f in &formulas {
        let trace = reduce_tp_to_tsn(f)?;
        let r = check_reduction::<BigUint>(&s, &trace, &m)?;
        match r.verdict {
            Verdict::Agree => agree += 1,
            Verdict::Disagree => disagree += 1,
            Verdict::Inconclusive => inconclusive += 1,
        }
        lines.push(format!("{}\t{}", print(f), r.verdict));
        entries.push(json!({ "formula": output::formula(f), "equisat": equisat_json(&r) }));
    }
    lines.push(format!("agree: {agree}, disagree: {disagree}, inconclusive: {inconclusive}"));
    Ok(Report {
        code: u8::from(disagree > 0),
        text: lines.join("\n"),
        result: json!({
            "seed": c.seed,
            "formulas": entries,
            "summary": { "agree": agree, "disagree": disagree, "inconclusive": inconclusive },
        }),
    })
}
