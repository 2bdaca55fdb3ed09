//! The axiom system, bounded axiom checks, and the sentence that separates
//! the canonical model from the restricted one.

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{Formula, Ident, Quantifier, Sort};
use crate::natural::Natural;
use crate::semantics::{
    bounded_eval, enumerate_domain, numeral_value, numstr_holds, Assignment, EvalError, ModelSpec, Universe,
};
use crate::surface::{parse, parse_declarations, ParseError};
use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    Arithmetic,
    Equality,
    Concatenation,
    Length,
    Numstr,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub id: String,
    pub group: Group,
    pub statement: Formula,
    /// Set when `statement` is a checkable stand-in for an axiom that
    /// cannot be written in the language.
    pub surrogate_for: Option<&'static str>,
}

const AXIOMS: &str = r#"
(axiom ARITH-01 (not (= 0 1)))
(axiom ARITH-02 (forall ((x Num)) (not (= 0 (+ x 1)))))
(axiom ARITH-03 (forall ((x Num)) (exists ((y Num)) (=> (not (= x 0)) (= (+ y 1) x)))))
(axiom ARITH-04 (forall ((x Num) (y Num)) (not (and (< x y) (< y (+ x 1))))))
(axiom ARITH-05 (forall ((x Num) (y Num)) (= (+ x y) (+ y x))))
(axiom ARITH-06 (forall ((x Num) (y Num) (z Num)) (=> (= (+ x y) (+ x z)) (= y z))))
(axiom ARITH-07 (forall ((x Num) (y Num)) (=> (= (+ x 1) (+ y 1)) (= x y))))
(axiom ARITH-08 (forall ((x Num)) (= (+ x 0) x)))
(axiom ARITH-09 (forall ((x Num) (y Num)) (= (+ x (+ y 1)) (+ (+ x y) 1))))
(axiom ARITH-10 (forall ((x Num) (y Num)) (exists ((c Num)) (=> (< x y) (and (not (= c 0)) (= (+ x c) y))))))
(axiom ARITH-11 (exists ((c Num)) (forall ((x Num) (y Num)) (=> (and (not (= c 0)) (= (+ x c) y)) (< x y)))))

(axiom EQ-REFL-STR (forall ((A Str)) (= A A)))
(axiom EQ-SYM-STR (forall ((A Str) (B Str)) (=> (= A B) (= B A))))
(axiom EQ-TRANS-STR (forall ((A Str) (B Str) (C Str)) (=> (and (= A B) (= B C)) (= A C))))
(axiom EQ-REFL-NUM (forall ((a Num)) (= a a)))
(axiom EQ-SYM-NUM (forall ((a Num) (b Num)) (=> (= a b) (= b a))))
(axiom EQ-TRANS-NUM (forall ((a Num) (b Num) (c Num)) (=> (and (= a b) (= b c)) (= a c))))
(axiom EQ-12 (forall ((A Str) (B Str)) (=> (= A B) (= (len A) (len B)))))

(axiom CONCAT-13 (forall ((x Str)) (and (= (concat x epsilon) x) (= (concat epsilon x) x))))
(axiom CONCAT-14 (forall ((x Str) (y Str) (z Str)) (= (concat x (concat y z)) (concat (concat x y) z))))

(axiom LEN-15 (forall ((x Str)) (iff (= (len x) 0) (= x epsilon))))
(axiom LEN-16 (forall ((x Str)) (=> (= (len x) 1) (or (= x "0") (= x "1")))))
(axiom LEN-17 (forall ((x Str) (y Str)) (= (len (concat x y)) (+ (len x) (len y)))))
(axiom LEN-18 (and (= (len "0") 1) (= (len "1") 1)))

(axiom NUMSTR-18 (forall ((i Num)) (not (numstr i epsilon))))
(axiom NUMSTR-19 (numstr 0 "0"))
(axiom NUMSTR-20 (numstr 1 "1"))
(axiom NUMSTR-21 (forall ((s Str) (i Num)) (=> (and (= (len s) 1) (not (= s "0")) (not (= s "1"))) (not (numstr i s)))))
(axiom NUMSTR-22 (forall ((i Num) (x Str) (z Str)) (=> (and (numstr i x) (= (concat "0" z) (concat z "0"))) (numstr i (concat z x)))))
(axiom NUMSTR-23 (forall ((i Num) (x Str) (z Str))
  (=> (and (numstr i (concat z x)) (= (concat "0" z) (concat z "0")) (not (= z epsilon)) (not (= x epsilon)))
      (numstr i x))))
(axiom NUMSTR-24 (forall ((x Num) (y Str) (z Str) (u Num) (v Num) (z0 Str) (a Num))
  (=> (and (numstr u y) (numstr v z) (= (concat "0" z0) (concat z0 "0")) (= (len z0) (len z)) (numstr a (concat y z0)))
      (iff (numstr x (concat y z)) (= x (+ a v))))))
(axiom NUMSTR-25 (forall ((x Num) (y Num) (z Str)) (exists ((u Str) (v Str) (w Str))
  (=> (numstr (+ x y) z) (and (= (len u) x) (= (len v) y) (= w (concat u v)) (numstr (len w) z))))))
(axiom NUMSTR-26 (exists ((u Str) (v Str) (w Str)) (forall ((x Num) (y Num) (z Str))
  (=> (and (= (len u) x) (= (len v) y) (= w (concat u v)) (numstr (len w) z)) (numstr (+ x y) z)))))
"#;

const NUMSTR_24_REASON: &str = "the digit concatenation of u and v is not a term of the language; \
checked as x = u * 2^len(z) + v, with u * 2^len(z) the value of y followed by len(z) zeros";

/// The surface text of every axiom, one `(axiom ID FORMULA)` per entry.
pub fn axiom_text() -> &'static str {
    AXIOMS
}

fn group_of(id: &str) -> Group {
    match id.split('-').next() {
        Some("ARITH") => Group::Arithmetic,
        Some("EQ") => Group::Equality,
        Some("CONCAT") => Group::Concatenation,
        Some("LEN") => Group::Length,
        _ => Group::Numstr,
    }
}

/// Reads `(axiom ID FORMULA)` declarations; the group follows the id prefix.
pub fn axioms_from_text(text: &str) -> Result<Vec<Axiom>, ParseError> {
    Ok(parse_declarations(text, "axiom")?
        .into_iter()
        .map(|(id, statement)| Axiom {
            group: group_of(&id),
            surrogate_for: (id == "NUMSTR-24").then_some(NUMSTR_24_REASON),
            id,
            statement,
        })
        .collect())
}

pub fn gamma() -> &'static [Axiom] {
    static GAMMA: OnceLock<Vec<Axiom>> = OnceLock::new();
    GAMMA.get_or_init(|| axioms_from_text(AXIOMS).expect("axiom text parses"))
}

pub fn axiom(id: &str) -> Option<&'static Axiom> {
    gamma().iter().find(|a| a.id == id)
}

/// Numbered axioms, i.e. all but the explicit equality laws.
pub fn numbered() -> impl Iterator<Item = &'static Axiom> {
    gamma().iter().filter(|a| !a.id.starts_with("EQ-") || a.id == "EQ-12")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckVariant<N> {
    HoldsWithinBounds,
    Counterexample(Assignment<N>),
    WitnessFound(Assignment<N>),
    /// An existential prefix had no witness within bounds.
    NoWitness,
    NotFullyCheckable {
        reason: String,
        surrogate: Box<CheckVariant<N>>,
    },
}

impl<N> CheckVariant<N> {
    pub fn is_failure(&self) -> bool {
        match self {
            CheckVariant::Counterexample(_) | CheckVariant::NoWitness => true,
            CheckVariant::NotFullyCheckable { surrogate, .. } => surrogate.is_failure(),
            _ => false,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CheckVariant::HoldsWithinBounds => "HoldsWithinBounds",
            CheckVariant::Counterexample(_) => "Counterexample",
            CheckVariant::WitnessFound(_) => "WitnessFound",
            CheckVariant::NoWitness => "NoWitness",
            CheckVariant::NotFullyCheckable { .. } => "NotFullyCheckable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheckOutcome<N> {
    pub axiom_id: String,
    pub variant: CheckVariant<N>,
    pub bounds: ModelSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error("axioms are checked in model A only")]
    NotCanonical,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn prefix(f: &Formula) -> (Quantifier, Vec<(Ident, Sort)>, &Formula) {
    let q = match f {
        Formula::Quant { q, .. } => *q,
        _ => Quantifier::Forall,
    };
    let mut vars = Vec::new();
    let mut body = f;
    while let Formula::Quant { q: q2, var, sort, body: b } = body {
        if *q2 != q {
            break;
        }
        vars.push((var.clone(), *sort));
        body = b;
    }
    (q, vars, body)
}

/// Fixes the prefix variables one at a time to the first value in
/// enumeration order that keeps `Q rest. body` at `goal`.
fn extract<N: Natural>(
    q: Quantifier,
    vars: &[(Ident, Sort)],
    body: &Formula,
    m: &ModelSpec,
    over: &ModelSpec,
    goal: bool,
) -> Result<Option<Assignment<N>>, EvalError> {
    let mut a = Assignment::new();
    for (k, (v, sort)) in vars.iter().enumerate() {
        let rest = vars[k + 1..]
            .iter()
            .rev()
            .fold(body.clone(), |acc, (w, s)| Formula::quant(q, w.clone(), *s, acc));
        let mut found = false;
        for value in enumerate_domain::<N>(*sort, over) {
            a.insert(v.clone(), value);
            if bounded_eval(&rest, &a, m)? == goal {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(None);
        }
    }
    Ok(Some(a))
}

fn check_statement<N: Natural>(f: &Formula, m: &ModelSpec) -> Result<CheckVariant<N>, EvalError> {
    let holds = bounded_eval::<N>(f, &Assignment::new(), m)?;
    let (q, vars, body) = prefix(f);
    Ok(match (q, holds) {
        (Quantifier::Forall, true) => CheckVariant::HoldsWithinBounds,
        (Quantifier::Exists, false) => CheckVariant::NoWitness,
        (Quantifier::Forall, false) => {
            let a = extract(q, &vars, body, m, m, false)?.expect("a false sentence has a counterexample");
            CheckVariant::Counterexample(a)
        }
        (Quantifier::Exists, true) => {
            let w = m.witness_bounds();
            let over = ModelSpec {
                max_str_len: w.max_str_len,
                max_num: w.max_num,
                ..*m
            };
            let a = extract(q, &vars, body, m, &over, true)?.expect("a true sentence has a witness");
            CheckVariant::WitnessFound(a)
        }
    })
}

/// Universal axioms are refuted by exhaustive search; existentially
/// prefixed ones need a witness under which the rest holds.
pub fn check_axiom<N: Natural>(ax: &Axiom, m: &ModelSpec) -> Result<AxiomCheckOutcome<N>, AxiomError> {
    if m.universe != Universe::CanonicalA {
        return Err(AxiomError::NotCanonical);
    }
    let mut variant = check_statement(&ax.statement, m)?;
    if let Some(reason) = ax.surrogate_for {
        variant = CheckVariant::NotFullyCheckable {
            reason: reason.to_owned(),
            surrogate: Box::new(variant),
        };
    }
    Ok(AxiomCheckOutcome {
        axiom_id: ax.id.clone(),
        variant,
        bounds: *m,
    })
}

/// Checks every axiom whose id starts with `filter`, concurrently, in
/// declaration order.
pub fn check_all<N: Natural>(
    axioms: &[Axiom],
    m: &ModelSpec,
    filter: Option<&str>,
) -> Result<Vec<AxiomCheckOutcome<N>>, AxiomError> {
    axioms
        .par_iter()
        .filter(|a| filter.is_none_or(|p| a.id.starts_with(p)))
        .map(|a| check_axiom(a, m))
        .collect()
}

const J: &str = "(and (forall ((i Num)) (exists ((s Str)) (and (numstr i s) (forall ((t Str)) (=> (numstr i t) (= s t)))))) \
                 (forall ((s Str)) (exists ((i Num)) (and (numstr i s) (forall ((j Num)) (=> (numstr j s) (= i j)))))))";

/// Every number has exactly one representation and every string
/// represents exactly one number.
pub fn sentence_j() -> Formula {
    parse(J).expect("J parses")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicatePair {
    pub i: u64,
    pub s: Word,
    pub t: Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoReport {
    pub sentence: Formula,
    pub model_a: ModelSpec,
    pub model_b: ModelSpec,
    pub j_in_a: bool,
    pub j_in_b: bool,
    /// Two distinct words of model A representing the same number.
    pub duplicate: DuplicatePair,
    /// Numbers up to `max_num` with two or more representations in A.
    pub ambiguous_in_a: u64,
    /// Every number up to `max_num` has exactly one representation in B.
    pub unique_in_b: bool,
    pub verdict: String,
}

impl DemoReport {
    pub fn distinguishes(&self) -> bool {
        !self.j_in_a && self.j_in_b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DemoError {
    #[error("the demonstration needs max_str_len >= 4 and max_num >= 3 (got {max_str_len} and {max_num})")]
    BoundsTooSmall { max_str_len: usize, max_num: u64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn representation_counts(max_num: u64, max_len: usize, restricted: bool) -> Vec<u32> {
    let mut counts = vec![0u32; max_num as usize + 1];
    for len in 1..=max_len {
        for code in 0..1u64 << len {
            let w: Vec<u8> = (0..len).rev().map(|k| b'0' + ((code >> k) & 1) as u8).collect();
            if restricted && !Word::new(std::str::from_utf8(&w).unwrap()).unwrap().is_canonical_numeral() {
                continue;
            }
            if let Some(v) = numeral_value::<u64>(&w).filter(|v| *v <= max_num) {
                counts[v as usize] += 1;
            }
        }
    }
    counts
}

/// Evaluates J in both models at the given bounds (witnesses closed under
/// numeral representation) and exhibits a duplicate representation in A.
pub fn incompleteness_demo(max_str_len: usize, max_num: u64) -> Result<DemoReport, DemoError> {
    if max_str_len < 4 || max_num < 3 {
        return Err(DemoError::BoundsTooSmall { max_str_len, max_num });
    }
    let sentence = sentence_j();
    let model_a = ModelSpec::canonical(max_str_len, max_num).with_numstr_closure();
    let model_b = ModelSpec::restricted(max_str_len, max_num).with_numstr_closure();
    let j_in_a = bounded_eval::<u64>(&sentence, &Assignment::new(), &model_a)?;
    let j_in_b = bounded_eval::<u64>(&sentence, &Assignment::new(), &model_b)?;

    let s = Word::minimal_binary(&3u64);
    let t = Word::new("0011").expect("binary");
    debug_assert!(numstr_holds(&3u64, s.as_bytes()) && numstr_holds(&3u64, t.as_bytes()));
    let duplicate = DuplicatePair { i: 3, s, t };

    let wa = model_a.witness_bounds().max_str_len;
    let ambiguous_in_a = representation_counts(max_num, wa, false).iter().filter(|c| **c >= 2).count() as u64;
    let unique_in_b = representation_counts(max_num, model_b.witness_bounds().max_str_len, true)
        .iter()
        .all(|c| *c == 1);
    let distinguishes = !j_in_a && j_in_b;
    let verdict = if distinguishes {
        "J distinguishes A from B within bounds"
    } else {
        "J does not distinguish A from B within bounds"
    };
    Ok(DemoReport {
        sentence,
        model_a,
        model_b,
        j_in_a,
        j_in_b,
        duplicate,
        ambiguous_in_a,
        unique_in_b,
        verdict: verdict.to_owned(),
    })
}
