//! Equisatisfiable reductions between the fragments, with provenance.
//!
//! * power arithmetic to strings: every `pi(p, x, y)` becomes a statement
//!   about an all-zero word `z` of length `y` appended to a representation
//!   of `x`;
//! * strings with `numstr` to strings with `pi`: every `numstr(i, s)`
//!   becomes a universally quantified bit-by-bit comparison.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::formula::{
    is_quantifier_free, nnf, sort_check, theory_of, Atom, Formula, FreshNames, Ident, NumTerm, Quantifier, Sort,
    StrTerm, TheoryTag,
};
use crate::semantics::{Bounds, ModelSpec};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("expected a {expected} formula, found {found}")]
    WrongTheory { expected: TheoryTag, found: TheoryTag },
    #[error("formula mixes numstr and pi")]
    MixedTheory,
    #[error("the power-arithmetic reduction needs a quantifier-free formula")]
    NotQuantifierFree,
    #[error("negative pi atom {0} (elimination disabled)")]
    NegativePiAtom(String),
    #[error("variable {0} is used at two sorts")]
    IllSorted(Ident),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    TpToTsn,
    TsnToTpi,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::TpToTsn => "tp-to-tsn",
            Direction::TsnToTpi => "tsn-to-tpi",
        })
    }
}

/// One rewritten atom occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub source_atom: Atom,
    /// The occurrence was negated in the source (after negation normal
    /// form) and the rewrite replaces the negation as a whole.
    pub negated: bool,
    pub fresh: Vec<(Ident, Sort)>,
    pub target: Formula,
    /// Conjuncts of `target` that are not part of the atom's encoding proper.
    pub side_conditions: Vec<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionTrace {
    pub direction: Direction,
    pub source: Formula,
    pub target: Formula,
    pub rewrites: Vec<Rewrite>,
}

impl ReductionTrace {
    /// The target with every rewrite replaced by its source atom. For the
    /// power-arithmetic direction this is the negation normal form of the
    /// source, for the other direction the source itself.
    pub fn erase(&self) -> Formula {
        erase_in(&self.target, &self.rewrites)
    }

    pub fn fresh_vars(&self) -> Vec<(Ident, Sort)> {
        self.rewrites.iter().flat_map(|r| r.fresh.iter().cloned()).collect()
    }
}

fn erase_in(f: &Formula, rewrites: &[Rewrite]) -> Formula {
    if let Some(r) = rewrites.iter().find(|r| &r.target == f) {
        let atom = Formula::Atom(r.source_atom.clone());
        return if r.negated { Formula::not(atom) } else { atom };
    }
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::And(ps) => Formula::And(ps.iter().map(|p| erase_in(p, rewrites)).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(|p| erase_in(p, rewrites)).collect()),
        Formula::Not(g) => Formula::not(erase_in(g, rewrites)),
        Formula::Implies(a, b) => Formula::implies(erase_in(a, rewrites), erase_in(b, rewrites)),
        Formula::Iff(a, b) => Formula::iff(erase_in(a, rewrites), erase_in(b, rewrites)),
        Formula::Quant { q, var, sort, body } => Formula::quant(*q, var.clone(), *sort, erase_in(body, rewrites)),
    }
}

fn check_theory(f: &Formula) -> Result<TheoryTag, ReduceError> {
    sort_check(f).map_err(|e| ReduceError::IllSorted(e.var))?;
    theory_of(f).map_err(|_| ReduceError::MixedTheory)
}

fn lit(bits: &str) -> StrTerm {
    StrTerm::Lit(Word::new(bits).expect("binary literal"))
}

/// `pi(p, x, y)` as a statement about words: some all-zero `z` of length
/// `y` such that `p` is the value of `x`'s representation followed by `z`.
pub fn pi_encoding(p: NumTerm, x: NumTerm, y: NumTerm, z: &Ident, xs: &Ident) -> Formula {
    let zt = StrTerm::Var(z.clone());
    let xst = StrTerm::Var(xs.clone());
    Formula::exists(
        z.clone(),
        Sort::Str,
        Formula::exists(
            xs.clone(),
            Sort::Str,
            Formula::and([
                Formula::str_eq(
                    StrTerm::concat([lit("0"), zt.clone()]),
                    StrTerm::concat([zt.clone(), lit("0")]),
                ),
                Formula::num_eq(NumTerm::len(zt.clone()), y),
                Formula::numstr(p, StrTerm::concat([xst.clone(), zt])),
                Formula::numstr(x, xst),
            ]),
        ),
    )
}

/// Replaces every `not pi(p, x, y)` by `exists p' (pi(p', x, y) and not p' = p)`.
/// Expects a quantifier-free formula in negation normal form.
pub fn eliminate_negative_pi(f: &Formula) -> Formula {
    let mut fresh = FreshNames::avoiding(f);
    elim(f, &mut fresh)
}

fn negative_pi_witness(p: &NumTerm, x: &NumTerm, y: &NumTerm, fresh: &mut FreshNames) -> (Ident, Formula) {
    let p2 = fresh.fresh("p'");
    let body = Formula::and([
        Formula::pi(NumTerm::Var(p2.clone()), x.clone(), y.clone()),
        Formula::not(Formula::num_eq(NumTerm::Var(p2.clone()), p.clone())),
    ]);
    (p2.clone(), Formula::exists(p2, Sort::Num, body))
}

fn elim(f: &Formula, fresh: &mut FreshNames) -> Formula {
    match f {
        Formula::Not(g) => match &**g {
            Formula::Atom(Atom::Pi(p, x, y)) => negative_pi_witness(p, x, y, fresh).1,
            _ => Formula::not(elim(g, fresh)),
        },
        Formula::And(ps) => Formula::And(ps.iter().map(|p| elim(p, fresh)).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(|p| elim(p, fresh)).collect()),
        _ => f.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TpOptions {
    pub eliminate_negative_pi: bool,
}

impl Default for TpOptions {
    fn default() -> Self {
        TpOptions {
            eliminate_negative_pi: true,
        }
    }
}

pub fn reduce_tp_to_tsn(f: &Formula) -> Result<ReductionTrace, ReduceError> {
    reduce_tp_to_tsn_with(f, TpOptions::default())
}

pub fn reduce_tp_to_tsn_with(f: &Formula, opts: TpOptions) -> Result<ReductionTrace, ReduceError> {
    let found = check_theory(f)?;
    if found != TheoryTag::Tp {
        return Err(ReduceError::WrongTheory {
            expected: TheoryTag::Tp,
            found,
        });
    }
    if !is_quantifier_free(f) {
        return Err(ReduceError::NotQuantifierFree);
    }
    let normal = nnf(f);
    let mut fresh = FreshNames::avoiding(&normal);
    let mut rewrites = Vec::new();
    let target = tp_rewrite(&normal, opts, &mut fresh, &mut rewrites)?;
    Ok(ReductionTrace {
        direction: Direction::TpToTsn,
        source: f.clone(),
        target,
        rewrites,
    })
}

fn tp_rewrite(
    f: &Formula,
    opts: TpOptions,
    fresh: &mut FreshNames,
    rewrites: &mut Vec<Rewrite>,
) -> Result<Formula, ReduceError> {
    Ok(match f {
        Formula::Atom(atom @ Atom::Pi(p, x, y)) => {
            let names = fresh.fresh_group(&["z", "xs"]);
            let target = pi_encoding(p.clone(), x.clone(), y.clone(), &names[0], &names[1]);
            rewrites.push(Rewrite {
                source_atom: atom.clone(),
                negated: false,
                fresh: vec![(names[0].clone(), Sort::Str), (names[1].clone(), Sort::Str)],
                target: target.clone(),
                side_conditions: Vec::new(),
            });
            target
        }
        Formula::Not(g) => match &**g {
            Formula::Atom(atom @ Atom::Pi(p, x, y)) => {
                if !opts.eliminate_negative_pi {
                    return Err(ReduceError::NegativePiAtom(Formula::Atom(atom.clone()).to_string()));
                }
                let p2 = fresh.fresh("p'");
                let names = fresh.fresh_group(&["z", "xs"]);
                let target = Formula::exists(
                    p2.clone(),
                    Sort::Num,
                    Formula::and([
                        pi_encoding(NumTerm::Var(p2.clone()), x.clone(), y.clone(), &names[0], &names[1]),
                        Formula::not(Formula::num_eq(NumTerm::Var(p2.clone()), p.clone())),
                    ]),
                );
                rewrites.push(Rewrite {
                    source_atom: atom.clone(),
                    negated: true,
                    fresh: vec![
                        (p2, Sort::Num),
                        (names[0].clone(), Sort::Str),
                        (names[1].clone(), Sort::Str),
                    ],
                    target: target.clone(),
                    side_conditions: Vec::new(),
                });
                target
            }
            _ => Formula::not(tp_rewrite(g, opts, fresh, rewrites)?),
        },
        Formula::And(ps) => Formula::And(
            ps.iter()
                .map(|p| tp_rewrite(p, opts, fresh, rewrites))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Or(ps) => Formula::Or(
            ps.iter()
                .map(|p| tp_rewrite(p, opts, fresh, rewrites))
                .collect::<Result<_, _>>()?,
        ),
        _ => f.clone(),
    })
}

const NUMSTR_VARS: [(&str, Sort); 12] = [
    ("n", Sort::Num),
    ("p", Sort::Num),
    ("t", Sort::Num),
    ("h", Sort::Num),
    ("ph", Sort::Num),
    ("x", Sort::Num),
    ("px", Sort::Num),
    ("l", Sort::Num),
    ("lu", Sort::Num),
    ("sh", Sort::Str),
    ("sx", Sort::Str),
    ("sl", Sort::Str),
];

/// `numstr(i, s)` over `pi`: no overflow witness and no differing bit,
/// plus the nonemptiness side condition. Returns the encoding, the side
/// condition and the fresh variables.
pub fn numstr_encoding(i: &NumTerm, s: &StrTerm, fresh: &mut FreshNames) -> (Formula, Formula, Vec<(Ident, Sort)>) {
    let mut bases: Vec<&str> = NUMSTR_VARS.iter().map(|(b, _)| *b).collect();
    bases.push("c");
    let names = fresh.fresh_group(&bases);
    let nv = |k: usize| NumTerm::Var(names[k].clone());
    let sv = |k: usize| StrTerm::Var(names[k].clone());
    let (n, p, t, h, ph, x, px, l, lu) = (nv(0), nv(1), nv(2), nv(3), nv(4), nv(5), nv(6), nv(7), nv(8));
    let (sh, sx, sl) = (sv(9), sv(10), sv(11));
    let one = || NumTerm::lit(1u32);

    let overflow = Formula::and([
        Formula::num_eq(NumTerm::len(s.clone()), n.clone()),
        Formula::pi(p.clone(), one(), n),
        Formula::not(Formula::num_lt(i.clone(), p)),
    ]);
    let differing_bit = Formula::and([
        Formula::pi(ph.clone(), h, NumTerm::add([t.clone(), one()])),
        Formula::pi(px.clone(), x.clone(), t.clone()),
        Formula::num_eq(i.clone(), NumTerm::add([ph, px, l.clone()])),
        Formula::pi(lu.clone(), one(), t.clone()),
        Formula::num_lt(l, lu),
        Formula::str_eq(s.clone(), StrTerm::concat([sh, sx.clone(), sl.clone()])),
        Formula::num_eq(NumTerm::len(sl), t),
        Formula::num_eq(NumTerm::len(sx.clone()), one()),
        Formula::or([
            Formula::and([
                Formula::num_eq(x.clone(), NumTerm::lit(0u32)),
                Formula::str_eq(sx.clone(), lit("1")),
            ]),
            Formula::and([Formula::num_eq(x, one()), Formula::str_eq(sx, lit("0"))]),
        ]),
    ]);
    let matrix = Formula::and([Formula::not(overflow), Formula::not(differing_bit)]);
    let fresh_vars: Vec<(Ident, Sort)> = NUMSTR_VARS
        .iter()
        .enumerate()
        .map(|(k, (_, sort))| (names[k].clone(), *sort))
        .collect();
    let encoding = fresh_vars
        .iter()
        .rev()
        .fold(matrix, |acc, (v, sort)| Formula::quant(Quantifier::Forall, v.clone(), *sort, acc));
    let c = names[12].clone();
    let nonempty = Formula::exists(
        c.clone(),
        Sort::Num,
        Formula::num_eq(NumTerm::len(s.clone()), NumTerm::add([NumTerm::Var(c.clone()), one()])),
    );
    let mut all = fresh_vars;
    all.push((c, Sort::Num));
    (encoding, nonempty, all)
}

pub fn reduce_tsn_to_tpi(f: &Formula) -> Result<ReductionTrace, ReduceError> {
    let found = check_theory(f)?;
    let mut has_pi = false;
    f.for_each_atom(&mut |a| has_pi |= matches!(a, Atom::Pi(..)));
    if has_pi {
        return Err(ReduceError::WrongTheory {
            expected: TheoryTag::Tsn,
            found,
        });
    }
    let mut fresh = FreshNames::avoiding(f);
    let mut rewrites = Vec::new();
    let target = tsn_rewrite(f, &mut fresh, &mut rewrites);
    Ok(ReductionTrace {
        direction: Direction::TsnToTpi,
        source: f.clone(),
        target,
        rewrites,
    })
}

fn tsn_rewrite(f: &Formula, fresh: &mut FreshNames, rewrites: &mut Vec<Rewrite>) -> Formula {
    match f {
        Formula::Atom(atom @ Atom::NumStr(i, s)) => {
            let (encoding, nonempty, vars) = numstr_encoding(i, s, fresh);
            let target = Formula::and([encoding, nonempty.clone()]);
            rewrites.push(Rewrite {
                source_atom: atom.clone(),
                negated: false,
                fresh: vars,
                target: target.clone(),
                side_conditions: vec![nonempty],
            });
            target
        }
        Formula::Atom(_) => f.clone(),
        Formula::And(ps) => Formula::And(ps.iter().map(|p| tsn_rewrite(p, fresh, rewrites)).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(|p| tsn_rewrite(p, fresh, rewrites)).collect()),
        Formula::Not(g) => Formula::not(tsn_rewrite(g, fresh, rewrites)),
        Formula::Implies(a, b) => Formula::implies(tsn_rewrite(a, fresh, rewrites), tsn_rewrite(b, fresh, rewrites)),
        Formula::Iff(a, b) => Formula::iff(tsn_rewrite(a, fresh, rewrites), tsn_rewrite(b, fresh, rewrites)),
        Formula::Quant { q, var, sort, body } => {
            Formula::quant(*q, var.clone(), *sort, tsn_rewrite(body, fresh, rewrites))
        }
    }
}

/// Bounds under which the encoding of `numstr(i, s)` with `len(s) = s_len`
/// decides the atom exactly.
pub fn sound_bounds_for_numstr_check(i: u64, s_len: usize) -> ModelSpec {
    let pow = 1u64.checked_shl(s_len as u32 + 1).unwrap_or(u64::MAX);
    ModelSpec::canonical(s_len, pow.max(i.saturating_add(1)).max(2))
}

fn num_max(t: &NumTerm, n: &BigUint, l: usize) -> BigUint {
    match t {
        NumTerm::Lit(v) => v.clone(),
        NumTerm::Var(_) => n.clone(),
        NumTerm::Len(s) => BigUint::from(str_max_len(s, l)),
        NumTerm::Add(ps) => ps.iter().map(|p| num_max(p, n, l)).sum(),
        NumTerm::MulConst(k, a) => BigUint::from(*k) * num_max(a, n, l),
    }
}

fn str_max_len(s: &StrTerm, l: usize) -> usize {
    match s {
        StrTerm::Lit(w) => w.len(),
        StrTerm::Var(_) => l,
        StrTerm::Concat(ps) => ps.iter().map(|p| str_max_len(p, l)).sum(),
    }
}

fn bits(n: &BigUint) -> usize {
    n.bits() as usize
}

/// Witness bounds under which the target of the power-arithmetic reduction
/// of `source` has exactly the source's satisfying assignments over the base
/// domain of `m`. `None` when they would not fit the enumeration limits.
pub fn certify_tp_bounds(source: &Formula, m: &ModelSpec) -> Option<ModelSpec> {
    let n = BigUint::from(m.max_num);
    let mut str_need = 0usize;
    let mut num_need = BigUint::zero();
    source.for_each_atom(&mut |a| {
        if let Atom::Pi(_, x, y) = a {
            let (xm, ym) = (num_max(x, &n, m.max_str_len), num_max(y, &n, m.max_str_len));
            let ym_usize = ym.to_usize().unwrap_or(usize::MAX);
            str_need = str_need.max(ym_usize).max(bits(&xm).max(1));
            let shifted = if ym_usize > 4096 { None } else { Some(&xm << ym_usize) };
            num_need = match shifted {
                Some(v) => num_need.clone().max(v),
                None => BigUint::from(u64::MAX) + BigUint::one(),
            };
        }
    });
    let w = m.witness_bounds();
    let num = num_need.to_u64()?.max(w.max_num);
    if str_need > 64 {
        return None;
    }
    Some(m.with_witness(Bounds {
        max_str_len: w.max_str_len.max(str_need),
        max_num: num,
    }))
}

/// Bounds under which the target of the `numstr` reduction of the
/// quantifier-free `source` agrees with it on every assignment over the base
/// domain of `m`. `None` if the base bounds are too small or the source has
/// quantifiers.
pub fn certify_tsn_bounds(source: &Formula, m: &ModelSpec) -> Option<ModelSpec> {
    if !is_quantifier_free(source) {
        return None;
    }
    let n = BigUint::from(m.max_num);
    let mut s_need = 0usize;
    let mut num_need = BigUint::zero();
    source.for_each_atom(&mut |a| {
        if let Atom::NumStr(i, s) = a {
            let len = str_max_len(s, m.max_str_len);
            s_need = s_need.max(len);
            let half = if len == 0 { BigUint::zero() } else { BigUint::one() << (len - 1) };
            num_need = num_need.clone().max(num_max(i, &n, m.max_str_len)).max(half).max(BigUint::from(len));
        }
    });
    let needed = num_need.to_u64()?;
    if m.max_num < needed || m.max_str_len < s_need {
        return None;
    }
    let w = m.witness_bounds();
    Some(m.with_witness(Bounds {
        max_str_len: w.max_str_len.max(s_need),
        max_num: w.max_num.max(needed),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{alpha_eq, free_vars};
    use crate::semantics::{bounded_eval, numstr_holds, pi_holds, Assignment, Value};
    use crate::surface::{parse, print};

    #[test]
    fn pi_encoding_matches_the_printed_form() {
        let f = parse("(pi p x y)").unwrap();
        let trace = reduce_tp_to_tsn(&f).unwrap();
        let expected = parse(
            r#"(exists ((z Str)) (exists ((xs Str)) (and (= (concat "0" z) (concat z "0")) (= (len z) y) (numstr p (concat xs z)) (numstr x xs))))"#,
        )
        .unwrap();
        assert!(alpha_eq(&trace.target, &expected), "{}", print(&trace.target));
        assert_eq!(theory_of(&trace.target), Ok(TheoryTag::Tsn));
        assert_eq!(trace.rewrites.len(), 1);
        assert_eq!(trace.erase(), f);
    }

    #[test]
    fn arithmetic_passes_through() {
        let f = parse("(= a (+ b c))").unwrap();
        let trace = reduce_tp_to_tsn(&f).unwrap();
        assert_eq!(trace.target, f);
        assert!(trace.rewrites.is_empty());
    }

    #[test]
    fn six_three_one_has_the_expected_witness() {
        let f = parse("(pi 6 3 1)").unwrap();
        let trace = reduce_tp_to_tsn(&f).unwrap();
        let m = ModelSpec::canonical(3, 8);
        assert!(bounded_eval::<u64>(&trace.target, &Assignment::new(), &m).unwrap());
        assert!(numstr_holds(&6u64, b"110"));
        let g = parse("(pi 5 3 1)").unwrap();
        let trace = reduce_tp_to_tsn(&g).unwrap();
        assert!(!bounded_eval::<u64>(&trace.target, &Assignment::new(), &m).unwrap());
    }

    #[test]
    fn negative_pi_elimination() {
        let f = parse("(not (pi 5 2 1))").unwrap();
        let g = eliminate_negative_pi(&f);
        let m = ModelSpec::canonical(3, 8);
        assert!(bounded_eval::<u64>(&g, &Assignment::new(), &m).unwrap());
        let f = parse("(not (pi 4 2 1))").unwrap();
        for max_num in 4..12 {
            let g = eliminate_negative_pi(&f);
            assert!(!bounded_eval::<u64>(&g, &Assignment::new(), &ModelSpec::canonical(3, max_num)).unwrap());
        }
        let plain = parse("(and (pi p 1 2) (< p 9))").unwrap();
        assert_eq!(eliminate_negative_pi(&plain), plain);
    }

    #[test]
    fn negative_pi_can_be_refused() {
        let f = parse("(not (pi 5 2 1))").unwrap();
        let err = reduce_tp_to_tsn_with(&f, TpOptions { eliminate_negative_pi: false }).unwrap_err();
        assert!(matches!(err, ReduceError::NegativePiAtom(_)));
        let trace = reduce_tp_to_tsn(&f).unwrap();
        assert_eq!(trace.erase(), nnf(&f));
        assert_eq!(trace.rewrites[0].fresh.len(), 3);
    }

    #[test]
    fn wrong_theory_and_quantifiers() {
        let f = parse(r#"(numstr 3 "11")"#).unwrap();
        assert!(matches!(reduce_tp_to_tsn(&f), Err(ReduceError::WrongTheory { .. })));
        let f = parse("(exists ((y Num)) (pi 4 1 y))").unwrap();
        assert_eq!(reduce_tp_to_tsn(&f), Err(ReduceError::NotQuantifierFree));
        let f = parse(r#"(and (pi p 1 2) (= S "1"))"#).unwrap();
        assert!(matches!(reduce_tsn_to_tpi(&f), Err(ReduceError::WrongTheory { .. })));
        let f = parse("(pi 6 3 1)").unwrap();
        assert!(matches!(reduce_tsn_to_tpi(&f), Err(ReduceError::WrongTheory { .. })));
        let f = parse("(< a 3)").unwrap();
        assert_eq!(reduce_tsn_to_tpi(&f).unwrap().target, f);
    }

    #[test]
    fn numstr_encoding_examples() {
        for (i, s, want) in [(3u64, "11", true), (2, "11", false), (0, "0", true), (3, "0011", true), (1, "10", false)] {
            let f = Formula::numstr(NumTerm::lit(i), StrTerm::Lit(Word::new(s).unwrap()));
            let trace = reduce_tsn_to_tpi(&f).unwrap();
            assert_eq!(theory_of(&trace.target), Ok(TheoryTag::Tpi));
            let m = sound_bounds_for_numstr_check(i, s.len());
            assert_eq!(bounded_eval::<u64>(&trace.target, &Assignment::new(), &m).unwrap(), want, "{i} {s}");
        }
        let f = parse("(numstr 0 epsilon)").unwrap();
        let trace = reduce_tsn_to_tpi(&f).unwrap();
        assert!(!bounded_eval::<u64>(&trace.target, &Assignment::new(), &sound_bounds_for_numstr_check(0, 0)).unwrap());
    }

    #[test]
    fn sound_bound_values() {
        assert_eq!(sound_bounds_for_numstr_check(3, 2).max_num, 8);
        assert_eq!(sound_bounds_for_numstr_check(3, 2).max_str_len, 2);
        assert!(sound_bounds_for_numstr_check(0, 1).max_num >= 2);
    }

    #[test]
    fn trace_records_every_fresh_variable() {
        let f = parse("(forall ((s Str)) (or (numstr i s) (numstr (+ i 1) (concat s s))))").unwrap();
        let trace = reduce_tsn_to_tpi(&f).unwrap();
        assert_eq!(trace.erase(), f);
        let fresh = trace.fresh_vars();
        assert_eq!(fresh.len(), 26);
        let mut names: Vec<_> = fresh.iter().map(|(v, _)| v.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 26);
        let reparsed = parse(&print(&trace.target)).unwrap();
        assert!(alpha_eq(&reparsed, &trace.target));
        assert_eq!(free_vars(&trace.target), free_vars(&f));
    }

    #[test]
    fn pi_encoding_agrees_with_pi_on_a_grid() {
        let f = parse("(pi p x y)").unwrap();
        let target = reduce_tp_to_tsn(&f).unwrap().target;
        let m = ModelSpec::canonical(6, 64);
        for p in 0..40u64 {
            for x in 0..6u64 {
                for y in 0..4u64 {
                    let mut a = Assignment::new();
                    a.insert("p".into(), Value::Num(p));
                    a.insert("x".into(), Value::Num(x));
                    a.insert("y".into(), Value::Num(y));
                    assert_eq!(bounded_eval(&target, &a, &m).unwrap(), pi_holds(&p, &x, &y), "{p} {x} {y}");
                }
            }
        }
    }

    #[test]
    fn certification() {
        let f = parse("(and (pi p x 3) (not (pi q 2 y)))").unwrap();
        let m = certify_tp_bounds(&f, &ModelSpec::canonical(2, 7)).unwrap();
        let w = m.witness.unwrap();
        assert_eq!(w.max_str_len, 7);
        assert_eq!(w.max_num, 2 << 7);
        let g = parse("(numstr i s)").unwrap();
        assert!(certify_tsn_bounds(&g, &ModelSpec::canonical(6, 64)).is_some());
        assert!(certify_tsn_bounds(&g, &ModelSpec::canonical(6, 16)).is_none());
    }
}
