//! Bounded evaluation in the canonical model and the restricted model.
//!
//! Quantifiers range over finite truncations of the universes. A
//! [`ModelSpec`] has base bounds, used by free variables and by quantifiers
//! that are universal in effect, and optional witness bounds for quantifiers
//! that are existential in effect. Without witness bounds both coincide.

mod compile;
mod domain;
mod ir;
mod primitives;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{free_vars, sort_check, theory_of, Formula, Ident, NumTerm, Sort, StrTerm};
use crate::natural::Natural;
use crate::word::{is_canonical_numeral, Word};

use compile::Compiler;
use domain::{words_up_to, Domain};
use ir::{Env, Machine, Node};

pub use primitives::{numeral_value, numstr_holds, pi_holds};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value<N> {
    Str(Word),
    Num(N),
}

impl<N> Value<N> {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Str(_) => Sort::Str,
            Value::Num(_) => Sort::Num,
        }
    }
}

impl<N: fmt::Display> fmt::Display for Value<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(w) if w.is_empty() => f.write_str("epsilon"),
            Value::Str(w) => write!(f, "\"{w}\""),
            Value::Num(n) => write!(f, "{n}"),
        }
    }
}

pub type Assignment<N> = BTreeMap<Ident, Value<N>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Universe {
    /// All binary words and all naturals.
    CanonicalA,
    /// Nonempty words without leading zeros (except `"0"` itself).
    RestrictedB,
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Universe::CanonicalA => "A",
            Universe::RestrictedB => "B",
        })
    }
}

/// Inclusive enumeration bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub max_str_len: usize,
    pub max_num: u64,
}

fn saturating_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn bit_len(n: u64) -> usize {
    (64 - n.leading_zeros()) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub universe: Universe,
    pub max_str_len: usize,
    pub max_num: u64,
    pub witness: Option<Bounds>,
}

impl ModelSpec {
    pub fn new(universe: Universe, max_str_len: usize, max_num: u64) -> Self {
        ModelSpec {
            universe,
            max_str_len,
            max_num,
            witness: None,
        }
    }

    pub fn canonical(max_str_len: usize, max_num: u64) -> Self {
        Self::new(Universe::CanonicalA, max_str_len, max_num)
    }

    pub fn restricted(max_str_len: usize, max_num: u64) -> Self {
        Self::new(Universe::RestrictedB, max_str_len, max_num)
    }

    pub fn base(&self) -> Bounds {
        Bounds {
            max_str_len: self.max_str_len,
            max_num: self.max_num,
        }
    }

    pub fn witness_bounds(&self) -> Bounds {
        self.witness.unwrap_or_else(|| self.base())
    }

    pub fn with_witness(mut self, witness: Bounds) -> Self {
        self.witness = Some(witness);
        self
    }

    /// Witness bounds large enough that every base number has a
    /// representation and every base string has a value:
    /// length `max(L, bitlen(N))`, numbers up to `max(N, 2^L - 1)`.
    pub fn with_numstr_closure(self) -> Self {
        let w = self.witness_bounds();
        self.with_witness(Bounds {
            max_str_len: w.max_str_len.max(bit_len(self.max_num)),
            max_num: w.max_num.max(saturating_mask(self.max_str_len)),
        })
    }

    /// Additionally lets witness strings reach every length that a base
    /// string's value can denote: `min(N, 2^L - 1)`.
    pub fn with_length_closure(self) -> Self {
        let w = self.witness_bounds();
        let reach = self.max_num.min(saturating_mask(self.max_str_len));
        self.with_witness(Bounds {
            max_str_len: w.max_str_len.max(usize::try_from(reach).unwrap_or(usize::MAX)),
            max_num: w.max_num,
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "model {} (max_str_len={}, max_num={}",
            self.universe, self.max_str_len, self.max_num
        )?;
        if let Some(w) = self.witness {
            if w != self.base() {
                write!(f, "; witnesses up to max_str_len={}, max_num={}", w.max_str_len, w.max_num)?;
            }
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Nested enumeration of every quantifier over its whole domain.
    Literal,
    /// Planned search of existential blocks with guard-driven candidates.
    #[default]
    Guided,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable {0} has no value")]
    UnboundVariable(Ident),
    #[error("variable {0} is used at the wrong sort")]
    IllSorted(Ident),
    #[error("the restricted model has no {0}")]
    UnsupportedInModelB(String),
    #[error("value of {0} lies outside the model's universe")]
    OutsideUniverse(Ident),
    #[error("formula mixes numstr and pi")]
    MixedTheory,
    #[error("arithmetic overflow in the numeric carrier")]
    Overflow,
}

/// A formula compiled against fixed free variables and a model.
pub struct Evaluator<N: Natural> {
    root: Node<N>,
    machine: Machine<N>,
    free: Vec<(Ident, Sort)>,
    str_slots: usize,
    num_slots: usize,
}

/// Mutable evaluation state for one thread.
#[derive(Debug, Clone)]
pub struct Frame<N>(Env<N>);

impl<N: Natural> Evaluator<N> {
    /// `free` lists the variables the caller will set, in slot order; it
    /// must cover the formula's free variables.
    pub fn new(f: &Formula, free: &[(Ident, Sort)], m: &ModelSpec, strategy: Strategy) -> Result<Self, EvalError> {
        sort_check(f).map_err(|e| EvalError::IllSorted(e.var))?;
        theory_of(f).map_err(|_| EvalError::MixedTheory)?;
        if N::from_u64(m.max_num.max(m.witness_bounds().max_num)).is_none() {
            return Err(EvalError::Overflow);
        }
        let base = Domain::new(m.universe, m.base());
        let witness = Domain::new(m.universe, m.witness_bounds());
        let mut compiler = Compiler::new(f, strategy, m.universe, base.is_empty_for_str(), witness.is_empty_for_str());
        for (v, s) in free {
            compiler.bind(v, *s);
        }
        let root = compiler.formula(f, true)?;
        Ok(Evaluator {
            root,
            machine: Machine { base, witness },
            free: free.to_vec(),
            str_slots: compiler.str_slots,
            num_slots: compiler.num_slots,
        })
    }

    pub fn free_vars(&self) -> &[(Ident, Sort)] {
        &self.free
    }

    pub fn frame(&self) -> Frame<N> {
        Frame(Env::new(self.str_slots, self.num_slots))
    }

    /// Sets the `index`-th free variable. Free variables occupy the first
    /// slots of each sort in the order given to [`Evaluator::new`].
    pub fn set(&self, frame: &mut Frame<N>, index: usize, value: &Value<N>) {
        let (_, sort) = &self.free[index];
        let slot = self.free[..index].iter().filter(|(_, s)| s == sort).count();
        match value {
            Value::Str(w) => {
                assert_eq!(*sort, Sort::Str, "sort of free variable");
                frame.0.strs[slot].clear();
                frame.0.strs[slot].extend_from_slice(w.as_bytes());
            }
            Value::Num(n) => {
                assert_eq!(*sort, Sort::Num, "sort of free variable");
                frame.0.nums[slot] = n.clone();
            }
        }
    }

    pub fn eval(&self, frame: &mut Frame<N>) -> Result<bool, EvalError> {
        self.machine.eval(&self.root, &mut frame.0)
    }
}

fn check_assignment<N: Natural>(f: &Formula, a: &Assignment<N>, m: &ModelSpec) -> Result<Vec<(Ident, Sort)>, EvalError> {
    let free: Vec<(Ident, Sort)> = free_vars(f).into_iter().collect();
    for (v, s) in &free {
        match a.get(v) {
            None => return Err(EvalError::UnboundVariable(v.clone())),
            Some(val) if val.sort() != *s => return Err(EvalError::IllSorted(v.clone())),
            Some(Value::Str(w)) if m.universe == Universe::RestrictedB && !w.is_canonical_numeral() => {
                return Err(EvalError::OutsideUniverse(v.clone()))
            }
            Some(_) => {}
        }
    }
    Ok(free)
}

/// Truth of `f` under `a` with quantifiers bounded by `m`.
pub fn bounded_eval<N: Natural>(f: &Formula, a: &Assignment<N>, m: &ModelSpec) -> Result<bool, EvalError> {
    bounded_eval_with(f, a, m, Strategy::Guided)
}

pub fn bounded_eval_with<N: Natural>(
    f: &Formula,
    a: &Assignment<N>,
    m: &ModelSpec,
    strategy: Strategy,
) -> Result<bool, EvalError> {
    let free = check_assignment(f, a, m)?;
    let ev = Evaluator::new(f, &free, m, strategy)?;
    let mut frame = ev.frame();
    for (i, (v, _)) in free.iter().enumerate() {
        ev.set(&mut frame, i, &a[v]);
    }
    ev.eval(&mut frame)
}

pub fn eval_str_term<N: Natural>(t: &StrTerm, a: &Assignment<N>) -> Result<Word, EvalError> {
    match t {
        StrTerm::Lit(w) => Ok(w.clone()),
        StrTerm::Var(v) => match a.get(v) {
            Some(Value::Str(w)) => Ok(w.clone()),
            Some(Value::Num(_)) => Err(EvalError::IllSorted(v.clone())),
            None => Err(EvalError::UnboundVariable(v.clone())),
        },
        StrTerm::Concat(ps) => {
            let mut out = Word::empty();
            for p in ps {
                out = out.concat(&eval_str_term(p, a)?);
            }
            Ok(out)
        }
    }
}

pub fn eval_num_term<N: Natural>(t: &NumTerm, a: &Assignment<N>) -> Result<N, EvalError> {
    match t {
        NumTerm::Lit(n) => N::from_biguint(n).ok_or(EvalError::Overflow),
        NumTerm::Var(v) => match a.get(v) {
            Some(Value::Num(n)) => Ok(n.clone()),
            Some(Value::Str(_)) => Err(EvalError::IllSorted(v.clone())),
            None => Err(EvalError::UnboundVariable(v.clone())),
        },
        NumTerm::Len(s) => N::from_u64(eval_str_term(s, a)?.len() as u64).ok_or(EvalError::Overflow),
        NumTerm::Add(ps) => {
            let mut acc = N::zero();
            for p in ps {
                acc = acc.checked_add(&eval_num_term(p, a)?).ok_or(EvalError::Overflow)?;
            }
            Ok(acc)
        }
        NumTerm::MulConst(k, t) => {
            let k = N::from_u64(*k).ok_or(EvalError::Overflow)?;
            k.checked_mul(&eval_num_term(t, a)?).ok_or(EvalError::Overflow)
        }
    }
}

/// The base domain of `sort` in enumeration order: numbers ascending,
/// strings by length then lexicographically.
pub fn enumerate_domain<N: Natural>(sort: Sort, m: &ModelSpec) -> Box<dyn Iterator<Item = Value<N>>> {
    match sort {
        Sort::Num => {
            let max = m.max_num;
            Box::new((0..=max).map(|k| Value::Num(N::from_u64(k).expect("max_num fits the carrier"))))
        }
        Sort::Str => {
            let words = words_up_to(m.max_str_len, m.universe == Universe::RestrictedB);
            Box::new(words.map(|w| Value::Str(Word::from_digits(w))))
        }
    }
}

/// Whether `value` lies in the base domain of `m`.
pub fn in_domain<N: Natural>(value: &Value<N>, m: &ModelSpec) -> bool {
    match value {
        Value::Str(w) => {
            w.len() <= m.max_str_len && (m.universe == Universe::CanonicalA || is_canonical_numeral(w.as_bytes()))
        }
        Value::Num(n) => N::from_u64(m.max_num).is_none_or(|max| *n <= max),
    }
}
