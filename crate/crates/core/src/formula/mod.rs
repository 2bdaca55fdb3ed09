//! Two-sorted abstract syntax for string/number formulas.
//!
//! One AST covers the string theory with `numstr`, power arithmetic (numeric
//! atoms plus `pi`) and the hybrid theory where `pi` replaces `numstr`.
//! Terms are typed by construction: a [`StrTerm`] can never appear where a
//! [`NumTerm`] is expected. Variable sorts are checked by [`sort_check`].

mod analysis;
mod transform;

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::word::Word;

pub use analysis::{
    alpha_eq, free_vars, has_quantifier, is_quantifier_free, sort_check, theory_of, well_sorted,
    SortError, TheoryError,
};
pub use transform::{
    expand_mulconst, expand_mulconst_num, nnf, substitute, to_prenex, FreshNames, SubstError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sort {
    Str,
    Num,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Str => "Str",
            Sort::Num => "Num",
        })
    }
}

/// Variable name. Case-sensitive and nonempty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ident(String);

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "identifiers are nonempty");
        Ident(name)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(name: &str) -> Self {
        Ident::new(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StrTerm {
    Lit(Word),
    Var(Ident),
    /// At least two parts, none of which is itself a `Concat`.
    Concat(Vec<StrTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NumTerm {
    Lit(BigUint),
    Var(Ident),
    Len(Box<StrTerm>),
    /// At least two parts, none of which is itself an `Add`.
    Add(Vec<NumTerm>),
    /// `k * t`, shorthand for the k-fold sum of `t`.
    MulConst(u64, Box<NumTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Str(StrTerm),
    Num(NumTerm),
}

impl Term {
    pub fn sort(&self) -> Sort {
        match self {
            Term::Str(_) => Sort::Str,
            Term::Num(_) => Sort::Num,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    StrEq(StrTerm, StrTerm),
    NumEq(NumTerm, NumTerm),
    NumLt(NumTerm, NumTerm),
    /// `numstr(n, s)`: `s` is a binary representation of `n`.
    NumStr(NumTerm, StrTerm),
    /// `pi(p, x, y)`: `p = x * 2^y`.
    Pi(NumTerm, NumTerm, NumTerm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant {
        q: Quantifier,
        var: Ident,
        sort: Sort,
        body: Box<Formula>,
    },
}

/// Which fragment a formula belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryTag {
    /// Naturals with `+`, `=`, `<` and `pi`; no strings.
    Tp,
    /// Strings, length, linear arithmetic and `numstr`.
    Tsn,
    /// As `Tsn`, with `pi` in place of `numstr`.
    Tpi,
}

impl fmt::Display for TheoryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoryTag::Tp => "tp",
            TheoryTag::Tsn => "tsn",
            TheoryTag::Tpi => "tpi",
        })
    }
}

impl StrTerm {
    pub fn var(name: impl Into<Ident>) -> Self {
        StrTerm::Var(name.into())
    }

    pub fn lit(word: Word) -> Self {
        StrTerm::Lit(word)
    }

    pub fn epsilon() -> Self {
        StrTerm::Lit(Word::empty())
    }

    /// Flattening constructor. Zero parts give the empty word, one part is
    /// returned as is.
    pub fn concat(parts: impl IntoIterator<Item = StrTerm>) -> Self {
        let mut flat = Vec::new();
        for part in parts {
            match part {
                StrTerm::Concat(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => StrTerm::epsilon(),
            1 => flat.pop().unwrap(),
            _ => StrTerm::Concat(flat),
        }
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(&Ident)) {
        match self {
            StrTerm::Lit(_) => {}
            StrTerm::Var(v) => f(v),
            StrTerm::Concat(parts) => parts.iter().for_each(|p| p.for_each_var(f)),
        }
    }

    pub fn mentions(&self, name: &Ident) -> bool {
        let mut found = false;
        self.for_each_var(&mut |v| found |= v == name);
        found
    }
}

impl NumTerm {
    pub fn var(name: impl Into<Ident>) -> Self {
        NumTerm::Var(name.into())
    }

    pub fn lit(value: impl Into<BigUint>) -> Self {
        NumTerm::Lit(value.into())
    }

    pub fn len(arg: StrTerm) -> Self {
        NumTerm::Len(Box::new(arg))
    }

    pub fn mul_const(k: u64, arg: NumTerm) -> Self {
        NumTerm::MulConst(k, Box::new(arg))
    }

    /// Flattening constructor. Zero parts give `0`, one part is returned as is.
    pub fn add(parts: impl IntoIterator<Item = NumTerm>) -> Self {
        let mut flat = Vec::new();
        for part in parts {
            match part {
                NumTerm::Add(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => NumTerm::lit(0u32),
            1 => flat.pop().unwrap(),
            _ => NumTerm::Add(flat),
        }
    }

    /// Visits variables with their sort (`len` arguments are strings).
    pub fn for_each_var(&self, f: &mut impl FnMut(&Ident, Sort)) {
        match self {
            NumTerm::Lit(_) => {}
            NumTerm::Var(v) => f(v, Sort::Num),
            NumTerm::Len(s) => s.for_each_var(&mut |v| f(v, Sort::Str)),
            NumTerm::Add(parts) => parts.iter().for_each(|p| p.for_each_var(f)),
            NumTerm::MulConst(_, t) => t.for_each_var(f),
        }
    }

    pub fn mentions(&self, name: &Ident) -> bool {
        let mut found = false;
        self.for_each_var(&mut |v, _| found |= v == name);
        found
    }
}

impl Atom {
    pub fn for_each_var(&self, f: &mut impl FnMut(&Ident, Sort)) {
        let on_str = |t: &StrTerm, f: &mut dyn FnMut(&Ident, Sort)| {
            t.for_each_var(&mut |v| f(v, Sort::Str))
        };
        match self {
            Atom::StrEq(a, b) => {
                on_str(a, f);
                on_str(b, f);
            }
            Atom::NumEq(a, b) | Atom::NumLt(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Atom::NumStr(n, s) => {
                n.for_each_var(f);
                on_str(s, f);
            }
            Atom::Pi(p, x, y) => {
                p.for_each_var(f);
                x.for_each_var(f);
                y.for_each_var(f);
            }
        }
    }

    pub fn mentions(&self, name: &Ident) -> bool {
        let mut found = false;
        self.for_each_var(&mut |v, _| found |= v == name);
        found
    }
}

impl Formula {
    pub fn atom(atom: Atom) -> Self {
        Formula::Atom(atom)
    }

    pub fn str_eq(a: StrTerm, b: StrTerm) -> Self {
        Formula::Atom(Atom::StrEq(a, b))
    }

    pub fn num_eq(a: NumTerm, b: NumTerm) -> Self {
        Formula::Atom(Atom::NumEq(a, b))
    }

    pub fn num_lt(a: NumTerm, b: NumTerm) -> Self {
        Formula::Atom(Atom::NumLt(a, b))
    }

    pub fn numstr(n: NumTerm, s: StrTerm) -> Self {
        Formula::Atom(Atom::NumStr(n, s))
    }

    pub fn pi(p: NumTerm, x: NumTerm, y: NumTerm) -> Self {
        Formula::Atom(Atom::Pi(p, x, y))
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Self {
        Formula::And(parts.into_iter().collect())
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Self {
        Formula::Or(parts.into_iter().collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn quant(q: Quantifier, var: impl Into<Ident>, sort: Sort, body: Formula) -> Self {
        Formula::Quant {
            q,
            var: var.into(),
            sort,
            body: Box::new(body),
        }
    }

    pub fn exists(var: impl Into<Ident>, sort: Sort, body: Formula) -> Self {
        Formula::quant(Quantifier::Exists, var, sort, body)
    }

    pub fn forall(var: impl Into<Ident>, sort: Sort, body: Formula) -> Self {
        Formula::quant(Quantifier::Forall, var, sort, body)
    }

    /// Nests single-variable quantifiers, first binder outermost.
    pub fn quant_block(q: Quantifier, vars: &[(&str, Sort)], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, (v, s)| Formula::quant(q, *v, *s, acc))
    }

    /// Visits every atom, outermost first, left to right.
    pub fn for_each_atom(&self, f: &mut impl FnMut(&Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| p.for_each_atom(f)),
            Formula::Not(g) => g.for_each_atom(f),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
            Formula::Quant { body, .. } => body.for_each_atom(f),
        }
    }

    /// Whether `name` occurs free.
    pub fn mentions_free(&self, name: &Ident) -> bool {
        match self {
            Formula::Atom(a) => a.mentions(name),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().any(|p| p.mentions_free(name)),
            Formula::Not(g) => g.mentions_free(name),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.mentions_free(name) || b.mentions_free(name)
            }
            Formula::Quant { var, body, .. } => var != name && body.mentions_free(name),
        }
    }
}

impl From<Atom> for Formula {
    fn from(atom: Atom) -> Self {
        Formula::Atom(atom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_and_add_flatten() {
        let inner = StrTerm::concat([StrTerm::var("X"), StrTerm::var("Y")]);
        let outer = StrTerm::concat([inner, StrTerm::var("Z")]);
        match &outer {
            StrTerm::Concat(parts) => {
                assert_eq!(parts.len(), 3);
                assert!(parts.iter().all(|p| !matches!(p, StrTerm::Concat(_))));
            }
            other => panic!("expected concat, got {other:?}"),
        }
        assert_eq!(StrTerm::concat([]), StrTerm::epsilon());
        assert_eq!(StrTerm::concat([StrTerm::var("X")]), StrTerm::var("X"));

        let sum = NumTerm::add([NumTerm::add([NumTerm::lit(1u32), NumTerm::var("x")]), NumTerm::lit(2u32)]);
        assert!(matches!(&sum, NumTerm::Add(parts) if parts.len() == 3));
    }

    #[test]
    fn mentions_free_respects_binders() {
        let f = Formula::exists(
            "x",
            Sort::Num,
            Formula::num_eq(NumTerm::var("x"), NumTerm::var("y")),
        );
        assert!(!f.mentions_free(&"x".into()));
        assert!(f.mentions_free(&"y".into()));
    }
}
