use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Atom, Formula, Ident, NumTerm, Sort, StrTerm, TheoryTag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("variable {var} used as {found} but it has sort {expected}")]
pub struct SortError {
    pub var: Ident,
    pub expected: Sort,
    pub found: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("formula mixes numstr and pi")]
    MixedTheory,
}

struct Scope {
    bound: Vec<(Ident, Sort)>,
    free: BTreeMap<Ident, Sort>,
}

impl Scope {
    fn lookup(&self, name: &Ident) -> Option<Sort> {
        self.bound
            .iter()
            .rev()
            .find(|(v, _)| v == name)
            .map(|(_, s)| *s)
    }

    fn use_var(&mut self, name: &Ident, sort: Sort) -> Result<(), SortError> {
        let expected = match self.lookup(name) {
            Some(s) => s,
            None => *self.free.entry(name.clone()).or_insert(sort),
        };
        if expected == sort {
            Ok(())
        } else {
            Err(SortError {
                var: name.clone(),
                expected,
                found: sort,
            })
        }
    }

    fn visit(&mut self, f: &Formula) -> Result<(), SortError> {
        match f {
            Formula::Atom(a) => {
                let mut err = None;
                a.for_each_var(&mut |v, s| {
                    if err.is_none() {
                        err = self.use_var(v, s).err();
                    }
                });
                err.map_or(Ok(()), Err)
            }
            Formula::And(ps) | Formula::Or(ps) => ps.iter().try_for_each(|p| self.visit(p)),
            Formula::Not(g) => self.visit(g),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.visit(a)?;
                self.visit(b)
            }
            Formula::Quant { var, sort, body, .. } => {
                self.bound.push((var.clone(), *sort));
                let r = self.visit(body);
                self.bound.pop();
                r
            }
        }
    }
}

/// Checks that every variable is used at a single sort: bound occurrences
/// at the sort of their binder, free occurrences consistently.
pub fn sort_check(f: &Formula) -> Result<(), SortError> {
    Scope {
        bound: Vec::new(),
        free: BTreeMap::new(),
    }
    .visit(f)
}

pub fn well_sorted(f: &Formula) -> bool {
    sort_check(f).is_ok()
}

/// Free variables with the sort of their first occurrence.
pub fn free_vars(f: &Formula) -> BTreeSet<(Ident, Sort)> {
    fn go(f: &Formula, bound: &mut Vec<Ident>, out: &mut BTreeMap<Ident, Sort>) {
        match f {
            Formula::Atom(a) => a.for_each_var(&mut |v, s| {
                if !bound.contains(v) {
                    out.entry(v.clone()).or_insert(s);
                }
            }),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| go(p, bound, out)),
            Formula::Not(g) => go(g, bound, out),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Quant { var, body, .. } => {
                bound.push(var.clone());
                go(body, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeMap::new();
    go(f, &mut Vec::new(), &mut out);
    out.into_iter().collect()
}

pub fn has_quantifier(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => false,
        Formula::And(ps) | Formula::Or(ps) => ps.iter().any(has_quantifier),
        Formula::Not(g) => has_quantifier(g),
        Formula::Implies(a, b) | Formula::Iff(a, b) => has_quantifier(a) || has_quantifier(b),
        Formula::Quant { .. } => true,
    }
}

pub fn is_quantifier_free(f: &Formula) -> bool {
    !has_quantifier(f)
}

#[derive(Default)]
struct Features {
    pi: bool,
    numstr: bool,
    strings: bool,
}

fn str_features(_t: &StrTerm, feats: &mut Features) {
    feats.strings = true;
}

fn num_features(t: &NumTerm, feats: &mut Features) {
    match t {
        NumTerm::Lit(_) | NumTerm::Var(_) => {}
        NumTerm::Len(s) => str_features(s, feats),
        NumTerm::Add(ps) => ps.iter().for_each(|p| num_features(p, feats)),
        NumTerm::MulConst(_, t) => num_features(t, feats),
    }
}

fn formula_features(f: &Formula, feats: &mut Features) {
    match f {
        Formula::Atom(a) => match a {
            Atom::StrEq(x, y) => {
                str_features(x, feats);
                str_features(y, feats);
            }
            Atom::NumEq(x, y) | Atom::NumLt(x, y) => {
                num_features(x, feats);
                num_features(y, feats);
            }
            Atom::NumStr(n, s) => {
                feats.numstr = true;
                num_features(n, feats);
                str_features(s, feats);
            }
            Atom::Pi(p, x, y) => {
                feats.pi = true;
                num_features(p, feats);
                num_features(x, feats);
                num_features(y, feats);
            }
        },
        Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| formula_features(p, feats)),
        Formula::Not(g) => formula_features(g, feats),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            formula_features(a, feats);
            formula_features(b, feats);
        }
        Formula::Quant { sort, body, .. } => {
            if *sort == Sort::Str {
                feats.strings = true;
            }
            formula_features(body, feats);
        }
    }
}

/// The most specific fragment containing `f`.
///
/// Purely numeric formulas are `Tp`. Anything mentioning strings is `Tsn`
/// unless it uses `pi`, in which case it is `Tpi`. Using both `numstr` and
/// `pi` is an error.
pub fn theory_of(f: &Formula) -> Result<TheoryTag, TheoryError> {
    let mut feats = Features::default();
    formula_features(f, &mut feats);
    match (feats.pi, feats.numstr, feats.strings) {
        (true, true, _) => Err(TheoryError::MixedTheory),
        (_, false, false) => Ok(TheoryTag::Tp),
        (false, _, _) => Ok(TheoryTag::Tsn),
        (true, false, true) => Ok(TheoryTag::Tpi),
    }
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    AlphaEnv::default().formula(a, b)
}

#[derive(Default)]
struct AlphaEnv {
    left: Vec<Ident>,
    right: Vec<Ident>,
}

impl AlphaEnv {
    fn var(&self, x: &Ident, y: &Ident) -> bool {
        let i = self.left.iter().rposition(|v| v == x);
        let j = self.right.iter().rposition(|v| v == y);
        match (i, j) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        }
    }

    fn str(&self, a: &StrTerm, b: &StrTerm) -> bool {
        match (a, b) {
            (StrTerm::Lit(x), StrTerm::Lit(y)) => x == y,
            (StrTerm::Var(x), StrTerm::Var(y)) => self.var(x, y),
            (StrTerm::Concat(xs), StrTerm::Concat(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.str(x, y))
            }
            _ => false,
        }
    }

    fn num(&self, a: &NumTerm, b: &NumTerm) -> bool {
        match (a, b) {
            (NumTerm::Lit(x), NumTerm::Lit(y)) => x == y,
            (NumTerm::Var(x), NumTerm::Var(y)) => self.var(x, y),
            (NumTerm::Len(x), NumTerm::Len(y)) => self.str(x, y),
            (NumTerm::Add(xs), NumTerm::Add(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.num(x, y))
            }
            (NumTerm::MulConst(k, x), NumTerm::MulConst(l, y)) => k == l && self.num(x, y),
            _ => false,
        }
    }

    fn atom(&self, a: &Atom, b: &Atom) -> bool {
        match (a, b) {
            (Atom::StrEq(a1, a2), Atom::StrEq(b1, b2)) => self.str(a1, b1) && self.str(a2, b2),
            (Atom::NumEq(a1, a2), Atom::NumEq(b1, b2)) | (Atom::NumLt(a1, a2), Atom::NumLt(b1, b2)) => {
                self.num(a1, b1) && self.num(a2, b2)
            }
            (Atom::NumStr(a1, a2), Atom::NumStr(b1, b2)) => self.num(a1, b1) && self.str(a2, b2),
            (Atom::Pi(a1, a2, a3), Atom::Pi(b1, b2, b3)) => {
                self.num(a1, b1) && self.num(a2, b2) && self.num(a3, b3)
            }
            _ => false,
        }
    }

    fn formula(&mut self, a: &Formula, b: &Formula) -> bool {
        match (a, b) {
            (Formula::Atom(x), Formula::Atom(y)) => self.atom(x, y),
            (Formula::And(xs), Formula::And(ys)) | (Formula::Or(xs), Formula::Or(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.formula(x, y))
            }
            (Formula::Not(x), Formula::Not(y)) => self.formula(x, y),
            (Formula::Implies(x1, x2), Formula::Implies(y1, y2))
            | (Formula::Iff(x1, x2), Formula::Iff(y1, y2)) => {
                self.formula(x1, y1) && self.formula(x2, y2)
            }
            (
                Formula::Quant { q: qa, var: va, sort: sa, body: ba },
                Formula::Quant { q: qb, var: vb, sort: sb, body: bb },
            ) => {
                if qa != qb || sa != sb {
                    return false;
                }
                self.left.push(va.clone());
                self.right.push(vb.clone());
                let r = self.formula(ba, bb);
                self.left.pop();
                self.right.pop();
                r
            }
            _ => false,
        }
    }
}
