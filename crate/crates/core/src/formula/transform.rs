use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use super::{free_vars, has_quantifier, Atom, Formula, Ident, NumTerm, Quantifier, Sort, StrTerm, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("cannot substitute a {found} term for {var}, which has sort {expected}")]
    SortMismatch {
        var: Ident,
        expected: Sort,
        found: Sort,
    },
}

/// Generator of `base!k` names that avoid every name it has been told about.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    used: HashSet<String>,
    next: HashMap<String, usize>,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    /// A generator avoiding every variable name, free or bound, in `f`.
    pub fn avoiding(f: &Formula) -> Self {
        let mut names = Self::new();
        names.avoid_formula(f);
        names
    }

    pub fn avoid(&mut self, name: &Ident) {
        self.used.insert(name.as_str().to_owned());
    }

    pub fn avoid_formula(&mut self, f: &Formula) {
        match f {
            Formula::Atom(a) => a.for_each_var(&mut |v, _| self.avoid(v)),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| self.avoid_formula(p)),
            Formula::Not(g) => self.avoid_formula(g),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.avoid_formula(a);
                self.avoid_formula(b);
            }
            Formula::Quant { var, body, .. } => {
                self.avoid(var);
                self.avoid_formula(body);
            }
        }
    }

    fn root(base: &str) -> &str {
        base.split('!').next().unwrap_or(base)
    }

    pub fn fresh(&mut self, base: &str) -> Ident {
        let root = Self::root(base).to_owned();
        let counter = self.next.entry(root.clone()).or_insert(0);
        loop {
            let candidate = format!("{root}!{counter}");
            *counter += 1;
            if self.used.insert(candidate.clone()) {
                return Ident::new(candidate);
            }
        }
    }

    /// One name per base, all sharing the smallest suffix that is free for
    /// every base.
    pub fn fresh_group(&mut self, bases: &[&str]) -> Vec<Ident> {
        let roots: Vec<&str> = bases.iter().map(|b| Self::root(b)).collect();
        let mut k = roots
            .iter()
            .map(|r| self.next.get(*r).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        loop {
            let names: Vec<String> = roots.iter().map(|r| format!("{r}!{k}")).collect();
            if names.iter().all(|n| !self.used.contains(n)) {
                for (root, name) in roots.iter().zip(&names) {
                    self.used.insert(name.clone());
                    self.next.insert((*root).to_owned(), k + 1);
                }
                return names.into_iter().map(Ident::new).collect();
            }
            k += 1;
        }
    }
}

fn subst_str(t: &StrTerm, var: &Ident, by: &StrTerm) -> StrTerm {
    match t {
        StrTerm::Var(v) if v == var => by.clone(),
        StrTerm::Lit(_) | StrTerm::Var(_) => t.clone(),
        StrTerm::Concat(ps) => StrTerm::concat(ps.iter().map(|p| subst_str(p, var, by))),
    }
}

fn subst_num(t: &NumTerm, var: &Ident, by: &Term) -> NumTerm {
    match t {
        NumTerm::Var(v) if v == var => match by {
            Term::Num(n) => n.clone(),
            Term::Str(_) => t.clone(),
        },
        NumTerm::Lit(_) | NumTerm::Var(_) => t.clone(),
        NumTerm::Len(s) => match by {
            Term::Str(b) => NumTerm::len(subst_str(s, var, b)),
            Term::Num(_) => t.clone(),
        },
        NumTerm::Add(ps) => NumTerm::add(ps.iter().map(|p| subst_num(p, var, by))),
        NumTerm::MulConst(k, a) => NumTerm::mul_const(*k, subst_num(a, var, by)),
    }
}

fn subst_atom(a: &Atom, var: &Ident, by: &Term) -> Atom {
    let s = |t: &StrTerm| match by {
        Term::Str(b) => subst_str(t, var, b),
        Term::Num(_) => t.clone(),
    };
    let n = |t: &NumTerm| subst_num(t, var, by);
    match a {
        Atom::StrEq(x, y) => Atom::StrEq(s(x), s(y)),
        Atom::NumEq(x, y) => Atom::NumEq(n(x), n(y)),
        Atom::NumLt(x, y) => Atom::NumLt(n(x), n(y)),
        Atom::NumStr(x, y) => Atom::NumStr(n(x), s(y)),
        Atom::Pi(p, x, y) => Atom::Pi(n(p), n(x), n(y)),
    }
}

fn term_free_names(t: &Term) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    match t {
        Term::Str(s) => s.for_each_var(&mut |v| {
            out.insert(v.clone());
        }),
        Term::Num(n) => n.for_each_var(&mut |v, _| {
            out.insert(v.clone());
        }),
    }
    out
}

fn free_sort_of(f: &Formula, var: &Ident) -> Option<Sort> {
    free_vars(f)
        .into_iter()
        .find(|(v, _)| v == var)
        .map(|(_, s)| s)
}

/// Replaces every free occurrence of `var` by `by`, renaming binders that
/// would capture a variable of `by`.
pub fn substitute(f: &Formula, var: &Ident, by: &Term) -> Result<Formula, SubstError> {
    match free_sort_of(f, var) {
        None => return Ok(f.clone()),
        Some(expected) if expected != by.sort() => {
            return Err(SubstError::SortMismatch {
                var: var.clone(),
                expected,
                found: by.sort(),
            })
        }
        Some(_) => {}
    }
    let danger = term_free_names(by);
    let mut fresh = FreshNames::avoiding(f);
    danger.iter().for_each(|v| fresh.avoid(v));
    fresh.avoid(var);
    Ok(subst_rec(f, var, by, &danger, &mut fresh))
}

fn subst_rec(
    f: &Formula,
    var: &Ident,
    by: &Term,
    danger: &BTreeSet<Ident>,
    fresh: &mut FreshNames,
) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(subst_atom(a, var, by)),
        Formula::And(ps) => Formula::And(ps.iter().map(|p| subst_rec(p, var, by, danger, fresh)).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(|p| subst_rec(p, var, by, danger, fresh)).collect()),
        Formula::Not(g) => Formula::not(subst_rec(g, var, by, danger, fresh)),
        Formula::Implies(a, b) => Formula::implies(
            subst_rec(a, var, by, danger, fresh),
            subst_rec(b, var, by, danger, fresh),
        ),
        Formula::Iff(a, b) => Formula::iff(
            subst_rec(a, var, by, danger, fresh),
            subst_rec(b, var, by, danger, fresh),
        ),
        Formula::Quant { q, var: v, sort, body } => {
            if v == var || !body.mentions_free(var) {
                return f.clone();
            }
            let (v, body) = if danger.contains(v) {
                let renamed = fresh.fresh(v.as_str());
                let term = match sort {
                    Sort::Str => Term::Str(StrTerm::Var(renamed.clone())),
                    Sort::Num => Term::Num(NumTerm::Var(renamed.clone())),
                };
                let no_danger = BTreeSet::new();
                (renamed, subst_rec(body, v, &term, &no_danger, fresh))
            } else {
                (v.clone(), (**body).clone())
            };
            Formula::quant(*q, v, *sort, subst_rec(&body, var, by, danger, fresh))
        }
    }
}

/// Negation normal form: only `And`, `Or`, quantifiers and negated atoms.
pub fn nnf(f: &Formula) -> Formula {
    nnf_pol(f, true)
}

fn nnf_pol(f: &Formula, positive: bool) -> Formula {
    match f {
        Formula::Atom(_) if positive => f.clone(),
        Formula::Atom(_) => Formula::not(f.clone()),
        Formula::And(ps) if positive => Formula::And(ps.iter().map(|p| nnf_pol(p, true)).collect()),
        Formula::And(ps) => Formula::Or(ps.iter().map(|p| nnf_pol(p, false)).collect()),
        Formula::Or(ps) if positive => Formula::Or(ps.iter().map(|p| nnf_pol(p, true)).collect()),
        Formula::Or(ps) => Formula::And(ps.iter().map(|p| nnf_pol(p, false)).collect()),
        Formula::Not(g) => nnf_pol(g, !positive),
        Formula::Implies(a, b) if positive => Formula::or([nnf_pol(a, false), nnf_pol(b, true)]),
        Formula::Implies(a, b) => Formula::and([nnf_pol(a, true), nnf_pol(b, false)]),
        Formula::Iff(a, b) if positive => Formula::and([
            Formula::or([nnf_pol(a, false), nnf_pol(b, true)]),
            Formula::or([nnf_pol(a, true), nnf_pol(b, false)]),
        ]),
        Formula::Iff(a, b) => Formula::or([
            Formula::and([nnf_pol(a, true), nnf_pol(b, false)]),
            Formula::and([nnf_pol(a, false), nnf_pol(b, true)]),
        ]),
        Formula::Quant { q, var, sort, body } => {
            let q = if positive { *q } else { q.dual() };
            Formula::quant(q, var.clone(), *sort, nnf_pol(body, positive))
        }
    }
}

/// Replaces `Iff` nodes that contain quantifiers by a pair of implications.
fn split_quantified_iff(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::And(ps) => Formula::And(ps.iter().map(split_quantified_iff).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(split_quantified_iff).collect()),
        Formula::Not(g) => Formula::not(split_quantified_iff(g)),
        Formula::Implies(a, b) => Formula::implies(split_quantified_iff(a), split_quantified_iff(b)),
        Formula::Iff(a, b) => {
            let (a, b) = (split_quantified_iff(a), split_quantified_iff(b));
            if has_quantifier(&a) || has_quantifier(&b) {
                Formula::and([
                    Formula::implies(a.clone(), b.clone()),
                    Formula::implies(b, a),
                ])
            } else {
                Formula::iff(a, b)
            }
        }
        Formula::Quant { q, var, sort, body } => {
            Formula::quant(*q, var.clone(), *sort, split_quantified_iff(body))
        }
    }
}

/// Renames binders so that no two binders share a name and no binder
/// shares a name with a free variable. Binders without a clash keep
/// their names.
fn rename_apart(f: &Formula) -> Formula {
    let mut seen: HashSet<Ident> = free_vars(f).into_iter().map(|(v, _)| v).collect();
    let mut fresh = FreshNames::avoiding(f);
    rename_rec(f, &mut seen, &mut fresh)
}

fn rename_rec(f: &Formula, seen: &mut HashSet<Ident>, fresh: &mut FreshNames) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::And(ps) => Formula::And(ps.iter().map(|p| rename_rec(p, seen, fresh)).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(|p| rename_rec(p, seen, fresh)).collect()),
        Formula::Not(g) => Formula::not(rename_rec(g, seen, fresh)),
        Formula::Implies(a, b) => {
            Formula::implies(rename_rec(a, seen, fresh), rename_rec(b, seen, fresh))
        }
        Formula::Iff(a, b) => Formula::iff(rename_rec(a, seen, fresh), rename_rec(b, seen, fresh)),
        Formula::Quant { q, var, sort, body } => {
            if seen.insert(var.clone()) {
                return Formula::quant(*q, var.clone(), *sort, rename_rec(body, seen, fresh));
            }
            let renamed = fresh.fresh(var.as_str());
            seen.insert(renamed.clone());
            let term = match sort {
                Sort::Str => Term::Str(StrTerm::Var(renamed.clone())),
                Sort::Num => Term::Num(NumTerm::Var(renamed.clone())),
            };
            // renamed is globally fresh, so plain replacement cannot capture
            let body = subst_rec(body, var, &term, &BTreeSet::new(), fresh);
            Formula::quant(*q, renamed, *sort, rename_rec(&body, seen, fresh))
        }
    }
}

type Prefix = Vec<(Quantifier, Ident, Sort)>;

fn pull(f: Formula) -> (Prefix, Formula) {
    match f {
        Formula::Atom(_) => (Vec::new(), f),
        Formula::And(ps) => {
            let (prefix, ms) = pull_all(ps);
            (prefix, Formula::And(ms))
        }
        Formula::Or(ps) => {
            let (prefix, ms) = pull_all(ps);
            (prefix, Formula::Or(ms))
        }
        Formula::Not(g) => {
            let (prefix, m) = pull(*g);
            (flip(prefix), Formula::not(m))
        }
        Formula::Implies(a, b) => {
            let (pa, ma) = pull(*a);
            let (pb, mb) = pull(*b);
            let mut prefix = flip(pa);
            prefix.extend(pb);
            (prefix, Formula::implies(ma, mb))
        }
        // only quantifier-free Iff survives split_quantified_iff
        Formula::Iff(..) => (Vec::new(), f),
        Formula::Quant { q, var, sort, body } => {
            let (mut prefix, m) = pull(*body);
            prefix.insert(0, (q, var, sort));
            (prefix, m)
        }
    }
}

fn pull_all(ps: Vec<Formula>) -> (Prefix, Vec<Formula>) {
    let mut prefix = Vec::new();
    let mut ms = Vec::with_capacity(ps.len());
    for p in ps {
        let (pp, m) = pull(p);
        prefix.extend(pp);
        ms.push(m);
    }
    (prefix, ms)
}

fn flip(prefix: Prefix) -> Prefix {
    prefix.into_iter().map(|(q, v, s)| (q.dual(), v, s)).collect()
}

/// Prenex normal form. Quantifiers are pulled out left to right in
/// nesting order; binders are renamed only where names would clash.
pub fn to_prenex(f: &Formula) -> Formula {
    let (prefix, matrix) = pull(rename_apart(&split_quantified_iff(f)));
    prefix
        .into_iter()
        .rev()
        .fold(matrix, |acc, (q, v, s)| Formula::quant(q, v, s, acc))
}

pub fn expand_mulconst_num(t: &NumTerm) -> NumTerm {
    match t {
        NumTerm::Lit(_) | NumTerm::Var(_) | NumTerm::Len(_) => t.clone(),
        NumTerm::Add(ps) => NumTerm::add(ps.iter().map(expand_mulconst_num)),
        NumTerm::MulConst(k, a) => {
            let a = expand_mulconst_num(a);
            NumTerm::add((0..*k).map(|_| a.clone()))
        }
    }
}

/// Rewrites every `k * t` as the k-fold sum of `t` (`0` when k is zero).
pub fn expand_mulconst(f: &Formula) -> Formula {
    let n = expand_mulconst_num;
    match f {
        Formula::Atom(a) => Formula::Atom(match a {
            Atom::StrEq(..) => a.clone(),
            Atom::NumEq(x, y) => Atom::NumEq(n(x), n(y)),
            Atom::NumLt(x, y) => Atom::NumLt(n(x), n(y)),
            Atom::NumStr(x, s) => Atom::NumStr(n(x), s.clone()),
            Atom::Pi(p, x, y) => Atom::Pi(n(p), n(x), n(y)),
        }),
        Formula::And(ps) => Formula::And(ps.iter().map(expand_mulconst).collect()),
        Formula::Or(ps) => Formula::Or(ps.iter().map(expand_mulconst).collect()),
        Formula::Not(g) => Formula::not(expand_mulconst(g)),
        Formula::Implies(a, b) => Formula::implies(expand_mulconst(a), expand_mulconst(b)),
        Formula::Iff(a, b) => Formula::iff(expand_mulconst(a), expand_mulconst(b)),
        Formula::Quant { q, var, sort, body } => {
            Formula::quant(*q, var.clone(), *sort, expand_mulconst(body))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{alpha_eq, is_quantifier_free};
    use crate::word::Word;

    fn p(x: &str, y: &str) -> Formula {
        Formula::num_lt(NumTerm::var(x), NumTerm::var(y))
    }

    fn is_prenex(f: &Formula) -> bool {
        match f {
            Formula::Quant { body, .. } => is_prenex(body),
            other => is_quantifier_free(other),
        }
    }

    #[test]
    fn substitute_literal() {
        let f = Formula::num_eq(NumTerm::var("x"), NumTerm::lit(1u32));
        let g = substitute(&f, &"x".into(), &Term::Num(NumTerm::lit(1u32))).unwrap();
        assert_eq!(g, Formula::num_eq(NumTerm::lit(1u32), NumTerm::lit(1u32)));

        let f = Formula::str_eq(StrTerm::var("X"), StrTerm::epsilon());
        let zero = StrTerm::lit(Word::new("0").unwrap());
        let g = substitute(&f, &"X".into(), &Term::Str(zero.clone())).unwrap();
        assert_eq!(g, Formula::str_eq(zero, StrTerm::epsilon()));
    }

    #[test]
    fn substitute_avoids_capture() {
        let f = Formula::exists("x", Sort::Num, p("x", "y"));
        let g = substitute(&f, &"y".into(), &Term::Num(NumTerm::var("x"))).unwrap();
        match &g {
            Formula::Quant { var, body, .. } => {
                assert_ne!(var.as_str(), "x");
                assert_eq!(**body, p(var.as_str(), "x"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let fv: Vec<_> = free_vars(&g).into_iter().map(|(v, _)| v).collect();
        assert_eq!(fv, vec![Ident::new("x")]);
    }

    #[test]
    fn substitute_sort_mismatch() {
        let f = p("x", "y");
        let err = substitute(&f, &"x".into(), &Term::Str(StrTerm::epsilon())).unwrap_err();
        assert!(matches!(err, SubstError::SortMismatch { expected: Sort::Num, found: Sort::Str, .. }));
    }

    #[test]
    fn prenex_examples() {
        let f = Formula::not(Formula::exists("x", Sort::Num, p("x", "y")));
        assert_eq!(
            to_prenex(&f),
            Formula::forall("x", Sort::Num, Formula::not(p("x", "y")))
        );
        let f = Formula::and([Formula::exists("x", Sort::Num, p("x", "y")), p("y", "y")]);
        assert_eq!(
            to_prenex(&f),
            Formula::exists("x", Sort::Num, Formula::and([p("x", "y"), p("y", "y")]))
        );
    }

    #[test]
    fn prenex_is_idempotent_and_renames_clashes() {
        let f = Formula::and([
            Formula::exists("x", Sort::Num, p("x", "y")),
            Formula::forall("x", Sort::Num, p("y", "x")),
        ]);
        let g = to_prenex(&f);
        assert!(is_prenex(&g));
        assert_eq!(to_prenex(&g), g);
        let h = to_prenex(&Formula::iff(Formula::exists("x", Sort::Num, p("x", "y")), p("y", "y")));
        assert!(is_prenex(&h));
        assert!(alpha_eq(&to_prenex(&h), &h));
    }

    #[test]
    fn fresh_names_skip_used() {
        let f = p("n!0", "x");
        let mut fresh = FreshNames::avoiding(&f);
        assert_eq!(fresh.fresh("n").as_str(), "n!1");
        assert_eq!(fresh.fresh("n!7").as_str(), "n!2");
        let group = fresh.fresh_group(&["n", "p"]);
        assert_eq!(group, vec![Ident::new("n!3"), Ident::new("p!3")]);
    }

    #[test]
    fn mulconst_expansion() {
        let t = NumTerm::add([NumTerm::lit(2u32), NumTerm::mul_const(3, NumTerm::len(StrTerm::var("X")))]);
        match expand_mulconst_num(&t) {
            NumTerm::Add(ps) => {
                assert_eq!(ps.len(), 4);
                assert!(ps.iter().all(|p| !matches!(p, NumTerm::MulConst(..))));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(expand_mulconst_num(&NumTerm::mul_const(0, NumTerm::var("x"))), NumTerm::lit(0u32));
    }

    #[test]
    fn nnf_pushes_negation() {
        let f = Formula::not(Formula::forall("x", Sort::Num, Formula::implies(p("x", "y"), p("y", "x"))));
        let g = nnf(&f);
        assert_eq!(
            g,
            Formula::exists(
                "x",
                Sort::Num,
                Formula::and([p("x", "y"), Formula::not(p("y", "x"))])
            )
        );
    }
}
