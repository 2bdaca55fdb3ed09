//! Formula to slot IR, under either evaluation strategy.
//!
//! Quantifier domains depend on polarity: a quantifier that is
//! existential in effect (an `exists` under an even number of negations,
//! or a `forall` under an odd number) ranges over the witness domain, any
//! other over the base domain.
//!
//! The guided strategy groups existential quantifiers into blocks
//! (a universal block is searched for a counterexample), splits blocks over
//! top-level disjunctions, drops unused variables, orders the remaining
//! ones so that each can be drawn from a guard, and runs every conjunct as
//! soon as its variables are placed.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::formula::{
    has_quantifier, substitute, Atom, Formula, FreshNames, Ident, NumTerm, Quantifier, Sort, StrTerm, Term,
};
use crate::natural::Natural;

use super::ir::{Block, CAtom, DomId, Guard, Level, NExpr, Node, SExpr, Slot};
use super::{EvalError, Strategy, Universe};

pub(crate) struct Compiler {
    strategy: Strategy,
    universe: Universe,
    scope: Vec<(Ident, Sort, Slot)>,
    pub str_slots: usize,
    pub num_slots: usize,
    fresh: FreshNames,
    /// Whether the string domains are empty (restricted universe, length 0).
    base_str_empty: bool,
    witness_str_empty: bool,
}

fn domain_for(q: Quantifier, positive: bool) -> DomId {
    match (q, positive) {
        (Quantifier::Exists, true) | (Quantifier::Forall, false) => DomId::Witness,
        _ => DomId::Base,
    }
}

#[derive(Debug, Clone)]
struct Item {
    f: Formula,
    /// The block needs `f` to evaluate to this.
    want: bool,
    /// Polarity of `f` within the whole formula.
    positive: bool,
}

#[derive(Debug, Clone)]
struct BlockVar {
    name: Ident,
    sort: Sort,
    dom: DomId,
}

#[derive(Debug, Clone, Default)]
struct Conj {
    vars: Vec<BlockVar>,
    items: Vec<Item>,
}

impl Compiler {
    pub fn new(
        root: &Formula,
        strategy: Strategy,
        universe: Universe,
        base_str_empty: bool,
        witness_str_empty: bool,
    ) -> Self {
        Compiler {
            strategy,
            universe,
            scope: Vec::new(),
            str_slots: 0,
            num_slots: 0,
            fresh: FreshNames::avoiding(root),
            base_str_empty,
            witness_str_empty,
        }
    }

    pub fn bind(&mut self, name: &Ident, sort: Sort) -> Slot {
        let slot = match sort {
            Sort::Str => {
                self.str_slots += 1;
                self.str_slots - 1
            }
            Sort::Num => {
                self.num_slots += 1;
                self.num_slots - 1
            }
        };
        self.scope.push((name.clone(), sort, slot));
        self.fresh.avoid(name);
        slot
    }

    fn lookup(&self, name: &Ident, sort: Sort) -> Result<Slot, EvalError> {
        match self.scope.iter().rev().find(|(v, _, _)| v == name) {
            Some((_, s, slot)) if *s == sort => Ok(*slot),
            Some(_) => Err(EvalError::IllSorted(name.clone())),
            None => Err(EvalError::UnboundVariable(name.clone())),
        }
    }

    fn restricted(&self) -> bool {
        self.universe == Universe::RestrictedB
    }

    fn str_term(&self, t: &StrTerm) -> Result<SExpr, EvalError> {
        match t {
            StrTerm::Lit(w) => {
                if self.restricted() {
                    if w.is_empty() {
                        return Err(EvalError::UnsupportedInModelB("the empty string".into()));
                    }
                    if !w.is_canonical_numeral() {
                        return Err(EvalError::UnsupportedInModelB(format!("the literal \"{w}\"")));
                    }
                }
                Ok(SExpr::Lit(w.as_bytes().to_vec()))
            }
            StrTerm::Var(v) => Ok(SExpr::Var(self.lookup(v, Sort::Str)?)),
            StrTerm::Concat(ps) => {
                if self.restricted() {
                    return Err(EvalError::UnsupportedInModelB("concatenation".into()));
                }
                Ok(SExpr::Concat(ps.iter().map(|p| self.str_term(p)).collect::<Result<_, _>>()?))
            }
        }
    }

    fn num_term<N: Natural>(&self, t: &NumTerm) -> Result<NExpr<N>, EvalError> {
        match t {
            NumTerm::Lit(n) => Ok(NExpr::Lit(N::from_biguint(n).ok_or(EvalError::Overflow)?)),
            NumTerm::Var(v) => Ok(NExpr::Var(self.lookup(v, Sort::Num)?)),
            NumTerm::Len(s) => Ok(NExpr::Len(self.str_term(s)?)),
            NumTerm::Add(ps) => Ok(NExpr::Add(ps.iter().map(|p| self.num_term(p)).collect::<Result<_, _>>()?)),
            NumTerm::MulConst(k, a) => Ok(NExpr::Mul(
                N::from_u64(*k).ok_or(EvalError::Overflow)?,
                Box::new(self.num_term(a)?),
            )),
        }
    }

    fn atom<N: Natural>(&self, a: &Atom) -> Result<CAtom<N>, EvalError> {
        Ok(match a {
            Atom::StrEq(x, y) => CAtom::StrEq(self.str_term(x)?, self.str_term(y)?),
            Atom::NumEq(x, y) => CAtom::NumEq(self.num_term(x)?, self.num_term(y)?),
            Atom::NumLt(x, y) => CAtom::NumLt(self.num_term(x)?, self.num_term(y)?),
            Atom::NumStr(n, s) => CAtom::NumStr(self.num_term(n)?, self.str_term(s)?),
            Atom::Pi(p, x, y) => CAtom::Pi(self.num_term(p)?, self.num_term(x)?, self.num_term(y)?),
        })
    }

    pub fn formula<N: Natural>(&mut self, f: &Formula, positive: bool) -> Result<Node<N>, EvalError> {
        Ok(match f {
            Formula::Atom(a) => Node::Atom(self.atom(a)?),
            Formula::And(ps) => Node::And(ps.iter().map(|p| self.formula(p, positive)).collect::<Result<_, _>>()?),
            Formula::Or(ps) => Node::Or(ps.iter().map(|p| self.formula(p, positive)).collect::<Result<_, _>>()?),
            Formula::Not(g) => Node::Not(Box::new(self.formula(g, !positive)?)),
            Formula::Implies(a, b) => Node::Or(vec![
                Node::Not(Box::new(self.formula(a, !positive)?)),
                self.formula(b, positive)?,
            ]),
            Formula::Iff(a, b) if has_quantifier(a) || has_quantifier(b) => Node::And(vec![
                Node::Or(vec![
                    Node::Not(Box::new(self.formula(a, !positive)?)),
                    self.formula(b, positive)?,
                ]),
                Node::Or(vec![
                    self.formula(a, positive)?,
                    Node::Not(Box::new(self.formula(b, !positive)?)),
                ]),
            ]),
            Formula::Iff(a, b) => Node::Iff(
                Box::new(self.formula(a, positive)?),
                Box::new(self.formula(b, positive)?),
            ),
            Formula::Quant { q, var, sort, body } => match self.strategy {
                Strategy::Literal => {
                    let depth = self.scope.len();
                    let slot = self.bind(var, *sort);
                    let body = self.formula(body, positive);
                    self.scope.truncate(depth);
                    Node::Quant {
                        exists: *q == Quantifier::Exists,
                        sort: *sort,
                        slot,
                        dom: domain_for(*q, positive),
                        body: Box::new(body?),
                    }
                }
                Strategy::Guided => {
                    let want = *q == Quantifier::Exists;
                    let node = self.guided_block(f, want, positive)?;
                    if want {
                        node
                    } else {
                        Node::Not(Box::new(node))
                    }
                }
            },
        })
    }

    fn str_empty(&self, dom: DomId) -> bool {
        match dom {
            DomId::Base => self.base_str_empty,
            DomId::Witness => self.witness_str_empty,
        }
    }

    /// Whether `f` read with requirement `want` is an existential binder.
    fn absorbable(f: &Formula, want: bool) -> bool {
        matches!(f, Formula::Quant { q, .. } if (*q == Quantifier::Exists) == want)
    }

    fn absorb(&mut self, f: &Formula, positive: bool, taken: &[BlockVar]) -> (BlockVar, Formula) {
        let Formula::Quant { q, var, sort, body } = f else {
            unreachable!("absorb is only called on binders")
        };
        let clash = taken.iter().any(|b| &b.name == var) || self.scope.iter().any(|(v, _, _)| v == var);
        let (name, body) = if clash {
            let renamed = self.fresh.fresh(var.as_str());
            let term = match sort {
                Sort::Str => Term::Str(StrTerm::Var(renamed.clone())),
                Sort::Num => Term::Num(NumTerm::Var(renamed.clone())),
            };
            let body = substitute(body, var, &term).expect("renaming keeps sorts");
            (renamed, body)
        } else {
            self.fresh.avoid(var);
            (var.clone(), (**body).clone())
        };
        (
            BlockVar {
                name,
                sort: *sort,
                dom: domain_for(*q, positive),
            },
            body,
        )
    }

    /// Splits `f` (required to be `want`) into disjoint alternatives,
    /// peeling existential binders on the way.
    fn split(&mut self, f: &Formula, want: bool, positive: bool, taken: &mut Vec<BlockVar>) -> Vec<Conj> {
        match f {
            Formula::Not(g) => self.split(g, !want, !positive, taken),
            Formula::Or(ps) if want => ps.iter().flat_map(|p| self.split(p, true, positive, taken)).collect(),
            Formula::And(ps) if !want => ps.iter().flat_map(|p| self.split(p, false, positive, taken)).collect(),
            Formula::Implies(a, b) if want => {
                let mut out = self.split(a, false, !positive, taken);
                out.extend(self.split(b, true, positive, taken));
                out
            }
            _ if Self::absorbable(f, want) => {
                let (bv, body) = self.absorb(f, positive, taken);
                taken.push(bv.clone());
                let mut out = self.split(&body, want, positive, taken);
                for c in &mut out {
                    c.vars.insert(0, bv.clone());
                }
                out
            }
            _ => {
                let mut c = Conj::default();
                self.conj(f, want, positive, &mut c, taken);
                vec![c]
            }
        }
    }

    fn conj(&mut self, f: &Formula, want: bool, positive: bool, c: &mut Conj, taken: &mut Vec<BlockVar>) {
        match f {
            Formula::Not(g) => self.conj(g, !want, !positive, c, taken),
            Formula::And(ps) if want => ps.iter().for_each(|p| self.conj(p, true, positive, c, taken)),
            Formula::Or(ps) if !want => ps.iter().for_each(|p| self.conj(p, false, positive, c, taken)),
            Formula::Implies(a, b) if !want => {
                self.conj(a, true, !positive, c, taken);
                self.conj(b, false, positive, c, taken);
            }
            _ if Self::absorbable(f, want) => {
                let (bv, body) = self.absorb(f, positive, taken);
                taken.push(bv.clone());
                c.vars.push(bv);
                self.conj(&body, want, positive, c, taken);
            }
            _ => c.items.push(Item {
                f: f.clone(),
                want,
                positive,
            }),
        }
    }

    /// Compiles `f`, required to be `want`, as a disjunction of planned
    /// existential blocks. `f` must be a binder.
    fn guided_block<N: Natural>(&mut self, f: &Formula, want: bool, positive: bool) -> Result<Node<N>, EvalError> {
        let mut taken = Vec::new();
        let alternatives = self.split(f, want, positive, &mut taken);
        let mut nodes = Vec::with_capacity(alternatives.len());
        for alt in alternatives {
            nodes.push(self.plan(alt)?);
        }
        Ok(if nodes.len() == 1 { nodes.pop().unwrap() } else { Node::Or(nodes) })
    }

    fn plan<N: Natural>(&mut self, conj: Conj) -> Result<Node<N>, EvalError> {
        let Conj { vars, items } = conj;
        let mut used = Vec::new();
        for bv in vars {
            if items.iter().any(|it| it.f.mentions_free(&bv.name)) {
                used.push(bv);
            } else if bv.sort == Sort::Str && self.str_empty(bv.dom) {
                return Ok(Node::Const(false));
            }
        }
        let vars = used;
        let deps: Vec<Vec<usize>> = items
            .iter()
            .map(|it| (0..vars.len()).filter(|&k| it.f.mentions_free(&vars[k].name)).collect())
            .collect();

        let depth = self.scope.len();
        let slots: Vec<Slot> = vars.iter().map(|bv| self.bind(&bv.name, bv.sort)).collect();
        let result = self.plan_in_scope(&vars, &slots, &items, &deps);
        self.scope.truncate(depth);
        result
    }

    fn plan_in_scope<N: Natural>(
        &mut self,
        vars: &[BlockVar],
        slots: &[Slot],
        items: &[Item],
        deps: &[Vec<usize>],
    ) -> Result<Node<N>, EvalError> {
        let mut placed = vec![false; vars.len()];
        let mut order: Vec<(usize, Option<Guard<N>>)> = Vec::with_capacity(vars.len());
        while order.len() < vars.len() {
            let mut best: Option<(u8, usize, Option<Guard<N>>)> = None;
            for k in (0..vars.len()).filter(|&k| !placed[k]) {
                let mut guard: Option<Guard<N>> = None;
                for (it, d) in items.iter().zip(deps) {
                    if !d.contains(&k) || d.iter().any(|&j| j != k && !placed[j]) {
                        continue;
                    }
                    if let Some(g) = self.guard_for(&vars[k], it, &|name| {
                        vars.iter()
                            .position(|bv| &bv.name == name)
                            .is_some_and(|j| j != k && !placed[j])
                    })? {
                        if guard.as_ref().is_none_or(|cur| g.rank() < cur.rank()) {
                            guard = Some(g);
                        }
                    }
                }
                let rank = guard.as_ref().map_or(3, Guard::rank);
                if best.as_ref().is_none_or(|(r, _, _)| rank < *r) {
                    best = Some((rank, k, guard));
                }
            }
            let (_, k, guard) = best.expect("an unplaced variable remains");
            placed[k] = true;
            order.push((k, guard));
        }

        let position: Vec<usize> = {
            let mut pos = vec![0; vars.len()];
            for (level, (k, _)) in order.iter().enumerate() {
                pos[*k] = level;
            }
            pos
        };
        let mut pre = Vec::new();
        let mut checks: Vec<Vec<Node<N>>> = vec![Vec::new(); vars.len()];
        for (it, d) in items.iter().zip(deps) {
            let node = self.formula(&it.f, it.positive)?;
            let node = if it.want { node } else { Node::Not(Box::new(node)) };
            match d.iter().map(|&k| position[k]).max() {
                None => pre.push(node),
                Some(level) => checks[level].push(node),
            }
        }
        let levels = order
            .into_iter()
            .zip(checks)
            .map(|((k, guard), checks)| Level {
                sort: vars[k].sort,
                slot: slots[k],
                dom: vars[k].dom,
                guard,
                checks,
            })
            .collect();
        Ok(Node::Block(Box::new(Block { pre, levels })))
    }

    /// A candidate generator for `bv` from `item`, provided every other
    /// variable it reads is known (`unknown` names the block variables not
    /// yet placed).
    fn guard_for<N: Natural>(
        &self,
        bv: &BlockVar,
        item: &Item,
        unknown: &dyn Fn(&Ident) -> bool,
    ) -> Result<Option<Guard<N>>, EvalError> {
        match &item.f {
            Formula::Atom(a) if item.want => self.atom_guard(bv, a),
            Formula::Not(g) => self.guard_for(
                bv,
                &Item {
                    f: (**g).clone(),
                    want: !item.want,
                    positive: !item.positive,
                },
                unknown,
            ),
            Formula::And(ps) if item.want => self.best_guard(bv, ps, true, item.positive, unknown),
            Formula::Or(ps) if !item.want => self.best_guard(bv, ps, false, item.positive, unknown),
            Formula::Or(ps) if item.want => self.union_guard(bv, ps, true, item.positive, unknown),
            Formula::And(ps) if !item.want => self.union_guard(bv, ps, false, item.positive, unknown),
            _ => Ok(None),
        }
    }

    fn usable(bv: &BlockVar, f: &Formula, unknown: &dyn Fn(&Ident) -> bool) -> bool {
        let mut ok = f.mentions_free(&bv.name);
        if ok {
            crate::formula::free_vars(f).iter().for_each(|(v, _)| ok &= !unknown(v));
        }
        ok
    }

    fn best_guard<N: Natural>(
        &self,
        bv: &BlockVar,
        parts: &[Formula],
        want: bool,
        positive: bool,
        unknown: &dyn Fn(&Ident) -> bool,
    ) -> Result<Option<Guard<N>>, EvalError> {
        let mut best: Option<Guard<N>> = None;
        for p in parts.iter().filter(|p| Self::usable(bv, p, unknown)) {
            let item = Item {
                f: p.clone(),
                want,
                positive,
            };
            if let Some(g) = self.guard_for(bv, &item, unknown)? {
                if best.as_ref().is_none_or(|b| g.rank() < b.rank()) {
                    best = Some(g);
                }
            }
        }
        Ok(best)
    }

    fn union_guard<N: Natural>(
        &self,
        bv: &BlockVar,
        alternatives: &[Formula],
        want: bool,
        positive: bool,
        unknown: &dyn Fn(&Ident) -> bool,
    ) -> Result<Option<Guard<N>>, EvalError> {
        if alternatives.is_empty() {
            return Ok(None);
        }
        let mut gs = Vec::with_capacity(alternatives.len());
        for alt in alternatives {
            if !Self::usable(bv, alt, unknown) {
                return Ok(None);
            }
            let item = Item {
                f: alt.clone(),
                want,
                positive,
            };
            match self.guard_for(bv, &item, unknown)? {
                Some(g) => gs.push(g),
                None => return Ok(None),
            }
        }
        Ok(Some(Guard::Union(gs)))
    }

    fn atom_guard<N: Natural>(&self, bv: &BlockVar, a: &Atom) -> Result<Option<Guard<N>>, EvalError> {
        let v = &bv.name;
        let is_v = |t: &NumTerm| matches!(t, NumTerm::Var(x) if x == v);
        match (bv.sort, a) {
            (Sort::Num, Atom::NumEq(l, r)) => self.linear_guard(v, false, l, r),
            (Sort::Str, Atom::NumEq(l, r)) => self.linear_guard(v, true, l, r),
            (Sort::Num, Atom::NumStr(n, s)) if is_v(n) && !s.mentions(v) => {
                Ok(Some(Guard::NumOfStr(self.str_term(s)?)))
            }
            (Sort::Num, Atom::Pi(p, x, y)) => {
                let others = |a: &NumTerm, b: &NumTerm| !a.mentions(v) && !b.mentions(v);
                Ok(if is_v(p) && others(x, y) {
                    Some(Guard::PiMul(self.num_term(x)?, self.num_term(y)?))
                } else if is_v(x) && others(p, y) {
                    Some(Guard::PiDiv(self.num_term(p)?, self.num_term(y)?))
                } else if is_v(y) && others(p, x) {
                    Some(Guard::PiLog(self.num_term(p)?, self.num_term(x)?))
                } else {
                    None
                })
            }
            (Sort::Str, Atom::NumStr(n, StrTerm::Var(x))) if x == v && !n.mentions(v) => {
                Ok(Some(Guard::RepOf(self.num_term(n)?)))
            }
            (Sort::Str, Atom::StrEq(l, r)) => {
                if let Some(parts) = commuting_with(v, l, r) {
                    let parts = parts.iter().map(|p| self.str_term(p)).collect::<Result<Vec<_>, _>>()?;
                    return Ok(Some(Guard::Commutes(parts)));
                }
                for (side, other) in [(l, r), (r, l)] {
                    if other.mentions(v) {
                        continue;
                    }
                    let parts: &[StrTerm] = match side {
                        StrTerm::Concat(ps) => ps,
                        single => std::slice::from_ref(single),
                    };
                    let hits: Vec<usize> = (0..parts.len()).filter(|&i| parts[i].mentions(v)).collect();
                    if let [i] = hits.as_slice() {
                        if matches!(&parts[*i], StrTerm::Var(x) if x == v) {
                            let compile = |ps: &[StrTerm]| ps.iter().map(|p| self.str_term(p)).collect::<Result<Vec<_>, _>>();
                            return Ok(Some(Guard::Slice {
                                whole: self.str_term(other)?,
                                prefix: compile(&parts[..*i])?,
                                suffix: compile(&parts[*i + 1..])?,
                            }));
                        }
                    }
                }
                Ok(None)
            }
            _ => Ok(None),
        }
    }

    /// `l = r` read as `coeff * u + same = other`, with `u` the variable or
    /// (for strings) its length occurring as exactly one summand.
    fn linear_guard<N: Natural>(
        &self,
        v: &Ident,
        len_of: bool,
        l: &NumTerm,
        r: &NumTerm,
    ) -> Result<Option<Guard<N>>, EvalError> {
        let (ls, rs) = (summands(l), summands(r));
        let is_unknown = |t: &NumTerm| match t {
            NumTerm::Var(x) => !len_of && x == v,
            NumTerm::Len(s) => len_of && matches!(&**s, StrTerm::Var(x) if x == v),
            _ => false,
        };
        let mut hit = None;
        for (side, list) in [(0, &ls), (1, &rs)] {
            for (i, (c, t)) in list.iter().enumerate() {
                if t.mentions(v) {
                    if hit.is_some() || !is_unknown(t) || c.is_zero() {
                        return Ok(None);
                    }
                    hit = Some((side, i, c.clone()));
                }
            }
        }
        let Some((side, i, coeff)) = hit else {
            return Ok(None);
        };
        let (with, without) = if side == 0 { (&ls, &rs) } else { (&rs, &ls) };
        let compile = |list: &[(BigUint, &NumTerm)]| -> Result<Vec<NExpr<N>>, EvalError> {
            list.iter()
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, t)| {
                    let e = self.num_term(t)?;
                    Ok(if c.is_one() {
                        e
                    } else {
                        NExpr::Mul(N::from_biguint(c).ok_or(EvalError::Overflow)?, Box::new(e))
                    })
                })
                .collect()
        };
        let same: Vec<(BigUint, &NumTerm)> = with
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let same = compile(&same)?;
        let other = compile(without)?;
        let coeff = match N::from_biguint(&coeff) {
            Some(c) => c,
            None => return Ok(None),
        };
        if !len_of && coeff.is_one() && same.is_empty() && other.len() == 1 {
            return Ok(Some(Guard::NumIs(other.into_iter().next().unwrap())));
        }
        Ok(Some(Guard::Linear {
            len_of,
            coeff,
            same,
            other,
        }))
    }
}

fn summands(t: &NumTerm) -> Vec<(BigUint, &NumTerm)> {
    fn go<'a>(t: &'a NumTerm, mult: BigUint, out: &mut Vec<(BigUint, &'a NumTerm)>) {
        match t {
            NumTerm::Add(ps) => ps.iter().for_each(|p| go(p, mult.clone(), out)),
            NumTerm::MulConst(k, a) => go(a, mult * BigUint::from(*k), out),
            other => out.push((mult, other)),
        }
    }
    let mut out = Vec::new();
    go(t, BigUint::one(), &mut out);
    out
}

/// The parts of `w` when `l = r` has the shape `w v = v w` (either way
/// round) with `v` absent from `w`.
fn commuting_with<'a>(v: &Ident, l: &'a StrTerm, r: &'a StrTerm) -> Option<&'a [StrTerm]> {
    let (StrTerm::Concat(ls), StrTerm::Concat(rs)) = (l, r) else {
        return None;
    };
    let is_v = |t: &StrTerm| matches!(t, StrTerm::Var(x) if x == v);
    let n = ls.len();
    if n < 2 || rs.len() != n {
        return None;
    }
    let (w, tail) = if is_v(&ls[n - 1]) && is_v(&rs[0]) {
        (&ls[..n - 1], &rs[1..])
    } else if is_v(&ls[0]) && is_v(&rs[n - 1]) {
        (&ls[1..], &rs[..n - 1])
    } else {
        return None;
    };
    (w == tail && !w.iter().any(|p| p.mentions(v))).then_some(w)
}
