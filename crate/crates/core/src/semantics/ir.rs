//! Slot-resolved formulas and their evaluation.

use std::borrow::Cow;

use crate::formula::Sort;
use crate::natural::Natural;

use super::domain::{codes, write_word, Domain};
use super::primitives::{numeral_value, pi_holds_exact, representations};
use super::EvalError;

pub(crate) type Slot = usize;

#[derive(Debug, Clone)]
pub(crate) enum SExpr {
    Lit(Vec<u8>),
    Var(Slot),
    Concat(Vec<SExpr>),
}

#[derive(Debug, Clone)]
pub(crate) enum NExpr<N> {
    Lit(N),
    Var(Slot),
    Len(SExpr),
    Add(Vec<NExpr<N>>),
    Mul(N, Box<NExpr<N>>),
}

#[derive(Debug, Clone)]
pub(crate) enum CAtom<N> {
    StrEq(SExpr, SExpr),
    NumEq(NExpr<N>, NExpr<N>),
    NumLt(NExpr<N>, NExpr<N>),
    NumStr(NExpr<N>, SExpr),
    Pi(NExpr<N>, NExpr<N>, NExpr<N>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DomId {
    Base,
    Witness,
}

#[derive(Debug, Clone)]
pub(crate) enum Node<N> {
    Const(bool),
    Atom(CAtom<N>),
    And(Vec<Node<N>>),
    Or(Vec<Node<N>>),
    Not(Box<Node<N>>),
    Iff(Box<Node<N>>, Box<Node<N>>),
    Quant {
        exists: bool,
        sort: Sort,
        slot: Slot,
        dom: DomId,
        body: Box<Node<N>>,
    },
    Block(Box<Block<N>>),
}

/// An existential block searched variable by variable. Each level draws
/// candidates from its guard (or the whole domain) and runs the checks
/// whose variables are all placed by then.
#[derive(Debug, Clone)]
pub(crate) struct Block<N> {
    pub pre: Vec<Node<N>>,
    pub levels: Vec<Level<N>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Level<N> {
    pub sort: Sort,
    pub slot: Slot,
    pub dom: DomId,
    pub guard: Option<Guard<N>>,
    pub checks: Vec<Node<N>>,
}

/// Candidate generators. Every guard yields a superset of the values that
/// can satisfy the part it was derived from.
#[derive(Debug, Clone)]
pub(crate) enum Guard<N> {
    /// `v = t`
    NumIs(NExpr<N>),
    /// `v = t` for a string variable, with `t` given as the part of a known
    /// word between a known prefix and suffix.
    Slice {
        whole: SExpr,
        prefix: Vec<SExpr>,
        suffix: Vec<SExpr>,
    },
    /// `numstr(v, s)`
    NumOfStr(SExpr),
    /// `coeff * u + same = other` where `u` is `v` or `len(v)`.
    Linear {
        len_of: bool,
        coeff: N,
        same: Vec<NExpr<N>>,
        other: Vec<NExpr<N>>,
    },
    /// `pi(v, a, b)`
    PiMul(NExpr<N>, NExpr<N>),
    /// `pi(p, v, b)`
    PiDiv(NExpr<N>, NExpr<N>),
    /// `pi(p, x, v)`
    PiLog(NExpr<N>, NExpr<N>),
    /// `numstr(t, v)`
    RepOf(NExpr<N>),
    /// `w v = v w`: `v` is a power of the primitive root of `w`.
    Commutes(Vec<SExpr>),
    Union(Vec<Guard<N>>),
}

impl<N> Guard<N> {
    /// Lower is tighter: 0 yields at most one candidate, 1 a few, 2 a
    /// length slice of the domain.
    pub fn rank(&self) -> u8 {
        match self {
            Guard::Linear { len_of: true, .. } => 2,
            Guard::RepOf(_) | Guard::Commutes(_) => 1,
            Guard::Union(gs) => gs.iter().map(Guard::rank).max().unwrap_or(0).max(1),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Env<N> {
    pub strs: Vec<Vec<u8>>,
    pub nums: Vec<N>,
}

impl<N: Natural> Env<N> {
    pub fn new(str_slots: usize, num_slots: usize) -> Self {
        Env {
            strs: vec![Vec::new(); str_slots],
            nums: vec![N::zero(); num_slots],
        }
    }
}

enum Cands<N> {
    All,
    Nums(Vec<N>),
    Strs(Vec<Vec<u8>>),
    /// Every domain word of this length.
    OfLen(Option<usize>),
}

fn primitive_root(w: &[u8]) -> &[u8] {
    (1..=w.len())
        .find(|d| w.len().is_multiple_of(*d) && w.chunks(*d).all(|c| c == &w[..*d]))
        .map_or(w, |d| &w[..d])
}

pub(crate) struct Machine<N> {
    pub base: Domain<N>,
    pub witness: Domain<N>,
}

fn s_len(e: &SExpr, env: &Env<impl Natural>) -> usize {
    match e {
        SExpr::Lit(w) => w.len(),
        SExpr::Var(s) => env.strs[*s].len(),
        SExpr::Concat(ps) => ps.iter().map(|p| s_len(p, env)).sum(),
    }
}

pub(crate) fn eval_s<'e, N: Natural>(e: &'e SExpr, env: &'e Env<N>) -> Cow<'e, [u8]> {
    match e {
        SExpr::Lit(w) => Cow::Borrowed(w),
        SExpr::Var(s) => Cow::Borrowed(&env.strs[*s]),
        SExpr::Concat(ps) => {
            let mut out = Vec::with_capacity(s_len(e, env));
            for p in ps {
                out.extend_from_slice(&eval_s(p, env));
            }
            Cow::Owned(out)
        }
    }
}

fn len_as<N: Natural>(len: usize) -> Result<N, EvalError> {
    N::from_u64(len as u64).ok_or(EvalError::Overflow)
}

pub(crate) fn eval_n<N: Natural>(e: &NExpr<N>, env: &Env<N>) -> Result<N, EvalError> {
    match e {
        NExpr::Lit(n) => Ok(n.clone()),
        NExpr::Var(s) => Ok(env.nums[*s].clone()),
        NExpr::Len(s) => len_as(s_len(s, env)),
        NExpr::Add(ps) => {
            let mut acc = N::zero();
            for p in ps {
                acc = acc.checked_add(&eval_n(p, env)?).ok_or(EvalError::Overflow)?;
            }
            Ok(acc)
        }
        NExpr::Mul(k, a) => k.checked_mul(&eval_n(a, env)?).ok_or(EvalError::Overflow),
    }
}

fn sum<N: Natural>(es: &[NExpr<N>], env: &Env<N>) -> Result<N, EvalError> {
    let mut acc = N::zero();
    for e in es {
        acc = acc.checked_add(&eval_n(e, env)?).ok_or(EvalError::Overflow)?;
    }
    Ok(acc)
}

pub(crate) fn eval_atom<N: Natural>(a: &CAtom<N>, env: &Env<N>) -> Result<bool, EvalError> {
    Ok(match a {
        CAtom::StrEq(x, y) => s_len(x, env) == s_len(y, env) && eval_s(x, env) == eval_s(y, env),
        CAtom::NumEq(x, y) => eval_n(x, env)? == eval_n(y, env)?,
        CAtom::NumLt(x, y) => eval_n(x, env)? < eval_n(y, env)?,
        CAtom::NumStr(i, s) => {
            // a word whose value overflows the carrier cannot denote i
            match numeral_value::<N>(&eval_s(s, env)) {
                Some(v) => v == eval_n(i, env)?,
                None => false,
            }
        }
        CAtom::Pi(p, x, y) => {
            let (p, x, y) = (eval_n(p, env)?, eval_n(x, env)?, eval_n(y, env)?);
            pi_holds_exact(&p, &x, &y)
        }
    })
}

impl<N: Natural> Machine<N> {
    fn dom(&self, id: DomId) -> &Domain<N> {
        match id {
            DomId::Base => &self.base,
            DomId::Witness => &self.witness,
        }
    }

    pub fn eval(&self, node: &Node<N>, env: &mut Env<N>) -> Result<bool, EvalError> {
        match node {
            Node::Const(b) => Ok(*b),
            Node::Atom(a) => eval_atom(a, env),
            Node::And(ps) => {
                for p in ps {
                    if !self.eval(p, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Node::Or(ps) => {
                for p in ps {
                    if self.eval(p, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Node::Not(g) => Ok(!self.eval(g, env)?),
            Node::Iff(a, b) => Ok(self.eval(a, env)? == self.eval(b, env)?),
            Node::Quant {
                exists,
                sort,
                slot,
                dom,
                body,
            } => {
                let dom = self.dom(*dom);
                match sort {
                    Sort::Str => {
                        let found = dom.any_str(0..=dom.max_len, &mut |len, code| {
                            write_word(&mut env.strs[*slot], len, code);
                            Ok(self.eval(body, env)? == *exists)
                        })?;
                        if found {
                            return Ok(*exists);
                        }
                    }
                    Sort::Num => {
                        for n in dom.nums() {
                            env.nums[*slot] = n;
                            if self.eval(body, env)? == *exists {
                                return Ok(*exists);
                            }
                        }
                    }
                }
                Ok(!*exists)
            }
            Node::Block(b) => {
                for p in &b.pre {
                    if !self.eval(p, env)? {
                        return Ok(false);
                    }
                }
                self.search(b, 0, env)
            }
        }
    }

    fn checks(&self, level: &Level<N>, env: &mut Env<N>) -> Result<bool, EvalError> {
        for c in &level.checks {
            if !self.eval(c, env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn search(&self, block: &Block<N>, k: usize, env: &mut Env<N>) -> Result<bool, EvalError> {
        let Some(level) = block.levels.get(k) else {
            return Ok(true);
        };
        let dom = self.dom(level.dom);
        let cands = match &level.guard {
            None => Cands::All,
            Some(g) => self.candidates(g, level.sort, dom, env)?,
        };
        match cands {
            Cands::All => match level.sort {
                Sort::Str => {
                    return self.each_len(block, k, 0..=dom.max_len, env);
                }
                Sort::Num => {
                    for n in dom.nums() {
                        env.nums[level.slot] = n;
                        if self.checks(level, env)? && self.search(block, k + 1, env)? {
                            return Ok(true);
                        }
                    }
                }
            },
            Cands::OfLen(len) => return self.each_len(block, k, len.into_iter(), env),
            Cands::Strs(ws) => {
                for w in ws {
                    if !dom.contains_str(&w) {
                        continue;
                    }
                    env.strs[level.slot] = w;
                    if self.checks(level, env)? && self.search(block, k + 1, env)? {
                        return Ok(true);
                    }
                }
            }
            Cands::Nums(ns) => {
                for n in ns {
                    if !dom.contains_num(&n) {
                        continue;
                    }
                    env.nums[level.slot] = n;
                    if self.checks(level, env)? && self.search(block, k + 1, env)? {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    fn each_len(
        &self,
        block: &Block<N>,
        k: usize,
        lens: impl Iterator<Item = usize>,
        env: &mut Env<N>,
    ) -> Result<bool, EvalError> {
        let level = &block.levels[k];
        self.dom(level.dom).any_str(lens, &mut |len, code| {
            write_word(&mut env.strs[level.slot], len, code);
            Ok(self.checks(level, env)? && self.search(block, k + 1, env)?)
        })
    }

    fn candidates(&self, guard: &Guard<N>, sort: Sort, dom: &Domain<N>, env: &Env<N>) -> Result<Cands<N>, EvalError> {
        let one = |n: Option<N>| Cands::Nums(n.into_iter().collect());
        Ok(match guard {
            Guard::NumIs(t) => match eval_n(t, env) {
                Ok(n) => one(Some(n)),
                Err(EvalError::Overflow) => one(None),
                Err(e) => return Err(e),
            },
            Guard::Slice {
                whole,
                prefix,
                suffix,
            } => {
                let whole = eval_s(whole, env);
                let pre: Vec<u8> = prefix.iter().flat_map(|p| eval_s(p, env).into_owned()).collect();
                let suf: Vec<u8> = suffix.iter().flat_map(|p| eval_s(p, env).into_owned()).collect();
                if whole.len() >= pre.len() + suf.len() && whole.starts_with(&pre) && whole.ends_with(&suf) {
                    Cands::Strs(vec![whole[pre.len()..whole.len() - suf.len()].to_vec()])
                } else {
                    Cands::Strs(Vec::new())
                }
            }
            Guard::NumOfStr(s) => one(numeral_value(&eval_s(s, env))),
            Guard::Linear {
                len_of,
                coeff,
                same,
                other,
            } => {
                let value = match (sum(other, env), sum(same, env)) {
                    (Ok(o), Ok(s)) => o
                        .checked_sub(&s)
                        .filter(|d| (d.clone() % coeff.clone()).is_zero())
                        .map(|d| d / coeff.clone()),
                    (Err(EvalError::Overflow), _) | (_, Err(EvalError::Overflow)) => None,
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                };
                if *len_of {
                    match value.and_then(|v| v.to_u64()) {
                        Some(l) if (l as usize as u64) == l => Cands::OfLen(Some(l as usize)),
                        _ => Cands::OfLen(None),
                    }
                } else {
                    one(value)
                }
            }
            Guard::PiMul(a, b) => {
                let (a, b) = (eval_n(a, env)?, eval_n(b, env)?);
                one(b.to_u64().and_then(|b| a.checked_shl_bits(b)).or_else(|| a.is_zero().then(N::zero)))
            }
            Guard::PiDiv(p, b) => {
                let (p, b) = (eval_n(p, env)?, eval_n(b, env)?);
                let v = match b.to_u64() {
                    _ if p.is_zero() => Some(N::zero()),
                    Some(b) if p.low_bits_zero(b) => Some(p.shr_bits(b)),
                    _ => None,
                };
                one(v)
            }
            Guard::PiLog(p, x) => {
                let (p, x) = (eval_n(p, env)?, eval_n(x, env)?);
                if x.is_zero() {
                    if p.is_zero() {
                        Cands::All
                    } else {
                        one(None)
                    }
                } else if p.is_zero() || !(p.clone() % x.clone()).is_zero() {
                    one(None)
                } else {
                    let q = p / x;
                    let tz = q.trailing_zeros().expect("nonzero quotient");
                    if q.bit_len() == tz + 1 {
                        one(N::from_u64(tz))
                    } else {
                        one(None)
                    }
                }
            }
            Guard::RepOf(t) => match eval_n(t, env) {
                Ok(n) => Cands::Strs(representations(&n, dom.max_len)),
                Err(EvalError::Overflow) => Cands::Strs(Vec::new()),
                Err(e) => return Err(e),
            },
            Guard::Commutes(parts) => {
                let w: Vec<u8> = parts.iter().flat_map(|p| eval_s(p, env).into_owned()).collect();
                if w.is_empty() {
                    return Ok(Cands::All);
                }
                let root = primitive_root(&w);
                let mut out = Vec::new();
                let mut cur = Vec::new();
                while cur.len() <= dom.max_len {
                    out.push(cur.clone());
                    cur.extend_from_slice(root);
                }
                Cands::Strs(out)
            }
            Guard::Union(gs) => {
                let mut nums = Vec::new();
                let mut strs = Vec::new();
                for g in gs {
                    match self.candidates(g, sort, dom, env)? {
                        Cands::All => return Ok(Cands::All),
                        Cands::Nums(ns) => nums.extend(ns),
                        Cands::Strs(ws) => strs.extend(ws),
                        Cands::OfLen(len) => {
                            for len in len.into_iter().filter(|l| *l <= dom.max_len) {
                                strs.extend(codes(len, dom.restricted).map(|code| {
                                    let mut w = Vec::new();
                                    write_word(&mut w, len, code);
                                    w
                                }));
                            }
                        }
                    }
                }
                match sort {
                    Sort::Num => {
                        nums.sort();
                        nums.dedup();
                        Cands::Nums(nums)
                    }
                    Sort::Str => {
                        strs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
                        strs.dedup();
                        Cands::Strs(strs)
                    }
                }
            }
        })
    }
}
