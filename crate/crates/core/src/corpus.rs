//! Seeded random formulas for differential and round-trip testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, NumTerm, Quantifier, Sort, StrTerm};
use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TpShape {
    pub max_atoms: usize,
    pub max_vars: usize,
    /// Constants are drawn from `0..const_bound`.
    pub const_bound: u64,
}

impl Default for TpShape {
    fn default() -> Self {
        TpShape {
            max_atoms: 3,
            max_vars: 3,
            const_bound: 16,
        }
    }
}

const NUM_VARS: [&str; 3] = ["a", "b", "c"];

fn tp_term<R: Rng>(rng: &mut R, vars: &[&str], shape: &TpShape) -> NumTerm {
    let v = NumTerm::var(*vars.choose(rng).expect("nonempty"));
    match rng.gen_range(0..4) {
        0 => NumTerm::lit(rng.gen_range(0..shape.const_bound)),
        1 => NumTerm::add([v, NumTerm::lit(rng.gen_range(1..shape.const_bound.max(2)))]),
        _ => v,
    }
}

fn tp_atom<R: Rng>(rng: &mut R, vars: &[&str], shape: &TpShape, pi: bool) -> Formula {
    let mut t = || tp_term(rng, vars, shape);
    let (a, b, c) = (t(), t(), t());
    if pi {
        return Formula::pi(a, b, c);
    }
    match rng.gen_range(0..3) {
        0 => Formula::pi(a, b, c),
        1 => Formula::num_eq(a, b),
        _ => Formula::num_lt(a, b),
    }
}

fn combine<R: Rng>(rng: &mut R, mut parts: Vec<Formula>) -> Formula {
    while parts.len() > 1 {
        let i = rng.gen_range(0..parts.len() - 1);
        let (a, b) = (parts.remove(i), parts.remove(i));
        parts.insert(i, if rng.gen_bool(0.5) { Formula::and([a, b]) } else { Formula::or([a, b]) });
    }
    parts.pop().expect("at least one part")
}

/// A quantifier-free power-arithmetic formula whose first atom is a `pi`.
pub fn random_tp_formula<R: Rng>(rng: &mut R, shape: &TpShape) -> Formula {
    let nvars = rng.gen_range(1..=shape.max_vars.clamp(1, NUM_VARS.len()));
    let vars = &NUM_VARS[..nvars];
    let natoms = rng.gen_range(1..=shape.max_atoms.max(1));
    let atoms = (0..natoms)
        .map(|k| {
            let a = tp_atom(rng, vars, shape, k == 0);
            if rng.gen_bool(0.3) {
                Formula::not(a)
            } else {
                a
            }
        })
        .collect();
    combine(rng, atoms)
}

pub fn tp_corpus(seed: u64, count: usize, shape: &TpShape) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_tp_formula(&mut rng, shape)).collect()
}

const STR_NAMES: [&str; 3] = ["S", "T", "U"];
const NUM_NAMES: [&str; 3] = ["i", "j", "k"];

struct Gen<'r, R> {
    rng: &'r mut R,
    /// Which arithmetic predicate this formula may use.
    pi: bool,
}

impl<R: Rng> Gen<'_, R> {
    fn word(&mut self) -> Word {
        let len = self.rng.gen_range(0..4);
        let bits: String = (0..len).map(|_| if self.rng.gen_bool(0.5) { '1' } else { '0' }).collect();
        Word::new(&bits).expect("binary")
    }

    fn str_term(&mut self, depth: usize) -> StrTerm {
        match self.rng.gen_range(0..if depth == 0 { 2 } else { 3 }) {
            0 => StrTerm::var(*STR_NAMES.choose(self.rng).expect("names")),
            1 => StrTerm::lit(self.word()),
            _ => {
                let n = self.rng.gen_range(2..4);
                StrTerm::concat((0..n).map(|_| self.str_term(depth - 1)).collect::<Vec<_>>())
            }
        }
    }

    fn num_term(&mut self, depth: usize) -> NumTerm {
        match self.rng.gen_range(0..if depth == 0 { 2 } else { 5 }) {
            0 => NumTerm::var(*NUM_NAMES.choose(self.rng).expect("names")),
            1 => NumTerm::lit(self.rng.gen_range(0..40u64)),
            2 => NumTerm::len(self.str_term(depth - 1)),
            3 => NumTerm::mul_const(self.rng.gen_range(0..5), self.num_term(depth - 1)),
            _ => {
                let n = self.rng.gen_range(2..4);
                NumTerm::add((0..n).map(|_| self.num_term(depth - 1)).collect::<Vec<_>>())
            }
        }
    }

    fn atom(&mut self) -> Formula {
        match self.rng.gen_range(0..4) {
            0 => Formula::str_eq(self.str_term(2), self.str_term(2)),
            1 => Formula::num_eq(self.num_term(2), self.num_term(2)),
            2 => Formula::num_lt(self.num_term(2), self.num_term(2)),
            _ if self.pi => Formula::pi(self.num_term(1), self.num_term(1), self.num_term(1)),
            _ => Formula::numstr(self.num_term(1), self.str_term(2)),
        }
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth <= 1 {
            return self.atom();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => self.atom(),
            1 => Formula::not(self.formula(d)),
            2 => {
                let n = self.rng.gen_range(0..4);
                Formula::and((0..n).map(|_| self.formula(d)).collect::<Vec<_>>())
            }
            3 => {
                let n = self.rng.gen_range(0..4);
                Formula::or((0..n).map(|_| self.formula(d)).collect::<Vec<_>>())
            }
            4 => Formula::implies(self.formula(d), self.formula(d)),
            5 => Formula::iff(self.formula(d), self.formula(d)),
            _ => {
                let q = if self.rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall };
                let (name, sort) = if self.rng.gen_bool(0.5) {
                    (*STR_NAMES.choose(self.rng).expect("names"), Sort::Str)
                } else {
                    (*NUM_NAMES.choose(self.rng).expect("names"), Sort::Num)
                };
                Formula::quant(q, name, sort, self.formula(d))
            }
        }
    }
}

/// A well-sorted formula of at most `max_depth` connective levels, using
/// either `pi` or `numstr` but not both.
pub fn random_formula<R: Rng>(rng: &mut R, max_depth: usize) -> Formula {
    let pi = rng.gen_bool(0.3);
    let depth = rng.gen_range(1..=max_depth.max(1));
    Gen { rng, pi }.formula(depth)
}

pub fn formula_corpus(seed: u64, count: usize, max_depth: usize) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_formula(&mut rng, max_depth)).collect()
}
