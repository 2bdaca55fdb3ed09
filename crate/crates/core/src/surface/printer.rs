use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use crate::formula::{Atom, Formula, Ident, NumTerm, Quantifier, Sort, StrTerm};

/// Free variables whose sort the parser could not recover from context:
/// those only ever compared, directly, with other such variables.
fn needs_annotation(f: &Formula) -> HashSet<Ident> {
    #[derive(Default)]
    struct Classes {
        parent: HashMap<Ident, Ident>,
        anchored: HashSet<Ident>,
    }
    impl Classes {
        fn find(&mut self, v: &Ident) -> Ident {
            let p = self.parent.entry(v.clone()).or_insert_with(|| v.clone()).clone();
            if &p == v {
                return p;
            }
            let r = self.find(&p);
            self.parent.insert(v.clone(), r.clone());
            r
        }
        fn union(&mut self, a: &Ident, b: &Ident) {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra != rb {
                if self.anchored.contains(&rb) {
                    self.anchored.insert(ra.clone());
                }
                self.parent.insert(rb, ra);
            }
        }
        fn anchor(&mut self, v: &Ident) {
            let r = self.find(v);
            self.anchored.insert(r);
        }
    }

    fn walk(f: &Formula, bound: &mut Vec<Ident>, c: &mut Classes) {
        let free = |v: &Ident, bound: &Vec<Ident>| !bound.contains(v);
        match f {
            Formula::Atom(a) => {
                let pair = match a {
                    Atom::StrEq(StrTerm::Var(x), StrTerm::Var(y)) => Some((x, y)),
                    Atom::NumEq(NumTerm::Var(x), NumTerm::Var(y)) => Some((x, y)),
                    _ => None,
                };
                match pair {
                    Some((x, y)) if free(x, bound) && free(y, bound) => {
                        c.find(x);
                        c.union(x, y);
                    }
                    _ => a.for_each_var(&mut |v, _| {
                        if free(v, bound) {
                            c.anchor(v);
                        }
                    }),
                }
            }
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| walk(p, bound, c)),
            Formula::Not(g) => walk(g, bound, c),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                walk(a, bound, c);
                walk(b, bound, c);
            }
            Formula::Quant { var, body, .. } => {
                bound.push(var.clone());
                walk(body, bound, c);
                bound.pop();
            }
        }
    }

    let mut classes = Classes::default();
    walk(f, &mut Vec::new(), &mut classes);
    let names: Vec<Ident> = classes.parent.keys().cloned().collect();
    names
        .into_iter()
        .filter(|v| {
            let r = classes.find(v);
            !classes.anchored.contains(&r)
        })
        .collect()
}

struct Printer {
    out: String,
    pending: HashSet<Ident>,
    bound: Vec<Ident>,
}

impl Printer {
    fn var(&mut self, v: &Ident, sort: Sort) {
        if !self.bound.contains(v) && self.pending.remove(v) {
            let _ = write!(self.out, "(as {v} {sort})");
        } else {
            self.out.push_str(v.as_str());
        }
    }

    fn list<T>(&mut self, head: &str, items: &[T], mut each: impl FnMut(&mut Self, &T)) {
        self.out.push('(');
        self.out.push_str(head);
        for item in items {
            self.out.push(' ');
            each(self, item);
        }
        self.out.push(')');
    }

    fn str_term(&mut self, t: &StrTerm) {
        match t {
            StrTerm::Lit(w) if w.is_empty() => self.out.push_str("epsilon"),
            StrTerm::Lit(w) => {
                let _ = write!(self.out, "\"{w}\"");
            }
            StrTerm::Var(v) => self.var(v, Sort::Str),
            StrTerm::Concat(ps) => self.list("concat", ps, Self::str_term),
        }
    }

    fn num_term(&mut self, t: &NumTerm) {
        match t {
            NumTerm::Lit(n) => {
                let _ = write!(self.out, "{n}");
            }
            NumTerm::Var(v) => self.var(v, Sort::Num),
            NumTerm::Len(s) => {
                self.out.push_str("(len ");
                self.str_term(s);
                self.out.push(')');
            }
            NumTerm::Add(ps) => self.list("+", ps, Self::num_term),
            NumTerm::MulConst(k, a) => {
                let _ = write!(self.out, "(* {k} ");
                self.num_term(a);
                self.out.push(')');
            }
        }
    }

    fn atom(&mut self, a: &Atom) {
        match a {
            Atom::StrEq(x, y) => {
                self.out.push_str("(= ");
                self.str_term(x);
                self.out.push(' ');
                self.str_term(y);
            }
            Atom::NumEq(x, y) | Atom::NumLt(x, y) => {
                self.out.push_str(if matches!(a, Atom::NumEq(..)) { "(= " } else { "(< " });
                self.num_term(x);
                self.out.push(' ');
                self.num_term(y);
            }
            Atom::NumStr(n, s) => {
                self.out.push_str("(numstr ");
                self.num_term(n);
                self.out.push(' ');
                self.str_term(s);
            }
            Atom::Pi(p, x, y) => {
                self.out.push_str("(pi ");
                self.num_term(p);
                self.out.push(' ');
                self.num_term(x);
                self.out.push(' ');
                self.num_term(y);
            }
        }
        self.out.push(')');
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::Atom(a) => self.atom(a),
            Formula::And(ps) => self.list("and", ps, Self::formula),
            Formula::Or(ps) => self.list("or", ps, Self::formula),
            Formula::Not(g) => self.list("not", std::slice::from_ref(&**g), Self::formula),
            Formula::Implies(a, b) => self.list("=>", &[&**a, &**b], |p, g| p.formula(g)),
            Formula::Iff(a, b) => self.list("iff", &[&**a, &**b], |p, g| p.formula(g)),
            Formula::Quant { q, var, sort, body } => {
                let head = match q {
                    Quantifier::Exists => "exists",
                    Quantifier::Forall => "forall",
                };
                let _ = write!(self.out, "({head} (({var} {sort})) ");
                self.bound.push(var.clone());
                self.formula(body);
                self.bound.pop();
                self.out.push(')');
            }
        }
    }
}

/// Single-line, deterministic rendering that [`super::parse`] reads back.
pub fn print(f: &Formula) -> String {
    let mut p = Printer {
        out: String::new(),
        pending: needs_annotation(f),
        bound: Vec::new(),
    };
    p.formula(f);
    p.out
}

pub(super) fn print_str_term(t: &StrTerm) -> String {
    let mut p = Printer {
        out: String::new(),
        pending: HashSet::new(),
        bound: Vec::new(),
    };
    p.str_term(t);
    p.out
}

pub(super) fn print_num_term(t: &NumTerm) -> String {
    let mut p = Printer {
        out: String::new(),
        pending: HashSet::new(),
        bound: Vec::new(),
    };
    p.num_term(t);
    p.out
}
