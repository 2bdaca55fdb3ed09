use std::collections::HashMap;

use super::lexer::{is_identifier, read_all, Sexp, Spanned, Token, RESERVED};
use super::{ParseError, SourceSpan};
use crate::formula::{Formula, Ident, NumTerm, Quantifier, Sort, StrTerm};
use crate::word::Word;

const FORMULA_HEADS: &[&str] = &[
    "=", "<", "numstr", "pi", "and", "or", "not", "=>", "iff", "exists", "forall",
];

fn expected(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| (*s).to_owned()).collect()
}

fn parse_sort(e: &Sexp) -> Option<Sort> {
    match e.symbol()? {
        "Str" => Some(Sort::Str),
        "Num" => Some(Sort::Num),
        _ => None,
    }
}

fn is_variable(name: &str) -> bool {
    is_identifier(name) && !RESERVED.contains(&name)
}

#[derive(Clone, Copy)]
enum Class {
    Known(Sort),
    Free(usize),
    Unknown,
}

/// Union-find over free variable names, used to infer their sorts before
/// the typed AST is built.
#[derive(Default)]
struct Inference {
    index: HashMap<String, usize>,
    parent: Vec<usize>,
    sort: Vec<Option<Sort>>,
    first: Vec<SourceSpan>,
}

type Scope = Vec<(String, Sort)>;

fn lookup(scope: &Scope, name: &str) -> Option<Sort> {
    scope.iter().rev().find(|(v, _)| v == name).map(|(_, s)| *s)
}

impl Inference {
    fn class(&mut self, name: &str, span: SourceSpan) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.parent.len();
        self.index.insert(name.to_owned(), i);
        self.parent.push(i);
        self.sort.push(None);
        self.first.push(span);
        i
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn resolved(&mut self, name: &str) -> Option<(Option<Sort>, SourceSpan)> {
        let i = *self.index.get(name)?;
        let r = self.find(i);
        Some((self.sort[r], self.first[i]))
    }

    fn assign(&mut self, i: usize, sort: Sort, span: SourceSpan, name: &str) -> Result<(), ParseError> {
        let r = self.find(i);
        match self.sort[r] {
            Some(s) if s != sort => Err(ParseError::new(
                span,
                format!("sort clash: {name} is used as {sort} but elsewhere as {s}"),
                vec![format!("{s} term")],
            )),
            _ => {
                self.sort[r] = Some(sort);
                Ok(())
            }
        }
    }

    fn union(&mut self, a: usize, b: usize, span: SourceSpan) -> Result<(), ParseError> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        match (self.sort[ra], self.sort[rb]) {
            (Some(x), Some(y)) if x != y => {
                return Err(ParseError::new(
                    span,
                    format!("sort clash: comparing {x} with {y}"),
                    vec![format!("{x} term")],
                ))
            }
            (None, s) | (s, None) => {
                self.sort[ra] = s;
            }
            _ => {}
        }
        self.parent[rb] = ra;
        Ok(())
    }

    fn class_of(&mut self, e: &Sexp, scope: &Scope) -> Class {
        match e {
            Sexp::Leaf(Spanned { token, span }) => match token {
                Token::Bits(_) => Class::Known(Sort::Str),
                Token::Numeral(_) => Class::Known(Sort::Num),
                Token::Symbol(s) if s == "epsilon" => Class::Known(Sort::Str),
                Token::Symbol(s) if is_variable(s) => match lookup(scope, s) {
                    Some(sort) => Class::Known(sort),
                    None => Class::Free(self.class(s, *span)),
                },
                _ => Class::Unknown,
            },
            Sexp::List(..) => match e.application() {
                Some(("concat", _)) => Class::Known(Sort::Str),
                Some(("len" | "+" | "*", _)) => Class::Known(Sort::Num),
                Some(("as", [_, sort])) => parse_sort(sort).map_or(Class::Unknown, Class::Known),
                _ => Class::Unknown,
            },
        }
    }

    fn term(&mut self, e: &Sexp, want: Option<Sort>, scope: &Scope) -> Result<(), ParseError> {
        match e {
            Sexp::Leaf(Spanned {
                token: Token::Symbol(s),
                span,
            }) if is_variable(s) && lookup(scope, s).is_none() => {
                let i = self.class(s, *span);
                if let Some(sort) = want {
                    self.assign(i, sort, *span, s)?;
                }
                Ok(())
            }
            Sexp::Leaf(_) => Ok(()),
            Sexp::List(..) => match e.application() {
                Some(("concat", args)) => args.iter().try_for_each(|a| self.term(a, Some(Sort::Str), scope)),
                Some(("len", args)) => args.iter().try_for_each(|a| self.term(a, Some(Sort::Str), scope)),
                Some(("+", args)) => args.iter().try_for_each(|a| self.term(a, Some(Sort::Num), scope)),
                Some(("*", [_, arg])) => self.term(arg, Some(Sort::Num), scope),
                Some(("as", [var, sort])) => match (var.symbol(), parse_sort(sort)) {
                    (Some(_), Some(s)) => self.term(var, Some(s), scope),
                    _ => Ok(()),
                },
                _ => Ok(()),
            },
        }
    }

    fn formula(&mut self, e: &Sexp, scope: &mut Scope) -> Result<(), ParseError> {
        let Some((head, args)) = e.application() else {
            return Ok(());
        };
        match (head, args) {
            ("=", [l, r]) => {
                let want = match (self.class_of(l, scope), self.class_of(r, scope)) {
                    (Class::Known(a), Class::Known(b)) if a != b => {
                        return Err(ParseError::new(
                            e.span(),
                            format!("sort clash: cannot compare a {a} term with a {b} term"),
                            vec![format!("{a} term")],
                        ))
                    }
                    (Class::Known(a), _) | (_, Class::Known(a)) => Some(a),
                    (Class::Free(a), Class::Free(b)) => {
                        self.union(a, b, e.span())?;
                        None
                    }
                    _ => None,
                };
                self.term(l, want, scope)?;
                self.term(r, want, scope)
            }
            ("<", _) | ("pi", _) => args.iter().try_for_each(|a| self.term(a, Some(Sort::Num), scope)),
            ("numstr", [n, s]) => {
                self.term(n, Some(Sort::Num), scope)?;
                self.term(s, Some(Sort::Str), scope)
            }
            ("and" | "or" | "not" | "=>" | "iff", _) => args.iter().try_for_each(|a| self.formula(a, scope)),
            ("exists" | "forall", [Sexp::List(binders, _), body]) => {
                let depth = scope.len();
                for b in binders {
                    if let Sexp::List(pair, _) = b {
                        if let [v, s] = pair.as_slice() {
                            if let (Some(v), Some(s)) = (v.symbol(), parse_sort(s)) {
                                scope.push((v.to_owned(), s));
                            }
                        }
                    }
                }
                let r = self.formula(body, scope);
                scope.truncate(depth);
                r
            }
            _ => Ok(()),
        }
    }
}

struct Builder {
    inference: Inference,
    scope: Scope,
}

impl Builder {
    fn var_sort(&mut self, name: &str, span: SourceSpan) -> Result<Sort, ParseError> {
        if let Some(s) = lookup(&self.scope, name) {
            return Ok(s);
        }
        match self.inference.resolved(name) {
            Some((Some(s), _)) => Ok(s),
            Some((None, first)) => Err(ParseError::new(
                first,
                format!("cannot infer the sort of free variable {name}"),
                vec![format!("(as {name} Str)"), format!("(as {name} Num)")],
            )),
            None => Err(ParseError::new(span, format!("unknown variable {name}"), vec![])),
        }
    }

    fn check_var(&mut self, name: &str, span: SourceSpan, want: Sort) -> Result<Ident, ParseError> {
        let got = self.var_sort(name, span)?;
        if got != want {
            return Err(ParseError::new(
                span,
                format!("sort clash: {name} has sort {got} but a {want} term is required here"),
                vec![format!("{want} term")],
            ));
        }
        Ok(Ident::new(name))
    }

    fn annotation(&mut self, e: &Sexp, args: &[Sexp], want: Sort) -> Result<Ident, ParseError> {
        let [var, sort] = args else {
            return Err(ParseError::new(e.span(), "malformed annotation", expected(&["(as VAR SORT)"])));
        };
        let Some(sort) = parse_sort(sort) else {
            return Err(ParseError::new(sort.span(), "expected a sort", expected(&["Str", "Num"])));
        };
        let Some(name) = var.symbol().filter(|s| is_variable(s)) else {
            return Err(ParseError::new(var.span(), "expected a variable", expected(&["identifier"])));
        };
        if sort != want {
            return Err(ParseError::new(
                e.span(),
                format!("sort clash: annotation says {sort} but a {want} term is required here"),
                vec![format!("{want} term")],
            ));
        }
        self.check_var(name, var.span(), want)
    }

    fn str_term(&mut self, e: &Sexp) -> Result<StrTerm, ParseError> {
        let clash = |what: &str| {
            ParseError::new(
                e.span(),
                format!("sort clash: expected a Str term, found {what}"),
                expected(&["string literal", "epsilon", "variable", "(concat ...)"]),
            )
        };
        match e {
            Sexp::Leaf(Spanned { token, span }) => match token {
                Token::Bits(b) => Ok(StrTerm::Lit(Word::new(b).expect("lexer checked digits"))),
                Token::Symbol(s) if s == "epsilon" => Ok(StrTerm::epsilon()),
                Token::Symbol(s) if is_variable(s) => Ok(StrTerm::Var(self.check_var(s, *span, Sort::Str)?)),
                Token::Numeral(_) => Err(clash("a numeral")),
                _ => Err(clash("a keyword")),
            },
            Sexp::List(..) => match e.application() {
                Some(("concat", args)) => {
                    let parts = args.iter().map(|a| self.str_term(a)).collect::<Result<Vec<_>, _>>()?;
                    Ok(StrTerm::concat(parts))
                }
                Some(("as", args)) => Ok(StrTerm::Var(self.annotation(e, args, Sort::Str)?)),
                Some(("len" | "+" | "*", _)) => Err(clash("a Num term")),
                _ => Err(ParseError::new(
                    e.span(),
                    "expected a Str term",
                    expected(&["string literal", "epsilon", "variable", "(concat ...)"]),
                )),
            },
        }
    }

    fn num_term(&mut self, e: &Sexp) -> Result<NumTerm, ParseError> {
        let clash = |what: &str| {
            ParseError::new(
                e.span(),
                format!("sort clash: expected a Num term, found {what}"),
                expected(&["numeral", "variable", "(len ...)", "(+ ...)", "(* ...)"]),
            )
        };
        match e {
            Sexp::Leaf(Spanned { token, span }) => match token {
                Token::Numeral(n) => Ok(NumTerm::Lit(n.clone())),
                Token::Symbol(s) if is_variable(s) => Ok(NumTerm::Var(self.check_var(s, *span, Sort::Num)?)),
                Token::Bits(_) => Err(clash("a string literal")),
                Token::Symbol(s) if s == "epsilon" => Err(clash("epsilon")),
                _ => Err(clash("a keyword")),
            },
            Sexp::List(..) => match e.application() {
                Some(("len", [arg])) => Ok(NumTerm::len(self.str_term(arg)?)),
                Some(("len", _)) => Err(ParseError::new(e.span(), "len takes one argument", expected(&["(len t)"]))),
                Some(("+", args)) => {
                    let parts = args.iter().map(|a| self.num_term(a)).collect::<Result<Vec<_>, _>>()?;
                    Ok(NumTerm::add(parts))
                }
                Some(("*", [k, arg])) => {
                    let k = match k {
                        Sexp::Leaf(Spanned {
                            token: Token::Numeral(n),
                            ..
                        }) => u64::try_from(n).map_err(|_| {
                            ParseError::new(k.span(), "multiplier is too large", expected(&["numeral below 2^64"]))
                        })?,
                        _ => {
                            return Err(ParseError::new(
                                k.span(),
                                "the multiplier must be a numeral",
                                expected(&["numeral"]),
                            ))
                        }
                    };
                    Ok(NumTerm::mul_const(k, self.num_term(arg)?))
                }
                Some(("*", _)) => Err(ParseError::new(e.span(), "malformed product", expected(&["(* k t)"]))),
                Some(("as", args)) => Ok(NumTerm::Var(self.annotation(e, args, Sort::Num)?)),
                Some(("concat", _)) => Err(clash("a Str term")),
                _ => Err(ParseError::new(
                    e.span(),
                    "expected a Num term",
                    expected(&["numeral", "variable", "(len ...)", "(+ ...)", "(* ...)"]),
                )),
            },
        }
    }

    fn arity(e: &Sexp, head: &str, args: &[Sexp], n: usize) -> Result<(), ParseError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(ParseError::new(
                e.span(),
                format!("{head} takes {n} arguments, found {}", args.len()),
                vec![format!("{n} arguments")],
            ))
        }
    }

    fn formula(&mut self, e: &Sexp) -> Result<Formula, ParseError> {
        let Some((head, args)) = e.application() else {
            return Err(ParseError::new(e.span(), "expected a formula", expected(FORMULA_HEADS)));
        };
        match head {
            "=" => {
                Self::arity(e, head, args, 2)?;
                let sort = match self.inference_class(&args[0]) {
                    Some(s) => s,
                    None => self.inference_class(&args[1]).unwrap_or(Sort::Num),
                };
                Ok(match sort {
                    Sort::Str => Formula::str_eq(self.str_term(&args[0])?, self.str_term(&args[1])?),
                    Sort::Num => Formula::num_eq(self.num_term(&args[0])?, self.num_term(&args[1])?),
                })
            }
            "<" => {
                Self::arity(e, head, args, 2)?;
                Ok(Formula::num_lt(self.num_term(&args[0])?, self.num_term(&args[1])?))
            }
            "numstr" => {
                Self::arity(e, head, args, 2)?;
                Ok(Formula::numstr(self.num_term(&args[0])?, self.str_term(&args[1])?))
            }
            "pi" => {
                Self::arity(e, head, args, 3)?;
                Ok(Formula::pi(
                    self.num_term(&args[0])?,
                    self.num_term(&args[1])?,
                    self.num_term(&args[2])?,
                ))
            }
            "and" | "or" => {
                let parts = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(if head == "and" { Formula::And(parts) } else { Formula::Or(parts) })
            }
            "not" => {
                Self::arity(e, head, args, 1)?;
                Ok(Formula::not(self.formula(&args[0])?))
            }
            "=>" | "iff" => {
                Self::arity(e, head, args, 2)?;
                let (a, b) = (self.formula(&args[0])?, self.formula(&args[1])?);
                Ok(if head == "=>" { Formula::implies(a, b) } else { Formula::iff(a, b) })
            }
            "exists" | "forall" => {
                let q = if head == "exists" { Quantifier::Exists } else { Quantifier::Forall };
                self.quantifier(e, q, args)
            }
            _ => Err(ParseError::new(
                match e {
                    Sexp::List(items, _) => items[0].span(),
                    Sexp::Leaf(_) => e.span(),
                },
                format!("unknown formula head {head:?}"),
                expected(FORMULA_HEADS),
            )),
        }
    }

    fn inference_class(&mut self, e: &Sexp) -> Option<Sort> {
        match self.inference.class_of(e, &self.scope) {
            Class::Known(s) => Some(s),
            Class::Free(i) => {
                let r = self.inference.find(i);
                self.inference.sort[r]
            }
            Class::Unknown => None,
        }
    }

    fn quantifier(&mut self, e: &Sexp, q: Quantifier, args: &[Sexp]) -> Result<Formula, ParseError> {
        let malformed = |span| {
            ParseError::new(span, "malformed binder list", expected(&["((VAR SORT) ...)"]))
        };
        let [Sexp::List(binders, bspan), body] = args else {
            return Err(ParseError::new(e.span(), "malformed quantifier", expected(&["((VAR SORT) ...) FORMULA"])));
        };
        if binders.is_empty() {
            return Err(malformed(*bspan));
        }
        let mut vars = Vec::with_capacity(binders.len());
        for b in binders {
            let Sexp::List(pair, span) = b else {
                return Err(malformed(b.span()));
            };
            let [v, s] = pair.as_slice() else {
                return Err(malformed(*span));
            };
            let Some(name) = v.symbol() else {
                return Err(ParseError::new(v.span(), "expected a variable name", expected(&["identifier"])));
            };
            if !is_variable(name) {
                return Err(ParseError::new(
                    v.span(),
                    format!("{name:?} is reserved and cannot name a variable"),
                    expected(&["identifier"]),
                ));
            }
            let Some(sort) = parse_sort(s) else {
                return Err(ParseError::new(s.span(), "expected a sort", expected(&["Str", "Num"])));
            };
            vars.push((name.to_owned(), sort));
        }
        let depth = self.scope.len();
        self.scope.extend(vars.iter().cloned());
        let body = self.formula(body);
        self.scope.truncate(depth);
        let body = body?;
        Ok(vars
            .into_iter()
            .rev()
            .fold(body, |acc, (v, s)| Formula::quant(q, Ident::new(v), s, acc)))
    }
}

pub(super) fn formula_from_sexp(e: &Sexp) -> Result<Formula, ParseError> {
    let mut inference = Inference::default();
    inference.formula(e, &mut Vec::new())?;
    Builder {
        inference,
        scope: Vec::new(),
    }
    .formula(e)
}

/// Parses exactly one formula.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let items = read_all(text)?;
    match items.as_slice() {
        [] => Err(ParseError::new(
            SourceSpan::new(text.len(), text.len()),
            "expected a formula, found end of input",
            expected(&["("]),
        )),
        [one] => formula_from_sexp(one),
        [_, extra, ..] => Err(ParseError::new(
            extra.span(),
            "unexpected input after the formula",
            expected(&["end of input"]),
        )),
    }
}

/// Parses a sequence of `(keyword NAME FORMULA)` declarations.
pub fn parse_declarations(text: &str, keyword: &str) -> Result<Vec<(String, Formula)>, ParseError> {
    let shape = || vec![format!("({keyword} NAME FORMULA)")];
    read_all(text)?
        .iter()
        .map(|item| match item.application() {
            Some((head, [name, body])) if head == keyword => {
                let name = name
                    .symbol()
                    .filter(|s| is_identifier(s))
                    .ok_or_else(|| ParseError::new(name.span(), "expected a name", expected(&["identifier"])))?;
                Ok((name.to_owned(), formula_from_sexp(body)?))
            }
            _ => Err(ParseError::new(item.span(), format!("expected a {keyword} declaration"), shape())),
        })
        .collect()
}
