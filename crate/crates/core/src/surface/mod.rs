//! S-expression concrete syntax.
//!
//! ```text
//! formula := (= t t) | (< t t) | (numstr t t) | (pi t t t)
//!          | (and F ...) | (or F ...) | (not F) | (=> F F) | (iff F F)
//!          | (exists ((v Sort) ...) F) | (forall ((v Sort) ...) F)
//! term    := "01..." | epsilon | numeral | v | (as v Sort)
//!          | (concat t ...) | (len t) | (+ t ...) | (* k t)
//! ```
//!
//! `;` starts a comment running to the end of the line. Free variables get
//! their sort from context; `(as v Sort)` settles the cases context cannot.

mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, NumTerm, StrTerm};

pub use parser::{parse, parse_declarations};
pub use printer::print;

/// Byte offsets `start..end` into the parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }

    /// One-based line and column of `start`.
    pub fn line_col(&self, text: &str) -> (usize, usize) {
        let before = &text[..self.start.min(text.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(span: SourceSpan, message: impl Into<String>, expected: Vec<String>) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        ParseError {
            span,
            message,
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at bytes {}..{}", self.message, self.span.start, self.span.end)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Display for StrTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print_str_term(self))
    }
}

impl fmt::Display for NumTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print_num_term(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{alpha_eq, Sort};
    use crate::word::Word;

    fn lit(s: &str) -> StrTerm {
        StrTerm::Lit(Word::new(s).unwrap())
    }

    #[test]
    fn parses_commuting_equation() {
        let f = parse(r#"(= (concat "0" Z) (concat Z "0"))"#).unwrap();
        let z = StrTerm::var("Z");
        assert_eq!(
            f,
            Formula::str_eq(
                StrTerm::Concat(vec![lit("0"), z.clone()]),
                StrTerm::Concat(vec![z, lit("0")])
            )
        );
    }

    #[test]
    fn parses_numstr_literal() {
        assert_eq!(
            parse(r#"(numstr 3 "11")"#).unwrap(),
            Formula::numstr(NumTerm::lit(3u32), lit("11"))
        );
    }

    #[test]
    fn sort_clash_is_an_error() {
        let err = parse(r#"(= 1 "1")"#).unwrap_err();
        assert!(err.message.contains("sort clash"), "{err}");
        assert!(err.span.end <= 9);
        let err = parse(r#"(and (< x 1) (= x "0"))"#).unwrap_err();
        assert!(err.message.contains("sort clash"), "{err}");
    }

    #[test]
    fn prints_atoms_and_quantifiers() {
        let f = Formula::numstr(NumTerm::lit(0u32), lit("0"));
        assert_eq!(print(&f), r#"(numstr 0 "0")"#);
        let g = Formula::exists("x", Sort::Num, Formula::num_eq(NumTerm::var("x"), NumTerm::lit(1u32)));
        assert_eq!(print(&g), "(exists ((x Num)) (= x 1))");
        assert_eq!(print(&Formula::str_eq(StrTerm::var("X"), StrTerm::epsilon())), "(= X epsilon)");
    }

    #[test]
    fn multi_binders_desugar_left_to_right() {
        let f = parse("(forall ((x Num) (s Str)) (numstr x s))").unwrap();
        let expected = Formula::forall(
            "x",
            Sort::Num,
            Formula::forall("s", Sort::Str, Formula::numstr(NumTerm::var("x"), StrTerm::var("s"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn free_sorts_flow_through_equalities() {
        let f = parse(r#"(and (= X Y) (= Y "1"))"#).unwrap();
        assert!(matches!(&f, Formula::And(ps) if matches!(ps[0], Formula::Atom(crate::Atom::StrEq(..)))));
        let err = parse("(= X Y)").unwrap_err();
        assert!(err.message.contains("cannot infer"), "{err}");
    }

    #[test]
    fn annotations_round_trip() {
        let f = Formula::str_eq(StrTerm::var("X"), StrTerm::var("Y"));
        let text = print(&f);
        assert_eq!(text, "(= (as X Str) (as Y Str))");
        assert_eq!(parse(&text).unwrap(), f);
    }

    #[test]
    fn comments_epsilon_and_empty_literal() {
        let f = parse("; leading\n(= X \"\") ; trailing").unwrap();
        assert_eq!(f, Formula::str_eq(StrTerm::var("X"), StrTerm::epsilon()));
        assert_eq!(parse("(= X epsilon)").unwrap(), f);
    }

    #[test]
    fn errors_stay_inside_the_input() {
        for text in ["", "(", ")", "(= x", "(foo 1 2)", "(exists (x Num) (= x 1))", "(* y 2)", "(= 1 2) (= 2 3)", "(numstr 1)"] {
            let err = parse(text).unwrap_err();
            assert!(err.span.start <= err.span.end && err.span.end <= text.len(), "{text:?}: {err:?}");
            assert!(!err.message.is_empty());
        }
    }

    #[test]
    fn reserved_words_cannot_bind() {
        assert!(parse("(exists ((len Num)) (= len 1))").is_err());
    }

    #[test]
    fn round_trip_shadowed_names() {
        let text = "(and (= x 1) (exists ((x Str)) (= x \"01\")) (forall ((y Num) (y Num)) (< y 2)))";
        let f = parse(text).unwrap();
        let again = parse(&print(&f)).unwrap();
        assert!(alpha_eq(&f, &again));
        assert_eq!(print(&again), print(&f));
    }

    #[test]
    fn line_col() {
        let text = "(and\n  (= x y))";
        assert_eq!(SourceSpan::new(8, 9).line_col(text), (2, 4));
    }
}
