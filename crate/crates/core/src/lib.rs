//! Strings, lengths and binary numerals: formulas, bounded semantics,
//! reductions between the string theory and power arithmetic, and
//! executable axiom checks.
//!
//! Evaluation is generic over the natural-number carrier; the aliases
//! below fix it to [`BigUint`].

pub mod corpus;
pub mod formula;
pub mod gamma;
pub mod natural;
pub mod reduce;
pub mod semantics;
pub mod solver;
pub mod surface;
pub mod word;

pub use num_bigint::BigUint;

pub use formula::{Atom, Formula, Ident, NumTerm, Quantifier, Sort, StrTerm, Term, TheoryTag};
pub use natural::Natural;
pub use semantics::{ModelSpec, Strategy, Universe};
pub use surface::{parse, print, ParseError, SourceSpan};
pub use word::Word;

pub type Value = semantics::Value<BigUint>;
pub type Assignment = semantics::Assignment<BigUint>;
pub type SolveResult = solver::SolveResult<BigUint>;
pub type Outcome = solver::Outcome<BigUint>;
pub type EquisatReport = solver::EquisatReport<BigUint>;
pub type AxiomCheckOutcome = gamma::AxiomCheckOutcome<BigUint>;
