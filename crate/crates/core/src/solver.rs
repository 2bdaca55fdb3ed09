//! Bounded satisfiability by enumeration of the free variables.

use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{free_vars, Formula, Ident, Sort};
use crate::natural::Natural;
use crate::reduce::{certify_tp_bounds, certify_tsn_bounds, Direction, ReductionTrace};
use crate::semantics::{enumerate_domain, Assignment, EvalError, Evaluator, ModelSpec, Strategy, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("search space of {0} exceeds the enumeration limit")]
    TooLarge(String),
    #[error("thread pool: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome<N> {
    Sat(Assignment<N>),
    Unsat,
}

impl<N> Outcome<N> {
    pub fn is_sat(&self) -> bool {
        matches!(self, Outcome::Sat(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult<N> {
    pub outcome: Outcome<N>,
    pub bounds_used: ModelSpec,
    /// Assignments evaluated up to and including the witness, or all of
    /// them when unsatisfiable. Independent of the thread count.
    pub assignments_tried: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Solver {
    pub strategy: Strategy,
    /// `None` uses rayon's global pool; `Some(1)` runs on the calling thread.
    pub threads: Option<usize>,
}

impl Solver {
    pub fn new(strategy: Strategy, threads: Option<usize>) -> Self {
        Solver { strategy, threads }
    }

    pub fn solve<N: Natural>(&self, f: &Formula, m: &ModelSpec) -> Result<SolveResult<N>, SolveError> {
        let free: Vec<(Ident, Sort)> = free_vars(f).into_iter().collect();
        let ev = Evaluator::<N>::new(f, &free, m, self.strategy)?;
        let domains: Vec<Vec<Value<N>>> = free.iter().map(|(_, s)| enumerate_domain(*s, m).collect()).collect();
        let total = domains
            .iter()
            .try_fold(1u64, |acc, d| acc.checked_mul(d.len() as u64))
            .ok_or_else(|| SolveError::TooLarge(format!("{} free variables", free.len())))?;

        let decode = |k: u64, frame: &mut _| {
            let mut rest = k;
            for (i, d) in domains.iter().enumerate().rev() {
                let n = d.len() as u64;
                ev.set(frame, i, &d[(rest % n) as usize]);
                rest /= n;
            }
        };
        let hit = |k: u64, frame: &mut _| -> Option<Result<u64, EvalError>> {
            decode(k, frame);
            match ev.eval(frame) {
                Ok(false) => None,
                Ok(true) => Some(Ok(k)),
                Err(e) => Some(Err(e)),
            }
        };

        let found = match self.threads {
            Some(1) => {
                let mut frame = ev.frame();
                (0..total).find_map(|k| hit(k, &mut frame))
            }
            threads => {
                let search = || {
                    (0..total)
                        .into_par_iter()
                        .map_init(|| ev.frame(), |frame, k| hit(k, frame))
                        .find_first(Option::is_some)
                        .flatten()
                };
                match threads {
                    None => search(),
                    Some(n) => rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build()
                        .map_err(|e| SolveError::Threads(e.to_string()))?
                        .install(search),
                }
            }
        };

        Ok(match found {
            None => SolveResult {
                outcome: Outcome::Unsat,
                bounds_used: *m,
                assignments_tried: total,
            },
            Some(Err(e)) => return Err(e.into()),
            Some(Ok(k)) => {
                let mut a = Assignment::new();
                let mut rest = k;
                for (i, d) in domains.iter().enumerate().rev() {
                    let n = d.len() as u64;
                    a.insert(free[i].0.clone(), d[(rest % n) as usize].clone());
                    rest /= n;
                }
                SolveResult {
                    outcome: Outcome::Sat(a),
                    bounds_used: *m,
                    assignments_tried: k + 1,
                }
            }
        })
    }
}

/// First satisfying assignment in enumeration order, with the default solver.
pub fn solve<N: Natural>(f: &Formula, m: &ModelSpec) -> Result<SolveResult<N>, SolveError> {
    Solver::default().solve(f, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Agree,
    Disagree,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Agree => "agree",
            Verdict::Disagree => "disagree",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquisatReport<N> {
    pub verdict: Verdict,
    pub certified: bool,
    pub source: SolveResult<N>,
    pub target: SolveResult<N>,
}

/// Solves both sides. Differing verdicts count as a disagreement only when
/// the bounds are certified to decide the target exactly.
pub fn check_equisat<N: Natural>(
    solver: &Solver,
    source: &Formula,
    source_model: &ModelSpec,
    target: &Formula,
    target_model: &ModelSpec,
    certified: bool,
) -> Result<EquisatReport<N>, SolveError> {
    let s = solver.solve::<N>(source, source_model)?;
    let t = solver.solve::<N>(target, target_model)?;
    let verdict = match (s.outcome.is_sat() == t.outcome.is_sat(), certified) {
        (true, _) => Verdict::Agree,
        (false, true) => Verdict::Disagree,
        (false, false) => Verdict::Inconclusive,
    };
    Ok(EquisatReport {
        verdict,
        certified,
        source: s,
        target: t,
    })
}

/// [`check_equisat`] on a reduction, raising the target's witness bounds to
/// certified ones when they can be derived.
pub fn check_reduction<N: Natural>(
    solver: &Solver,
    trace: &ReductionTrace,
    m: &ModelSpec,
) -> Result<EquisatReport<N>, SolveError> {
    let certified = match trace.direction {
        Direction::TpToTsn => certify_tp_bounds(&trace.source, m),
        Direction::TsnToTpi => certify_tsn_bounds(&trace.source, m),
    };
    let target_model = certified.unwrap_or(*m);
    check_equisat(solver, &trace.source, m, &trace.target, &target_model, certified.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::{reduce_tp_to_tsn, reduce_tsn_to_tpi};
    use crate::surface::parse;
    use crate::word::Word;

    fn sat_value(r: &SolveResult<u64>, var: &str) -> String {
        match &r.outcome {
            Outcome::Sat(a) => a[&Ident::from(var)].to_string(),
            Outcome::Unsat => panic!("unsat"),
        }
    }

    #[test]
    fn first_witness_in_enumeration_order() {
        let f = parse(r#"(and (= (concat "0" Z) (concat Z "0")) (= (len Z) 2))"#).unwrap();
        let r = solve::<u64>(&f, &ModelSpec::canonical(3, 4)).unwrap();
        assert_eq!(sat_value(&r, "Z"), "\"00\"");
        assert_eq!(r.assignments_tried, 4);
        let f = parse("(numstr 3 S)").unwrap();
        let r = solve::<u64>(&f, &ModelSpec::canonical(4, 8)).unwrap();
        assert_eq!(sat_value(&r, "S"), "\"11\"");
    }

    #[test]
    fn unsat_tries_everything() {
        let f = parse("(= (len S) (+ (len S) 1))").unwrap();
        let r = solve::<u64>(&f, &ModelSpec::canonical(3, 4)).unwrap();
        assert_eq!(r.outcome, Outcome::Unsat);
        assert_eq!(r.assignments_tried, 15);
        let f = parse("(and (< a b) (< b a))").unwrap();
        let r = solve::<u64>(&f, &ModelSpec::canonical(0, 5)).unwrap();
        assert_eq!(r.assignments_tried, 36);
    }

    #[test]
    fn first_variable_varies_slowest() {
        let f = parse("(< (+ a 1) b)").unwrap();
        let r = solve::<u64>(&f, &ModelSpec::canonical(0, 3)).unwrap();
        assert_eq!((sat_value(&r, "a"), sat_value(&r, "b")), ("0".into(), "2".into()));
        assert_eq!(r.assignments_tried, 3);
    }

    #[test]
    fn thread_counts_agree() {
        let f = parse(r#"(and (numstr n S) (< 9 n) (= (len S) 5))"#).unwrap();
        let m = ModelSpec::canonical(5, 30);
        let results: Vec<SolveResult<u64>> = [Some(1), Some(2), Some(4), None]
            .into_iter()
            .map(|t| Solver::new(Strategy::Guided, t).solve(&f, &m).unwrap())
            .collect();
        assert!(results.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(sat_value(&results[0], "S"), "\"01010\"");
    }

    #[test]
    fn sentences_have_empty_witnesses() {
        let f = parse("(exists ((x Num)) (< 3 x))").unwrap();
        let r = solve::<u64>(&f, &ModelSpec::canonical(2, 4)).unwrap();
        assert_eq!(r.outcome, Outcome::Sat(Assignment::new()));
        assert_eq!(r.assignments_tried, 1);
    }

    #[test]
    fn equisat_on_reductions() {
        let solver = Solver::default();
        let f = parse("(pi 5 3 1)").unwrap();
        let trace = reduce_tp_to_tsn(&f).unwrap();
        let report = check_reduction::<u64>(&solver, &trace, &ModelSpec::canonical(6, 64)).unwrap();
        assert_eq!(report.verdict, Verdict::Agree);
        assert!(report.certified);
        assert!(!report.source.outcome.is_sat() && !report.target.outcome.is_sat());

        let f = parse("(and (pi p x 2) (not (pi p 3 y)) (< 4 p))").unwrap();
        let trace = reduce_tp_to_tsn(&f).unwrap();
        let report = check_reduction::<u64>(&solver, &trace, &ModelSpec::canonical(2, 12)).unwrap();
        assert_eq!(report.verdict, Verdict::Agree);
        assert_eq!(report.source.outcome, report.target.outcome);

        let f = parse("(and (numstr i s) (< 5 i))").unwrap();
        let trace = reduce_tsn_to_tpi(&f).unwrap();
        let report = check_reduction::<u64>(&solver, &trace, &ModelSpec::canonical(3, 8)).unwrap();
        assert!(report.certified);
        assert_eq!(report.verdict, Verdict::Agree);
        let mut want = Assignment::new();
        want.insert("i".into(), Value::Num(6));
        want.insert("s".into(), Value::Str(Word::new("110").unwrap()));
        assert_eq!(report.target.outcome, Outcome::Sat(want));
    }

    #[test]
    fn uncertified_mismatch_is_inconclusive() {
        let solver = Solver::default();
        let src = parse("(< 2 x)").unwrap();
        let tgt = parse("(< 20 x)").unwrap();
        let m = ModelSpec::canonical(1, 5);
        let r = check_equisat::<u64>(&solver, &src, &m, &tgt, &m, false).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = check_equisat::<u64>(&solver, &src, &m, &tgt, &m, true).unwrap();
        assert_eq!(r.verdict, Verdict::Disagree);
    }
}
