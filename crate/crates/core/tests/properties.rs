use num_bigint::BigUint;
use proptest::prelude::*;

use strnum::corpus::formula_corpus;
use strnum::formula::{alpha_eq, expand_mulconst, free_vars, nnf, substitute, to_prenex, well_sorted};
use strnum::semantics::{bounded_eval_with, numeral_value, numstr_holds, pi_holds, Assignment, Value};
use strnum::{parse, print, Formula, ModelSpec, NumTerm, Sort, StrTerm, Term, Word};
use strnum::Strategy as Search;

fn one_formula(seed: u64, depth: usize) -> Formula {
    formula_corpus(seed, 1, depth).pop().unwrap()
}

fn bits(len: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec(any::<bool>(), 0..=len)
        .prop_map(|b| Word::new(&b.iter().map(|&x| if x { '1' } else { '0' }).collect::<String>()).unwrap())
}

fn env(m: &ModelSpec) -> impl Strategy<Value = Assignment<u64>> {
    let (l, n) = (m.max_str_len, m.max_num);
    (bits(l), bits(l), bits(l), 0..=n, 0..=n, 0..=n).prop_map(|(s, t, u, i, j, k)| {
        let mut a = Assignment::new();
        for (v, w) in [("S", s), ("T", t), ("U", u)] {
            a.insert(v.into(), Value::Str(w));
        }
        for (v, x) in [("i", i), ("j", j), ("k", k)] {
            a.insert(v.into(), Value::Num(x));
        }
        a
    })
}

fn small() -> ModelSpec {
    ModelSpec::canonical(3, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let f = one_formula(seed, 7);
        let text = print(&f);
        let g = parse(&text).unwrap();
        prop_assert!(alpha_eq(&f, &g), "{text}");
        prop_assert_eq!(print(&g), text);
    }

    #[test]
    fn strategies_agree(seed in any::<u64>(), a in env(&small())) {
        let f = one_formula(seed, 4);
        let m = small().with_numstr_closure();
        let literal = bounded_eval_with(&f, &a, &m, Search::Literal);
        let guided = bounded_eval_with(&f, &a, &m, Search::Guided);
        prop_assert_eq!(literal, guided, "{}", print(&f));
    }

    #[test]
    fn normal_forms_preserve_truth(seed in any::<u64>(), a in env(&small())) {
        let f = one_formula(seed, 4);
        let m = small();
        let truth = bounded_eval_with(&f, &a, &m, Search::Literal);
        for g in [nnf(&f), to_prenex(&f), expand_mulconst(&f)] {
            prop_assert!(well_sorted(&g));
            prop_assert!(free_vars(&g).is_subset(&free_vars(&f)));
            prop_assert_eq!(bounded_eval_with(&g, &a, &m, Search::Literal), truth.clone(), "{} vs {}", print(&f), print(&g));
        }
    }

    #[test]
    fn substituting_a_value_matches_the_assignment(seed in any::<u64>(), a in env(&small())) {
        let f = one_formula(seed, 4);
        let m = small();
        let truth = bounded_eval_with(&f, &a, &m, Search::Guided);
        let mut g = f.clone();
        for (v, s) in free_vars(&f) {
            let by = match (&a[&v], s) {
                (Value::Str(w), Sort::Str) => Term::Str(StrTerm::lit(w.clone())),
                (Value::Num(n), Sort::Num) => Term::Num(NumTerm::lit(*n)),
                _ => unreachable!(),
            };
            g = substitute(&g, &v, &by).unwrap();
            prop_assert!(!free_vars(&g).iter().any(|(x, _)| *x == v));
        }
        prop_assert_eq!(bounded_eval_with(&g, &Assignment::<u64>::new(), &m, Search::Guided), truth);
    }
}

proptest! {
    #[test]
    fn numstr_reads_binary_with_leading_zeros(w in bits(12), pad in 0usize..4) {
        let value: Option<u64> = numeral_value(w.as_bytes());
        prop_assert_eq!(value.is_some(), !w.is_empty());
        if let Some(v) = value {
            let padded = Word::zeros(pad).concat(&w);
            prop_assert!(numstr_holds(&v, padded.as_bytes()));
            prop_assert!(!numstr_holds(&(v + 1), padded.as_bytes()));
            let minimal = Word::minimal_binary(&v);
            prop_assert!(minimal.is_canonical_numeral());
            prop_assert!(minimal.len() <= w.len());
            prop_assert_eq!(numeral_value::<u64>(minimal.as_bytes()), Some(v));
        }
    }

    #[test]
    fn numstr_agrees_across_carriers(i in 0u64..5000, w in bits(14)) {
        prop_assert_eq!(numstr_holds(&i, w.as_bytes()), numstr_holds(&BigUint::from(i), w.as_bytes()));
    }

    #[test]
    fn pi_is_shifted_product(p in 0u64..4096, x in 0u64..512, y in 0u64..80) {
        let expected = if x == 0 { p == 0 } else { y < 64 && u128::from(x) << y == u128::from(p) };
        prop_assert_eq!(pi_holds(&p, &x, &y), expected);
        prop_assert_eq!(pi_holds(&BigUint::from(p), &BigUint::from(x), &BigUint::from(y)), expected);
    }
}
