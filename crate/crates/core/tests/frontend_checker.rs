use sygus_core::checker::{check_semantic, check_syntactic, CheckStrategy, VerificationResult};
use sygus_core::grammar::enumerate;
use sygus_core::{parse_problem_str, parse_solution, print_problem, print_solution};

const QM_LOOP: &str = "(set-logic LIA)
(define-fun qm ((a Int) (b Int)) Int (ite (< a 0) b a))
(synth-fun qm-loop ((x Int)) Int
    ((Start Int (x 0 1 3 (- Start Start) (+ Start Start) (qm Start Start)))))
(declare-var x Int)
(constraint (= (qm-loop x) (ite (<= x 0) 3 (- x 1))))
(check-synth)";

#[test]
fn problem_and_solution_round_trip() {
    let p = parse_problem_str(QM_LOOP).unwrap();
    assert_eq!(parse_problem_str(&print_problem(&p)).unwrap(), p);
    let s = parse_solution("(define-fun qm-loop ((x Int)) Int (qm (- x 1) 3))", &p).unwrap();
    let again = parse_solution(&print_solution(&s), &p).unwrap();
    assert_eq!(again.total_size(), s.total_size());
}

#[test]
fn helper_solution_is_valid_and_derivable() {
    let p = parse_problem_str(QM_LOOP).unwrap();
    let s = parse_solution("(define-fun qm-loop ((x Int)) Int (qm (- x 1) 3))", &p).unwrap();
    assert!(check_syntactic(&p, &s).values().all(|ok| *ok));
    assert!(check_semantic(&p, &s, &CheckStrategy::default()).unwrap().is_valid());
}

#[test]
fn wrong_solution_gets_a_counterexample() {
    let p = parse_problem_str(QM_LOOP).unwrap();
    let s = parse_solution("(define-fun qm-loop ((x Int)) Int (- x 1))", &p).unwrap();
    let v = check_semantic(&p, &s, &CheckStrategy::default()).unwrap();
    assert!(matches!(v, VerificationResult::CounterExample { .. }), "{v:?}");
}

#[test]
fn grammar_sizes_one_and_three() {
    let p = parse_problem_str(QM_LOOP).unwrap();
    let g = &p.unknowns["qm-loop"].grammar;
    // 4 leaves; 3 binary operators over 4 x 4 leaf pairs.
    assert_eq!(enumerate(g, "Start", 1, &[]).unwrap().len(), 4);
    assert_eq!(enumerate(g, "Start", 3, &[]).unwrap().len(), 48);
}
