use hqe_selftest::run_suite;

#[test]
fn same_seed_same_outcome() {
    let a = run_suite("rv-equivalence", 11).unwrap();
    let b = run_suite("1", 11).unwrap();
    assert_eq!((a.cases, a.failures, &a.samples, &a.notes), (b.cases, b.failures, &b.samples, &b.notes));
    assert_eq!(a.failures, 0);
}

#[test]
fn seeds_change_the_cases() {
    let a = run_suite("rv-equivalence", 1).unwrap();
    let b = run_suite("rv-equivalence", 2).unwrap();
    assert_ne!(a.cases, b.cases);
}

#[test]
fn unknown_suite() {
    assert!(run_suite("no-such-suite", 1).is_none());
}
