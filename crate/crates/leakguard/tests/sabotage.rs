use leakguard::run_conformance_with;
use leakguard_core::Session;

#[test]
fn disabling_the_holdout_check_turns_condition_4_red() {
    let report = run_conformance_with(&|| {
        let s = Session::new();
        s.disable_holdout_check_for_testing();
        s
    });
    assert!(!report.check(4).unwrap().passed);
    assert!(!report.all_passed());
}

#[test]
fn intact_sessions_pass_every_condition() {
    let report = run_conformance_with(&Session::new);
    assert!(report.all_passed(), "{:?}", report.checks);
}
