//! Randomized property suites over the log-concave corpus, at the sizes the
//! verification protocol pins down. Fitted constants are printed for the log;
//! assertions are zero-violation checks.

use thinshell::suites;

#[test]
fn fradelizi_suite_zero_violations() {
    let o = suites::fradelizi_suite(200, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
    println!("{}: {:?}", o.name, o.logged);
}

#[test]
fn level_set_mass_suite_zero_violations() {
    let o = suites::level_set_mass_suite(200, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
    println!("{}: {:?}", o.name, o.logged);
}

#[test]
fn level_set_radius_bounded_by_100n() {
    let o = suites::level_set_radius_suite(60, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
    let max = o.logged.iter().find(|(k, _)| k == "max_radius_over_dim").unwrap().1;
    assert!(max <= 100.0);
    println!("{}: max radius/dim = {max:.4}");
}

#[test]
fn decay_envelope_eventually_decreasing() {
    let o = suites::decay_suite(60, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
    println!("{}: {:?}", o.name, o.logged);
}

#[test]
fn monotone_reweighting_500_pairs() {
    let o = suites::monotone_suite(500, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
}

#[test]
fn tilted_moment_bounds_200_instances() {
    let o = suites::tilted_suite(200, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
}

#[test]
fn gradient_bound_with_both_variances() {
    let o = suites::gradient_suite(24, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
    let max = o.logged.iter().find(|(k, _)| k == "max_grad_v_over_sqrt_n").unwrap().1;
    assert!(max <= 100.0, "max scaled gradient {max}");
    println!("convolved-gradient: max |grad| v / sqrt(n) = {max:.4}");
}

#[test]
fn log_laplace_midpoint_convex() {
    let o = suites::log_laplace_convexity_suite(60, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
}

#[test]
fn tp_mass_window_shape() {
    let o = suites::tp_mass_suite(80, 0).unwrap();
    assert!(o.passed(), "violations: {:?}", o.violations);
    println!("{}: {:?}", o.name, o.logged);
}
