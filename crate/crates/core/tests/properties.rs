mod suites;

fn check(result: Result<u32, String>) {
    match result {
        Ok(n) => assert!(n >= 100, "only {n} cases ran"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn sinkhorn_invariants() {
    check(suites::sinkhorn_invariants());
}

#[test]
fn dual_concave_lipschitz_shift_invariant() {
    check(suites::dual_properties());
}

#[test]
fn first_variation_matches_finite_differences() {
    check(suites::first_variation_fd());
}

#[test]
fn change_of_reference_identity() {
    check(suites::change_of_reference());
}

#[test]
fn strongly_convex_in_l1() {
    check(suites::strong_convexity());
}

#[test]
fn entropy_sandwich_brackets_suboptimality() {
    check(suites::entropy_sandwich());
}
