mod props;

#[test]
fn weil_bounds_on_cached_traces() {
    props::weil_bounds(64).unwrap();
}

#[test]
fn trace_vanishes_for_q_congruent_to_pm2() {
    props::trace_vanishes_off_split_class(48).unwrap();
}

#[test]
fn theta_is_even_and_unit_square_invariant() {
    props::theta_even_and_unit_square(48).unwrap();
}

#[test]
fn brandt_matrices_commute() {
    props::brandt_commutativity(5).unwrap();
}

#[test]
fn fm_satisfies_its_differential_equation() {
    props::fm_ode(64).unwrap();
}

#[test]
fn dickson_functional_equation() {
    props::dickson_functional_equation(256).unwrap();
}
