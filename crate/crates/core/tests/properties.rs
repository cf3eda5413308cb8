mod support;

use proptest::prelude::*;
use support::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn division_inverts_multiplication(f in poly(3, 5), g in nonzero_poly(2, 4)) {
        division_round_trip(&f, &g)?;
    }

    #[test]
    fn lie_derivative_is_a_derivation(x in quadratic_field(), f in poly(2, 4), g in poly(2, 4)) {
        derivation_rule(&x, &f, &g)?;
    }

    #[test]
    fn lie_derivative_is_a_derivation_on_reference_fields(x in lv_field(), f in poly(2, 4), g in poly(2, 4)) {
        derivation_rule(&x, &f, &g)?;
    }

    #[test]
    fn cofactors_add_over_products(x in lv_field(), f in monomial(), g in monomial()) {
        cofactor_additivity(&x, &f, &g)?;
    }

    #[test]
    fn nullspace_vectors_are_annihilated(rows in matrix()) {
        nullspace_soundness(rows)?;
    }

    #[test]
    fn rk4_drift_scales_with_fourth_power(x0 in start_state()) {
        rk4_order(x0)?;
    }

    #[test]
    fn jacobian_matches_finite_differences(x in lv_field(), p in state()) {
        jacobian_matches(&x, p)?;
    }
}
