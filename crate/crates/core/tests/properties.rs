mod common;

use num_complex::Complex64;
use pathwit::fock::{self, FockSpace, MultiModeOperator};
use pathwit::linalg;
use pathwit::source::{self, SourceParams};
use pathwit::witness::{self, WitnessSpec};
use proptest::prelude::*;

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn dims_and_subset() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    prop_oneof![
        Just((vec![2, 3], vec![0])),
        Just((vec![2, 3], vec![1])),
        Just((vec![2, 2, 2], vec![0])),
        Just((vec![2, 2, 2], vec![0, 2])),
        Just((vec![3, 2, 2], vec![1, 2])),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_transpose_is_an_involution((dims, subset) in dims_and_subset(), e in entries(64)) {
        let rho = common::random_state(&dims, &e);
        let (back, herm) = common::pt_involution(&rho, &subset);
        prop_assert_eq!(back, 0.0);
        prop_assert!(herm < 1e-12);
    }

    #[test]
    fn dephasing_is_idempotent((dims, _) in dims_and_subset(), e in entries(64)) {
        let op = common::random_hermitian(&dims, &e);
        prop_assert_eq!(common::dephasing_idempotence(&op), 0.0);
    }

    #[test]
    fn expectation_is_linear(e in entries(64), f in entries(48), w in 0.0f64..1.0) {
        let dims = [2, 3];
        let a = common::random_state(&dims, &e);
        let b = common::random_state(&dims, &f);
        let mix = pathwit::fock::DensityMatrix::new(
            a.space().clone(),
            a.matrix() * Complex64::from(w) + b.matrix() * Complex64::from(1.0 - w),
        ).unwrap();
        let op = common::random_hermitian(&dims, &f);
        let lhs = fock::expectation(&op, &mix).unwrap();
        let rhs = w * fock::expectation(&op, &a).unwrap() + (1.0 - w) * fock::expectation(&op, &b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_products(e in entries(16), f in entries(24)) {
        let a = common::random_state(&[2], &e);
        let b = common::random_state(&[3], &f);
        let ab = a.product(&b).unwrap();
        let ka = fock::partial_trace(&ab, &[0]).unwrap();
        let kb = fock::partial_trace(&ab, &[1]).unwrap();
        prop_assert!(linalg::max_abs_diff(ka.matrix(), a.matrix()) < 1e-14);
        prop_assert!(linalg::max_abs_diff(kb.matrix(), b.matrix()) < 1e-14);
    }

    #[test]
    fn witness_is_permutation_symmetric(e in entries(128), alpha in 0.2f64..1.2) {
        let dims = [2, 2, 2];
        let rho = common::random_state(&dims, &e);
        let spec = WitnessSpec::general(3, alpha).unwrap();
        let z = witness::build_witness(&spec, &dims).unwrap();
        let base = fock::expectation(&z, &rho).unwrap();
        let space = FockSpace::new(dims.to_vec()).unwrap();
        // Cyclic relabelling of the three modes.
        let perm = pathwit::linalg::CMatrix::from_fn(8, 8, |r, c| {
            let o = space.occupations(c);
            if r == space.index(&[o[2], o[0], o[1]]) { Complex64::from(1.0) } else { Complex64::from(0.0) }
        });
        let p = MultiModeOperator::new(space, perm).unwrap();
        let moved = rho.evolve(&p).unwrap();
        prop_assert!((fock::expectation(&z, &moved).unwrap() - base).abs() < 1e-10);
    }

    #[test]
    fn coincidence_grows_with_multiphoton_weight(p2 in 0.0f64..0.4, extra in 0.0f64..0.2) {
        let low = [1.0 - p2 - 0.1, 0.1, p2];
        let high = [1.0 - p2 - 0.1 - extra, 0.1, p2 + extra];
        prop_assert!(source::coincidence_probability(&high, 0.0) >= source::coincidence_probability(&low, 0.0));
    }

    #[test]
    fn loss_never_raises_the_model_witness(eta in 0.05f64..1.0, drop in 0.0f64..0.05, t in 0.2f64..0.8) {
        let hi = SourceParams { eta_total: eta, transmittivity: t, ..SourceParams::default() };
        let lo = SourceParams { eta_total: (eta - drop).max(0.0), ..hi };
        prop_assert!(source::model_witness_value(&lo).unwrap() <= source::model_witness_value(&hi).unwrap() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adding_constraints_never_raises_the_optimum(alpha in 0.45f64..1.2) {
        let [free, ppt, w] = common::nested_optima(alpha);
        prop_assert!(ppt <= free + 1e-6);
        prop_assert!(w <= ppt + 1e-6);
    }

    #[test]
    fn feasible_points_sit_below_the_optimum(alpha in 0.45f64..1.2, bloch in prop::array::uniform6(-1.0f64..1.0)) {
        for (value, optimum, residual) in common::feasible_points_below_optimum(alpha, bloch) {
            prop_assert!(residual < 1e-10);
            prop_assert!(value <= optimum + 1e-6);
        }
    }

    #[test]
    fn analytic_bound_dominates_qudit_optimum(eta in 0.1f64..1.0, t in 0.2f64..0.8, alpha in 0.5f64..1.1, pc in 0.0f64..1e-3) {
        let p = SourceParams { eta_total: eta, transmittivity: t, alpha, dark_count: 0.01, ..SourceParams::default() };
        let (sdp, analytic) = common::qudit_vs_analytic(&p, pc).unwrap();
        prop_assert!(sdp <= analytic + 1e-5, "sdp {} analytic {}", sdp, analytic);
    }

    #[test]
    fn separable_products_never_violate(
        re in prop::array::uniform2(-1.0f64..1.0),
        im in prop::array::uniform2(-1.0f64..1.0),
        alpha in 0.5f64..1.1,
    ) {
        let a = common::coherent(Complex64::new(re[0], im[0]), 14);
        let b = common::coherent(Complex64::new(re[1], im[1]), 14);
        prop_assert!(common::separable_margin(&a, &b, alpha) <= 1e-9);
        let ta = fock::thermal_state(re[0].abs() * 0.3, 12).unwrap();
        let tb = fock::thermal_state(im[1].abs() * 0.3, 12).unwrap();
        prop_assert!(common::separable_margin(&ta, &tb, alpha) <= 1e-9);
    }

    #[test]
    fn split_thermal_light_never_violates(nbar in 0.01f64..0.3, t in 0.0f64..1.0, alpha in 0.5f64..1.1) {
        prop_assert!(common::split_thermal_margin(nbar, t, alpha) <= 1e-9);
    }
}

#[test]
fn witness_operator_is_phase_averaged() {
    for (n, alpha) in [(2, 0.83), (3, 0.5)] {
        assert!(common::witness_dephasing_invariance(n, alpha, 3) < 1e-12);
    }
}
