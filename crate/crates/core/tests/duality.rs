use std::sync::Arc;

use fenchel_duo::duality::{
    check_bach_equivalence, check_hybrid_symmetry, check_mirror_equivalence, dualize,
};
use fenchel_duo::library::{
    make_entropy_lse, make_quadratic_set, random_gaussian_map, LogSumExpF, QuadraticF, SetKind,
};
use fenchel_duo::step::StepRule;
use fenchel_duo::{LinearMap, Problem};
use proptest::prelude::*;

fn entropy_general_a() -> Problem {
    make_entropy_lse(
        2,
        LinearMap::from_rows(&[vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.7, 0.0]]).unwrap(),
        Arc::new(QuadraticF::squared_distance(vec![0.4, -0.1, 0.2])),
    )
    .unwrap()
}

fn box_random_a() -> Problem {
    make_quadratic_set(
        QuadraticF::squared_distance(vec![1.0, -1.0, 0.5, 0.0]),
        SetKind::Box {
            lower: vec![-1.0, 0.0, -2.0],
            upper: vec![1.0, 1.0, 0.5],
        },
        random_gaussian_map(4, 3, 3).unwrap(),
    )
    .unwrap()
}

#[test]
fn equivalences_hold_on_general_maps() {
    let rules = [StepRule::FixedHarmonic, StepRule::OpenLoop { gamma: 3.5 }];
    for rule in &rules {
        let p = entropy_general_a();
        let x0 = vec![0.5, 0.5];
        let u0 = p.f_gradient(&p.map().apply(&x0)).unwrap();
        for dev in [
            check_bach_equivalence(&p, &x0, rule, 20).unwrap(),
            check_mirror_equivalence(&p, &[0.1, -0.2, 0.3], rule, 20).unwrap(),
            check_hybrid_symmetry(&p, &x0, &u0, rule, 20).unwrap(),
        ] {
            assert!(dev.max() <= 1e-12 && dev.gap_bounds <= 1e-12, "{dev:?}");
            assert_eq!(dev.steps, 20);
        }
        let q = box_random_a();
        let dev = check_bach_equivalence(&q, &[0.0, 0.5, 0.0], rule, 20).unwrap();
        assert!(dev.max() <= 1e-12, "{dev:?}");
    }
}

#[test]
fn single_step_equivalence() {
    let p = entropy_general_a();
    let dev = check_bach_equivalence(&p, &[0.9, 0.1], &StepRule::FixedHarmonic, 1).unwrap();
    assert_eq!(dev.steps, 1);
    assert!(dev.max() <= 1e-12);
}

#[test]
fn dual_dimensions_swap() {
    let p = entropy_general_a();
    let d = dualize(&p).unwrap();
    assert_eq!((d.n(), d.m()), (p.m(), p.n()));
    let dd = dualize(&d).unwrap();
    assert_eq!((dd.n(), dd.m()), (p.n(), p.m()));
}

#[test]
fn dual_of_lse_objective_is_entropy_regularized() {
    let p = make_entropy_lse(
        3,
        LinearMap::identity(3),
        Arc::new(LogSumExpF::new(3).unwrap()),
    )
    .unwrap();
    let d = dualize(&p).unwrap();
    // The dual regularizer is f*(-v): finite only on the negated simplex.
    assert!(d.h_value(&[-0.2, -0.3, -0.5]).unwrap().is_finite());
    assert!(!d.h_value(&[0.2, 0.3, 0.5]).unwrap().is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bach_holds_from_any_feasible_start(t in 0.0f64..=1.0, gamma in 0.5f64..4.0) {
        let p = entropy_general_a();
        let rule = StepRule::OpenLoop { gamma };
        let dev = check_bach_equivalence(&p, &[t, 1.0 - t], &rule, 15).unwrap();
        prop_assert!(dev.max() <= 1e-12);
    }

    #[test]
    fn hybrid_symmetry_from_any_start(t in 0.0f64..=1.0, u in prop::collection::vec(-3.0f64..3.0, 3)) {
        let p = entropy_general_a();
        let dev = check_hybrid_symmetry(&p, &[t, 1.0 - t], &u, &StepRule::FixedHarmonic, 15).unwrap();
        prop_assert!(dev.max() <= 1e-12 && dev.gap_bounds <= 1e-12);
    }
}
