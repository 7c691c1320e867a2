use num_complex::Complex64 as C64;
use procrustean::qubit::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn bell() -> PureState {
    PureState::schmidt_pair(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).unwrap()
}

#[test]
fn make_state_basis_and_scaling() {
    let s = make_state(1, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!((s.norm_sqr() - 1.0).abs() < EXACT_TOL);
    let s = make_state(1, vec![c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
}

#[test]
fn make_state_keeps_global_phase() {
    let (a, b) = ((PI / 6.0).cos(), (PI / 6.0).sin());
    let s = make_state(2, vec![c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, b)]).unwrap();
    assert!((s.norm_sqr() - 1.0).abs() < EXACT_TOL);
    assert!((s.amplitudes()[3] - c(0.0, 0.5)).norm() < EXACT_TOL);
}

#[test]
fn make_state_errors() {
    assert!(matches!(make_state(2, vec![c(1.0, 0.0); 3]), Err(QubitError::DimensionMismatch { .. })));
    assert_eq!(make_state(1, vec![c(0.0, 0.0); 2]), Err(QubitError::ZeroVector));
    assert_eq!(make_state(0, vec![c(1.0, 0.0)]), Err(QubitError::NoQubits));
}

#[test]
fn identity_is_a_no_op() {
    let s = bell();
    let (out, w) = apply_single_qubit_op(&s, &QubitOperator::identity(), 1).unwrap();
    assert!((w - 1.0).abs() < EXACT_TOL);
    assert!((fidelity(&out.unwrap(), &s).unwrap() - 1.0).abs() < EXACT_TOL);
}

#[test]
fn projector_on_plus_state() {
    let plus = make_state(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    let (out, w) = apply_single_qubit_op(&plus, &QubitOperator::projector(0), 0).unwrap();
    assert!((w - 0.5).abs() < EXACT_TOL);
    let out = out.unwrap();
    assert!((out.amplitudes()[0] - c(1.0, 0.0)).norm() < EXACT_TOL);
    assert!(out.amplitudes()[1].norm() < EXACT_TOL);
}

#[test]
fn zero_weight_branch_is_absent() {
    let s = PureState::basis(2, 0).unwrap();
    let (out, w) = apply_single_qubit_op(&s, &QubitOperator::projector(1), 0).unwrap();
    assert!(out.is_none());
    assert_eq!(w, 0.0);
}

#[test]
fn target_out_of_range() {
    let s = bell();
    assert!(matches!(
        apply_single_qubit_op(&s, &QubitOperator::identity(), 2),
        Err(QubitError::TargetOutOfRange { index: 2, n: 2 })
    ));
}

#[test]
fn operator_acts_on_the_right_qubit() {
    // |01⟩ with X on qubit 0 -> |11⟩
    let x = QubitOperator::new([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    let s = PureState::basis(2, 0b01).unwrap();
    let (out, _) = apply_single_qubit_op(&s, &x, 0).unwrap();
    assert!((out.unwrap().amplitudes()[0b11] - c(1.0, 0.0)).norm() < EXACT_TOL);
}

#[test]
fn entropy_examples() {
    assert!((entropy_of_entanglement(&bell(), &[0]).unwrap() - 1.0).abs() < EXACT_TOL);
    let prod = PureState::basis(2, 0).unwrap();
    assert!(entropy_of_entanglement(&prod, &[0]).unwrap().abs() < EXACT_TOL);
    let s = PureState::schmidt_pair(c(0.5, 0.0), c(0.75f64.sqrt(), 0.0)).unwrap();
    // direct binary entropy: -(1/4)log2(1/4) - (3/4)log2(3/4)
    let oracle = 0.25 * 2.0 - 0.75 * 0.75f64.log2();
    assert!((entropy_of_entanglement(&s, &[0]).unwrap() - oracle).abs() < 1e-12);
    assert!((oracle - 0.8112781244591328).abs() < 1e-12);
}

#[test]
fn entropy_partition_errors() {
    let s = bell();
    assert!(entropy_of_entanglement(&s, &[]).is_err());
    assert!(entropy_of_entanglement(&s, &[0, 1]).is_err());
    assert!(entropy_of_entanglement(&s, &[0, 0]).is_err());
    let ghz = make_state(3, (0..8).map(|i| c(if i == 0 || i == 7 { 1.0 } else { 0.0 }, 0.0)).collect()).unwrap();
    assert!(entropy_of_entanglement(&ghz, &[5]).is_err());
}

#[test]
fn partial_trace_route_agrees_with_pair_formula() {
    // Generic (non-Schmidt) two-qubit state, embedded as qubits 0,1 of a
    // three-qubit product with |0⟩ so the dense route is taken.
    let amps = [c(0.3, 0.1), c(-0.2, 0.4), c(0.5, -0.3), c(0.1, 0.2)];
    let pair = make_state(2, amps.to_vec()).unwrap();
    let mut big = vec![c(0.0, 0.0); 8];
    for (i, a) in amps.iter().enumerate() {
        big[i << 1] = *a;
    }
    let triple = make_state(3, big).unwrap();
    let s2 = entropy_of_entanglement(&pair, &[0]).unwrap();
    let s3 = entropy_of_entanglement(&triple, &[0]).unwrap();
    assert!((s2 - s3).abs() < 1e-10, "{s2} vs {s3}");
    assert!(entropy_of_entanglement(&triple, &[2]).unwrap().abs() < 1e-10);
}

#[test]
fn ghz_entropy_is_one_bit_for_any_cut() {
    let n = 4;
    let mut amps = vec![c(0.0, 0.0); 1 << n];
    amps[0] = c(1.0, 0.0);
    amps[(1 << n) - 1] = c(0.0, 1.0);
    let s = make_state(n, amps).unwrap();
    for part in [vec![0], vec![1, 2], vec![0, 1, 3]] {
        assert!((entropy_of_entanglement(&s, &part).unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn fidelity_examples() {
    let zero = PureState::basis(1, 0).unwrap();
    let one = PureState::basis(1, 1).unwrap();
    let plus = make_state(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < EXACT_TOL);
    assert!(fidelity(&zero, &one).unwrap().abs() < EXACT_TOL);
    assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < EXACT_TOL);
    assert!(fidelity(&zero, &bell()).is_err());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn amp() -> impl Strategy<Value = C64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(r, i)| C64::new(r, i))
    }

    fn state(n: usize) -> impl Strategy<Value = PureState> {
        proptest::collection::vec(amp(), 1 << n)
            .prop_filter("nonzero", |v| v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3)
            .prop_map(move |v| PureState::new(n, v).unwrap())
    }

    proptest! {
        #[test]
        fn normalization_holds(s in state(3)) {
            prop_assert!((s.norm_sqr() - 1.0).abs() < EXACT_TOL);
        }

        #[test]
        fn fidelity_symmetric_and_phase_invariant(a in state(2), b in state(2), ph in -PI..PI) {
            let f_ab = fidelity(&a, &b).unwrap();
            let f_ba = fidelity(&b, &a).unwrap();
            prop_assert!((f_ab - f_ba).abs() < EXACT_TOL);
            let rot = C64::from_polar(1.0, ph);
            let b2 = PureState::new(2, b.amplitudes().iter().map(|x| x * rot).collect()).unwrap();
            prop_assert!((fidelity(&a, &b2).unwrap() - f_ab).abs() < EXACT_TOL);
            prop_assert!((0.0..=1.0).contains(&f_ab));
        }

        #[test]
        fn schmidt_entropy_in_unit_range(p in 0.0f64..=1.0, g in -PI..PI) {
            let s = PureState::schmidt_pair(C64::new(p.sqrt(), 0.0), C64::from_polar((1.0 - p).sqrt(), g)).unwrap();
            let e = entropy_of_entanglement(&s, &[0]).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&e));
            prop_assert!((e - binary_entropy(p)).abs() < 1e-9);
            // zero iff product
            prop_assert_eq!(e == 0.0, p == 0.0 || p == 1.0);
        }
    }
}
