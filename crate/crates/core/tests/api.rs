use lu_invariants::invariants::{eval_mixed, eval_pure, generators, InvariantSpec};
use lu_invariants::io::{LoadedState, OrbitFile, StateFile};
use lu_invariants::perm::{enumerate_orbits, OrbitKey, PermTuple};
use lu_invariants::states::{random_local_unitary, PureState, SystemShape};
use lu_invariants::Complex64;

const BUDGET: u128 = 1_000_000_000;

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + b.norm())
}

#[test]
fn file_round_trip_preserves_values() {
    let shape = SystemShape::new(vec![2, 3, 2]).unwrap();
    let psi = PureState::random(shape, 5, true).unwrap();
    let text = serde_json::to_string(&StateFile::from_pure(&psi)).unwrap();
    let LoadedState::Pure(back) = StateFile::parse(&text).unwrap().load().unwrap() else {
        panic!("expected a pure state")
    };
    assert_eq!(back, psi);
    for orbit in enumerate_orbits(3, 2, false, BUDGET).unwrap() {
        let file = OrbitFile::pure(&orbit);
        let spec = OrbitFile::parse(&serde_json::to_string(&file).unwrap())
            .unwrap()
            .spec(lu_invariants::invariants::InvariantKind::Pure)
            .unwrap();
        assert_eq!(spec.orbit, orbit);
        assert_eq!(eval_pure(&spec, &back, BUDGET).unwrap(), eval_pure(&spec, &psi, BUDGET).unwrap());
    }
}

#[test]
fn pure_invariant_through_reduced_state() {
    let shape = SystemShape::uniform(3, 2).unwrap();
    let psi = PureState::random(shape.clone(), 9, true).unwrap();
    let rho = psi.reduce_last().unwrap();
    let tuple = PermTuple::from_one_based(&[vec![2, 3, 1], vec![1, 3, 2]]).unwrap();
    let pure = InvariantSpec::pure(OrbitKey::of(&tuple));
    let mixed = InvariantSpec::mixed(OrbitKey::of(&tuple));
    let u = random_local_unitary(&shape, 3);
    let rotated = psi.apply_local_unitary(&u).unwrap();
    let a = eval_pure(&pure, &psi, BUDGET).unwrap();
    assert!(close(eval_pure(&pure, &rotated, BUDGET).unwrap(), a));
    let rho_u = rotated.reduce_last().unwrap();
    let b = eval_mixed(&mixed, &rho, BUDGET).unwrap();
    assert!(close(a, b));
    assert!(close(eval_mixed(&mixed, &rho_u, BUDGET).unwrap(), b));
}

#[test]
fn generator_counts() {
    let counts: Vec<usize> = (1..=4)
        .map(|m| generators(3, 4, BUDGET).unwrap().iter().filter(|g| g.degree() == m).count())
        .collect();
    assert_eq!(counts, vec![1, 3, 7, 26]);
    assert!(generators(3, 4, BUDGET).unwrap().iter().all(|g| g.orbit.is_connected()));
}
