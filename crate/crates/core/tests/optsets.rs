use channel_optima::channels::{amplitude_damping, completely_depolarizing, depolarizing, identity, random_channel};
use channel_optima::entropyopt::{holevo_capacity, min_output_entropy, ConstraintSet, OptimizerConfig};
use channel_optima::optsets::{
    coincidence_test, hull_disagreement, membership_c, membership_e, minimal_support_projector, probe_directions,
    sample_optimal_set_c, sample_optimal_set_e, sample_optimal_set_e_with, support_function, SetKind,
    CERTIFICATION_TOL,
};
use channel_optima::qcore::{DensityMatrix, PureState};
use channel_optima::random::{random_pure_state, rng_for};
use channel_optima::Error;
use proptest::prelude::*;

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

#[test]
fn depolarizing_optimal_sets_cover_all_pure_states() {
    let ch = depolarizing(2, 0.5).unwrap();
    let m = min_output_entropy(&ch, &cfg()).unwrap();
    let c = holevo_capacity(&ch, &ConstraintSet::Full, &cfg()).unwrap();
    let se = sample_optimal_set_e_with(&ch, &m, &cfg()).unwrap();
    let sc = sample_optimal_set_c(&ch, &c, &cfg()).unwrap();
    assert_eq!(se.kind, SetKind::E);
    assert_eq!(sc.kind, SetKind::C);
    for s in [&se, &sc] {
        assert!(s.states.len() > 4);
        assert!(s.residuals.iter().all(|&r| r <= CERTIFICATION_TOL));
        assert_eq!(s.support_projector.rank(), 2);
    }
    // Every pure state is optimal, so the sampled hulls nearly fill the Bloch sphere.
    let dirs = probe_directions(2, 20, 99);
    for x in &dirs {
        let top = x.eig().values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(top - support_function(&se.states, x) < 0.05);
    }
}

#[test]
fn coincidence_holds_for_depolarizing() {
    let ch = depolarizing(2, 0.5).unwrap();
    let m = min_output_entropy(&ch, &cfg()).unwrap();
    let c = holevo_capacity(&ch, &ConstraintSet::Full, &cfg()).unwrap();
    let se = sample_optimal_set_e_with(&ch, &m, &cfg()).unwrap();
    let sc = sample_optimal_set_c(&ch, &c, &cfg()).unwrap();
    let r = coincidence_test(&ch, &c, &m, &se, &sc, &cfg()).unwrap();
    assert!(r.coincide);
    assert!((r.lambda - (c.value + m.value)).abs() < 1e-4);
    assert!((r.lambda - 1.0).abs() < 1e-6);
    assert!(r.chaotic_omega_residual.unwrap() < 1e-6);
}

#[test]
fn coincidence_fails_for_strong_amplitude_damping() {
    let ch = amplitude_damping(0.9).unwrap();
    let m = min_output_entropy(&ch, &cfg()).unwrap();
    let c = holevo_capacity(&ch, &ConstraintSet::Full, &cfg()).unwrap();
    let se = sample_optimal_set_e_with(&ch, &m, &cfg()).unwrap();
    let sc = sample_optimal_set_c(&ch, &c, &cfg()).unwrap();
    // A_E is the single state |0⟩.
    assert_eq!(se.support_projector.rank(), 1);
    assert!(se.states[0].overlap(&PureState::basis(2, 0)) > 1.0 - 1e-8);
    let r = coincidence_test(&ch, &c, &m, &se, &sc, &cfg()).unwrap();
    assert!(!r.coincide);
    assert!(r.hull_disagreement > 1e-2);
    assert!(!r.hulls_agree());
    assert!(r.chaotic_omega_residual.is_none());
}

#[test]
fn coincidence_rejects_swapped_samples() {
    let ch = identity(2).unwrap();
    let m = min_output_entropy(&ch, &cfg()).unwrap();
    let c = holevo_capacity(&ch, &ConstraintSet::Full, &cfg()).unwrap();
    let se = sample_optimal_set_e_with(&ch, &m, &cfg()).unwrap();
    let sc = sample_optimal_set_c(&ch, &c, &cfg()).unwrap();
    assert!(coincidence_test(&ch, &c, &m, &sc, &se, &cfg()).is_err());
}

#[test]
fn capacity_sampler_needs_converged_report() {
    let ch = depolarizing(2, 0.5).unwrap();
    let mut c = holevo_capacity(&ch, &ConstraintSet::Full, &cfg()).unwrap();
    c.converged = false;
    assert!(matches!(sample_optimal_set_c(&ch, &c, &cfg()), Err(Error::NotConverged(_))));
}

#[test]
fn membership_in_optimal_sets() {
    let ch = amplitude_damping(0.5).unwrap();
    let c = holevo_capacity(&ch, &ConstraintSet::Full, &cfg()).unwrap();
    let avg = c.ensemble.average();
    assert!(membership_c(&ch, &avg, &c, &cfg()).unwrap().member);
    assert!(!membership_c(&ch, &DensityMatrix::from_diagonal(&[0.99, 0.01]).unwrap(), &c, &cfg()).unwrap().member);

    let h_min = min_output_entropy(&ch, &cfg()).unwrap().value;
    assert!(membership_e(&ch, &PureState::basis(2, 0).density(), h_min, &cfg()).unwrap().member);
    assert!(!membership_e(&ch, &PureState::basis(2, 1).density(), h_min, &cfg()).unwrap().member);
}

#[test]
fn zero_capacity_channel_has_every_state_in_a_c() {
    let ch = completely_depolarizing(2, 2).unwrap();
    let c = holevo_capacity(&ch, &ConstraintSet::Full, &cfg()).unwrap();
    let psi = random_pure_state(2, &mut rng_for(5, "zero-cap"));
    assert!(membership_c(&ch, &psi.density(), &c, &cfg()).unwrap().member);
}

#[test]
fn random_channel_min_entropy_set_is_small() {
    let ch = random_channel(2, 2, 2, 41).unwrap();
    let se = sample_optimal_set_e(&ch, &cfg()).unwrap();
    assert!(!se.states.is_empty());
    assert!(se.residuals.iter().all(|&r| r <= CERTIFICATION_TOL));
    // Generic channels have isolated minimizers; a rank-2 support would need two of them.
    assert!(se.states.len() <= 2, "{} states", se.states.len());
}

#[test]
fn minimal_support_projector_spans_both_samples() {
    let ch = amplitude_damping(0.9).unwrap();
    let m = min_output_entropy(&ch, &cfg()).unwrap();
    let c = holevo_capacity(&ch, &ConstraintSet::Full, &cfg()).unwrap();
    let se = sample_optimal_set_e_with(&ch, &m, &cfg()).unwrap();
    let sc = sample_optimal_set_c(&ch, &c, &cfg()).unwrap();
    assert_eq!(minimal_support_projector(&[&se]).unwrap().rank(), 1);
    assert_eq!(minimal_support_projector(&[&se, &sc]).unwrap().rank(), 2);
    assert!(minimal_support_projector(&[]).is_err());
}

#[test]
fn probe_directions_are_reproducible() {
    let a = probe_directions(3, 5, 17);
    let b = probe_directions(3, 5, 17);
    let c = probe_directions(3, 5, 18);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.matrix(), y.matrix());
    }
    assert_ne!(a[0].matrix(), c[0].matrix());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_function_dominates_members(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = rng_for(seed, "prop-support");
        let states: Vec<PureState> = (0..n).map(|_| random_pure_state(3, &mut rng)).collect();
        let x = &probe_directions(3, 1, seed)[0];
        let h = support_function(&states, x);
        for s in &states {
            prop_assert!(h >= x.expectation(s.amplitudes()) - 1e-12);
        }
    }

    #[test]
    fn hull_disagreement_is_symmetric_and_zero_on_itself(seed in any::<u64>()) {
        let mut rng = rng_for(seed, "prop-hull");
        let a: Vec<PureState> = (0..3).map(|_| random_pure_state(2, &mut rng)).collect();
        let b: Vec<PureState> = (0..4).map(|_| random_pure_state(2, &mut rng)).collect();
        let dirs = probe_directions(2, 8, seed);
        prop_assert_eq!(hull_disagreement(&a, &a, &dirs), 0.0);
        prop_assert!((hull_disagreement(&a, &b, &dirs) - hull_disagreement(&b, &a, &dirs)).abs() < 1e-15);
    }

    #[test]
    fn adding_states_never_shrinks_the_hull(seed in any::<u64>()) {
        let mut rng = rng_for(seed, "prop-monotone");
        let a: Vec<PureState> = (0..3).map(|_| random_pure_state(2, &mut rng)).collect();
        let mut b = a.clone();
        b.push(random_pure_state(2, &mut rng));
        for x in probe_directions(2, 6, seed) {
            prop_assert!(support_function(&b, &x) >= support_function(&a, &x));
        }
    }
}
