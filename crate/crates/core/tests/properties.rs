use std::collections::BTreeMap;

use faultline_core::decision::{self, CompositeDecision};
use faultline_core::engine::{self, BeliefState};
use faultline_core::{circuits, Candidate, HazardModel, Observation, VariableKind};
use faultline_testkit::random_model;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hazard() -> impl Strategy<Value = HazardModel> {
    prop_oneof![
        (1.0f64..1000.0).prop_map(|m| HazardModel::from_mtbf(m).unwrap()),
        (0.3f64..4.0, 10.0f64..1000.0).prop_map(|(k, s)| HazardModel::weibull(k, s).unwrap()),
    ]
}

fn ordered_times() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..500.0, 0.0f64..500.0, 0.0f64..500.0).prop_map(|(a, b, c)| (a, a + b, a + b + c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn chapman_kolmogorov_constant_rate(mtbf in 1.0f64..1000.0, (a, b, c) in ordered_times()) {
        let m = HazardModel::from_mtbf(mtbf).unwrap();
        let composed = m.transition_matrix(a, b).unwrap().then(&m.transition_matrix(b, c).unwrap());
        let direct = m.transition_matrix(a, c).unwrap();
        for (x, y) in composed.as_array().iter().flatten().zip(direct.as_array().iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_normalized_and_broken_absorbing(h in hazard(), (a, b, _) in ordered_times()) {
        let tm = h.transition_matrix(a, b).unwrap();
        prop_assert_eq!(tm.p_broken_ok, 0.0);
        prop_assert_eq!(tm.p_broken_broken, 1.0);
        prop_assert!((tm.p_ok_ok + tm.p_ok_broken - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&tm.p_ok_broken));
    }

    #[test]
    fn failure_probability_monotone(h in hazard(), (a, b, c) in ordered_times()) {
        let p1 = h.conditional_failure_probability(a, b).unwrap();
        let p2 = h.conditional_failure_probability(a, c).unwrap();
        prop_assert!(p2 >= p1);
        prop_assert!((0.0..1.0).contains(&p1) || p1 == 1.0);
    }

    #[test]
    fn constant_rate_is_memoryless(mtbf in 1.0f64..1000.0, start in 0.0f64..1000.0, shift in 0.0f64..1000.0, len in 0.0f64..200.0) {
        let m = HazardModel::from_mtbf(mtbf).unwrap();
        let p = m.conditional_failure_probability(start, start + len).unwrap();
        let q = m.conditional_failure_probability(start + shift, start + shift + len).unwrap();
        prop_assert!((p - q).abs() < 1e-12);
    }

    #[test]
    fn weibull_unit_shape_equals_constant(scale in 1.0f64..1000.0, (a, b, _) in ordered_times()) {
        let w = HazardModel::weibull(1.0, scale).unwrap();
        let c = HazardModel::constant_rate(1.0 / scale).unwrap();
        prop_assert!((w.cumulative_hazard(b).unwrap() - c.cumulative_hazard(b).unwrap()).abs() < 1e-12);
        prop_assert!((w.conditional_failure_probability(a, b).unwrap()
            - c.conditional_failure_probability(a, b).unwrap()).abs() < 1e-12);
        let (tw, tc) = (w.transition_matrix(a, b).unwrap(), c.transition_matrix(a, b).unwrap());
        for (x, y) in tw.as_array().iter().flatten().zip(tc.as_array().iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((w.mtbf() - c.mtbf()).abs() < 1e-9 * scale);
    }

    #[test]
    fn advance_composes(t1 in 0.0f64..100.0, d1 in 0.0f64..100.0, d2 in 0.0f64..100.0) {
        let m = circuits::three_gate();
        let b = engine::initial_belief(&m, t1).unwrap();
        let two = engine::advance(&m, &engine::advance(&m, &b, t1 + d1).unwrap(), t1 + d1 + d2).unwrap();
        let one = engine::advance(&m, &b, t1 + d1 + d2).unwrap();
        for (x, y) in two.weights().iter().zip(one.weights()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_advance_is_pessimistic(seed in any::<u64>(), d in 0.0f64..200.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let model = random_model(&mut rng, n);
        let weights: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b = BeliefState::from_weights(&model, 10.0, weights).unwrap();
        let later = engine::advance(&model, &b, 10.0 + d).unwrap();
        for (before, after) in b.marginals().iter().zip(later.marginals()) {
            prop_assert!(after.broken >= before.broken - 1e-15);
        }
        prop_assert!((later.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn prior_matches_failure_probability(t in 0.0f64..2000.0) {
        let m = circuits::three_gate();
        let b = engine::initial_belief(&m, t).unwrap();
        for (c, marg) in m.components().iter().zip(b.marginals()) {
            let p = c.hazard.conditional_failure_probability(0.0, t).unwrap();
            prop_assert!((marg.broken - p).abs() < 1e-12);
        }
    }

    #[test]
    fn decision_forms_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5);
        let model = random_model(&mut rng, n);
        let weights: Vec<f64> = (0..1 << n).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
        prop_assume!(weights.iter().any(|&w| w > 0.0));
        let b = BeliefState::from_weights(&model, 0.0, weights).unwrap();
        for bits in 0..1 << n {
            let d = CompositeDecision::from_bits(bits, n);
            let joint = decision::expected_cost(&b, &model, &d).unwrap();
            let marg = decision::expected_cost_by_marginals(&b, &model, &d).unwrap();
            prop_assert!((joint - marg).abs() < 1e-12 * (1.0 + joint.abs()));
            prop_assert!(joint >= 0.0);
        }
        let ranked = decision::rank_decisions(&b, &model).unwrap();
        prop_assert_eq!(ranked.len(), 1 << n);
        for w in ranked.windows(2) {
            prop_assert!(w[0].expected_cost <= w[1].expected_cost);
        }
        let factored = decision::optimal_decision_factored(&b, &model);
        prop_assert!((factored.expected_cost - ranked[0].expected_cost).abs() < 1e-12);
        // same profile unless some other decision ties the optimum
        let tied = ranked.iter().filter(|e| (e.expected_cost - ranked[0].expected_cost).abs() < 1e-12).count();
        if tied == 1 {
            prop_assert_eq!(&factored.decision, &ranked[0].decision);
        }
    }

    #[test]
    fn consistent_candidates_reproduce_observation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let model = random_model(&mut rng, n);
        let mut assignments = BTreeMap::new();
        for v in model.variables() {
            if v.kind == VariableKind::Input || rng.gen_bool(0.5) {
                assignments.insert(v.name.clone(), rng.gen_range(0..2));
            }
        }
        let obs = Observation { time: 0.0, assignments: assignments.clone() };
        for c in model.enumerate_candidates().unwrap() {
            let values = model.simulate(&c, &assignments).unwrap();
            let agrees = assignments.iter().all(|(k, v)| values[k] == *v);
            prop_assert_eq!(model.likelihood(&c, &obs).unwrap() == 1.0, agrees);
        }
    }

    #[test]
    fn repair_keeps_normalization(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let model = random_model(&mut rng, n);
        let b = engine::initial_belief(&model, rng.gen_range(0.0..300.0)).unwrap();
        let ids: Vec<String> = model.component_ids().iter().filter(|_| rng.gen_bool(0.5)).map(|s| s.to_string()).collect();
        let r = engine::repair(&model, &b, &ids, b.time()).unwrap();
        prop_assert!((r.total() - 1.0).abs() < 1e-9);
        for id in &ids {
            prop_assert_eq!(engine::marginal(&model, &r, id).unwrap().broken, 0.0);
        }
    }
}

#[test]
fn weibull_breaks_memorylessness() {
    let w = HazardModel::weibull(2.5f64, 100.0).unwrap();
    let p = w.conditional_failure_probability(0.0, 20.0).unwrap();
    let q = w.conditional_failure_probability(50.0, 70.0).unwrap();
    assert!((p - q).abs() > 1e-3);
}

#[test]
fn all_ok_point_mass_marginals() {
    let m = circuits::three_gate();
    let b = BeliefState::point_mass(&m, 5.0, &Candidate::all_ok(3)).unwrap();
    for id in ["A", "O", "X"] {
        assert_eq!(engine::marginal(&m, &b, id).unwrap().ok, 1.0);
    }
    assert!(engine::marginal(&m, &b, "Z").is_err());
}

#[test]
fn single_precision_reproduces_scenario1() {
    let m = circuits::three_gate_as::<f32>();
    let prior = engine::initial_belief(&m, 90.0f32).unwrap();
    let obs = Observation::new(90.0f32, [("I1", 1), ("I2", 1), ("I3", 0), ("I6", 0)]);
    let post = engine::assimilate(&m, &prior, &obs).unwrap();
    assert!((post.weights()[0] - 0.6126).abs() < 5e-4);
    let best = &decision::rank_decisions(&post, &m).unwrap()[0];
    assert!((best.expected_cost - 5.0).abs() < 5e-4);
}
