use faultline_core::engine::{self, Event};
use faultline_core::{circuits, Observation};
use faultline_testkit::{oracle, random_case, random_model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_close(got: &[f64], want: &[f64], tol: f64, ctx: &str) {
    assert_eq!(got.len(), want.len(), "{ctx}");
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= tol, "{ctx}: entry {i}: {g} vs {w}");
    }
}

#[test]
fn factorized_advance_matches_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..150 {
        let c = random_case(&mut rng, 4, 6);
        let traj = engine::run_events(&c.model, c.t0, &c.events).unwrap();
        let mut belief = traj.initial.clone();
        for step in &traj.steps {
            let t2 = step.event.time();
            let dense = oracle::advance_dense(&c.model, belief.weights(), belief.ages(), belief.time(), t2);
            assert_close(step.prior.weights(), &dense, 1e-12, &format!("case {case}"));
            belief = step.posterior.clone();
        }
    }
}

#[test]
fn run_events_matches_dense_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..150 {
        let c = random_case(&mut rng, 4, 6);
        let traj = engine::run_events(&c.model, c.t0, &c.events).unwrap();
        let want = oracle::filter_dense(&c.model, c.t0, &c.events).expect("script is consistent");
        assert_close(
            traj.last().weights(),
            &want,
            1e-12,
            &format!("case {case}: {:?}", c.events),
        );
    }
}

#[test]
fn two_observation_scripts_match_direct_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(1..=4);
        let model = random_model(&mut rng, n);
        let t1 = rng.gen_range(0.0..100.0);
        let t2 = t1 + rng.gen_range(0.0..100.0);
        let inputs: Vec<_> = model
            .variables()
            .iter()
            .filter(|v| v.kind == faultline_core::VariableKind::Input)
            .map(|v| v.name.clone())
            .collect();
        let internals: Vec<_> = model
            .variables()
            .iter()
            .filter(|v| v.kind == faultline_core::VariableKind::Internal)
            .map(|v| v.name.clone())
            .collect();
        let mut make = |t: f64| {
            let mut pairs: Vec<(String, i64)> = inputs.iter().map(|k| (k.clone(), rng.gen_range(0..2))).collect();
            for k in &internals {
                if rng.gen_bool(0.5) {
                    pairs.push((k.clone(), rng.gen_range(0..2)));
                }
            }
            Observation::new(t, pairs)
        };
        let (o1, o2) = (make(t1), make(t2));
        let Some(want) = oracle::two_observation_posterior(&model, &o1, &o2) else {
            continue;
        };
        let events = vec![Event::Observe(o1), Event::Observe(o2)];
        let traj = engine::run_events(&model, t1, &events).unwrap();
        assert_close(traj.last().weights(), &want, 1e-12, "two observations");
        checked += 1;
    }
}

#[test]
fn priors_are_closed_form() {
    let m = circuits::three_gate();
    for t in [0.0, 1.0, 10.0, 90.0, 1000.0] {
        let b = engine::initial_belief(&m, t).unwrap();
        assert_close(b.weights(), &oracle::prior_joint(&m, t), 1e-12, "prior");
    }
}

#[test]
fn scenario2_oracle() {
    let m = circuits::three_gate();
    let anomaly = |t| Observation::new(t, [("I1", 0), ("I2", 0), ("I3", 0), ("I6", 1)]);
    let events = vec![
        Event::Observe(anomaly(20.0)),
        Event::Repair {
            time: 20.0,
            components: vec!["X".into()],
        },
        Event::Observe(Observation::new(20.0, [("I1", 0), ("I2", 0), ("I3", 0), ("I6", 0)])),
        Event::Observe(anomaly(40.0)),
    ];
    let traj = engine::run_events(&m, 20.0, &events).unwrap();
    let want = oracle::filter_dense(&m, 20.0, &events).unwrap();
    assert_close(traj.last().weights(), &want, 1e-12, "scenario 2");
}
