//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the report is always printed; exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use faultline_core::decision::{self, CompositeDecision};
use faultline_core::engine::{self, BeliefState, Event};
use faultline_core::{circuits, Action, Candidate, HazardModel, Mode, Observation, SystemModel, VariableKind};
use faultline_testkit::{oracle, random_case, random_hazard, random_model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TABLE_TOL: f64 = 5e-4;
const ORACLE_TOL: f64 = 1e-12;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{label}: got {got:.6}, want {want:.4}")
    })
}

fn cand(s: &str) -> Candidate {
    Candidate {
        modes: s
            .split_whitespace()
            .map(|m| if m == "b" { Mode::Broken } else { Mode::Ok })
            .collect(),
    }
}

fn decision(s: &str) -> CompositeDecision {
    CompositeDecision {
        actions: s
            .split_whitespace()
            .map(|a| if a == "fix" { Action::Fix } else { Action::DontFix })
            .collect(),
    }
}

struct Expected<'a> {
    priors: Option<[f64; 3]>,
    /// Nonzero posterior rows; all other candidates must be zero.
    posterior: &'a [(&'a str, f64)],
    /// Full decision table in ranked order.
    costs: &'a [(&'a str, f64)],
}

fn check_tables(model: &SystemModel, prior: &BeliefState, post: &BeliefState, want: &Expected) -> Check {
    if let Some(priors) = want.priors {
        for (i, p) in priors.iter().enumerate() {
            close(&format!("prior {i}"), prior.marginal_at(i).broken, *p, TABLE_TOL)?;
        }
    }
    let mut mass = 0.0;
    for (c, p) in want.posterior {
        close(&format!("P({c})"), post.probability(&cand(c)), *p, TABLE_TOL)?;
        mass += post.probability(&cand(c));
    }
    close("mass outside listed rows", 1.0 - mass, 0.0, 1e-12)?;
    let ranked = decision::rank_decisions(post, model).map_err(|e| e.to_string())?;
    ensure(ranked.len() == want.costs.len(), || {
        format!("{} decisions ranked", ranked.len())
    })?;
    for (i, (d, cost)) in want.costs.iter().enumerate() {
        ensure(ranked[i].decision == decision(d), || {
            format!("rank {i}: {} instead of {d}", ranked[i].decision)
        })?;
        close(&format!("cost of {d}"), ranked[i].expected_cost, *cost, TABLE_TOL)?;
    }
    let factored = decision::optimal_decision_factored(post, model);
    ensure(factored.decision == ranked[0].decision, || {
        "factored optimum differs from ranking head".into()
    })?;
    Ok(format!(
        "optimum {} = {:.4}",
        ranked[0].decision, ranked[0].expected_cost
    ))
}

fn single_observation(t: f64, obs: [i64; 4], want: &Expected) -> Check {
    let m = circuits::three_gate();
    let prior = engine::initial_belief(&m, t).map_err(|e| e.to_string())?;
    let o = Observation::new(t, [("I1", obs[0]), ("I2", obs[1]), ("I3", obs[2]), ("I6", obs[3])]);
    let post = engine::assimilate(&m, &prior, &o).map_err(|e| e.to_string())?;
    check_tables(&m, &prior, &post, want)
}

fn healthy_at_10h() -> Check {
    single_observation(
        10.0,
        [1, 1, 0, 0],
        &Expected {
            priors: Some([0.0952, 0.0392, 0.0282]),
            posterior: &[("ok ok ok", 0.9957), ("b b ok", 0.0043)],
            costs: &[
                ("dont dont dont", 0.0855),
                ("fix dont dont", 2.0513),
                ("dont fix dont", 3.0342),
                ("dont dont fix", 4.0855),
                ("fix fix dont", 5.0000),
                ("fix dont fix", 6.0513),
                ("dont fix fix", 7.0342),
                ("fix fix fix", 9.0000),
            ],
        },
    )
}

fn healthy_at_90h() -> Check {
    single_observation(
        90.0,
        [1, 1, 0, 0],
        &Expected {
            priors: Some([0.5934, 0.3023, 0.2267]),
            posterior: &[("ok ok ok", 0.6126), ("b b ok", 0.3874)],
            costs: &[
                ("fix fix dont", 5.0000),
                ("dont fix dont", 6.0995),
                ("fix dont dont", 6.6493),
                ("dont dont dont", 7.7488),
                ("fix fix fix", 9.0000),
                ("dont fix fix", 10.0995),
                ("fix dont fix", 10.6493),
                ("dont dont fix", 11.7488),
            ],
        },
    )
}

const ANOMALY_POSTERIOR: &[(&str, f64)] = &[
    ("ok ok b", 0.7558),
    ("b ok b", 0.1673),
    ("ok b b", 0.0629),
    ("b b b", 0.0139),
];

fn anomaly_at_20h() -> Check {
    single_observation(
        20.0,
        [0, 0, 0, 1],
        &Expected {
            priors: None,
            posterior: ANOMALY_POSTERIOR,
            costs: &[
                ("dont dont fix", 6.3728),
                ("fix dont fix", 6.9226),
                ("dont fix fix", 8.4502),
                ("fix fix fix", 9.0000),
                ("dont dont dont", 16.3728),
                ("fix dont dont", 16.9226),
                ("dont fix dont", 18.4502),
                ("fix fix dont", 19.0000),
            ],
        },
    )
}

fn repair_and_recur() -> Check {
    let m = circuits::three_gate();
    let obs = |t: f64, out: i64| Observation::new(t, [("I1", 0), ("I2", 0), ("I3", 0), ("I6", out)]);
    let events = vec![
        Event::Observe(obs(20.0, 1)),
        Event::Repair {
            time: 20.0,
            components: vec!["X".into()],
        },
        Event::Observe(obs(20.0, 0)),
        Event::Observe(obs(40.0, 1)),
    ];
    let traj = engine::run_events(&m, 20.0, &events).map_err(|e| e.to_string())?;
    for (c, p) in ANOMALY_POSTERIOR {
        close(
            &format!("first step P({c})"),
            traj.steps[0].posterior.probability(&cand(c)),
            *p,
            TABLE_TOL,
        )?;
    }
    let last = traj.steps.last().unwrap();
    check_tables(
        &m,
        &last.prior,
        &last.posterior,
        &Expected {
            priors: None,
            posterior: &[
                ("ok ok b", 0.5712),
                ("b ok b", 0.2809),
                ("ok b b", 0.0991),
                ("b b b", 0.0487),
            ],
            costs: &[
                ("fix dont fix", 7.7743),
                ("dont dont fix", 8.4117),
                ("fix fix fix", 9.0000),
                ("dont fix fix", 9.6374),
                ("fix dont dont", 17.7743),
                ("dont dont dont", 18.4117),
                ("fix fix dont", 19.0000),
                ("dont fix dont", 19.6374),
            ],
        },
    )
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_observation(rng: &mut ChaCha8Rng, model: &SystemModel, t: f64) -> Observation {
    let mut pairs = Vec::new();
    for v in model.variables() {
        if v.kind == VariableKind::Input || rng.gen_bool(0.5) {
            pairs.push((v.name.clone(), rng.gen_range(0..2)));
        }
    }
    Observation::new(t, pairs)
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut worst, mut advances) = (0.0f64, 0);
    const CASES: usize = 200;
    for case in 0..CASES {
        let c = random_case(&mut rng, 4, 6);
        let traj = engine::run_events(&c.model, c.t0, &c.events).map_err(|e| format!("case {case}: {e}"))?;
        let mut belief = &traj.initial;
        for step in &traj.steps {
            let dense = oracle::advance_dense(
                &c.model,
                belief.weights(),
                belief.ages(),
                belief.time(),
                step.event.time(),
            );
            worst = worst.max(max_diff(step.prior.weights(), &dense));
            advances += 1;
            belief = &step.posterior;
        }
        let filtered = oracle::filter_dense(&c.model, c.t0, &c.events).ok_or("oracle rejected a consistent script")?;
        worst = worst.max(max_diff(traj.last().weights(), &filtered));
    }
    let mut direct = 0;
    while direct < CASES {
        let n = rng.gen_range(1..=4);
        let model = random_model(&mut rng, n);
        let t1 = rng.gen_range(0.0..100.0);
        let t2 = t1 + rng.gen_range(0.0..100.0);
        let (o1, o2) = (
            random_observation(&mut rng, &model, t1),
            random_observation(&mut rng, &model, t2),
        );
        let Some(want) = oracle::two_observation_posterior(&model, &o1, &o2) else {
            continue;
        };
        let traj =
            engine::run_events(&model, t1, &[Event::Observe(o1), Event::Observe(o2)]).map_err(|e| e.to_string())?;
        worst = worst.max(max_diff(traj.last().weights(), &want));
        direct += 1;
    }
    ensure(worst <= ORACLE_TOL, || format!("max deviation {worst:e}"))?;
    Ok(format!(
        "{CASES} scripted models ({advances} advances), {direct} two-observation posteriors, max deviation {worst:.1e}"
    ))
}

const PROPERTY_CASES: usize = 1000;

fn property(name: &str, seed: u64, mut check: impl FnMut(&mut ChaCha8Rng) -> Result<(), String>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..PROPERTY_CASES {
        check(&mut rng).map_err(|e| format!("{name}, case {i}: {e}"))?;
    }
    Ok(())
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..1usize << n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    w[0] += 1e-3;
    w
}

fn property_suites() -> Check {
    let times = |rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(0.0..500.0);
        let b = a + rng.gen_range(0.0..500.0);
        (a, b, b + rng.gen_range(0.0..500.0))
    };
    property("chapman-kolmogorov", 1, |rng| {
        let h = HazardModel::from_mtbf(rng.gen_range(1.0..1000.0)).unwrap();
        let (a, b, c) = times(rng);
        let composed = h
            .transition_matrix(a, b)
            .unwrap()
            .then(&h.transition_matrix(b, c).unwrap());
        let direct = h.transition_matrix(a, c).unwrap();
        let d = max_diff(composed.as_array().as_flattened(), direct.as_array().as_flattened());
        ensure(d <= ORACLE_TOL, || format!("deviation {d:e}"))
    })?;
    property("absorbing broken state and row normalization", 2, |rng| {
        let h = random_hazard(rng);
        let (a, b, _) = times(rng);
        let tm = h.transition_matrix(a, b).unwrap();
        ensure(tm.p_broken_ok == 0.0 && tm.p_broken_broken == 1.0, || format!("{tm:?}"))?;
        ensure((tm.p_ok_ok + tm.p_ok_broken - 1.0).abs() <= ORACLE_TOL, || {
            format!("{tm:?}")
        })
    })?;
    property("prior/transition consistency", 3, |rng| {
        let n = rng.gen_range(1..=4);
        let model = random_model(rng, n);
        let t = rng.gen_range(0.0..1000.0);
        let b = engine::initial_belief(&model, t).unwrap();
        for (i, c) in model.components().iter().enumerate() {
            let tm = c.hazard.transition_matrix(0.0, t).unwrap();
            let p = c.hazard.conditional_failure_probability(0.0, t).unwrap();
            ensure((b.marginal_at(i).broken - p).abs() <= ORACLE_TOL, || "marginal".into())?;
            ensure((tm.p_ok_broken - p).abs() <= ORACLE_TOL, || "matrix".into())?;
        }
        Ok(())
    })?;
    property("monotone P(broken) under pure advance", 4, |rng| {
        let n = rng.gen_range(1..=4);
        let model = random_model(rng, n);
        let b = BeliefState::from_weights(&model, 10.0, random_weights(rng, n)).unwrap();
        let later = engine::advance(&model, &b, 10.0 + rng.gen_range(0.0..300.0)).unwrap();
        for (x, y) in b.marginals().iter().zip(later.marginals()) {
            ensure(y.broken >= x.broken - 1e-15, || format!("{} -> {}", x.broken, y.broken))?;
        }
        Ok(())
    })?;
    property("factored vs exhaustive decision", 5, |rng| {
        let n = rng.gen_range(1..=5);
        let model = random_model(rng, n);
        let b = BeliefState::from_weights(&model, 0.0, random_weights(rng, n)).unwrap();
        let ranked = decision::rank_decisions(&b, &model).unwrap();
        let factored = decision::optimal_decision_factored(&b, &model);
        let d = (factored.expected_cost - ranked[0].expected_cost).abs();
        ensure(d <= ORACLE_TOL, || format!("costs differ by {d:e}"))
    })?;
    property("expected-cost decomposition", 6, |rng| {
        let n = rng.gen_range(1..=5);
        let model = random_model(rng, n);
        let b = BeliefState::from_weights(&model, 0.0, random_weights(rng, n)).unwrap();
        let d = CompositeDecision::from_bits(rng.gen_range(0..1usize << n), n);
        let joint = decision::expected_cost(&b, &model, &d).unwrap();
        let marg = decision::expected_cost_by_marginals(&b, &model, &d).unwrap();
        ensure((joint - marg).abs() <= ORACLE_TOL * (1.0 + joint), || {
            format!("{joint} vs {marg}")
        })
    })?;
    Ok(format!("6 suites (7 properties) x {PROPERTY_CASES} cases"))
}

fn a_action(model: &SystemModel, t: f64) -> Action {
    let b = engine::initial_belief(model, t).unwrap();
    let head = &decision::rank_decisions(&b, model).unwrap()[0];
    let factored = decision::optimal_decision_factored(&b, model);
    assert_eq!(head.decision.actions[0], factored.decision.actions[0]);
    head.decision.actions[0]
}

fn maintenance_threshold() -> Check {
    let m = circuits::three_gate();
    let hazard = m.components()[0].hazard;
    let p = |t: f64| hazard.conditional_failure_probability(0.0, t).unwrap();
    let break_even = m.components()[0].cost.break_even();
    close("break-even", break_even, 0.25, 0.0)?;
    for k in 0..=2000 {
        let t = k as f64 * 0.1;
        let want = if p(t) > break_even {
            Action::Fix
        } else {
            Action::DontFix
        };
        ensure(a_action(&m, t) == want, || format!("t={t}: wrong action at P={}", p(t)))?;
    }
    let (mut lo, mut hi) = (0.0, 200.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if a_action(&m, mid) == Action::Fix {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    close("P(A broken) at flip", p(hi), 0.25, 1e-9)?;
    Ok(format!("flip at t={hi:.6} h, P(A broken)={:.12}", p(hi)))
}

fn golden_stability() -> Check {
    let mut bytes = 0;
    for (name, args) in common::golden_cases() {
        let first = common::run_case(&args);
        let second = common::run_case(&args);
        ensure(first == second, || format!("{name}: output differs between runs"))?;
        let golden = std::fs::read(common::golden_dir().join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure(first == golden, || format!("{name}: output differs from golden file"))?;
        bytes += first.len();
    }
    Ok(format!(
        "4 outputs, {bytes} bytes, identical across runs and to golden files"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("healthy observation at 10 h", healthy_at_10h, Duration::from_secs(1)),
        ("healthy observation at 90 h", healthy_at_90h, Duration::from_secs(1)),
        ("anomaly at 20 h", anomaly_at_20h, Duration::from_secs(1)),
        ("repair, recurrence at 40 h", repair_and_recur, Duration::from_secs(1)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(30)),
        ("property suites", property_suites, Duration::from_secs(60)),
        (
            "preventive-maintenance threshold",
            maintenance_threshold,
            Duration::from_secs(1),
        ),
        ("golden CLI output", golden_stability, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} ({:.0?})", i + 1, elapsed),
            Err(reason) => {
                failed += 1;
                println!("FAIL {}. {name}: {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
