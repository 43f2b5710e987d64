//! Slow, direct evaluation of the filtering equations.
//!
//! Candidates are indexed like the engine (first component = most significant
//! bit, broken = 1) so results can be compared entrywise.

use std::collections::BTreeMap;

use faultline_core::{Event, HazardModel, Observation, SystemModel, Value, VariableKind};

fn is_broken(index: usize, component: usize, n: usize) -> bool {
    index >> (n - 1 - component) & 1 == 1
}

/// Survival probability of a unit with epoch `epoch` over `[t1, t2]`,
/// written out per hazard family.
pub fn survival(hazard: &HazardModel, epoch: f64, t1: f64, t2: f64) -> f64 {
    match *hazard {
        HazardModel::ConstantRate { rate } => (-rate * (t2 - t1)).exp(),
        HazardModel::Weibull { shape, scale } => {
            let h = |t: f64| ((t - epoch) / scale).powf(shape);
            (h(t1) - h(t2)).exp()
        }
    }
}

/// `P(C[t2] = to | C[t1] = from)` as a dense `2^n x 2^n` matrix indexed
/// `[from][to]`, each entry a product of per-component persistence terms.
pub fn transition_dense(model: &SystemModel, epochs: &[f64], t1: f64, t2: f64) -> Vec<Vec<f64>> {
    let n = model.component_count();
    let size = 1usize << n;
    let survive: Vec<f64> = model
        .components()
        .iter()
        .zip(epochs)
        .map(|(c, &e)| survival(&c.hazard, e, t1, t2))
        .collect();
    (0..size)
        .map(|from| {
            (0..size)
                .map(|to| {
                    (0..n)
                        .map(|i| match (is_broken(from, i, n), is_broken(to, i, n)) {
                            (false, false) => survive[i],
                            (false, true) => 1.0 - survive[i],
                            (true, false) => 0.0,
                            (true, true) => 1.0,
                        })
                        .product()
                })
                .collect()
        })
        .collect()
}

/// `Σ_{c1} P(c2 | c1) · w(c1)` for every `c2`.
pub fn advance_dense(model: &SystemModel, weights: &[f64], epochs: &[f64], t1: f64, t2: f64) -> Vec<f64> {
    let tm = transition_dense(model, epochs, t1, t2);
    (0..weights.len())
        .map(|to| (0..weights.len()).map(|from| tm[from][to] * weights[from]).sum())
        .collect()
}

/// Forward evaluation by repeated sweeps until every variable is set.
pub fn evaluate(model: &SystemModel, broken: &[bool], inputs: &BTreeMap<String, Value>) -> BTreeMap<String, Value> {
    let mut values: BTreeMap<String, Value> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VariableKind::Input)
        .map(|v| (v.name.clone(), inputs[&v.name]))
        .collect();
    let mut pending: Vec<usize> = (0..model.component_count()).collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|&i| {
            let c = &model.components()[i];
            let Some(args) = c
                .inputs
                .iter()
                .map(|n| values.get(n).copied())
                .collect::<Option<Vec<_>>>()
            else {
                return true;
            };
            let behavior = if broken[i] { &c.broken } else { &c.ok };
            values.insert(c.output.clone(), behavior.eval(&args).expect("total behavior"));
            false
        });
        assert!(pending.len() < before, "wiring does not settle");
    }
    values
}

pub fn likelihood(model: &SystemModel, index: usize, obs: &Observation) -> f64 {
    let n = model.component_count();
    let broken: Vec<bool> = (0..n).map(|i| is_broken(index, i, n)).collect();
    let values = evaluate(model, &broken, &obs.assignments);
    let agrees = obs.assignments.iter().all(|(k, v)| values[k] == *v);
    if agrees {
        1.0
    } else {
        0.0
    }
}

/// Joint prior at `t` for a system that was all-ok at `commissioning`:
/// a product of independent per-component failure probabilities.
pub fn prior_joint(model: &SystemModel, t: f64) -> Vec<f64> {
    let n = model.component_count();
    let start = model.commissioning_time();
    let p_broken: Vec<f64> = model
        .components()
        .iter()
        .map(|c| 1.0 - survival(&c.hazard, start, start, t))
        .collect();
    (0..1usize << n)
        .map(|idx| {
            (0..n)
                .map(|i| {
                    if is_broken(idx, i, n) {
                        p_broken[i]
                    } else {
                        1.0 - p_broken[i]
                    }
                })
                .product()
        })
        .collect()
}

fn normalize(mut w: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= total);
    Some(w)
}

/// Filtered distribution after the whole script, computed with dense
/// matrices. `None` if some observation has zero probability.
pub fn filter_dense(model: &SystemModel, t0: f64, events: &[Event]) -> Option<Vec<f64>> {
    let n = model.component_count();
    let mut weights = prior_joint(model, t0);
    let mut epochs = vec![model.commissioning_time(); n];
    let mut time = t0;
    for event in events {
        let t = event.time();
        weights = advance_dense(model, &weights, &epochs, time, t);
        time = t;
        match event {
            Event::Observe(obs) => {
                let w: Vec<f64> = weights
                    .iter()
                    .enumerate()
                    .map(|(idx, &w)| w * likelihood(model, idx, obs))
                    .collect();
                weights = normalize(w)?;
            }
            Event::Repair { components, .. } => {
                let mut mask = 0usize;
                for id in components {
                    let i = model.component_index(id).ok()?;
                    mask |= 1 << (n - 1 - i);
                    epochs[i] = t;
                }
                let mut next = vec![0.0; weights.len()];
                for (idx, &w) in weights.iter().enumerate() {
                    next[idx & !mask] += w;
                }
                weights = next;
            }
        }
    }
    Some(weights)
}

/// `P(C[t2] | Ω[t1], Ω[t2])` written out as
/// `∝ P(Ω2 | c2) Σ_{c1} P(c2 | c1) P(Ω1 | c1) P(c1)` with no repairs.
pub fn two_observation_posterior(model: &SystemModel, first: &Observation, second: &Observation) -> Option<Vec<f64>> {
    let n = model.component_count();
    let size = 1usize << n;
    let prior = prior_joint(model, first.time);
    let epochs = vec![model.commissioning_time(); n];
    let tm = transition_dense(model, &epochs, first.time, second.time);
    let unnormalized: Vec<f64> = (0..size)
        .map(|c2| {
            let predictive: f64 = (0..size)
                .map(|c1| tm[c1][c2] * likelihood(model, c1, first) * prior[c1])
                .sum();
            likelihood(model, c2, second) * predictive
        })
        .collect();
    normalize(unnormalized)
}
