//! Reference computations and random scenario generators for testing
//! `faultline-core`.
//!
//! The [`oracle`] module recomputes beliefs the slow way: dense candidate
//! transition matrices built entry by entry, explicit double sums, its own
//! forward evaluation of the wiring and closed-form priors. It shares no code
//! path with the engine beyond the model description and `Behavior::eval`.

pub mod oracle;

use std::collections::BTreeMap;

use faultline_core::model::{Behavior, Gate, TruthRow};
use faultline_core::ComponentSpec;
use faultline_core::{CostTable, Event, HazardModel, Observation, SystemModel, Value, Variable, VariableKind};
use rand::seq::SliceRandom;
use rand::Rng;

/// A model with an event script that is consistent by construction.
#[derive(Debug, Clone)]
pub struct RandomCase {
    pub model: SystemModel,
    pub t0: f64,
    pub events: Vec<Event>,
}

pub fn random_hazard<R: Rng>(rng: &mut R) -> HazardModel {
    if rng.gen_bool(0.6) {
        HazardModel::from_mtbf(rng.gen_range(20.0..500.0)).unwrap()
    } else {
        HazardModel::weibull(rng.gen_range(0.5..3.0), rng.gen_range(30.0..400.0)).unwrap()
    }
}

pub fn random_costs<R: Rng>(rng: &mut R) -> CostTable {
    CostTable::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..30.0)).unwrap()
}

fn random_behavior<R: Rng>(rng: &mut R, arity: usize) -> Behavior {
    match rng.gen_range(0..3) {
        0 => Behavior::StuckAt(rng.gen_range(0..2)),
        1 if arity == 1 => Behavior::Gate(*[Gate::Not, Gate::Buffer].choose(rng).unwrap()),
        1 => Behavior::Gate(
            *[Gate::And, Gate::Or, Gate::Xor, Gate::Nand, Gate::Nor]
                .choose(rng)
                .unwrap(),
        ),
        _ => Behavior::table((0..1usize << arity).map(|bits| TruthRow {
            inputs: (0..arity).map(|k| ((bits >> k) & 1) as Value).collect(),
            output: rng.gen_range(0..2),
        })),
    }
}

/// Random acyclic binary circuit with `n` components.
pub fn random_model<R: Rng>(rng: &mut R, n: usize) -> SystemModel {
    let n_inputs = rng.gen_range(1..=3);
    let mut variables: Vec<Variable> = (0..n_inputs)
        .map(|i| Variable::binary(format!("in{i}"), VariableKind::Input))
        .collect();
    let mut available: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let arity = rng.gen_range(1..=2.min(available.len()).max(1));
        let inputs: Vec<String> = available.choose_multiple(rng, arity).cloned().collect();
        let output = format!("v{i}");
        components.push(ComponentSpec {
            id: format!("C{i}"),
            hazard: random_hazard(rng),
            ok: random_behavior(rng, inputs.len()),
            broken: random_behavior(rng, inputs.len()),
            inputs,
            output: output.clone(),
            cost: random_costs(rng),
        });
        variables.push(Variable::binary(output.clone(), VariableKind::Internal));
        available.push(output);
    }
    let model = SystemModel::new(variables, components, 0.0);
    assert!(
        model.is_valid(),
        "generator produced an invalid model: {}",
        model.validate()
    );
    model
}

fn sample_lifetime<R: Rng>(rng: &mut R, hazard: &HazardModel) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    match *hazard {
        HazardModel::ConstantRate { rate } => -u.ln() / rate,
        HazardModel::Weibull { shape, scale } => scale * (-u.ln()).powf(shape.recip()),
    }
}

/// A random observation of the system as it truly is, so the script can
/// never be inconsistent.
fn observe<R: Rng>(rng: &mut R, model: &SystemModel, truth: &[bool], time: f64) -> Observation {
    let inputs: BTreeMap<String, Value> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VariableKind::Input)
        .map(|v| (v.name.clone(), rng.gen_range(0..2)))
        .collect();
    let values = oracle::evaluate(model, truth, &inputs);
    let mut assignments = inputs;
    for v in model.variables().iter().filter(|v| v.kind == VariableKind::Internal) {
        if rng.gen_bool(0.5) {
            assignments.insert(v.name.clone(), values[&v.name]);
        }
    }
    Observation { time, assignments }
}

/// Random model with `1..=max_components` components and an event script
/// sampled from a simulated true failure history.
pub fn random_case<R: Rng>(rng: &mut R, max_components: usize, max_events: usize) -> RandomCase {
    let n = rng.gen_range(1..=max_components);
    let model = random_model(rng, n);
    let t0 = rng.gen_range(0.0..50.0);
    // failure instant of each installed unit
    let mut fails_at: Vec<f64> = model
        .components()
        .iter()
        .map(|c| sample_lifetime(rng, &c.hazard))
        .collect();
    let mut time = t0;
    let mut events = Vec::new();
    for _ in 0..rng.gen_range(0..=max_events) {
        if rng.gen_bool(0.7) {
            time += rng.gen_range(0.0..60.0);
        }
        if rng.gen_bool(0.25) {
            let mut ids = Vec::new();
            for (i, c) in model.components().iter().enumerate() {
                if rng.gen_bool(0.5) {
                    fails_at[i] = time + sample_lifetime(rng, &c.hazard);
                    ids.push(c.id.clone());
                }
            }
            events.push(Event::Repair { time, components: ids });
        } else {
            let truth: Vec<bool> = fails_at.iter().map(|&f| f <= time).collect();
            events.push(Event::Observe(observe(rng, &model, &truth, time)));
        }
    }
    RandomCase { model, t0, events }
}
