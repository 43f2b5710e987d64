//! Temporal belief maintenance over fault candidates.
//!
//! The belief is the exact joint distribution over all `2^n` candidates,
//! stored densely in [`Candidate::index`] order. Three operations move it:
//!
//! - [`advance`]: persistence between two instants. Components fail
//!   independently, so the candidate transition is the tensor product of the
//!   per-component [`TransitionMatrix`]es and is applied one axis at a time.
//! - [`assimilate`]: conditioning on an observation with 0/1 likelihoods.
//! - [`repair`]: replace-with-new. The component's axis collapses onto `ok`
//!   and its unit epoch resets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DiagnosisError, Result};
use crate::model::{Candidate, Mode, Observation, SystemModel};
use crate::reliability::TransitionMatrix;
use crate::scalar::Scalar;

/// Distribution over `{ok, broken}` for one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marginal<T = f64> {
    pub ok: T,
    pub broken: T,
}

impl<T: Scalar> Marginal<T> {
    pub fn get(&self, mode: Mode) -> T {
        match mode {
            Mode::Ok => self.ok,
            Mode::Broken => self.broken,
        }
    }
}

/// Filtered joint distribution over candidates at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState<T = f64> {
    time: T,
    weights: Vec<T>,
    /// Per component, the epoch of the physical unit currently installed.
    ages: Vec<T>,
}

impl<T: Scalar> BeliefState<T> {
    /// Point mass on `candidate` with every unit's epoch at `time`.
    pub fn point_mass(model: &SystemModel<T>, time: T, candidate: &Candidate) -> Result<Self> {
        let count = model.candidate_count()?;
        if candidate.modes.len() != model.component_count() {
            return Err(DiagnosisError::invalid("candidate", "does not cover every component"));
        }
        let mut weights = vec![T::zero(); count];
        weights[candidate.index()] = T::one();
        Ok(BeliefState {
            time,
            weights,
            ages: vec![time; model.component_count()],
        })
    }

    /// Belief from explicit weights (normalized here), epochs at `time`.
    pub fn from_weights(model: &SystemModel<T>, time: T, weights: Vec<T>) -> Result<Self> {
        let count = model.candidate_count()?;
        if weights.len() != count {
            return Err(DiagnosisError::invalid(
                "weights",
                format!("expected {count} entries, got {}", weights.len()),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= T::zero())) {
            return Err(DiagnosisError::invalid("weights", "must be finite and non-negative"));
        }
        let total: T = weights.iter().copied().sum();
        if total <= T::zero() {
            return Err(DiagnosisError::invalid("weights", "total mass is zero"));
        }
        Ok(BeliefState {
            time,
            weights: weights.into_iter().map(|w| w / total).collect(),
            ages: vec![time; model.component_count()],
        })
    }

    /// Overrides the unit epochs; each must lie in `[0, time]`.
    pub fn with_ages(mut self, ages: Vec<T>) -> Result<Self> {
        if ages.len() != self.ages.len() || ages.iter().any(|&a| !(a >= T::zero() && a <= self.time)) {
            return Err(DiagnosisError::invalid(
                "ages",
                "one epoch per component, within [0, time]",
            ));
        }
        self.ages = ages;
        Ok(self)
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Reference time `t_ok` of each component's current unit.
    pub fn ages(&self) -> &[T] {
        &self.ages
    }

    pub fn component_count(&self) -> usize {
        self.ages.len()
    }

    pub fn probability(&self, candidate: &Candidate) -> T {
        self.weights[candidate.index()]
    }

    pub fn marginal_at(&self, component: usize) -> Marginal<T> {
        let n = self.component_count();
        let bit = 1usize << (n - 1 - component);
        let mut broken = T::zero();
        let mut ok = T::zero();
        for (i, &w) in self.weights.iter().enumerate() {
            if i & bit != 0 {
                broken = broken + w;
            } else {
                ok = ok + w;
            }
        }
        Marginal { ok, broken }
    }

    pub fn marginals(&self) -> Vec<Marginal<T>> {
        (0..self.component_count()).map(|i| self.marginal_at(i)).collect()
    }

    /// Candidates with non-zero weight, most probable first, ties by index.
    pub fn ranked(&self) -> Vec<(Candidate, T)> {
        let n = self.component_count();
        let mut rows: Vec<_> = self.weights.iter().enumerate().map(|(i, &w)| (i, w)).collect();
        rows.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        rows.into_iter()
            .map(|(i, w)| (Candidate::from_index(i, n), w))
            .collect()
    }

    /// Total probability mass (1 up to rounding for any reachable state).
    pub fn total(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

impl<T: Scalar> fmt::Display for BeliefState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "belief@{}", self.time)?;
        for (c, w) in self.ranked().into_iter().filter(|(_, w)| *w > T::zero()) {
            write!(f, " {c}={w:.4}")?;
        }
        Ok(())
    }
}

/// A time-tagged input to the belief fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Event<T = f64> {
    Observe(Observation<T>),
    Repair { time: T, components: Vec<String> },
}

impl<T: Scalar> Event<T> {
    pub fn time(&self) -> T {
        match self {
            Event::Observe(o) => o.time,
            Event::Repair { time, .. } => *time,
        }
    }
}

impl<T: Scalar> fmt::Display for Event<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Observe(o) => write!(f, "observe {o} at t={}", o.time),
            Event::Repair { time, components } => {
                write!(f, "repair {{{}}} at t={time}", components.join(", "))
            }
        }
    }
}

fn require_valid<T: Scalar>(model: &SystemModel<T>) -> Result<()> {
    if model.is_valid() {
        Ok(())
    } else {
        Err(DiagnosisError::InvalidModel(model.validate()))
    }
}

fn check_shape<T: Scalar>(model: &SystemModel<T>, belief: &BeliefState<T>) -> Result<()> {
    if belief.component_count() != model.component_count() {
        return Err(DiagnosisError::invalid(
            "belief",
            "belief and model disagree on the component count",
        ));
    }
    Ok(())
}

/// All-ok at commissioning, advanced to `t0`.
pub fn initial_belief<T: Scalar>(model: &SystemModel<T>, t0: T) -> Result<BeliefState<T>> {
    require_valid(model)?;
    let start = model.commissioning_time();
    if !(start.is_finite() && start >= T::zero()) {
        return Err(DiagnosisError::InvalidTime(format!(
            "commissioning time {start} must be finite and >= 0"
        )));
    }
    if t0 < start || !t0.is_finite() {
        return Err(DiagnosisError::InvalidTime(format!(
            "t0={t0} precedes commissioning at {start}"
        )));
    }
    let belief = BeliefState::point_mass(model, start, &Candidate::all_ok(model.component_count()))?;
    advance(model, &belief, t0)
}

/// Per-component transition over `[belief.time, t2]`, measured from each
/// unit's epoch.
pub fn component_transitions<T: Scalar>(
    model: &SystemModel<T>,
    belief: &BeliefState<T>,
    t2: T,
) -> Result<Vec<TransitionMatrix<T>>> {
    check_shape(model, belief)?;
    if t2 < belief.time || !t2.is_finite() {
        return Err(DiagnosisError::InvalidTime(format!(
            "cannot move from t={} back to t={t2}",
            belief.time
        )));
    }
    model
        .components()
        .iter()
        .zip(&belief.ages)
        .map(|(c, &epoch)| c.hazard.transition_matrix(belief.time - epoch, t2 - epoch))
        .collect()
}

/// Persistence step from `belief.time` to `t2`.
pub fn advance<T: Scalar>(model: &SystemModel<T>, belief: &BeliefState<T>, t2: T) -> Result<BeliefState<T>> {
    let transitions = component_transitions(model, belief, t2)?;
    let n = model.component_count();
    let mut weights = belief.weights.clone();
    for (i, tm) in transitions.iter().enumerate() {
        let stride = 1usize << (n - 1 - i);
        for block in (0..weights.len()).step_by(2 * stride) {
            for ok_idx in block..block + stride {
                let br_idx = ok_idx + stride;
                let (ok, br) = (weights[ok_idx], weights[br_idx]);
                weights[ok_idx] = ok * tm.p_ok_ok + br * tm.p_broken_ok;
                weights[br_idx] = ok * tm.p_ok_broken + br * tm.p_broken_broken;
            }
        }
    }
    Ok(BeliefState {
        time: t2,
        weights,
        ages: belief.ages.clone(),
    })
}

/// Conditions on `obs`, which must be stamped at `belief.time`.
pub fn assimilate<T: Scalar>(
    model: &SystemModel<T>,
    belief: &BeliefState<T>,
    obs: &Observation<T>,
) -> Result<BeliefState<T>> {
    check_shape(model, belief)?;
    if obs.time != belief.time {
        return Err(DiagnosisError::InvalidTime(format!(
            "observation at t={} does not match belief at t={}; advance first",
            obs.time, belief.time
        )));
    }
    let compiled = model.compile_observation(obs)?;
    let n = model.component_count();
    let mut weights = belief.weights.clone();
    for (i, w) in weights.iter_mut().enumerate() {
        if *w > T::zero() && !model.consistent(&Candidate::from_index(i, n), &compiled)? {
            *w = T::zero();
        }
    }
    let total: T = weights.iter().copied().sum();
    if total <= T::zero() {
        return Err(DiagnosisError::InconsistentObservation {
            time: obs.time.to_string(),
            assignments: obs.to_string(),
        });
    }
    weights.iter_mut().for_each(|w| *w = *w / total);
    Ok(BeliefState {
        time: belief.time,
        weights,
        ages: belief.ages.clone(),
    })
}

/// Replaces the listed components with new units at `t == belief.time`.
pub fn repair<T: Scalar, S: AsRef<str>>(
    model: &SystemModel<T>,
    belief: &BeliefState<T>,
    components: &[S],
    t: T,
) -> Result<BeliefState<T>> {
    check_shape(model, belief)?;
    if t != belief.time {
        return Err(DiagnosisError::InvalidTime(format!(
            "repair at t={t} does not match belief at t={}; advance first",
            belief.time
        )));
    }
    let indices = components
        .iter()
        .map(|id| model.component_index(id.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let n = model.component_count();
    let mut next = belief.clone();
    for i in indices {
        let stride = 1usize << (n - 1 - i);
        for block in (0..next.weights.len()).step_by(2 * stride) {
            for ok_idx in block..block + stride {
                let moved = next.weights[ok_idx + stride];
                next.weights[ok_idx] = next.weights[ok_idx] + moved;
                next.weights[ok_idx + stride] = T::zero();
            }
        }
        next.ages[i] = t;
    }
    Ok(next)
}

/// Marginal of the component with the given id.
pub fn marginal<T: Scalar>(model: &SystemModel<T>, belief: &BeliefState<T>, id: &str) -> Result<Marginal<T>> {
    check_shape(model, belief)?;
    Ok(belief.marginal_at(model.component_index(id)?))
}

/// Result of applying one event: the belief advanced to the event time and
/// the belief after the event took effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<T = f64> {
    pub event: Event<T>,
    pub prior: BeliefState<T>,
    pub posterior: BeliefState<T>,
}

/// Advances to the event time, then conditions or repairs.
pub fn apply_event<T: Scalar>(model: &SystemModel<T>, belief: &BeliefState<T>, event: &Event<T>) -> Result<Step<T>> {
    let t = event.time();
    if t < T::zero() || t.is_nan() {
        return Err(DiagnosisError::InvalidTime(format!("event time {t} is negative")));
    }
    let prior = advance(model, belief, t)?;
    let posterior = match event {
        Event::Observe(obs) => assimilate(model, &prior, obs)?,
        Event::Repair { time, components } => repair(model, &prior, components, *time)?,
    };
    Ok(Step {
        event: event.clone(),
        prior,
        posterior,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T = f64> {
    pub initial: BeliefState<T>,
    pub steps: Vec<Step<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn last(&self) -> &BeliefState<T> {
        self.steps.last().map_or(&self.initial, |s| &s.posterior)
    }

    /// Every belief in order, starting with the initial one.
    pub fn beliefs(&self) -> impl Iterator<Item = &BeliefState<T>> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.posterior))
    }
}

/// Folds `events` (same-time events in list order) from [`initial_belief`].
pub fn run_events<T: Scalar>(model: &SystemModel<T>, t0: T, events: &[Event<T>]) -> Result<Trajectory<T>> {
    let initial = initial_belief(model, t0)?;
    let mut steps: Vec<Step<T>> = Vec::with_capacity(events.len());
    for (index, event) in events.iter().enumerate() {
        let current = steps.last().map_or(&initial, |s| &s.posterior);
        let step = apply_event(model, current, event).map_err(|e| DiagnosisError::AtEvent {
            index,
            source: Box::new(e),
        })?;
        steps.push(step);
    }
    Ok(Trajectory { initial, steps })
}
