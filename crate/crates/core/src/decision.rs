//! Expected-cost evaluation of composite repair decisions.
//!
//! System repair cost is the sum of per-component costs `L_i(mode, action)`,
//! so the expected cost of a composite decision under any joint belief equals
//! the sum of per-component expectations under the marginals. Ranking uses
//! that form; [`expected_cost`] evaluates the candidate sum directly.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::BeliefState;
use crate::error::{DiagnosisError, Result};
use crate::model::{Mode, SystemModel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    DontFix,
    Fix,
}

impl Action {
    pub fn short(self) -> &'static str {
        match self {
            Action::DontFix => "dont",
            Action::Fix => "fix",
        }
    }
}

/// Per-component repair cost over the implicit horizon of the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostTable<T = f64> {
    /// Cost of replacing the component, whatever its mode.
    pub fix_cost: T,
    /// Cost of leaving a broken component in place.
    pub broken_unrepaired_cost: T,
}

impl<T: Scalar> CostTable<T> {
    pub fn new(fix_cost: T, broken_unrepaired_cost: T) -> Result<Self> {
        let table = CostTable {
            fix_cost,
            broken_unrepaired_cost,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fix_cost", self.fix_cost),
            ("broken_unrepaired_cost", self.broken_unrepaired_cost),
        ] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(DiagnosisError::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub fn cost(&self, mode: Mode, action: Action) -> T {
        match (mode, action) {
            (_, Action::Fix) => self.fix_cost,
            (Mode::Ok, Action::DontFix) => T::zero(),
            (Mode::Broken, Action::DontFix) => self.broken_unrepaired_cost,
        }
    }

    /// Expected cost of `action` when the component is broken with probability `p_broken`.
    pub fn expected(&self, p_broken: T, action: Action) -> T {
        match action {
            Action::Fix => self.fix_cost,
            Action::DontFix => p_broken * self.broken_unrepaired_cost,
        }
    }

    /// `P(broken)` at which fixing and not fixing cost the same.
    pub fn break_even(&self) -> T {
        self.fix_cost / self.broken_unrepaired_cost
    }
}

/// One action per component, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompositeDecision {
    pub actions: Vec<Action>,
}

impl CompositeDecision {
    pub fn uniform(n: usize, action: Action) -> Self {
        CompositeDecision {
            actions: vec![action; n],
        }
    }

    /// Decision for bit pattern `bits`: first component is the most
    /// significant bit, dont-fix = 0 and fix = 1.
    pub fn from_bits(bits: usize, n: usize) -> Self {
        CompositeDecision {
            actions: (0..n)
                .map(|i| {
                    if bits >> (n - 1 - i) & 1 == 1 {
                        Action::Fix
                    } else {
                        Action::DontFix
                    }
                })
                .collect(),
        }
    }

    pub fn bits(&self) -> usize {
        self.actions
            .iter()
            .fold(0, |acc, &a| (acc << 1) | (a == Action::Fix) as usize)
    }

    /// Indices of components to replace.
    pub fn fix_set(&self) -> Vec<usize> {
        self.actions
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == Action::Fix)
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for CompositeDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.actions.iter().map(|a| a.short()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionEvaluation<T = f64> {
    pub decision: CompositeDecision,
    pub expected_cost: T,
}

fn check_decision<T: Scalar>(model: &SystemModel<T>, d: &CompositeDecision) -> Result<()> {
    if d.actions.len() != model.component_count() {
        return Err(DiagnosisError::InvalidDecision(format!(
            "{} actions for {} components",
            d.actions.len(),
            model.component_count()
        )));
    }
    Ok(())
}

fn check_belief<T: Scalar>(model: &SystemModel<T>, belief: &BeliefState<T>) -> Result<()> {
    if belief.component_count() != model.component_count() {
        return Err(DiagnosisError::invalid(
            "belief",
            "belief and model disagree on the component count",
        ));
    }
    Ok(())
}

/// `Σ_c P(c) · Σ_i L_i(c_i, d_i)`, summed over every candidate.
pub fn expected_cost<T: Scalar>(belief: &BeliefState<T>, model: &SystemModel<T>, d: &CompositeDecision) -> Result<T> {
    check_decision(model, d)?;
    check_belief(model, belief)?;
    let n = model.component_count();
    let components = model.components();
    Ok(belief
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > T::zero())
        .map(|(index, &w)| {
            let system_cost: T = (0..n)
                .map(|i| {
                    let mode = if index >> (n - 1 - i) & 1 == 1 {
                        Mode::Broken
                    } else {
                        Mode::Ok
                    };
                    components[i].cost.cost(mode, d.actions[i])
                })
                .sum();
            w * system_cost
        })
        .sum())
}

/// `Σ_i Σ_m P(M_i = m) · L_i(m, d_i)`, the marginal form of [`expected_cost`].
pub fn expected_cost_by_marginals<T: Scalar>(
    belief: &BeliefState<T>,
    model: &SystemModel<T>,
    d: &CompositeDecision,
) -> Result<T> {
    check_decision(model, d)?;
    check_belief(model, belief)?;
    let marginals = belief.marginals();
    Ok(model
        .components()
        .iter()
        .zip(&marginals)
        .zip(&d.actions)
        .map(|((c, m), &a)| m.ok * c.cost.cost(Mode::Ok, a) + m.broken * c.cost.cost(Mode::Broken, a))
        .sum())
}

fn by_cost_then_bits<T: Scalar>(a: &DecisionEvaluation<T>, b: &DecisionEvaluation<T>) -> Ordering {
    a.expected_cost
        .partial_cmp(&b.expected_cost)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.decision.bits().cmp(&b.decision.bits()))
}

/// Every composite decision, cheapest first. Ties resolve by bit pattern,
/// which puts dont-fix ahead of fix.
pub fn rank_decisions<T: Scalar>(
    belief: &BeliefState<T>,
    model: &SystemModel<T>,
) -> Result<Vec<DecisionEvaluation<T>>> {
    check_belief(model, belief)?;
    let count = model.candidate_count()?;
    let n = model.component_count();
    let marginals = belief.marginals();
    // per-component expected cost of each action
    let per_action: Vec<[T; 2]> = model
        .components()
        .iter()
        .zip(&marginals)
        .map(|(c, m)| {
            [
                c.cost.expected(m.broken, Action::DontFix),
                c.cost.expected(m.broken, Action::Fix),
            ]
        })
        .collect();
    let mut ranked: Vec<_> = (0..count)
        .map(|bits| {
            let decision = CompositeDecision::from_bits(bits, n);
            let expected_cost = decision
                .actions
                .iter()
                .zip(&per_action)
                .map(|(&a, costs)| costs[(a == Action::Fix) as usize])
                .sum();
            DecisionEvaluation {
                decision,
                expected_cost,
            }
        })
        .collect();
    ranked.sort_by(by_cost_then_bits);
    Ok(ranked)
}

/// Per-component argmin over marginals, valid for any number of components.
pub fn optimal_decision_factored<T: Scalar>(belief: &BeliefState<T>, model: &SystemModel<T>) -> DecisionEvaluation<T> {
    let mut actions = Vec::with_capacity(model.component_count());
    let mut total = T::zero();
    for (c, m) in model.components().iter().zip(belief.marginals()) {
        let dont = c.cost.expected(m.broken, Action::DontFix);
        let fix = c.cost.expected(m.broken, Action::Fix);
        if fix < dont {
            actions.push(Action::Fix);
            total = total + fix;
        } else {
            actions.push(Action::DontFix);
            total = total + dont;
        }
    }
    DecisionEvaluation {
        decision: CompositeDecision { actions },
        expected_cost: total,
    }
}
