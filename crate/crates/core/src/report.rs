//! Tabular diagnosis reports shared by the CLI and the HTTP service.
//!
//! A [`ReportBundle`] holds full-precision values; the text rendering rounds
//! probabilities and costs to four decimals with a fixed row order so that
//! output is byte-stable.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::decision::{self, Action, DecisionEvaluation};
use crate::engine::BeliefState;
use crate::model::{Mode, SystemModel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorRow {
    pub component: String,
    /// Hours since the installed unit's epoch.
    pub uptime: f64,
    pub mtbf: f64,
    pub p_broken: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRow {
    pub modes: Vec<Mode>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub component: String,
    pub p_broken: f64,
    /// Epoch of the installed unit (commissioning or last replacement).
    pub epoch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRow {
    pub actions: Vec<Action>,
    pub expected_cost: f64,
}

impl<T: Scalar> From<&DecisionEvaluation<T>> for DecisionRow {
    fn from(e: &DecisionEvaluation<T>) -> Self {
        DecisionRow {
            actions: e.decision.actions.clone(),
            expected_cost: e.expected_cost.as_f64(),
        }
    }
}

/// Priors, posterior and ranked decisions at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    pub components: Vec<String>,
    /// Failure probabilities before the event's evidence was applied.
    pub priors: Vec<PriorRow>,
    /// Candidates by descending probability, ties by bit pattern.
    pub posterior: Vec<PosteriorRow>,
    pub marginals: Vec<MarginalRow>,
    /// All composite decisions by ascending expected cost; empty when there
    /// are too many to enumerate.
    pub decisions: Vec<DecisionRow>,
    /// Per-component optimum, always present.
    pub optimal: DecisionRow,
}

impl ReportBundle {
    /// `prior` is the belief advanced to the report time before any evidence;
    /// `posterior` the belief after it.
    pub fn new<T: Scalar>(
        model: &SystemModel<T>,
        prior: &BeliefState<T>,
        posterior: &BeliefState<T>,
        event: Option<String>,
    ) -> Self {
        let ids: Vec<String> = model.component_ids().into_iter().map(String::from).collect();
        let priors = model
            .components()
            .iter()
            .zip(prior.marginals())
            .zip(prior.ages())
            .map(|((c, m), &epoch)| PriorRow {
                component: c.id.clone(),
                uptime: (prior.time() - epoch).as_f64(),
                mtbf: c.hazard.mtbf().as_f64(),
                p_broken: m.broken.as_f64(),
            })
            .collect();
        let posterior_rows = posterior
            .ranked()
            .into_iter()
            .map(|(c, p)| PosteriorRow {
                modes: c.modes,
                probability: p.as_f64(),
            })
            .collect();
        let marginals = ids
            .iter()
            .zip(posterior.marginals())
            .zip(posterior.ages())
            .map(|((id, m), &epoch)| MarginalRow {
                component: id.clone(),
                p_broken: m.broken.as_f64(),
                epoch: epoch.as_f64(),
            })
            .collect();
        let decisions = decision::rank_decisions(posterior, model)
            .map(|ranked| ranked.iter().map(DecisionRow::from).collect())
            .unwrap_or_default();
        let optimal = DecisionRow::from(&decision::optimal_decision_factored(posterior, model));
        ReportBundle {
            time: posterior.time().as_f64(),
            event,
            components: ids,
            priors,
            posterior: posterior_rows,
            marginals,
            decisions,
            optimal,
        }
    }

    /// Keeps only the `k` most probable candidates.
    pub fn truncate_posterior(mut self, k: usize) -> Self {
        self.posterior.truncate(k);
        self
    }

    /// Head of the ranking, or the factored optimum when no ranking exists.
    pub fn best(&self) -> &DecisionRow {
        self.decisions.first().unwrap_or(&self.optimal)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out).expect("writing to a String cannot fail");
        out
    }

    fn write_text(&self, out: &mut String) -> fmt::Result {
        let w = self.components.iter().map(|c| c.len()).max().unwrap_or(1).max(5);
        writeln!(out, "t = {:.4} h", self.time)?;
        if let Some(e) = &self.event {
            writeln!(out, "event: {e}")?;
        }

        writeln!(out)?;
        writeln!(out, "Failure priors")?;
        writeln!(
            out,
            "{:<w$}  {:>10}  {:>10}  {:>7}",
            "Comp.", "Uptime", "MTBF", "P(M=b)"
        )?;
        for r in &self.priors {
            writeln!(
                out,
                "{:<w$}  {:>10.4}  {:>10.4}  {:>7.4}",
                r.component, r.uptime, r.mtbf, r.p_broken
            )?;
        }

        let cw = self.components.iter().map(|c| c.len() + 2).max().unwrap_or(4).max(4);
        writeln!(out)?;
        writeln!(out, "Posterior P(C|obs)")?;
        for c in &self.components {
            write!(out, "{c:<cw$}")?;
        }
        writeln!(out, "{:>7}", "P")?;
        for r in &self.posterior {
            for m in &r.modes {
                write!(out, "{:<cw$}", m.short())?;
            }
            writeln!(out, "{:>7.4}", r.probability)?;
        }

        let dw = cw.max(6);
        writeln!(out)?;
        writeln!(out, "Expected cost")?;
        for c in &self.components {
            write!(out, "{:<dw$}", format!("D_{c}"))?;
        }
        writeln!(out, "{:>10}", "$")?;
        for r in &self.decisions {
            for a in &r.actions {
                write!(out, "{:<dw$}", a.short())?;
            }
            writeln!(out, "{:>10.4}", r.expected_cost)?;
        }

        write!(out, "Optimal:")?;
        for (c, a) in self.components.iter().zip(&self.best().actions) {
            write!(out, " {c}={}", a.short())?;
        }
        writeln!(out, " ({:.4})", self.best().expected_cost)
    }
}

/// Renders a sequence of bundles with step headers.
pub fn render_trajectory(bundles: &[ReportBundle]) -> String {
    let mut out = String::new();
    for (i, b) in bundles.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let label = if i == 0 {
            "initial".to_string()
        } else {
            format!("event {}", i - 1)
        };
        out.push_str(&format!("== step {i}: {label} ==\n"));
        out.push_str(&b.render_text());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits;
    use crate::engine;
    use crate::model::Observation;

    fn table3() -> ReportBundle {
        let m = circuits::three_gate();
        let prior = engine::initial_belief(&m, 10.0).unwrap();
        let obs = Observation::new(10.0, [("I1", 1), ("I2", 1), ("I3", 0), ("I6", 0)]);
        let post = engine::assimilate(&m, &prior, &obs).unwrap();
        ReportBundle::new(&m, &prior, &post, Some(obs.to_string()))
    }

    #[test]
    fn bundle_contents() {
        let b = table3();
        assert_eq!(b.priors.len(), 3);
        assert_eq!(b.priors[0].uptime, 10.0);
        assert!((b.priors[0].mtbf - 100.0).abs() < 1e-9);
        assert_eq!(b.posterior.len(), 8);
        assert!((b.posterior[0].probability - 0.9957).abs() < 5e-5);
        assert_eq!(b.posterior[1].modes, vec![Mode::Broken, Mode::Broken, Mode::Ok]);
        // zero rows in bit-pattern order
        assert_eq!(b.posterior[2].modes, vec![Mode::Ok, Mode::Ok, Mode::Broken]);
        assert_eq!(b.decisions.len(), 8);
        assert_eq!(b.best().actions, vec![Action::DontFix; 3]);
        let sum: f64 = b.posterior.iter().map(|r| r.probability).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn text_layout() {
        let text = table3().render_text();
        assert!(text.contains("A         10.0000    100.0000   0.0952"), "{text}");
        assert!(text.contains("ok  ok  ok   0.9957"), "{text}");
        assert!(text.contains("dont  dont  dont      0.0855"), "{text}");
        assert!(text.ends_with("Optimal: A=dont O=dont X=dont (0.0855)\n"));
    }

    #[test]
    fn json_roundtrip_renders_identically() {
        let b = table3();
        let back: ReportBundle = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.render_text(), b.render_text());
    }

    #[test]
    fn top_k() {
        let b = table3().truncate_posterior(2);
        assert_eq!(b.posterior.len(), 2);
    }
}
