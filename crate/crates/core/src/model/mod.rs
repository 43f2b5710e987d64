//! Declarative system description: variables, components with per-mode
//! behavior, and the wiring between them.

mod behavior;
pub mod document;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use behavior::{Behavior, Gate, Mode, TruthRow, Value};

use crate::decision::CostTable;
use crate::error::{DiagnosisError, Result};
use crate::reliability::HazardModel;
use crate::scalar::Scalar;

/// Default upper bound on the number of enumerated candidates.
pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Input,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<Value>,
    pub kind: VariableKind,
}

impl Variable {
    pub fn binary(name: impl Into<String>, kind: VariableKind) -> Self {
        Variable {
            name: name.into(),
            domain: vec![0, 1],
            kind,
        }
    }

    fn is_binary(&self) -> bool {
        let mut d = self.domain.clone();
        d.sort_unstable();
        d.dedup();
        d.iter().all(|v| matches!(v, 0 | 1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec<T = f64> {
    pub id: String,
    pub hazard: HazardModel<T>,
    pub ok: Behavior,
    pub broken: Behavior,
    pub inputs: Vec<String>,
    pub output: String,
    pub cost: CostTable<T>,
}

impl<T: Scalar> ComponentSpec<T> {
    pub fn behavior(&self, mode: Mode) -> &Behavior {
        match mode {
            Mode::Ok => &self.ok,
            Mode::Broken => &self.broken,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateVariable,
    EmptyDomain,
    DuplicateComponent,
    UnknownVariable,
    DrivenInput,
    MultipleDrivers,
    UndrivenVariable,
    Cycle,
    NonBinaryGate,
    NotTotal,
    OutputOutOfDomain,
    InvalidHazard,
    InvalidCost,
}

/// One model defect found by [`SystemModel::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            subject: subject.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Index form of a valid model, used by simulation.
#[derive(Debug, Clone)]
struct Wiring {
    order: Vec<usize>,
    inputs: Vec<Vec<usize>>,
    output: Vec<usize>,
}

/// A system of components wired over variables.
#[derive(Debug, Clone)]
pub struct SystemModel<T = f64> {
    variables: Vec<Variable>,
    components: Vec<ComponentSpec<T>>,
    commissioning_time: T,
    enumeration_cap: usize,
    var_index: HashMap<String, usize>,
    comp_index: HashMap<String, usize>,
    report: ValidationReport,
    wiring: Option<Wiring>,
}

impl<T: Scalar> SystemModel<T> {
    /// Builds a model. Construction never fails; defects are reported by
    /// [`validate`](Self::validate) and make simulation return
    /// [`DiagnosisError::InvalidModel`].
    pub fn new(variables: Vec<Variable>, components: Vec<ComponentSpec<T>>, commissioning_time: T) -> Self {
        let mut var_index = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            var_index.entry(v.name.clone()).or_insert(i);
        }
        let mut comp_index = HashMap::new();
        for (i, c) in components.iter().enumerate() {
            comp_index.entry(c.id.clone()).or_insert(i);
        }
        let mut model = SystemModel {
            variables,
            components,
            commissioning_time,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            var_index,
            comp_index,
            report: ValidationReport::default(),
            wiring: None,
        };
        let (report, wiring) = model.check();
        model.report = report;
        model.wiring = wiring;
        model
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn components(&self) -> &[ComponentSpec<T>] {
        &self.components
    }

    pub fn component_ids(&self) -> Vec<&str> {
        self.components.iter().map(|c| c.id.as_str()).collect()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn commissioning_time(&self) -> T {
        self.commissioning_time
    }

    pub fn component_index(&self, id: &str) -> Result<usize> {
        self.comp_index
            .get(id)
            .copied()
            .ok_or_else(|| DiagnosisError::InvalidComponent(id.to_string()))
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.var_index.get(name).map(|&i| &self.variables[i])
    }

    /// All structural and parameter defects, in a deterministic order.
    pub fn validate(&self) -> ValidationReport {
        self.report.clone()
    }

    pub fn is_valid(&self) -> bool {
        self.report.is_valid()
    }

    fn check(&self) -> (ValidationReport, Option<Wiring>) {
        let mut report = ValidationReport::default();

        let mut seen = HashMap::new();
        for v in &self.variables {
            if seen.insert(v.name.as_str(), ()).is_some() {
                report.push(
                    ViolationKind::DuplicateVariable,
                    &v.name,
                    "variable declared more than once",
                );
            }
            if v.domain.is_empty() {
                report.push(ViolationKind::EmptyDomain, &v.name, "domain is empty");
            }
        }

        let mut seen = HashMap::new();
        for c in &self.components {
            if seen.insert(c.id.as_str(), ()).is_some() {
                report.push(
                    ViolationKind::DuplicateComponent,
                    &c.id,
                    "component declared more than once",
                );
            }
        }

        // references and drivers
        let mut refs_ok = true;
        let mut drivers: Vec<Vec<usize>> = vec![Vec::new(); self.variables.len()];
        for (ci, c) in self.components.iter().enumerate() {
            for name in c.inputs.iter().chain(std::iter::once(&c.output)) {
                if !self.var_index.contains_key(name) {
                    refs_ok = false;
                    report.push(
                        ViolationKind::UnknownVariable,
                        &c.id,
                        format!("references undeclared variable `{name}`"),
                    );
                }
            }
            if let Some(&vi) = self.var_index.get(&c.output) {
                drivers[vi].push(ci);
            }
        }
        for (vi, v) in self.variables.iter().enumerate() {
            let ds = &drivers[vi];
            match v.kind {
                VariableKind::Input if !ds.is_empty() => report.push(
                    ViolationKind::DrivenInput,
                    &v.name,
                    format!("input variable is driven by `{}`", self.components[ds[0]].id),
                ),
                VariableKind::Internal if ds.len() > 1 => {
                    let ids: Vec<_> = ds.iter().map(|&c| self.components[c].id.as_str()).collect();
                    report.push(
                        ViolationKind::MultipleDrivers,
                        &v.name,
                        format!("driven by several components: {}", ids.join(", ")),
                    )
                }
                VariableKind::Internal if ds.is_empty() => report.push(
                    ViolationKind::UndrivenVariable,
                    &v.name,
                    "internal variable has no driver",
                ),
                _ => {}
            }
        }

        // acyclicity over the drives-graph, Kahn's algorithm in declaration order
        let mut order = None;
        if refs_ok {
            let n = self.components.len();
            let driver_of = |name: &String| -> Option<usize> {
                let vi = self.var_index[name];
                drivers[vi].first().copied()
            };
            let mut indegree = vec![0usize; n];
            let mut downstream: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (ci, c) in self.components.iter().enumerate() {
                for name in &c.inputs {
                    if let Some(up) = driver_of(name) {
                        indegree[ci] += 1;
                        downstream[up].push(ci);
                    }
                }
            }
            let mut done = vec![false; n];
            let mut sorted = Vec::with_capacity(n);
            while let Some(next) = (0..n).find(|&i| !done[i] && indegree[i] == 0) {
                done[next] = true;
                sorted.push(next);
                for &d in &downstream[next] {
                    indegree[d] -= 1;
                }
            }
            if sorted.len() < n {
                let ids: Vec<_> = (0..n)
                    .filter(|&i| !done[i])
                    .map(|i| self.components[i].id.as_str())
                    .collect();
                report.push(ViolationKind::Cycle, ids.join(", "), "components form a feedback loop");
            } else {
                order = Some(sorted);
            }
        }

        // behavior, hazard and cost checks per component
        for c in &self.components {
            if let Err(e) = c.hazard.validate() {
                report.push(ViolationKind::InvalidHazard, &c.id, e.to_string());
            }
            if let Err(e) = c.cost.validate() {
                report.push(ViolationKind::InvalidCost, &c.id, e.to_string());
            }
            let Some(inputs) = c.inputs.iter().map(|n| self.variable(n)).collect::<Option<Vec<_>>>() else {
                continue;
            };
            let Some(output) = self.variable(&c.output) else {
                continue;
            };
            for mode in Mode::ALL {
                let behavior = c.behavior(mode);
                if behavior.is_gate() && !(output.is_binary() && inputs.iter().all(|v| v.is_binary())) {
                    report.push(
                        ViolationKind::NonBinaryGate,
                        &c.id,
                        format!("{mode} behavior {behavior} requires binary variables"),
                    );
                    continue;
                }
                self.check_totality(&mut report, c, mode, &inputs, output);
            }
        }

        let wiring = match (order, report.is_valid()) {
            (Some(order), true) => Some(Wiring {
                order,
                inputs: self
                    .components
                    .iter()
                    .map(|c| c.inputs.iter().map(|n| self.var_index[n]).collect())
                    .collect(),
                output: self.components.iter().map(|c| self.var_index[&c.output]).collect(),
            }),
            _ => None,
        };
        (report, wiring)
    }

    fn check_totality(
        &self,
        report: &mut ValidationReport,
        c: &ComponentSpec<T>,
        mode: Mode,
        inputs: &[&Variable],
        output: &Variable,
    ) {
        let behavior = c.behavior(mode);
        let mut missing = 0usize;
        let mut first_missing = None;
        let mut out_of_domain = None;
        for_each_combination(inputs, |combo| match behavior.eval(combo) {
            None => {
                missing += 1;
                first_missing.get_or_insert_with(|| combo.to_vec());
            }
            Some(v) if !output.domain.contains(&v) => {
                out_of_domain.get_or_insert((combo.to_vec(), v));
            }
            Some(_) => {}
        });
        if let Some(row) = first_missing {
            report.push(
                ViolationKind::NotTotal,
                &c.id,
                format!("{mode} behavior undefined for {missing} input row(s), first {row:?}"),
            );
        }
        if let Some((row, v)) = out_of_domain {
            report.push(
                ViolationKind::OutputOutOfDomain,
                &c.id,
                format!(
                    "{mode} behavior yields {v} for {row:?}, outside the domain of `{}`",
                    output.name
                ),
            );
        }
    }

    fn wiring(&self) -> Result<&Wiring> {
        self.wiring
            .as_ref()
            .ok_or_else(|| DiagnosisError::InvalidModel(self.report.clone()))
    }

    fn input_vector(&self, inputs: &BTreeMap<String, Value>) -> Result<Vec<Value>> {
        for (name, &value) in inputs {
            let var = self
                .variable(name)
                .ok_or_else(|| DiagnosisError::UnknownVariable(name.clone()))?;
            if !var.domain.contains(&value) {
                return Err(DiagnosisError::ValueOutOfDomain {
                    variable: name.clone(),
                    value,
                });
            }
        }
        let mut values = vec![0; self.variables.len()];
        for (i, v) in self.variables.iter().enumerate() {
            if v.kind == VariableKind::Input {
                values[i] = *inputs
                    .get(&v.name)
                    .ok_or_else(|| DiagnosisError::IncompleteInput(v.name.clone()))?;
            }
        }
        Ok(values)
    }

    /// Forward evaluation over `values`, whose input slots are already set.
    fn propagate(&self, wiring: &Wiring, candidate: &Candidate, values: &mut [Value]) -> Result<()> {
        let mut buf = Vec::new();
        for &ci in &wiring.order {
            buf.clear();
            buf.extend(wiring.inputs[ci].iter().map(|&vi| values[vi]));
            let behavior = self.components[ci].behavior(candidate.modes[ci]);
            values[wiring.output[ci]] = behavior
                .eval(&buf)
                .ok_or_else(|| DiagnosisError::InvalidModel(self.report.clone()))?;
        }
        Ok(())
    }

    fn check_candidate(&self, candidate: &Candidate) -> Result<()> {
        if candidate.modes.len() != self.components.len() {
            return Err(DiagnosisError::invalid(
                "candidate",
                format!(
                    "has {} modes for {} components",
                    candidate.modes.len(),
                    self.components.len()
                ),
            ));
        }
        Ok(())
    }

    /// Full assignment of every variable under `candidate` for the given inputs.
    pub fn simulate(&self, candidate: &Candidate, inputs: &BTreeMap<String, Value>) -> Result<BTreeMap<String, Value>> {
        let wiring = self.wiring()?;
        self.check_candidate(candidate)?;
        let inputs: BTreeMap<String, Value> = inputs
            .iter()
            .filter(|(k, _)| self.variable(k).is_none_or(|v| v.kind == VariableKind::Input))
            .map(|(k, &v)| (k.clone(), v))
            .collect();
        let mut values = self.input_vector(&inputs)?;
        self.propagate(wiring, candidate, &mut values)?;
        Ok(self
            .variables
            .iter()
            .zip(values)
            .map(|(v, x)| (v.name.clone(), x))
            .collect())
    }

    /// Checks an observation against the model and pre-indexes it.
    pub fn compile_observation(&self, obs: &Observation<T>) -> Result<CompiledObservation> {
        self.wiring()?;
        let inputs = self.input_vector(&obs.assignments)?;
        let observed = obs
            .assignments
            .iter()
            .filter_map(|(name, &value)| {
                let vi = self.var_index[name];
                (self.variables[vi].kind == VariableKind::Internal).then_some((vi, value))
            })
            .collect();
        Ok(CompiledObservation { inputs, observed })
    }

    /// 1 when `candidate` reproduces every observed internal value, else 0.
    pub fn likelihood(&self, candidate: &Candidate, obs: &Observation<T>) -> Result<T> {
        self.check_candidate(candidate)?;
        let compiled = self.compile_observation(obs)?;
        Ok(if self.consistent(candidate, &compiled)? {
            T::one()
        } else {
            T::zero()
        })
    }

    pub(crate) fn consistent(&self, candidate: &Candidate, obs: &CompiledObservation) -> Result<bool> {
        let wiring = self.wiring()?;
        let mut values = obs.inputs.clone();
        self.propagate(wiring, candidate, &mut values)?;
        Ok(obs.observed.iter().all(|&(vi, v)| values[vi] == v))
    }

    /// `2^n` for `n` components, or an error when that exceeds the cap.
    pub fn candidate_count(&self) -> Result<usize> {
        let n = self.components.len();
        let count = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
        if count > self.enumeration_cap as u128 {
            return Err(DiagnosisError::ModelTooLarge {
                candidates: count,
                cap: self.enumeration_cap,
            });
        }
        Ok(count as usize)
    }

    /// Every candidate in binary-counting order: the first component is the
    /// most significant bit, ok = 0 and broken = 1.
    pub fn enumerate_candidates(&self) -> Result<Vec<Candidate>> {
        let count = self.candidate_count()?;
        let n = self.components.len();
        Ok((0..count).map(|i| Candidate::from_index(i, n)).collect())
    }
}

fn for_each_combination(vars: &[&Variable], mut f: impl FnMut(&[Value])) {
    if vars.iter().any(|v| v.domain.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; vars.len()];
    let mut combo: Vec<Value> = vars.iter().map(|v| v.domain[0]).collect();
    loop {
        f(&combo);
        let mut k = vars.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < vars[k].domain.len() {
                combo[k] = vars[k].domain[idx[k]];
                break;
            }
            idx[k] = 0;
            combo[k] = vars[k].domain[0];
        }
    }
}

/// One mode per component, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Candidate {
    pub modes: Vec<Mode>,
}

impl Candidate {
    pub fn all_ok(n: usize) -> Self {
        Candidate {
            modes: vec![Mode::Ok; n],
        }
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Candidate {
            modes: (0..n)
                .map(|i| {
                    if index >> (n - 1 - i) & 1 == 1 {
                        Mode::Broken
                    } else {
                        Mode::Ok
                    }
                })
                .collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.modes.iter().fold(0, |acc, &m| (acc << 1) | m.index())
    }

    pub fn mode(&self, component: usize) -> Mode {
        self.modes[component]
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.modes.iter().map(|m| m.short()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Time-tagged variable/value pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation<T = f64> {
    pub time: T,
    pub assignments: BTreeMap<String, Value>,
}

impl<T: Scalar> Observation<T> {
    pub fn new<K: Into<String>>(time: T, assignments: impl IntoIterator<Item = (K, Value)>) -> Self {
        Observation {
            time,
            assignments: assignments.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

impl<T: Scalar> fmt::Display for Observation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.assignments.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

/// An observation resolved to variable indices.
#[derive(Debug, Clone)]
pub struct CompiledObservation {
    inputs: Vec<Value>,
    observed: Vec<(usize, Value)>,
}
