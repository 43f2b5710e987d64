use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Value of a system variable.
pub type Value = i64;

/// Health state of a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ok,
    Broken,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Ok, Mode::Broken];

    pub fn index(self) -> usize {
        match self {
            Mode::Ok => 0,
            Mode::Broken => 1,
        }
    }

    /// Short label as used in the tables (`ok` / `b`).
    pub fn short(self) -> &'static str {
        match self {
            Mode::Ok => "ok",
            Mode::Broken => "b",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ok => "ok",
            Mode::Broken => "broken",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    And,
    Or,
    Xor,
    Not,
    Nand,
    Nor,
    Buffer,
}

impl Gate {
    /// `None` means any arity >= 1.
    pub fn arity(self) -> Option<usize> {
        match self {
            Gate::Not | Gate::Buffer => Some(1),
            _ => None,
        }
    }

    fn eval(self, inputs: &[Value]) -> Option<Value> {
        if inputs.is_empty() || inputs.iter().any(|v| !matches!(v, 0 | 1)) {
            return None;
        }
        if let Some(n) = self.arity() {
            if inputs.len() != n {
                return None;
            }
        }
        let and = inputs.iter().all(|&v| v == 1);
        let or = inputs.contains(&1);
        let xor = inputs.iter().filter(|&&v| v == 1).count() % 2 == 1;
        let out = match self {
            Gate::And => and,
            Gate::Or => or,
            Gate::Xor => xor,
            Gate::Nand => !and,
            Gate::Nor => !or,
            Gate::Not => inputs[0] == 0,
            Gate::Buffer => inputs[0] == 1,
        };
        Some(out as Value)
    }

    fn name(self) -> &'static str {
        match self {
            Gate::And => "AND",
            Gate::Or => "OR",
            Gate::Xor => "XOR",
            Gate::Not => "NOT",
            Gate::Nand => "NAND",
            Gate::Nor => "NOR",
            Gate::Buffer => "BUFFER",
        }
    }
}

/// One input-combination row of an explicit truth table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthRow {
    pub inputs: Vec<Value>,
    pub output: Value,
}

/// Deterministic input/output behavior of a component in one mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Behavior {
    Gate(Gate),
    StuckAt(Value),
    Table(BTreeMap<Vec<Value>, Value>),
}

impl Behavior {
    pub fn table(rows: impl IntoIterator<Item = TruthRow>) -> Self {
        Behavior::Table(rows.into_iter().map(|r| (r.inputs, r.output)).collect())
    }

    /// Output for the given inputs, `None` where the behavior is undefined.
    pub fn eval(&self, inputs: &[Value]) -> Option<Value> {
        match self {
            Behavior::Gate(g) => g.eval(inputs),
            Behavior::StuckAt(v) => Some(*v),
            Behavior::Table(rows) => rows.get(inputs).copied(),
        }
    }

    pub fn is_gate(&self) -> bool {
        matches!(self, Behavior::Gate(_))
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behavior::Gate(g) => f.write_str(g.name()),
            Behavior::StuckAt(v) => write!(f, "STUCK_AT_{v}"),
            Behavior::Table(rows) => write!(f, "table({} rows)", rows.len()),
        }
    }
}

impl FromStr for Behavior {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let gate = match s {
            "AND" => Gate::And,
            "OR" => Gate::Or,
            "XOR" => Gate::Xor,
            "NOT" => Gate::Not,
            "NAND" => Gate::Nand,
            "NOR" => Gate::Nor,
            "BUFFER" => Gate::Buffer,
            _ => {
                return s
                    .strip_prefix("STUCK_AT_")
                    .and_then(|v| v.parse().ok())
                    .map(Behavior::StuckAt)
                    .ok_or_else(|| format!("unknown builtin behavior `{s}`"))
            }
        };
        Ok(Behavior::Gate(gate))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BehaviorRepr {
    Builtin(String),
    Table { table: Vec<TruthRow> },
}

impl Serialize for Behavior {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Behavior::Table(rows) => BehaviorRepr::Table {
                table: rows
                    .iter()
                    .map(|(inputs, &output)| TruthRow {
                        inputs: inputs.clone(),
                        output,
                    })
                    .collect(),
            },
            other => BehaviorRepr::Builtin(other.to_string()),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Behavior {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match BehaviorRepr::deserialize(deserializer)? {
            BehaviorRepr::Builtin(name) => name.parse().map_err(serde::de::Error::custom),
            BehaviorRepr::Table { table } => Ok(Behavior::table(table)),
        }
    }
}
