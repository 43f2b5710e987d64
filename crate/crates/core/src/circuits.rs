//! Ready-made models.

use crate::decision::CostTable;
use crate::model::{Behavior, ComponentSpec, Gate, SystemModel, Variable, VariableKind};
use crate::reliability::HazardModel;
use crate::scalar::Scalar;

fn gate<T: Scalar>(
    id: &str,
    mtbf: f64,
    ok: Gate,
    stuck_at: i64,
    inputs: [&str; 2],
    output: &str,
    (fix, unrepaired): (f64, f64),
) -> ComponentSpec<T> {
    ComponentSpec {
        id: id.to_string(),
        hazard: HazardModel::from_mtbf(T::from_f64(mtbf)).expect("positive mtbf"),
        ok: Behavior::Gate(ok),
        broken: Behavior::StuckAt(stuck_at),
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        output: output.to_string(),
        cost: CostTable {
            fix_cost: T::from_f64(fix),
            broken_unrepaired_cost: T::from_f64(unrepaired),
        },
    }
}

/// Three-gate circuit: `I4 = AND(I1, I2)`, `I5 = OR(I2, I3)`, `I6 = XOR(I4, I5)`.
///
/// The AND (`A`, MTBF 100 h) and OR (`O`, 250 h) gates fail stuck-at-0, the
/// XOR (`X`, 350 h) stuck-at-1. Repair costs (fix / broken-unrepaired) are
/// 2/8, 3/12 and 4/14. Identical to `examples/paper_circuit.json`.
pub fn three_gate() -> SystemModel {
    three_gate_as()
}

/// [`three_gate`] in any scalar type.
pub fn three_gate_as<T: Scalar>() -> SystemModel<T> {
    let variables = ["I1", "I2", "I3"]
        .iter()
        .map(|n| Variable::binary(*n, VariableKind::Input))
        .chain(
            ["I4", "I5", "I6"]
                .iter()
                .map(|n| Variable::binary(*n, VariableKind::Internal)),
        )
        .collect();
    let components = vec![
        gate("A", 100.0, Gate::And, 0, ["I1", "I2"], "I4", (2.0, 8.0)),
        gate("O", 250.0, Gate::Or, 0, ["I2", "I3"], "I5", (3.0, 12.0)),
        gate("X", 350.0, Gate::Xor, 1, ["I4", "I5"], "I6", (4.0, 14.0)),
    ];
    SystemModel::new(variables, components, T::zero())
}

/// `n` buffers in series, `x0 -> B0 -> x1 -> ... -> x{n}`; each is stuck at 0
/// when broken and costs 1/4.
pub fn chain(n: usize) -> SystemModel {
    let hazard = HazardModel::from_mtbf(100.0).expect("positive mtbf");
    chain_with(
        n,
        |_| hazard,
        |_| CostTable {
            fix_cost: 1.0,
            broken_unrepaired_cost: 4.0,
        },
    )
}

/// Buffer chain with per-component hazards and costs.
pub fn chain_with<T: Scalar>(
    n: usize,
    hazard: impl Fn(usize) -> HazardModel<T>,
    cost: impl Fn(usize) -> CostTable<T>,
) -> SystemModel<T> {
    let variables = (0..=n)
        .map(|i| {
            let kind = if i == 0 {
                VariableKind::Input
            } else {
                VariableKind::Internal
            };
            Variable::binary(format!("x{i}"), kind)
        })
        .collect();
    let components = (0..n)
        .map(|i| ComponentSpec {
            id: format!("B{i}"),
            hazard: hazard(i),
            ok: Behavior::Gate(Gate::Buffer),
            broken: Behavior::StuckAt(0),
            inputs: vec![format!("x{i}")],
            output: format!("x{}", i + 1),
            cost: cost(i),
        })
        .collect();
    SystemModel::new(variables, components, T::zero())
}

/// A single buffer `B0` from `x0` to `x1`.
pub fn single_component<T: Scalar>(hazard: HazardModel<T>) -> SystemModel<T> {
    single_component_with_cost(
        hazard,
        CostTable {
            fix_cost: T::one(),
            broken_unrepaired_cost: T::from_f64(4.0),
        },
    )
}

pub fn single_component_with_cost<T: Scalar>(hazard: HazardModel<T>, cost: CostTable<T>) -> SystemModel<T> {
    chain_with(1, |_| hazard, |_| cost)
}
