//! Independent replay of a compiled schedule against its circuit and layout.
//!
//! Nothing here reuses the scheduler's bookkeeping: the checks are recomputed
//! from the op list alone.

use std::collections::HashMap;
use std::fmt;

use crate::circuit::{build_dag, GateKind, LogicalCircuit};
use crate::compiler::{CompilationResult, OpKind, SliceOp};
use crate::layout::{Layout, Tile, TileRole};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Gate has no ops, or the wrong number or kind of ops.
    Scheduling {
        gate: usize,
        message: String,
    },
    /// Route or patch operation touching the wrong tiles.
    Geometry {
        gate: usize,
        message: String,
    },
    /// Two ops hold the same tile in the same slice.
    Overlap {
        slice: usize,
        tile: Tile,
        gates: (usize, usize),
    },
    /// A gate started before a predecessor on a shared qubit finished.
    Order {
        before: usize,
        after: usize,
    },
    Magic {
        slice: usize,
        message: String,
    },
    Totals {
        message: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Scheduling { gate, message } => write!(f, "gate {gate}: {message}"),
            Violation::Geometry { gate, message } => write!(f, "gate {gate}: {message}"),
            Violation::Overlap { slice, tile, gates } => {
                write!(
                    f,
                    "slice {slice}: tile {tile} held by gates {} and {}",
                    gates.0, gates.1
                )
            }
            Violation::Order { before, after } => {
                write!(f, "gate {after} starts before gate {before} finishes")
            }
            Violation::Magic { slice, message } => write!(f, "slice {slice}: {message}"),
            Violation::Totals { message } => f.write_str(message),
        }
    }
}

fn check_route(
    gate: usize,
    route: &[Tile],
    start: Tile,
    end_ok: impl Fn(Tile) -> bool,
    layout: &Layout,
    out: &mut Vec<Violation>,
) {
    let geo = |m: String| Violation::Geometry { gate, message: m };
    if route.len() < 2 {
        out.push(geo(format!("route of length {}", route.len())));
        return;
    }
    if route[0] != start {
        out.push(geo(format!(
            "route starts at {} instead of {start}",
            route[0]
        )));
    }
    let last = route[route.len() - 1];
    if !end_ok(last) {
        out.push(geo(format!("route ends at unexpected tile {last}")));
    }
    for w in route.windows(2) {
        if !w[0].is_adjacent(w[1]) {
            out.push(geo(format!("{} and {} are not adjacent", w[0], w[1])));
        }
    }
    for &t in &route[1..route.len() - 1] {
        if layout.role(t) != Some(TileRole::Routing) {
            out.push(geo(format!("route interior {t} is not a routing tile")));
        }
    }
    let mut seen = route.to_vec();
    seen.sort();
    seen.dedup();
    if seen.len() != route.len() {
        out.push(geo("route revisits a tile".into()));
    }
}

fn check_local(gate: usize, op: &SliceOp, data: Tile, layout: &Layout, out: &mut Vec<Violation>) {
    let geo = |m: String| Violation::Geometry { gate, message: m };
    match &op.kind {
        OpKind::PatchLocal { tile, ancilla } => {
            if *tile != data {
                out.push(geo(format!("acts on {tile}, qubit lives at {data}")));
            }
            if let Some(a) = ancilla {
                if !a.is_adjacent(*tile) || layout.role(*a) != Some(TileRole::Routing) {
                    out.push(geo(format!(
                        "ancilla {a} is not a routing neighbor of {tile}"
                    )));
                }
            }
        }
        OpKind::PauliFrame { tile } => {
            if *tile != data {
                out.push(geo(format!(
                    "frame update on {tile}, qubit lives at {data}"
                )));
            }
        }
        OpKind::MergeRoute(_) => out.push(geo("single-qubit Clifford scheduled as a merge".into())),
    }
}

pub fn validate(
    circuit: &LogicalCircuit,
    layout: &Layout,
    result: &CompilationResult,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let gates = circuit.gates();

    let mut by_gate: Vec<Vec<&SliceOp>> = vec![Vec::new(); gates.len()];
    for op in &result.ops {
        match by_gate.get_mut(op.gate) {
            Some(v) => v.push(op),
            None => out.push(Violation::Scheduling {
                gate: op.gate,
                message: "op for a gate outside the circuit".into(),
            }),
        }
    }

    for (g, gate) in gates.iter().enumerate() {
        let ops = &mut by_gate[g];
        ops.sort_by_key(|o| o.start);
        let sched = |m: &str| Violation::Scheduling {
            gate: g,
            message: m.into(),
        };
        let data = layout.data_tile(gate.qubits()[0]);
        match gate.kind {
            GateKind::CX => {
                if ops.len() != 1 {
                    out.push(sched("CX needs exactly one op"));
                    continue;
                }
                let other = layout.data_tile(gate.qubits()[1]);
                match &ops[0].kind {
                    OpKind::MergeRoute(route) => {
                        check_route(g, route, data, |t| t == other, layout, &mut out);
                    }
                    _ => out.push(sched("CX is not a merge")),
                }
            }
            GateKind::T | GateKind::Tdg => {
                if ops.is_empty() || ops.len() > 2 {
                    out.push(sched("T needs a merge and at most one correction"));
                    continue;
                }
                match &ops[0].kind {
                    OpKind::MergeRoute(route) => check_route(
                        g,
                        route,
                        data,
                        |t| layout.role(t).is_some_and(TileRole::is_magic_source),
                        layout,
                        &mut out,
                    ),
                    _ => out.push(sched("T does not start with a merge")),
                }
                if ops[0].magic_consumed != 1 {
                    out.push(sched("T merge must consume exactly one state"));
                }
                if let Some(fix) = ops.get(1) {
                    if fix.start != ops[0].end() {
                        out.push(sched("correction does not follow the merge"));
                    }
                    if fix.magic_consumed != 0 {
                        out.push(sched("correction consumes a state"));
                    }
                    match &fix.kind {
                        OpKind::PatchLocal { .. } => check_local(g, fix, data, layout, &mut out),
                        _ => out.push(sched("correction is not patch-local")),
                    }
                }
            }
            _ => {
                if ops.len() != 1 {
                    out.push(sched("single-qubit gate needs exactly one op"));
                    continue;
                }
                if ops[0].magic_consumed != 0 {
                    out.push(sched("Clifford consumes a state"));
                }
                check_local(g, ops[0], data, layout, &mut out);
            }
        }
        if ops.is_empty() {
            out.push(sched("never scheduled"));
        }
    }

    // exclusive tile use per slice
    let mut holder: HashMap<(usize, Tile), usize> = HashMap::new();
    for op in result.ops.iter().filter(|o| o.duration > 0) {
        for s in op.start..op.end() {
            for tile in op.tiles() {
                if let Some(&other) = holder.get(&(s, tile)) {
                    if other != op.gate {
                        out.push(Violation::Overlap {
                            slice: s,
                            tile,
                            gates: (other, op.gate),
                        });
                    }
                } else {
                    holder.insert((s, tile), op.gate);
                }
            }
        }
    }

    // dependency order
    let span = |g: usize| -> Option<(usize, usize)> {
        let ops = &by_gate[g];
        let start = ops.iter().map(|o| o.start).min()?;
        let end = ops.iter().map(|o| o.end()).max()?;
        Some((start, end))
    };
    for (u, v) in build_dag(circuit).edges() {
        if let (Some((_, end_u)), Some((start_v, _))) = (span(u), span(v)) {
            if start_v < end_u {
                out.push(Violation::Order {
                    before: u,
                    after: v,
                });
            }
        }
    }

    // magic consumption against the profile and the grants
    let mut consumed = vec![0u32; result.num_slices];
    for op in &result.ops {
        if op.magic_consumed > 0 {
            match consumed.get_mut(op.start) {
                Some(c) => *c += u32::from(op.magic_consumed),
                None => out.push(Violation::Magic {
                    slice: op.start,
                    message: "consumption after the last slice".into(),
                }),
            }
        }
    }
    if consumed != result.profile.counts() {
        out.push(Violation::Totals {
            message: "consumption profile does not match the ops".into(),
        });
    }
    for (s, (&c, &g)) in consumed.iter().zip(&result.granted).enumerate() {
        if c as usize > g {
            out.push(Violation::Magic {
                slice: s,
                message: format!("{c} states consumed, {g} granted"),
            });
        }
    }

    let slices = result
        .ops
        .iter()
        .filter(|o| o.duration > 0)
        .map(SliceOp::end)
        .max()
        .unwrap_or(0);
    if slices != result.num_slices {
        out.push(Violation::Totals {
            message: format!(
                "ops span {slices} slices, result claims {}",
                result.num_slices
            ),
        });
    }
    let mut volume = (slices * layout.num_lq()) as u64;
    for op in &result.ops {
        let routing = op
            .tiles()
            .iter()
            .filter(|&&t| layout.role(t) == Some(TileRole::Routing))
            .count();
        volume += (routing * op.duration) as u64;
    }
    if volume != result.active_volume {
        out.push(Violation::Totals {
            message: format!(
                "volume recomputes to {volume}, result claims {}",
                result.active_volume
            ),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::compiler::{compile, compile_with, CompilerConfig, CorrectionPolicy, Unlimited};
    use crate::layout::{plan_layout, LayoutKind};
    use crate::random::{random_circuit, RandomCircuitConfig};
    use proptest::prelude::*;

    fn compiled() -> (LogicalCircuit, Layout, CompilationResult) {
        let c = LogicalCircuit::new(
            4,
            vec![
                Gate::single(GateKind::T, 0),
                Gate::cx(0, 3),
                Gate::single(GateKind::T, 3),
                Gate::single(GateKind::H, 1),
                Gate::single(GateKind::X, 2),
                Gate::cx(1, 2),
            ],
        )
        .unwrap();
        let l = plan_layout(4, LayoutKind::OneLane, 0);
        let r = compile(&c, &l, &mut Unlimited).unwrap();
        (c, l, r)
    }

    #[test]
    fn clean_schedule_passes() {
        let (c, l, r) = compiled();
        assert_eq!(validate(&c, &l, &r), vec![]);
    }

    #[test]
    fn detects_dropped_gate() {
        let (c, l, mut r) = compiled();
        r.ops.retain(|o| o.gate != 3);
        assert!(validate(&c, &l, &r)
            .iter()
            .any(|v| matches!(v, Violation::Scheduling { gate: 3, .. })));
    }

    #[test]
    fn detects_overlap() {
        let (c, l, mut r) = compiled();
        let i = r.ops.iter().position(|o| o.gate == 1).unwrap();
        let j = r.ops.iter().position(|o| o.gate == 5).unwrap();
        r.ops[j].start = r.ops[i].start;
        r.ops[j].kind = r.ops[i].kind.clone();
        assert!(!validate(&c, &l, &r).is_empty());
    }

    #[test]
    fn detects_order_violation() {
        let (c, l, mut r) = compiled();
        for op in r.ops.iter_mut().filter(|o| o.gate == 2) {
            op.start = 0;
        }
        let v = validate(&c, &l, &r);
        assert!(
            v.iter().any(|v| matches!(
                v,
                Violation::Order {
                    before: 1,
                    after: 2
                }
            )),
            "{v:?}"
        );
    }

    #[test]
    fn detects_grant_violation() {
        let (c, l, mut r) = compiled();
        r.granted = vec![0; r.num_slices];
        assert!(validate(&c, &l, &r)
            .iter()
            .any(|v| matches!(v, Violation::Magic { .. })));
    }

    #[test]
    fn detects_broken_route() {
        let (c, l, mut r) = compiled();
        let op = r.ops.iter_mut().find(|o| o.gate == 1).unwrap();
        if let OpKind::MergeRoute(route) = &mut op.kind {
            route.remove(1);
        }
        assert!(validate(&c, &l, &r)
            .iter()
            .any(|v| matches!(v, Violation::Geometry { gate: 1, .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn random_schedules_replay_clean(
            n in 2usize..20,
            layers in 1usize..12,
            density in 0.1f64..0.9,
            seed in any::<u64>(),
            kind in prop::sample::select(vec![LayoutKind::SpbcLinear, LayoutKind::OneLane, LayoutKind::OneLaneCondensed]),
            correction in prop::sample::select(vec![CorrectionPolicy::Alternate, CorrectionPolicy::Always, CorrectionPolicy::Never]),
        ) {
            let c = random_circuit(&RandomCircuitConfig { num_qubits: n, layers, density, seed, ..Default::default() });
            let l = plan_layout(n, kind, 0);
            let config = CompilerConfig { correction, ..Default::default() };
            let r = compile_with(&c, &l, &mut Unlimited, &config).unwrap();
            let v = validate(&c, &l, &r);
            prop_assert!(v.is_empty(), "{:?}", v);
        }
    }
}
