//! Seeded random Clifford+T circuits with a target density and T fraction.
//!
//! Each layer draws a random permutation of the qubits and places gates on
//! them in order until the layer's gate weight reaches `density * n`
//! (CX counts twice). Gates inside a layer act on distinct qubits.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Gate, GateKind, LogicalCircuit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomCircuitConfig {
    pub num_qubits: usize,
    pub layers: usize,
    /// Target gate weight per qubit per layer.
    pub density: f64,
    /// Target share of gate weight spent on T and T†.
    pub t_fraction: f64,
    /// Target share of gate weight spent on CX.
    pub cx_fraction: f64,
    pub seed: u64,
}

impl Default for RandomCircuitConfig {
    fn default() -> Self {
        Self {
            num_qubits: 16,
            layers: 16,
            density: 0.4,
            t_fraction: 0.39,
            cx_fraction: 0.4,
            seed: 0,
        }
    }
}

const OTHER_SINGLES: [GateKind; 5] = [
    GateKind::H,
    GateKind::S,
    GateKind::Sdg,
    GateKind::X,
    GateKind::Z,
];

pub fn random_circuit(config: &RandomCircuitConfig) -> LogicalCircuit {
    let n = config.num_qubits.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cx_share = config.cx_fraction.clamp(0.0, 0.95);
    // per-placement probability giving the requested weight share
    let p_cx = cx_share / (2.0 - cx_share);
    let p_t = (config.t_fraction / (1.0 - cx_share)).clamp(0.0, 1.0);
    let per_layer = ((config.density * n as f64).round() as usize).clamp(1, n);

    let mut order: Vec<usize> = (0..n).collect();
    let mut gates = Vec::new();
    for _ in 0..config.layers {
        order.shuffle(&mut rng);
        let mut weight = 0;
        let mut i = 0;
        while weight < per_layer && i < n {
            let q = order[i];
            if weight + 2 <= per_layer && i + 1 < n && rng.gen_bool(p_cx) {
                let (a, b) = if rng.gen_bool(0.5) {
                    (q, order[i + 1])
                } else {
                    (order[i + 1], q)
                };
                gates.push(Gate::cx(a, b));
                weight += 2;
                i += 2;
                continue;
            }
            let kind = if rng.gen_bool(p_t) {
                if rng.gen_bool(0.5) {
                    GateKind::T
                } else {
                    GateKind::Tdg
                }
            } else {
                *OTHER_SINGLES.choose(&mut rng).unwrap()
            };
            gates.push(Gate::single(kind, q));
            weight += 1;
            i += 1;
        }
    }
    LogicalCircuit::new(n, gates).expect("generated gates are in range")
}
