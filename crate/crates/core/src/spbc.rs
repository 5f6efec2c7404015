//! Closed-form cost model for sequential Pauli-based computation.
//!
//! Every T gate becomes a π/8 Pauli product rotation costing one worst-case
//! Pauli product measurement of `tau_ppm` logical time-steps; a fraction of
//! them need an extra π/4 correction of the same cost. The data qubits sit in
//! a linear block with one ancilla per data qubit plus four resource tiles.

use crate::circuit::CircuitSummary;
use crate::estimate::PhysicalErrorModel;
use crate::magic::{FactoryError, FactoryModel, FactorySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarmupMode {
    /// One warm-up distillation cycle for the whole run.
    PerAlgorithm,
    /// One warm-up cycle before every sub-circuit occurrence.
    PerOccurrence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpbcParams {
    /// Logical time-steps per worst-case Pauli product measurement.
    pub tau_ppm: u64,
    /// Fraction of rotations followed by a π/4 Clifford correction.
    pub clifford_correction_rate: f64,
    pub warmup: WarmupMode,
}

impl Default for SpbcParams {
    fn default() -> Self {
        Self {
            tau_ppm: 8,
            clifford_correction_rate: 0.5,
            warmup: WarmupMode::PerAlgorithm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpbcEstimate {
    pub d1: u32,
    pub d2: u32,
    pub p_t: f64,
    pub tau_logical: u128,
    pub tau_total: u128,
    pub n_logical: u64,
    pub n_total: u64,
    pub num_factories: u64,
    pub t_count: u128,
    /// `n_logical * tau_logical`, summed over sub-circuits.
    pub active_volume: u128,
    pub storage_volume: u128,
    pub eps_logical: f64,
    pub eps_dist: f64,
    pub eps_storage: f64,
}

impl SpbcEstimate {
    pub fn eps_total(&self) -> f64 {
        self.eps_logical + self.eps_dist + self.eps_storage
    }
}

/// `tau_ppm * [(1 + rate) * #T + #LQ]`, with the #LQ term (final
/// measurements) paid once per occurrence.
pub fn spbc_slices(summary: &CircuitSummary, params: &SpbcParams) -> u128 {
    let t = u128::from(summary.num_t);
    let corrections = (params.clifford_correction_rate * summary.num_t as f64).round() as u128;
    let measurements = u128::from(summary.num_lq) * u128::from(summary.occurrences.max(1));
    u128::from(params.tau_ppm) * (t + corrections + measurements)
}

/// Linear block: data and ancilla rows plus Y-state, storage and two
/// mediating ancillae.
pub fn spbc_tiles(num_lq: u64) -> u64 {
    2 * (num_lq + 2)
}

/// Factories needed to feed one rotation per `tau_ppm`.
pub fn spbc_factories(factory: &FactorySpec, params: &SpbcParams) -> u64 {
    factory.tau_d.div_ceil(params.tau_ppm.max(1))
}

pub fn spbc_estimate(
    summary: &CircuitSummary,
    factory: &FactoryModel,
    phys: &PhysicalErrorModel,
    d1: u32,
    d2: u32,
    params: &SpbcParams,
) -> Result<SpbcEstimate, FactoryError> {
    let spec = factory.at(d1, d2)?;
    Ok(spbc_algorithm(
        std::slice::from_ref(summary),
        &spec,
        phys,
        params,
    ))
}

/// Sub-circuits run back to back; time, volume and T count add up, the
/// block is sized for the widest sub-circuit.
pub fn spbc_algorithm(
    summaries: &[CircuitSummary],
    spec: &FactorySpec,
    phys: &PhysicalErrorModel,
    params: &SpbcParams,
) -> SpbcEstimate {
    let mut tau_logical = 0u128;
    let mut active_volume = 0u128;
    let mut t_count = 0u128;
    let mut n_logical = 0u64;
    let mut occurrences = 0u128;
    for s in summaries {
        let slices = spbc_slices(s, params);
        let tiles = spbc_tiles(s.num_lq);
        tau_logical += slices;
        active_volume += u128::from(tiles) * slices;
        t_count += u128::from(s.num_t);
        n_logical = n_logical.max(tiles);
        occurrences += u128::from(s.occurrences.max(1));
    }

    let tau_d = u128::from(spec.tau_d);
    let warmups = match params.warmup {
        WarmupMode::PerAlgorithm => 1,
        WarmupMode::PerOccurrence => occurrences,
    };
    let tau_total = tau_logical + warmups * tau_d;
    let num_factories = if t_count == 0 {
        0
    } else {
        spbc_factories(spec, params)
    };
    let n_total = n_logical + num_factories * (spec.tiles + 1);
    // one stored state per factory through every cycle after the warm-up
    let cycles = tau_total.div_ceil(tau_d) - 1;
    let storage_volume = u128::from(num_factories) * tau_d * cycles;

    let p = phys.p(spec.d2);
    SpbcEstimate {
        d1: spec.d1,
        d2: spec.d2,
        p_t: spec.p_t,
        tau_logical,
        tau_total,
        n_logical,
        n_total,
        num_factories,
        t_count,
        active_volume,
        storage_volume,
        eps_logical: active_volume as f64 * p,
        eps_dist: t_count as f64 * spec.p_t,
        eps_storage: storage_volume as f64 * p,
    }
}
