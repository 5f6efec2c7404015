//! Two-level 15-to-1 distillation modeled as a calibrated black box, and the
//! min-storage schedule that sizes factories from a consumption profile.
//!
//! Min-storage splits the compiled slices into distillation cycles of
//! `tau_d` slices. The states consumed in cycle `k` are distilled during
//! cycle `k - 1` (the first one during a warm-up cycle) and held in storage
//! until use, so the factory count is the largest per-cycle demand.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::calibration::Calibration;

/// Magic states consumed per compiled slice.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConsumptionProfile(Vec<u32>);

impl ConsumptionProfile {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }

    /// States consumed in each block of `tau_d` consecutive slices; the last
    /// block may be partial.
    pub fn block_demand(&self, tau_d: usize) -> Vec<u64> {
        assert!(tau_d >= 1);
        self.0
            .chunks(tau_d)
            .map(|c| c.iter().map(|&x| u64::from(x)).sum())
            .collect()
    }
}

/// Factory characteristics at one `(d1, d2)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorySpec {
    pub d1: u32,
    pub d2: u32,
    /// Output error rate of a distilled state.
    pub p_t: f64,
    /// Footprint of one factory in d2-sized tiles.
    pub tiles: u64,
    /// Logical time-steps per distillation cycle.
    pub tau_d: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum FactoryError {
    #[error("distances ({d1}, {d2}) are not calibrated; calibrated pairs: {pairs}")]
    Uncalibrated { d1: u32, d2: u32, pairs: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct FactoryRow {
    p_t: f64,
    base_tiles: u64,
    tau_d: u64,
}

/// Calibrated factory lookup over `(d1, d2)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoryModel {
    rows: BTreeMap<(u32, u32), FactoryRow>,
}

impl FactoryModel {
    pub fn from_calibration(cal: &Calibration) -> Self {
        let rows = cal
            .factory_rows()
            .iter()
            .map(|r| {
                (
                    (r.d1, r.d2),
                    FactoryRow {
                        p_t: r.p_t,
                        base_tiles: r.base_tiles,
                        tau_d: r.tau_d,
                    },
                )
            })
            .collect();
        Self { rows }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows.keys().copied()
    }

    pub fn at(&self, d1: u32, d2: u32) -> Result<FactorySpec, FactoryError> {
        let row = self
            .rows
            .get(&(d1, d2))
            .ok_or_else(|| FactoryError::Uncalibrated {
                d1,
                d2,
                pairs: self
                    .pairs()
                    .map(|(a, b)| format!("({a},{b})"))
                    .collect::<Vec<_>>()
                    .join(" "),
            })?;
        Ok(FactorySpec {
            d1,
            d2,
            p_t: row.p_t,
            tiles: scaled_tiles(row.base_tiles, d1, d2),
            tau_d: row.tau_d,
        })
    }
}

/// Footprint in d2 tiles of a factory whose footprint is `base_tiles` tiles
/// of size d1: `ceil(base_tiles * (d1 / d2)^2)`, in exact integer arithmetic.
pub fn scaled_tiles(base_tiles: u64, d1: u32, d2: u32) -> u64 {
    let num = base_tiles * u64::from(d1) * u64::from(d1);
    let den = u64::from(d2) * u64::from(d2);
    num.div_ceil(den).max(1)
}

/// `(P_T, tiles)` for one calibrated pair.
pub fn distill_params(model: &FactoryModel, d1: u32, d2: u32) -> Result<(f64, u64), FactoryError> {
    let spec = model.at(d1, d2)?;
    Ok((spec.p_t, spec.tiles))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinStoragePlan {
    pub num_factories: u64,
    pub storage_tiles: u64,
    /// Distillation cycles including the warm-up cycle.
    pub num_cycles: u64,
    /// Factory tile-slices while factories are switched on.
    pub distillation_volume: u128,
    /// Storage tile-slices: every state waits one cycle.
    pub storage_volume: u128,
    /// Per-cycle demand of the compiled blocks (excluding warm-up).
    pub demand: Vec<u64>,
}

pub fn min_storage_schedule(profile: &ConsumptionProfile, factory: &FactorySpec) -> MinStoragePlan {
    let tau_d = factory.tau_d.max(1);
    let demand = profile.block_demand(tau_d as usize);
    let num_factories = demand.iter().copied().max().unwrap_or(0);
    let total: u128 = demand.iter().map(|&d| u128::from(d)).sum();
    let slices = profile.len() as u64;
    MinStoragePlan {
        num_factories,
        storage_tiles: num_factories,
        num_cycles: (slices + tau_d).div_ceil(tau_d),
        distillation_volume: total * u128::from(factory.tiles) * u128::from(tau_d),
        storage_volume: total * u128::from(tau_d),
        demand,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(tau_d: u64) -> FactorySpec {
        FactorySpec {
            d1: 11,
            d2: 31,
            p_t: 1e-18,
            tiles: 63,
            tau_d,
        }
    }

    #[test]
    fn zero_profile() {
        let plan = min_storage_schedule(&ConsumptionProfile::default(), &spec(24));
        assert_eq!(plan.num_factories, 0);
        assert_eq!(plan.num_cycles, 1);
        assert_eq!((plan.distillation_volume, plan.storage_volume), (0, 0));
        let plan = min_storage_schedule(&ConsumptionProfile::new(vec![0; 50]), &spec(24));
        assert_eq!(plan.num_factories, 0);
        assert_eq!(plan.storage_volume, 0);
    }

    #[test]
    fn block_maximum() {
        let plan = min_storage_schedule(&ConsumptionProfile::new(vec![2, 0, 3, 1]), &spec(2));
        assert_eq!(plan.demand, vec![2, 4]);
        assert_eq!(plan.num_factories, 4);
        assert_eq!(plan.storage_tiles, 4);
        assert_eq!(plan.num_cycles, 3);
        assert_eq!(plan.storage_volume, 6 * 2);
        assert_eq!(plan.distillation_volume, 6 * 63 * 2);
    }

    #[test]
    fn constant_profile() {
        let plan = min_storage_schedule(&ConsumptionProfile::new(vec![3; 96]), &spec(24));
        assert_eq!(plan.num_factories, 3 * 24);
    }

    #[test]
    fn footprint_scaling() {
        assert_eq!(scaled_tiles(494, 11, 31), 63);
        assert_eq!(scaled_tiles(494, 11, 37), 44);
        assert_eq!(scaled_tiles(494, 9, 27), 55);
        assert_eq!(scaled_tiles(1, 3, 49), 1);
    }

    fn brute_force_n(profile: &[u32], tau_d: usize) -> u64 {
        let mut best = 0;
        let mut start = 0;
        while start < profile.len() {
            let end = (start + tau_d).min(profile.len());
            let mut s = 0u64;
            for &x in &profile[start..end] {
                s += u64::from(x);
            }
            best = best.max(s);
            start = end;
        }
        best
    }

    proptest! {
        #[test]
        fn n_matches_brute_force(profile in prop::collection::vec(0u32..6, 0..400), tau_d in 1u64..48) {
            let plan = min_storage_schedule(&ConsumptionProfile::new(profile.clone()), &spec(tau_d));
            prop_assert_eq!(plan.num_factories, brute_force_n(&profile, tau_d as usize));
            prop_assert!(plan.num_cycles * tau_d >= profile.len() as u64 + tau_d);
        }

        #[test]
        fn n_is_monotone(profile in prop::collection::vec((0u32..5, 0u32..3), 1..300), tau_d in 1u64..30) {
            let low: Vec<u32> = profile.iter().map(|p| p.0).collect();
            let high: Vec<u32> = profile.iter().map(|p| p.0 + p.1).collect();
            let a = min_storage_schedule(&ConsumptionProfile::new(low), &spec(tau_d));
            let b = min_storage_schedule(&ConsumptionProfile::new(high), &spec(tau_d));
            prop_assert!(b.num_factories >= a.num_factories);
        }

        #[test]
        fn permuting_within_blocks_keeps_n(profile in prop::collection::vec(0u32..9, 1..300), tau_d in 1usize..20, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = profile.clone();
            for chunk in shuffled.chunks_mut(tau_d) {
                chunk.shuffle(&mut rng);
            }
            let a = min_storage_schedule(&ConsumptionProfile::new(profile), &spec(tau_d as u64));
            let b = min_storage_schedule(&ConsumptionProfile::new(shuffled), &spec(tau_d as u64));
            prop_assert_eq!(a.num_factories, b.num_factories);
        }
    }
}
