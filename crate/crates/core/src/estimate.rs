//! Error models, sub-circuit aggregation and code-distance selection.

use rayon::prelude::*;
use thiserror::Error;

use crate::calibration::Calibration;
use crate::circuit::{compute_lre, CircuitSummary, LogicalCircuit};
use crate::compiler::{compile_with, CompilationResult, CompileError, CompilerConfig, Unlimited};
use crate::fit::linear_fit;
use crate::layout::{plan_layout_with, LayoutConfig, LayoutKind};
use crate::magic::{min_storage_schedule, FactoryError, FactoryModel, FactorySpec, MinStoragePlan};
use crate::spbc::{spbc_algorithm, SpbcParams};

/// Surface-code logical error per tile per logical time-step,
/// `P(d) = A * lambda^(-(d+1)/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalErrorModel {
    pub prefactor: f64,
    pub lambda: f64,
}

impl PhysicalErrorModel {
    pub fn new(prefactor: f64, lambda: f64) -> Self {
        Self { prefactor, lambda }
    }

    pub fn from_calibration(cal: &Calibration) -> Self {
        Self::new(cal.prefactor, cal.lambda)
    }

    pub fn p(&self, d: u32) -> f64 {
        self.prefactor * self.lambda.powf(-(f64::from(d) + 1.0) / 2.0)
    }
}

pub fn logical_error(active_volume: u128, d: u32, phys: &PhysicalErrorModel) -> f64 {
    active_volume as f64 * phys.p(d)
}

pub fn dist_error(total_t: u128, p_t: f64) -> f64 {
    total_t as f64 * p_t
}

pub fn storage_error(plan: &MinStoragePlan, d2: u32, phys: &PhysicalErrorModel) -> f64 {
    plan.storage_volume as f64 * phys.p(d2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorLawFit {
    pub prefactor: f64,
    pub lambda: f64,
    pub r_squared: f64,
    /// Largest `max(fit/obs, obs/fit)` over the points.
    pub max_residual_ratio: f64,
}

/// Least-squares fit of `ln P` against `(d+1)/2` over `(d, P)` points.
pub fn fit_error_law(points: &[(u32, f64)]) -> Option<ErrorLawFit> {
    if points.iter().any(|&(_, p)| p <= 0.0) {
        return None;
    }
    let xs: Vec<f64> = points
        .iter()
        .map(|&(d, _)| (f64::from(d) + 1.0) / 2.0)
        .collect();
    let ys: Vec<f64> = points.iter().map(|&(_, p)| p.ln()).collect();
    let line = linear_fit(&xs, &ys)?;
    let model = PhysicalErrorModel::new(line.intercept.exp(), (-line.slope).exp());
    let max_residual_ratio = points
        .iter()
        .map(|&(d, p)| {
            let r = model.p(d) / p;
            r.max(1.0 / r)
        })
        .fold(1.0, f64::max);
    Some(ErrorLawFit {
        prefactor: model.prefactor,
        lambda: model.lambda,
        r_squared: line.r_squared,
        max_residual_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Spbc,
    DirectCliffordT,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Spbc => "spbc",
            Scheme::DirectCliffordT => "direct",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spbc" => Some(Scheme::Spbc),
            "direct" | "clifford+t" | "direct-clifford-t" => Some(Scheme::DirectCliffordT),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubcircuitSource {
    /// Published totals; the summary carries its own occurrence count.
    Summary(CircuitSummary),
    Circuit {
        circuit: LogicalCircuit,
        occurrences: u64,
    },
}

impl SubcircuitSource {
    pub fn occurrences(&self) -> u64 {
        match self {
            SubcircuitSource::Summary(s) => s.occurrences,
            SubcircuitSource::Circuit { occurrences, .. } => *occurrences,
        }
    }

    pub fn summary(&self) -> CircuitSummary {
        match self {
            SubcircuitSource::Summary(s) => *s,
            SubcircuitSource::Circuit {
                circuit,
                occurrences,
            } => compute_lre(circuit, *occurrences),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub subcircuits: Vec<SubcircuitSource>,
    pub scheme: Scheme,
    pub layout: LayoutKind,
    pub budget: f64,
    /// Register width of the whole algorithm; defaults to the widest
    /// sub-circuit. Qubits outside a sub-circuit idle through it.
    pub register_qubits: Option<u64>,
    pub spbc: SpbcParams,
    pub compiler: CompilerConfig,
    pub layout_config: LayoutConfig,
}

impl AlgorithmSpec {
    pub fn new(subcircuits: Vec<SubcircuitSource>, scheme: Scheme) -> Self {
        Self {
            subcircuits,
            scheme,
            layout: match scheme {
                Scheme::Spbc => LayoutKind::SpbcLinear,
                Scheme::DirectCliffordT => LayoutKind::OneLaneCondensed,
            },
            budget: 0.01,
            register_qubits: None,
            spbc: SpbcParams::default(),
            compiler: CompilerConfig::default(),
            layout_config: LayoutConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("algorithm has no sub-circuits")]
    NoSubcircuits,
    #[error("sub-circuit {index} has zero occurrences")]
    ZeroOccurrences { index: usize },
    #[error("sub-circuit {index} is a summary; the direct scheme needs a gate list")]
    NeedsCircuit { index: usize },
    #[error("sub-circuits use different code distances")]
    MixedDistances,
    #[error("no calibrated distance pair is inside the search grid")]
    NoCandidates,
    #[error("budget {budget:.3e} is infeasible; best achievable total error {best_eps:.3e} at ({d1}, {d2})")]
    Infeasible {
        budget: f64,
        best_eps: f64,
        d1: u32,
        d2: u32,
    },
    #[error("sub-circuit {index} failed to compile")]
    Compile {
        index: usize,
        #[source]
        source: CompileError,
    },
    #[error(transparent)]
    Factory(#[from] FactoryError),
}

/// Calibrated models used to score a distance pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Models {
    pub factory: FactoryModel,
    pub phys: PhysicalErrorModel,
}

impl Models {
    pub fn from_calibration(cal: &Calibration) -> Self {
        Self {
            factory: FactoryModel::from_calibration(cal),
            phys: PhysicalErrorModel::from_calibration(cal),
        }
    }
}

/// Per-occurrence cost of one sub-circuit at fixed distances. Volumes are
/// tile-slices; `p_logical` and `p_t` are the rates that turn them into
/// error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcircuitEstimate {
    pub d1: u32,
    pub d2: u32,
    pub p_logical: f64,
    pub p_t: f64,
    pub tau: u128,
    pub volume: u128,
    pub storage_volume: u128,
    pub t_count: u128,
    pub tiles: u64,
    pub num_factories: u64,
}

impl SubcircuitEstimate {
    pub fn eps(&self) -> f64 {
        (self.volume + self.storage_volume) as f64 * self.p_logical + self.t_count as f64 * self.p_t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmTotals {
    pub d1: u32,
    pub d2: u32,
    pub p_logical: f64,
    pub p_t: f64,
    pub tau_total: u128,
    pub volume: u128,
    pub storage_volume: u128,
    pub t_count: u128,
    pub n_total: u64,
    pub num_factories: u64,
}

impl AlgorithmTotals {
    pub fn eps_logical(&self) -> f64 {
        self.volume as f64 * self.p_logical
    }

    pub fn eps_dist(&self) -> f64 {
        dist_error(self.t_count, self.p_t)
    }

    pub fn eps_storage(&self) -> f64 {
        self.storage_volume as f64 * self.p_logical
    }
}

/// Serial composition: time, volume and T count add with occurrence
/// weights, the footprint is the widest sub-circuit's.
pub fn aggregate(parts: &[(SubcircuitEstimate, u64)]) -> Result<AlgorithmTotals, EstimateError> {
    let (first, _) = parts.first().ok_or(EstimateError::NoSubcircuits)?;
    let mut totals = AlgorithmTotals {
        d1: first.d1,
        d2: first.d2,
        p_logical: first.p_logical,
        p_t: first.p_t,
        tau_total: 0,
        volume: 0,
        storage_volume: 0,
        t_count: 0,
        n_total: 0,
        num_factories: 0,
    };
    for (index, (e, n)) in parts.iter().enumerate() {
        if (e.d1, e.d2) != (first.d1, first.d2) {
            return Err(EstimateError::MixedDistances);
        }
        if *n == 0 {
            return Err(EstimateError::ZeroOccurrences { index });
        }
        let n = u128::from(*n);
        totals.tau_total += n * e.tau;
        totals.volume += n * e.volume;
        totals.storage_volume += n * e.storage_volume;
        totals.t_count += n * e.t_count;
        totals.n_total = totals.n_total.max(e.tiles);
        totals.num_factories = totals.num_factories.max(e.num_factories);
    }
    Ok(totals)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtreReport {
    pub d1: u32,
    pub d2: u32,
    pub num_factories: u64,
    pub p_t: f64,
    pub n_total: u64,
    pub tau_total: u128,
    pub time_metric: u128,
    pub footprint_metric: u128,
    pub t_count: u128,
    pub eps_logical: f64,
    pub eps_dist: f64,
    pub eps_storage: f64,
}

impl FtreReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d1: u32,
        d2: u32,
        num_factories: u64,
        p_t: f64,
        n_total: u64,
        tau_total: u128,
        t_count: u128,
        eps: (f64, f64, f64),
    ) -> Self {
        let d = u128::from(d2);
        Self {
            d1,
            d2,
            num_factories,
            p_t,
            n_total,
            tau_total,
            time_metric: tau_total * d,
            footprint_metric: u128::from(n_total) * tau_total * d * d * d,
            t_count,
            eps_logical: eps.0,
            eps_dist: eps.1,
            eps_storage: eps.2,
        }
    }

    pub fn from_totals(t: &AlgorithmTotals) -> Self {
        Self::new(
            t.d1,
            t.d2,
            t.num_factories,
            t.p_t,
            t.n_total,
            t.tau_total,
            t.t_count,
            (t.eps_logical(), t.eps_dist(), t.eps_storage()),
        )
    }

    pub fn eps_total(&self) -> f64 {
        self.eps_logical + self.eps_dist + self.eps_storage
    }
}

/// Cost of one compiled sub-circuit occurrence at one distance pair: the
/// compiled slices plus a warm-up cycle, register qubits outside the
/// layout idling throughout, factories sized by min-storage.
pub fn direct_subcircuit(
    result: &CompilationResult,
    register_qubits: u64,
    factory: &FactorySpec,
    phys: &PhysicalErrorModel,
) -> (SubcircuitEstimate, MinStoragePlan) {
    let plan = min_storage_schedule(&result.profile, factory);
    let slices = result.num_slices as u128;
    let tau_d = u128::from(factory.tau_d);
    let register = u128::from(register_qubits.max(result.num_lq as u64));
    let idle = register - result.num_lq as u128;
    let volume = u128::from(result.active_volume) + idle * slices + register * tau_d;
    let tiles =
        result.layout_tiles as u64 + plan.num_factories * factory.tiles + plan.storage_tiles;
    let estimate = SubcircuitEstimate {
        d1: factory.d1,
        d2: factory.d2,
        p_logical: phys.p(factory.d2),
        p_t: factory.p_t,
        tau: slices + tau_d,
        volume,
        storage_volume: plan.storage_volume,
        t_count: u128::from(result.profile.total()),
        tiles,
        num_factories: plan.num_factories,
    };
    (estimate, plan)
}

/// Distance-independent work for an algorithm: compiled sub-circuits for
/// the direct scheme, summaries for SPBC.
#[derive(Debug, Clone)]
pub struct Prepared {
    scheme: Scheme,
    spbc: SpbcParams,
    summaries: Vec<CircuitSummary>,
    compiled: Vec<(CompilationResult, u64)>,
    register_qubits: u64,
}

pub fn prepare(spec: &AlgorithmSpec) -> Result<Prepared, EstimateError> {
    if spec.subcircuits.is_empty() {
        return Err(EstimateError::NoSubcircuits);
    }
    for (index, s) in spec.subcircuits.iter().enumerate() {
        if s.occurrences() == 0 {
            return Err(EstimateError::ZeroOccurrences { index });
        }
    }
    let summaries: Vec<CircuitSummary> = spec.subcircuits.iter().map(|s| s.summary()).collect();
    let widest = summaries.iter().map(|s| s.num_lq).max().unwrap_or(0);
    let register_qubits = spec.register_qubits.unwrap_or(widest).max(widest);

    let compiled = match spec.scheme {
        Scheme::Spbc => Vec::new(),
        Scheme::DirectCliffordT => spec
            .subcircuits
            .par_iter()
            .enumerate()
            .map(|(index, s)| match s {
                SubcircuitSource::Summary(_) => Err(EstimateError::NeedsCircuit { index }),
                SubcircuitSource::Circuit {
                    circuit,
                    occurrences,
                } => {
                    let layout = plan_layout_with(
                        circuit.qubit_count(),
                        spec.layout,
                        0,
                        &spec.layout_config,
                    );
                    compile_with(circuit, &layout, &mut Unlimited, &spec.compiler)
                        .map(|r| (r, *occurrences))
                        .map_err(|source| EstimateError::Compile { index, source })
                }
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(Prepared {
        scheme: spec.scheme,
        spbc: spec.spbc,
        summaries,
        compiled,
        register_qubits,
    })
}

impl Prepared {
    pub fn compiled(&self) -> &[(CompilationResult, u64)] {
        &self.compiled
    }

    pub fn summaries(&self) -> &[CircuitSummary] {
        &self.summaries
    }

    pub fn evaluate(&self, models: &Models, d1: u32, d2: u32) -> Result<FtreReport, EstimateError> {
        let factory = models.factory.at(d1, d2)?;
        match self.scheme {
            Scheme::Spbc => {
                let e = spbc_algorithm(&self.summaries, &factory, &models.phys, &self.spbc);
                Ok(FtreReport::new(
                    d1,
                    d2,
                    e.num_factories,
                    e.p_t,
                    e.n_total,
                    e.tau_total,
                    e.t_count,
                    (e.eps_logical, e.eps_dist, e.eps_storage),
                ))
            }
            Scheme::DirectCliffordT => {
                let parts: Vec<(SubcircuitEstimate, u64)> = self
                    .compiled
                    .iter()
                    .map(|(r, n)| {
                        (
                            direct_subcircuit(r, self.register_qubits, &factory, &models.phys).0,
                            *n,
                        )
                    })
                    .collect();
                Ok(FtreReport::from_totals(&aggregate(&parts)?))
            }
        }
    }
}

/// Calibrated pairs inside the search grid: odd d1 in 7..=13, odd d2 in
/// 17..=49.
pub fn candidate_pairs(model: &FactoryModel) -> Vec<(u32, u32)> {
    model
        .pairs()
        .filter(|&(d1, d2)| {
            d1 % 2 == 1 && d2 % 2 == 1 && (7..=13).contains(&d1) && (17..=49).contains(&d2)
        })
        .collect()
}

/// Smallest footprint among pairs meeting the budget; ties go to the
/// smaller d2, then d1.
pub fn select_best(reports: &[FtreReport], budget: f64) -> Result<FtreReport, EstimateError> {
    let best = reports
        .iter()
        .filter(|r| r.eps_total() <= budget)
        .min_by_key(|r| (r.footprint_metric, r.d2, r.d1));
    match best {
        Some(r) => Ok(*r),
        None => {
            let closest = reports
                .iter()
                .min_by(|a, b| a.eps_total().total_cmp(&b.eps_total()))
                .ok_or(EstimateError::NoCandidates)?;
            Err(EstimateError::Infeasible {
                budget,
                best_eps: closest.eps_total(),
                d1: closest.d1,
                d2: closest.d2,
            })
        }
    }
}

pub fn optimize_prepared(
    prepared: &Prepared,
    models: &Models,
    budget: f64,
) -> Result<FtreReport, EstimateError> {
    let candidates = candidate_pairs(&models.factory);
    if candidates.is_empty() {
        return Err(EstimateError::NoCandidates);
    }
    let reports = candidates
        .par_iter()
        .map(|&(d1, d2)| prepared.evaluate(models, d1, d2))
        .collect::<Result<Vec<_>, _>>()?;
    select_best(&reports, budget)
}

pub fn optimize_distances(
    spec: &AlgorithmSpec,
    models: &Models,
) -> Result<FtreReport, EstimateError> {
    optimize_prepared(&prepare(spec)?, models, spec.budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateKind};

    fn models() -> Models {
        Models::from_calibration(&Calibration::default())
    }

    #[test]
    fn error_law_is_decreasing() {
        let m = models().phys;
        let mut last = 1.0;
        for d in (3..61).step_by(2) {
            let p = m.p(d);
            assert!(p > 0.0 && p < last);
            last = p;
        }
    }

    #[test]
    fn logical_error_examples() {
        let m = models().phys;
        assert_eq!(logical_error(0, 31, &m), 0.0);
        let e = logical_error(204 * 36_960_000_000_000, 31, &m);
        assert!((e / 6.59e-4 - 1.0).abs() < 0.05, "{e}");
    }

    #[test]
    fn dist_error_examples() {
        assert_eq!(dist_error(0, 1.0), 0.0);
        assert!((dist_error(3_080_000_000_000, 2.37e-18) / 7.30e-6 - 1.0).abs() < 0.01);
        assert!((dist_error(207_000_000_000_000, 1.75e-18) / 3.64e-4 - 1.0).abs() < 0.01);
    }

    #[test]
    fn storage_error_examples() {
        let m = PhysicalErrorModel::new(1.0, 10.0);
        let mut plan = min_storage_schedule(
            &Default::default(),
            &FactorySpec {
                d1: 11,
                d2: 23,
                p_t: 0.0,
                tiles: 1,
                tau_d: 24,
            },
        );
        assert_eq!(storage_error(&plan, 23, &m), 0.0);
        plan.storage_volume = 1_000_000;
        assert!((storage_error(&plan, 23, &m) / 1e-6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_exact_law() {
        let truth = PhysicalErrorModel::new(0.3, 12.0);
        let pts: Vec<(u32, f64)> = [17, 21, 25, 31, 37]
            .iter()
            .map(|&d| (d, truth.p(d)))
            .collect();
        let f = fit_error_law(&pts).unwrap();
        assert!((f.lambda / 12.0 - 1.0).abs() < 1e-9);
        assert!((f.prefactor / 0.3 - 1.0).abs() < 1e-9);
        assert!(f.max_residual_ratio < 1.0 + 1e-9);
    }

    fn part(tau: u128, volume: u128, t: u128, tiles: u64) -> SubcircuitEstimate {
        SubcircuitEstimate {
            d1: 11,
            d2: 31,
            p_logical: 1e-11,
            p_t: 1e-12,
            tau,
            volume,
            storage_volume: 3,
            t_count: t,
            tiles,
            num_factories: 1,
        }
    }

    #[test]
    fn aggregation_hand_arithmetic() {
        let tau_d = 24;
        let a = part(10 + tau_d, 100, 5, 40);
        let b = part(5 + tau_d, 40, 7, 60);
        let t = aggregate(&[(a, 3), (b, 2)]).unwrap();
        assert_eq!(t.tau_total, 3 * (10 + tau_d) + 2 * (5 + tau_d));
        assert_eq!(t.volume, 3 * 100 + 2 * 40);
        assert_eq!(t.t_count, 3 * 5 + 2 * 7);
        assert_eq!(t.n_total, 60);
        let eps = FtreReport::from_totals(&t).eps_total();
        let by_hand = 3.0 * a.eps() + 2.0 * b.eps();
        assert!((eps / by_hand - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregation_rejects_mixed_distances() {
        let a = part(1, 1, 1, 1);
        let mut b = a;
        b.d2 = 33;
        assert!(matches!(
            aggregate(&[(a, 1), (b, 1)]),
            Err(EstimateError::MixedDistances)
        ));
        assert!(matches!(aggregate(&[]), Err(EstimateError::NoSubcircuits)));
    }

    #[test]
    fn replication_equals_occurrences() {
        let a = part(17, 300, 9, 50);
        let k = 7;
        let copies = vec![(a, 1); k];
        assert_eq!(
            aggregate(&copies).unwrap(),
            aggregate(&[(a, k as u64)]).unwrap()
        );
    }

    #[test]
    fn footprint_identity() {
        let r = FtreReport::new(
            11,
            31,
            3,
            1e-18,
            396,
            36_960_000_000_824,
            1,
            (0.0, 0.0, 0.0),
        );
        assert_eq!(r.footprint_metric, 396 * r.time_metric * 31 * 31);
        assert_eq!(r.time_metric, 36_960_000_000_824 * 31);
    }

    fn small_circuit() -> LogicalCircuit {
        let gates = vec![
            Gate::single(GateKind::H, 0),
            Gate::single(GateKind::T, 0),
            Gate::cx(0, 1),
            Gate::single(GateKind::T, 1),
            Gate::single(GateKind::Tdg, 2),
            Gate::cx(2, 0),
        ];
        LogicalCircuit::new(3, gates).unwrap()
    }

    #[test]
    fn direct_scheme_counts_warmup_and_idle() {
        let m = models();
        let circuit = small_circuit();
        let mut spec = AlgorithmSpec::new(
            vec![SubcircuitSource::Circuit {
                circuit,
                occurrences: 4,
            }],
            Scheme::DirectCliffordT,
        );
        spec.register_qubits = Some(5);
        let prepared = prepare(&spec).unwrap();
        let (result, _) = &prepared.compiled()[0];
        let factory = m.factory.at(11, 31).unwrap();
        let (e, plan) = direct_subcircuit(result, 5, &factory, &m.phys);
        assert_eq!(e.tau, result.num_slices as u128 + 24);
        assert_eq!(
            e.volume,
            u128::from(result.active_volume) + 2 * result.num_slices as u128 + 5 * 24
        );
        assert_eq!(e.t_count, 3);
        assert_eq!(plan.num_factories, 3);
        let r = prepared.evaluate(&m, 11, 31).unwrap();
        assert_eq!(r.tau_total, 4 * e.tau);
        assert_eq!(r.t_count, 12);
    }

    #[test]
    fn direct_scheme_rejects_summaries() {
        let s = CircuitSummary::from_totals(1, 2, 4, 1, 2);
        let spec = AlgorithmSpec::new(vec![SubcircuitSource::Summary(s)], Scheme::DirectCliffordT);
        assert!(matches!(
            prepare(&spec),
            Err(EstimateError::NeedsCircuit { index: 0 })
        ));
        let spec = AlgorithmSpec::new(vec![], Scheme::Spbc);
        assert!(matches!(prepare(&spec), Err(EstimateError::NoSubcircuits)));
    }

    fn trotter_square() -> AlgorithmSpec {
        let s = CircuitSummary::from_totals(
            53_700_000,
            100,
            7_840_000_000_000,
            3_080_000_000_000,
            170_000_000_000,
        );
        AlgorithmSpec::new(vec![SubcircuitSource::Summary(s)], Scheme::Spbc)
    }

    #[test]
    fn picks_published_distances() {
        let r = optimize_distances(&trotter_square(), &models()).unwrap();
        assert_eq!((r.d1, r.d2, r.num_factories), (11, 31, 3));
        assert!(r.eps_total() <= 0.01);
    }

    #[test]
    fn tighter_budget_never_lowers_d2() {
        let m = models();
        let prepared = prepare(&trotter_square()).unwrap();
        let base = optimize_prepared(&prepared, &m, 0.01).unwrap();
        // brute force over every calibrated pair
        let mut feasible: Vec<FtreReport> = m
            .factory
            .pairs()
            .map(|(a, b)| prepared.evaluate(&m, a, b).unwrap())
            .filter(|r| r.eps_total() <= 1e-5)
            .collect();
        feasible.sort_by_key(|r| (r.footprint_metric, r.d2, r.d1));
        match optimize_prepared(&prepared, &m, 1e-5) {
            Ok(strict) => {
                assert!(strict.d2 >= base.d2);
                assert_eq!(strict, feasible[0]);
            }
            Err(EstimateError::Infeasible { best_eps, .. }) => {
                assert!(feasible.is_empty());
                assert!(best_eps > 1e-5);
            }
            Err(e) => panic!("{e}"),
        }
    }
}
