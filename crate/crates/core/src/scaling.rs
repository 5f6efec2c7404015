//! Slice-count scaling sweeps over random circuits of growing width.

use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::compute_lre;
use crate::compiler::{
    compile_with, slices_per_layer, slices_per_t, CompileError, CompilerConfig, Unlimited,
};
use crate::fit::power_law_fit;
use crate::layout::{plan_layout_with, LayoutConfig, LayoutKind};
use crate::magic::{min_storage_schedule, FactorySpec};
use crate::random::{random_circuit, RandomCircuitConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub layers: usize,
    pub density: f64,
    pub t_fraction: f64,
    pub seed: u64,
    pub layout: LayoutKind,
    pub layout_config: LayoutConfig,
    pub compiler: CompilerConfig,
    /// Distillation cycle length used to size factories for each point.
    pub tau_d: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            sizes: vec![25, 49, 100, 196],
            layers: 24,
            density: 0.4,
            t_fraction: 0.39,
            seed: 1,
            layout: LayoutKind::OneLaneCondensed,
            layout_config: LayoutConfig::default(),
            compiler: CompilerConfig::default(),
            tau_d: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub num_lq: usize,
    pub depth: u64,
    pub num_t: u64,
    pub num_slices: usize,
    pub slices_per_layer: f64,
    pub slices_per_t: f64,
    pub num_factories: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    pub per_layer: PowerLaw,
    pub per_t: PowerLaw,
}

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("need at least two distinct sizes")]
    TooFewSizes,
    #[error("size {num_lq} failed to compile")]
    Compile {
        num_lq: usize,
        #[source]
        source: CompileError,
    },
    #[error("size {num_lq}: generated circuit has no T gates")]
    NoTGates { num_lq: usize },
    #[error("power-law fit is degenerate")]
    DegenerateFit,
}

pub fn run_point(config: &ScalingConfig, num_lq: usize) -> Result<ScalingPoint, ScalingError> {
    let circuit = random_circuit(&RandomCircuitConfig {
        num_qubits: num_lq,
        layers: config.layers,
        density: config.density,
        t_fraction: config.t_fraction,
        seed: config.seed ^ (num_lq as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ..Default::default()
    });
    let summary = compute_lre(&circuit, 1);
    let layout = plan_layout_with(num_lq, config.layout, 0, &config.layout_config);
    let result = compile_with(&circuit, &layout, &mut Unlimited, &config.compiler)
        .map_err(|source| ScalingError::Compile { num_lq, source })?;
    let factory = FactorySpec {
        d1: 0,
        d2: 0,
        p_t: 0.0,
        tiles: 0,
        tau_d: config.tau_d,
    };
    let plan = min_storage_schedule(&result.profile, &factory);
    Ok(ScalingPoint {
        num_lq,
        depth: summary.depth,
        num_t: summary.num_t,
        num_slices: result.num_slices,
        slices_per_layer: slices_per_layer(&result, &summary)
            .map_err(|_| ScalingError::DegenerateFit)?,
        slices_per_t: slices_per_t(&result, &summary)
            .map_err(|_| ScalingError::NoTGates { num_lq })?,
        num_factories: plan.num_factories,
    })
}

fn fit(
    points: &[ScalingPoint],
    y: impl Fn(&ScalingPoint) -> f64,
) -> Result<PowerLaw, ScalingError> {
    let xs: Vec<f64> = points.iter().map(|p| p.num_lq as f64).collect();
    let ys: Vec<f64> = points.iter().map(y).collect();
    let (exponent, coefficient, r_squared) =
        power_law_fit(&xs, &ys).ok_or(ScalingError::DegenerateFit)?;
    Ok(PowerLaw {
        exponent,
        coefficient,
        r_squared,
    })
}

pub fn run_sweep(config: &ScalingConfig) -> Result<ScalingReport, ScalingError> {
    let mut sizes = config.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(ScalingError::TooFewSizes);
    }
    let points = sizes
        .par_iter()
        .map(|&n| run_point(config, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScalingReport {
        per_layer: fit(&points, |p| p.slices_per_layer)?,
        per_t: fit(&points, |p| p.slices_per_t)?,
        points,
    })
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "num_lq,depth,num_t,num_slices,slices_per_layer,slices_per_t,num_factories\n",
        );
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{:.4},{:.4},{}\n",
                p.num_lq,
                p.depth,
                p.num_t,
                p.num_slices,
                p.slices_per_layer,
                p.slices_per_t,
                p.num_factories
            ));
        }
        out
    }
}
