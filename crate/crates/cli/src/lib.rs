//! Command implementations behind the `lsre` binary.

pub mod manifest;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lsre_core::calibration::Calibration;
use lsre_core::circuit::{parse_circuit, CircuitSummary, LogicalCircuit};
use lsre_core::compiler::{
    compile_with, slices_per_layer, slices_per_t, CompileError, CompilerConfig, CorrectionPolicy,
    Unlimited,
};
use lsre_core::estimate::{
    optimize_prepared, prepare, EstimateError, FtreReport, Models, Scheme, SubcircuitSource,
};
use lsre_core::layout::{plan_layout_with, LayoutConfig, LayoutKind};
use lsre_core::replay::validate;
use lsre_core::scaling::{run_sweep, ScalingConfig, ScalingError};

use manifest::JobManifest;
use report::{ftre_table, sci, FtreRow, Table};

#[derive(Debug, Parser)]
#[command(name = "lsre", version, about = "Lattice-surgery resource estimation")]
pub struct Cli {
    /// Calibration file; overrides the manifest's and the built-in table.
    #[arg(long, global = true, env = "LSRE_CALIBRATION")]
    pub calibration: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Logical-layer estimates per sub-circuit and for the whole algorithm.
    Lre {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Full pipeline: compile or apply formulas, size factories, pick distances.
    Estimate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        layout: Option<String>,
        #[arg(long)]
        budget: Option<f64>,
        /// Seeds the T-correction choice instead of alternating.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate two manifests and report per-metric winners and ratios.
    Compare {
        /// Give exactly two: `--manifest a.toml --manifest b.toml`.
        #[arg(long, required = true, action = clap::ArgAction::Append)]
        manifest: Vec<PathBuf>,
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Slice-count scaling over seeded random circuits.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "25,49,100,196")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.4)]
        density: f64,
        #[arg(long, default_value_t = 0.39)]
        t_fraction: f64,
        #[arg(long, default_value_t = 24)]
        layers: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "one-lane-condensed")]
        layout: String,
    },
    /// Print a planned layout.
    DumpLayout {
        #[arg(long, default_value = "one-lane-condensed")]
        layout: String,
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 0)]
        storage: usize,
    },
    /// Compile a gate list and print the slice schedule.
    DumpSlices {
        /// Gate-list file; defaults to the manifest's first circuit.
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value = "one-lane-condensed")]
        layout: String,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Replay found a schedule inconsistent with its circuit.
#[derive(Debug, thiserror::Error)]
#[error("sub-circuit {name}: schedule failed replay: {first} ({count} violations)")]
pub struct ReplayFailure {
    pub name: String,
    pub first: String,
    pub count: usize,
}

/// Process exit code for an error: 2 for an infeasible budget, 3 for a
/// compilation failure, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<EstimateError>() {
            match e {
                EstimateError::Infeasible { .. } => return 2,
                EstimateError::Compile { .. } => return 3,
                _ => {}
            }
        }
        if cause.downcast_ref::<CompileError>().is_some()
            || cause.downcast_ref::<ReplayFailure>().is_some()
        {
            return 3;
        }
        if let Some(ScalingError::Compile { .. }) = cause.downcast_ref::<ScalingError>() {
            return 3;
        }
    }
    1
}

fn parse_layout(s: &str) -> Result<LayoutKind> {
    LayoutKind::parse(s).with_context(|| {
        format!("unknown layout '{s}' (expected spbc-linear, one-lane or one-lane-condensed)")
    })
}

fn load_calibration(
    cli_path: Option<&Path>,
    manifest: Option<&JobManifest>,
) -> Result<Calibration> {
    let path = cli_path
        .map(Path::to_path_buf)
        .or_else(|| manifest.and_then(JobManifest::calibration_path));
    match path {
        Some(p) => Ok(Calibration::load(&p)?),
        None => Ok(Calibration::default()),
    }
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Text => table.to_text(),
        Format::Csv => table.to_csv(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(cli: &Cli, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cli.out {
        Some(p) => write_file(p, text),
        None => stdout
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}

pub fn lre_table(names: &[String], summaries: &[CircuitSummary]) -> Table {
    let mut t = Table::new(&[
        "Sub-circuit",
        "Occurrences",
        "LQ",
        "Gates",
        "T gates",
        "Depth",
        "Density",
        "T fraction",
    ]);
    let row = |name: &str, occ: String, s: &CircuitSummary| {
        vec![
            name.to_string(),
            occ,
            s.num_lq.to_string(),
            sci(s.num_gates as f64),
            sci(s.num_t as f64),
            sci(s.depth as f64),
            sci(s.density),
            sci(s.t_fraction),
        ]
    };
    for (n, s) in names.iter().zip(summaries) {
        t.push(row(n, sci(s.occurrences as f64), s));
    }
    // a lone sub-circuit is its own total, published metrics included
    let total = if let [only] = summaries {
        *only
    } else {
        CircuitSummary::from_totals(
            summaries.iter().map(|s| s.occurrences).sum(),
            summaries.iter().map(|s| s.num_lq).max().unwrap_or(0),
            summaries.iter().map(|s| s.num_gates).sum(),
            summaries.iter().map(|s| s.num_t).sum(),
            summaries.iter().map(|s| s.depth).sum(),
        )
    };
    t.push(row("total", sci(total.occurrences as f64), &total));
    t
}

pub fn cmd_lre(manifest: &JobManifest) -> Result<Table> {
    let sources = manifest.sources()?;
    let names: Vec<String> = sources.iter().map(|s| s.name.clone()).collect();
    let summaries: Vec<CircuitSummary> = sources.iter().map(|s| s.source.summary()).collect();
    Ok(lre_table(&names, &summaries))
}

/// Overrides applied on top of a manifest.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scheme: Option<String>,
    pub layout: Option<String>,
    pub budget: Option<f64>,
    pub seed: Option<u64>,
}

pub struct Estimate {
    pub row: FtreRow,
    pub report: FtreReport,
    pub scheme: Scheme,
    /// Direct scheme only: per-sub-circuit compilation figures.
    pub breakdown: Option<Table>,
}

pub fn cmd_estimate(
    manifest: &JobManifest,
    calibration: &Calibration,
    o: &Overrides,
) -> Result<Estimate> {
    let mut m = manifest.clone();
    if let Some(s) = &o.scheme {
        m.scheme = s.clone();
    }
    if let Some(l) = &o.layout {
        m.layout = Some(l.clone());
    }
    if let Some(b) = o.budget {
        m.budget = b;
    }
    let (mut spec, names) = m.algorithm_spec()?;
    if let Some(seed) = o.seed {
        spec.compiler.correction = CorrectionPolicy::Seeded(seed);
    }
    let models = Models::from_calibration(calibration);
    let prepared = prepare(&spec)?;

    let breakdown = if spec.scheme == Scheme::DirectCliffordT {
        let mut t = Table::new(&[
            "Sub-circuit",
            "LQ",
            "Slices",
            "Slices/layer",
            "Slices/T",
            "Layout tiles",
            "Replay",
        ]);
        for ((src, (result, _)), name) in
            spec.subcircuits.iter().zip(prepared.compiled()).zip(&names)
        {
            let SubcircuitSource::Circuit { circuit, .. } = src else {
                unreachable!("prepare rejects summaries for the direct scheme");
            };
            let layout =
                plan_layout_with(circuit.qubit_count(), spec.layout, 0, &spec.layout_config);
            let violations = validate(circuit, &layout, result);
            if let Some(first) = violations.first() {
                return Err(ReplayFailure {
                    name: name.clone(),
                    first: first.to_string(),
                    count: violations.len(),
                }
                .into());
            }
            let summary = lsre_core::circuit::compute_lre(circuit, 1);
            let ratio = |r: Result<f64, _>| {
                r.map(|v: f64| format!("{v:.3}"))
                    .unwrap_or_else(|_| "-".into())
            };
            t.push(vec![
                name.clone(),
                circuit.qubit_count().to_string(),
                result.num_slices.to_string(),
                ratio(slices_per_layer(result, &summary)),
                ratio(slices_per_t(result, &summary)),
                result.layout_tiles.to_string(),
                "ok".into(),
            ]);
        }
        Some(t)
    } else {
        None
    };

    let report = optimize_prepared(&prepared, &models, spec.budget)?;
    Ok(Estimate {
        row: FtreRow::from_report(&m.application, &m.algorithm, &report),
        report,
        scheme: spec.scheme,
        breakdown,
    })
}

pub fn cmd_compare(a: &Estimate, b: &Estimate) -> Table {
    let mut t = Table::new(&["Metric", "A", "B", "B/A", "Winner"]);
    let metrics: [(&str, f64, f64); 5] = [
        (
            "time_metric",
            a.report.time_metric as f64,
            b.report.time_metric as f64,
        ),
        (
            "footprint_metric",
            a.report.footprint_metric as f64,
            b.report.footprint_metric as f64,
        ),
        (
            "tau_total",
            a.report.tau_total as f64,
            b.report.tau_total as f64,
        ),
        ("n_total", a.report.n_total as f64, b.report.n_total as f64),
        ("eps_total", a.report.eps_total(), b.report.eps_total()),
    ];
    for (name, x, y) in metrics {
        let winner = if x < y {
            "A"
        } else if y < x {
            "B"
        } else {
            "tie"
        };
        let ratio = if x == 0.0 && y == 0.0 { 1.0 } else { y / x };
        t.push(vec![
            name.into(),
            sci(x),
            sci(y),
            format!("{ratio:.4}"),
            winner.into(),
        ]);
    }
    t
}

pub fn scaling_tables(config: &ScalingConfig) -> Result<(Table, Table)> {
    let report = run_sweep(config)?;
    let mut points = Table::new(&[
        "LQ",
        "Depth",
        "T gates",
        "Slices",
        "Slices/layer",
        "Slices/T",
        "Factories",
    ]);
    for p in &report.points {
        points.push(vec![
            p.num_lq.to_string(),
            p.depth.to_string(),
            p.num_t.to_string(),
            p.num_slices.to_string(),
            format!("{:.4}", p.slices_per_layer),
            format!("{:.4}", p.slices_per_t),
            p.num_factories.to_string(),
        ]);
    }
    let mut fits = Table::new(&["Series", "Exponent", "Coefficient", "R2"]);
    for (name, f) in [
        ("slices_per_layer", report.per_layer),
        ("slices_per_t", report.per_t),
    ] {
        fits.push(vec![
            name.into(),
            format!("{:.4}", f.exponent),
            format!("{:.4}", f.coefficient),
            format!("{:.4}", f.r_squared),
        ]);
    }
    Ok((points, fits))
}

fn read_circuit(path: &Path) -> Result<LogicalCircuit> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_circuit(&text).with_context(|| format!("{}", path.display()))
}

fn first_manifest_circuit(path: &Path) -> Result<LogicalCircuit> {
    let m = JobManifest::load(path)?;
    for s in m.sources()? {
        if let SubcircuitSource::Circuit { circuit, .. } = s.source {
            return Ok(circuit);
        }
    }
    bail!("{}: no sub-circuit has a gate list", path.display())
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Lre { manifest } => {
            let m = JobManifest::load(manifest)?;
            let t = cmd_lre(&m)?;
            emit(cli, &render(&t, cli.format), stdout)
        }
        Command::Estimate {
            manifest,
            scheme,
            layout,
            budget,
            seed,
        } => {
            let m = JobManifest::load(manifest)?;
            let cal = load_calibration(cli.calibration.as_deref(), Some(&m))?;
            let overrides = Overrides {
                scheme: scheme.clone(),
                layout: layout.clone(),
                budget: *budget,
                seed: *seed,
            };
            let est = cmd_estimate(&m, &cal, &overrides)?;
            let table = ftre_table(std::slice::from_ref(&est.row));
            if let Some(p) = &m.outputs.csv {
                write_file(&m.resolve(p), &table.to_csv())?;
            }
            if let Some(p) = &m.outputs.text {
                write_file(&m.resolve(p), &table.to_text())?;
            }
            let mut text = render(&table, cli.format);
            if let Some(b) = &est.breakdown {
                text.push('\n');
                text.push_str(&render(b, cli.format));
            }
            emit(cli, &text, stdout)
        }
        Command::Compare { manifest, budget } => {
            let overrides = Overrides {
                budget: *budget,
                ..Default::default()
            };
            if manifest.len() != 2 {
                bail!(
                    "compare takes exactly two manifests, got {}",
                    manifest.len()
                );
            }
            let mut results = Vec::new();
            for path in manifest {
                let m = JobManifest::load(path)?;
                let cal = load_calibration(cli.calibration.as_deref(), Some(&m))?;
                results.push(
                    cmd_estimate(&m, &cal, &overrides)
                        .with_context(|| format!("{}", path.display()))?,
                );
            }
            let rows = ftre_table(&[results[0].row.clone(), results[1].row.clone()]);
            let mut text = render(&rows, cli.format);
            text.push('\n');
            text.push_str(&render(&cmd_compare(&results[0], &results[1]), cli.format));
            emit(cli, &text, stdout)
        }
        Command::Scaling {
            sizes,
            density,
            t_fraction,
            layers,
            seed,
            layout,
        } => {
            let config = ScalingConfig {
                sizes: sizes.clone(),
                layers: *layers,
                density: *density,
                t_fraction: *t_fraction,
                seed: *seed,
                layout: parse_layout(layout)?,
                ..Default::default()
            };
            let (points, fits) = scaling_tables(&config)?;
            let mut text = render(&points, cli.format);
            text.push('\n');
            text.push_str(&render(&fits, cli.format));
            emit(cli, &text, stdout)
        }
        Command::DumpLayout {
            layout,
            qubits,
            storage,
        } => {
            if *qubits == 0 {
                bail!("--qubits must be at least 1");
            }
            let kind = parse_layout(layout)?;
            let l = plan_layout_with(*qubits, kind, *storage, &LayoutConfig::default());
            l.validate()?;
            let text = format!(
                "{}\n{} rows x {} cols, {} tiles, {} data\n",
                l.to_text(),
                l.rows(),
                l.cols(),
                l.tile_count(),
                l.num_lq()
            );
            emit(cli, &text, stdout)
        }
        Command::DumpSlices {
            circuit,
            manifest,
            layout,
            seed,
        } => {
            let circuit = match (circuit, manifest) {
                (Some(p), _) => read_circuit(p)?,
                (None, Some(m)) => first_manifest_circuit(m)?,
                (None, None) => bail!("give --circuit or --manifest"),
            };
            let kind = parse_layout(layout)?;
            let l = plan_layout_with(circuit.qubit_count(), kind, 0, &LayoutConfig::default());
            let mut config = CompilerConfig::default();
            if let Some(s) = seed {
                config.correction = CorrectionPolicy::Seeded(*s);
            }
            let result = compile_with(&circuit, &l, &mut Unlimited, &config)?;
            let mut text = result.dump();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            emit(cli, &text, stdout)
        }
    }
}
