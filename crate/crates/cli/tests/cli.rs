use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lsre_cli::report::{FtreRow, Table};
use proptest::prelude::*;
use tempfile::TempDir;

fn lsre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsre"))
        .args(args)
        .env_remove("LSRE_CALIBRATION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn table(name: &str) -> Vec<Vec<String>> {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    let t = Table::from_csv(&std::fs::read_to_string(path).unwrap()).unwrap();
    t.rows
}

fn summary_manifest(row: &[String], budget: f64) -> String {
    format!(
        "application = \"{}\"\nalgorithm = \"{}\"\nscheme = \"spbc\"\nbudget = {budget}\n\n[[subcircuit]]\noccurrences = {}\nsummary = {{ num_lq = {}, num_gates = {}, num_t = {}, depth = {}, density = {}, t_fraction = {} }}\n",
        row[0], row[1], row[2], row[3], row[4], row[5], row[6], row[7], row[8]
    )
}

fn first_row(csv: &str) -> FtreRow {
    let t = Table::from_csv(csv).unwrap();
    FtreRow::from_cells(&t.rows[0]).unwrap()
}

const LADDER: &str = "qubits 10
h 0
cx 0 1
cx 1 2
cx 2 3
cx 3 4
cx 4 5
cx 5 6
cx 6 7
cx 7 8
cx 8 9
t 0
t 2
tdg 4
t 6
tdg 8
t 5
t 7
tdg 9
cx 8 9
cx 4 5
x 3
";

#[test]
fn lre_counts_cx_twice() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "two.circ", "qubits 2\nh 0\ncx 0 1\n");
    let m = write(
        dir.path(),
        "m.toml",
        "[[subcircuit]]\nname = \"two\"\ncircuit = \"two.circ\"\noccurrences = 1\n",
    );
    let o = lsre(&["lre", "--manifest", s(&m), "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::from_csv(&stdout(&o)).unwrap();
    assert_eq!(t.rows[0][0], "two");
    assert_eq!(t.rows[0][3], "3.00e+00");
    assert_eq!(t.rows[0][5], "2.00e+00");
}

#[test]
fn lre_echoes_published_row() {
    let dir = TempDir::new().unwrap();
    let row = &table("table1.csv")[0];
    let m = write(dir.path(), "m.toml", &summary_manifest(row, 0.01));
    let o = lsre(&["lre", "--manifest", s(&m), "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::from_csv(&stdout(&o)).unwrap();
    let total = &t.rows[1];
    assert_eq!(total[1..], row[2..]);
}

#[test]
fn missing_file_names_the_path() {
    let o = lsre(&["lre", "--manifest", "/nonexistent/job.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/job.toml"));

    let dir = TempDir::new().unwrap();
    let m = write(
        dir.path(),
        "m.toml",
        "[[subcircuit]]\ncircuit = \"gone.circ\"\noccurrences = 1\n",
    );
    let o = lsre(&["lre", "--manifest", s(&m)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gone.circ"));
}

#[test]
fn spbc_rows_match_published_table() {
    let dir = TempDir::new().unwrap();
    let t1 = table("table1.csv");
    let t2 = table("table2.csv");
    for (i, (a, b)) in t1.iter().zip(&t2).enumerate() {
        let m = write(
            dir.path(),
            &format!("m{i}.toml"),
            &summary_manifest(a, 0.01),
        );
        let o = lsre(&["estimate", "--manifest", s(&m), "--format", "csv"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let got = first_row(&stdout(&o));
        let want = FtreRow::from_cells(b).unwrap();
        assert_eq!(
            (got.d1, got.d2, got.num_factories),
            (want.d1, want.d2, want.num_factories),
            "{}",
            a[0]
        );
        let close = |x: f64, y: f64, tol: f64| (x / y - 1.0).abs() <= tol;
        assert!(close(got.tau_total, want.tau_total, 0.006), "{} tau", a[0]);
        assert!(
            close(got.eps_dist, want.eps_dist, 0.011),
            "{} eps_dist",
            a[0]
        );
        assert!(
            close(got.eps_logical, want.eps_logical, 0.05),
            "{} eps_logical",
            a[0]
        );
        assert!(
            close(got.eps_storage, want.eps_storage, 0.05),
            "{} eps_storage",
            a[0]
        );
        assert!(close(got.n_total, want.n_total, 0.02), "{} n_total", a[0]);
    }
}

#[test]
fn direct_scheme_reports_replay_and_slices_per_t() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "ladder.circ", LADDER);
    let m = write(
        dir.path(),
        "m.toml",
        "application = \"Ladder\"\nalgorithm = \"Trotter\"\nscheme = \"direct\"\n\n[[subcircuit]]\nname = \"ladder\"\ncircuit = \"ladder.circ\"\noccurrences = 1e6\n",
    );
    let o = lsre(&["estimate", "--manifest", s(&m)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("Slices/T"));
    let line = out.lines().find(|l| l.starts_with("ladder")).unwrap();
    assert!(line.trim_end().ends_with("ok"), "{line}");

    // same job on the other lane layout, via the flag
    let o = lsre(&["estimate", "--manifest", s(&m), "--layout", "one-lane"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn direct_scheme_needs_gate_lists() {
    let dir = TempDir::new().unwrap();
    let row = &table("table1.csv")[0];
    let m = write(dir.path(), "m.toml", &summary_manifest(row, 0.01));
    let o = lsre(&["estimate", "--manifest", s(&m), "--scheme", "direct"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gate list"));
}

#[test]
fn empty_subcircuit_list_is_an_error() {
    let dir = TempDir::new().unwrap();
    let m = write(
        dir.path(),
        "m.toml",
        "application = \"x\"\nscheme = \"spbc\"\n",
    );
    let o = lsre(&["estimate", "--manifest", s(&m)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("subcircuit"));
}

#[test]
fn infeasible_budget_has_its_own_exit_code() {
    let dir = TempDir::new().unwrap();
    let row = &table("table1.csv")[0];
    let m = write(dir.path(), "m.toml", &summary_manifest(row, 0.01));
    let o = lsre(&["estimate", "--manifest", s(&m), "--budget", "1e-9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("best achievable"));
}

#[test]
fn compile_failures_map_to_exit_three() {
    use lsre_core::compiler::CompileError;
    use lsre_core::estimate::EstimateError;
    let e = anyhow::Error::from(EstimateError::Compile {
        index: 0,
        source: CompileError::Unroutable {
            gate: 1,
            since: 0,
            slice: 11,
        },
    });
    assert_eq!(lsre_cli::exit_code(&e), 3);
    let e = anyhow::Error::from(EstimateError::NoSubcircuits);
    assert_eq!(lsre_cli::exit_code(&e), 1);
}

#[test]
fn compare_identical_manifests_ties() {
    let dir = TempDir::new().unwrap();
    let row = &table("table1.csv")[3];
    let a = write(dir.path(), "a.toml", &summary_manifest(row, 0.01));
    let o = lsre(&[
        "compare",
        "--manifest",
        s(&a),
        "--manifest",
        s(&a),
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let metrics = out.split("\n\n").nth(1).unwrap();
    let t = Table::from_csv(metrics).unwrap();
    assert_eq!(t.rows.len(), 5);
    for r in &t.rows {
        assert_eq!(r[3], "1.0000");
        assert_eq!(r[4], "tie");
    }
}

#[test]
fn relaxed_budget_never_needs_larger_distances() {
    let dir = TempDir::new().unwrap();
    for row in table("table1.csv").iter().take(6) {
        let strict = write(dir.path(), "strict.toml", &summary_manifest(row, 0.01));
        let relaxed = write(dir.path(), "relaxed.toml", &summary_manifest(row, 0.1));
        let o = lsre(&[
            "compare",
            "--manifest",
            s(&strict),
            "--manifest",
            s(&relaxed),
            "--format",
            "csv",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        let mut parts = out.split("\n\n");
        let rows = Table::from_csv(parts.next().unwrap()).unwrap();
        let metrics = Table::from_csv(parts.next().unwrap()).unwrap();
        let a = FtreRow::from_cells(&rows.rows[0]).unwrap();
        let b = FtreRow::from_cells(&rows.rows[1]).unwrap();
        assert!(b.d2 <= a.d2);
        assert!(metrics.rows[0][4] == "B" || metrics.rows[0][4] == "tie");
    }
}

#[test]
fn qsp_wins_footprint_for_square_lattice() {
    let dir = TempDir::new().unwrap();
    let t1 = table("table1.csv");
    let qsp = write(dir.path(), "qsp.toml", &summary_manifest(&t1[6], 0.01));
    let trotter = write(dir.path(), "trotter.toml", &summary_manifest(&t1[0], 0.01));
    let o = lsre(&[
        "compare",
        "--manifest",
        s(&qsp),
        "--manifest",
        s(&trotter),
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let metrics = Table::from_csv(out.split("\n\n").nth(1).unwrap()).unwrap();
    let footprint = metrics
        .rows
        .iter()
        .find(|r| r[0] == "footprint_metric")
        .unwrap();
    assert_eq!(footprint[4], "A");
    assert_eq!(footprint[1], "1.52e+18");
}

#[test]
fn compare_needs_two_manifests() {
    let dir = TempDir::new().unwrap();
    let row = &table("table1.csv")[0];
    let a = write(dir.path(), "a.toml", &summary_manifest(row, 0.01));
    let o = lsre(&["compare", "--manifest", s(&a)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scaling_reports_fits_and_is_reproducible() {
    let args = [
        "scaling", "--sizes", "9,16", "--layers", "4", "--seed", "3", "--format", "csv",
    ];
    let a = lsre(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let out = stdout(&a);
    let mut parts = out.split("\n\n");
    let points = Table::from_csv(parts.next().unwrap()).unwrap();
    let fits = Table::from_csv(parts.next().unwrap()).unwrap();
    assert_eq!(points.rows.len(), 2);
    assert_eq!(fits.header[3], "R2");
    assert!(fits.rows[0][3].parse::<f64>().unwrap().is_finite());
    assert_eq!(lsre(&args).stdout, a.stdout);

    let o = lsre(&["scaling", "--sizes", "9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn estimate_output_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "ladder.circ", LADDER);
    let m = write(
        dir.path(),
        "m.toml",
        "scheme = \"direct\"\n[outputs]\ncsv = \"row.csv\"\n\n[[subcircuit]]\ncircuit = \"ladder.circ\"\noccurrences = 1000\n",
    );
    let out = dir.path().join("out.csv");
    let a = lsre(&[
        "estimate",
        "--manifest",
        s(&m),
        "--format",
        "csv",
        "--out",
        s(&out),
        "--seed",
        "4",
    ]);
    assert!(a.status.success(), "{}", stderr(&a));
    let first = std::fs::read(&out).unwrap();
    let b = lsre(&[
        "estimate",
        "--manifest",
        s(&m),
        "--format",
        "csv",
        "--out",
        s(&out),
        "--seed",
        "4",
    ]);
    assert!(b.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);
    let row = std::fs::read_to_string(dir.path().join("row.csv")).unwrap();
    assert!(String::from_utf8(first).unwrap().starts_with(&row));
}

#[test]
fn calibration_from_environment() {
    let dir = TempDir::new().unwrap();
    let row = &table("table1.csv")[0];
    let m = write(dir.path(), "m.toml", &summary_manifest(row, 0.01));
    let cal = write(
        dir.path(),
        "cal.txt",
        &lsre_core::Calibration::default().to_text(),
    );
    let baseline = lsre(&["estimate", "--manifest", s(&m)]);
    let o = Command::new(env!("CARGO_BIN_EXE_lsre"))
        .args(["estimate", "--manifest", s(&m)])
        .env("LSRE_CALIBRATION", &cal)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(o.stdout, baseline.stdout);

    let o = Command::new(env!("CARGO_BIN_EXE_lsre"))
        .args(["estimate", "--manifest", s(&m)])
        .env("LSRE_CALIBRATION", dir.path().join("missing.txt"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.txt"));
}

#[test]
fn dump_commands() {
    let o = lsre(&["dump-layout", "--layout", "one-lane", "--qubits", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches('D').count(), 4);
    assert!(out.contains("4 data"));

    let dir = TempDir::new().unwrap();
    let c = write(dir.path(), "ladder.circ", LADDER);
    let o = lsre(&["dump-slices", "--circuit", s(&c)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("slice 0:"));
    assert!(out.contains("merge*"));

    let o = lsre(&["dump-slices"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(lsre(&["--help"]).status.code(), Some(0));
    assert_eq!(lsre(&["estimate"]).status.code(), Some(1));
    assert_eq!(lsre(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        lsre(&["dump-layout", "--qubits", "3", "--layout", "hexagonal"])
            .status
            .code(),
        Some(1)
    );
}

proptest! {
    #[test]
    fn rows_round_trip_within_three_figures(
        d1 in 3u32..20, d2 in 17u32..50, n in 0u64..1000,
        vals in prop::collection::vec(1e-20f64..1e25, 9),
    ) {
        let row = FtreRow {
            application: "App, with comma".into(),
            algorithm: "QSP".into(),
            d1, d2, num_factories: n,
            p_t: vals[0], n_total: vals[1], tau_total: vals[2], time_metric: vals[3],
            footprint_metric: vals[4], eps_logical: vals[5], eps_dist: vals[6],
            eps_storage: vals[7], eps_total: vals[8],
        };
        let t = lsre_cli::report::ftre_table(std::slice::from_ref(&row));
        let back = FtreRow::from_cells(&Table::from_csv(&t.to_csv()).unwrap().rows[0]).unwrap();
        prop_assert_eq!(&back.application, &row.application);
        prop_assert_eq!((back.d1, back.d2, back.num_factories), (d1, d2, n));
        let pairs = [
            (back.p_t, row.p_t), (back.n_total, row.n_total), (back.tau_total, row.tau_total),
            (back.time_metric, row.time_metric), (back.footprint_metric, row.footprint_metric),
            (back.eps_logical, row.eps_logical), (back.eps_dist, row.eps_dist),
            (back.eps_storage, row.eps_storage), (back.eps_total, row.eps_total),
        ];
        for (x, y) in pairs {
            prop_assert!((x / y - 1.0).abs() <= 0.005 + 1e-12, "{} vs {}", x, y);
        }
    }
}
