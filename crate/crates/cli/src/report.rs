//! Table rows and their CSV / aligned-text rendering.

use lsre_core::estimate::FtreReport;

/// Three significant figures with a signed two-digit exponent: `3.96e+02`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// A plain table: header plus string cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 cells")
    }

    pub fn from_csv(text: &str) -> Result<Self, csv::Error> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    /// Columns padded to a common width; text columns left-aligned,
    /// everything else right-aligned.
    pub fn to_text(&self) -> String {
        let cols = self.header.len();
        let mut width: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                width[i] = width[i].max(c.chars().count());
            }
        }
        let numeric: Vec<bool> = (0..cols)
            .map(|i| !self.rows.is_empty() && self.rows.iter().all(|r| r[i].parse::<f64>().is_ok()))
            .collect();
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if numeric[i] {
                        format!("{c:>w$}", w = width[i])
                    } else {
                        format!("{c:<w$}", w = width[i])
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

pub const FTRE_HEADER: [&str; 14] = [
    "Application",
    "Algorithm",
    "d1",
    "d2",
    "N",
    "P_T",
    "n_total",
    "tau_total",
    "tau_total*d2",
    "n_total*tau_total*d2^3",
    "eps_logical",
    "eps_dist",
    "eps_storage",
    "eps_total",
];

/// One row of an FTRE table.
#[derive(Debug, Clone, PartialEq)]
pub struct FtreRow {
    pub application: String,
    pub algorithm: String,
    pub d1: u32,
    pub d2: u32,
    pub num_factories: u64,
    pub p_t: f64,
    pub n_total: f64,
    pub tau_total: f64,
    pub time_metric: f64,
    pub footprint_metric: f64,
    pub eps_logical: f64,
    pub eps_dist: f64,
    pub eps_storage: f64,
    pub eps_total: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("bad FTRE row: {0}")]
pub struct RowError(pub String);

impl FtreRow {
    pub fn from_report(application: &str, algorithm: &str, r: &FtreReport) -> Self {
        Self {
            application: application.to_string(),
            algorithm: algorithm.to_string(),
            d1: r.d1,
            d2: r.d2,
            num_factories: r.num_factories,
            p_t: r.p_t,
            n_total: r.n_total as f64,
            tau_total: r.tau_total as f64,
            time_metric: r.time_metric as f64,
            footprint_metric: r.footprint_metric as f64,
            eps_logical: r.eps_logical,
            eps_dist: r.eps_dist,
            eps_storage: r.eps_storage,
            eps_total: r.eps_total(),
        }
    }

    pub fn cells(&self) -> Vec<String> {
        vec![
            self.application.clone(),
            self.algorithm.clone(),
            self.d1.to_string(),
            self.d2.to_string(),
            self.num_factories.to_string(),
            sci(self.p_t),
            sci(self.n_total),
            sci(self.tau_total),
            sci(self.time_metric),
            sci(self.footprint_metric),
            sci(self.eps_logical),
            sci(self.eps_dist),
            sci(self.eps_storage),
            sci(self.eps_total),
        ]
    }

    pub fn from_cells(cells: &[String]) -> Result<Self, RowError> {
        if cells.len() != FTRE_HEADER.len() {
            return Err(RowError(format!(
                "{} cells, expected {}",
                cells.len(),
                FTRE_HEADER.len()
            )));
        }
        let f = |i: usize| {
            cells[i]
                .parse::<f64>()
                .map_err(|_| RowError(format!("{}: '{}'", FTRE_HEADER[i], cells[i])))
        };
        let u = |i: usize| {
            cells[i]
                .parse::<u64>()
                .map_err(|_| RowError(format!("{}: '{}'", FTRE_HEADER[i], cells[i])))
        };
        Ok(Self {
            application: cells[0].clone(),
            algorithm: cells[1].clone(),
            d1: u(2)? as u32,
            d2: u(3)? as u32,
            num_factories: u(4)?,
            p_t: f(5)?,
            n_total: f(6)?,
            tau_total: f(7)?,
            time_metric: f(8)?,
            footprint_metric: f(9)?,
            eps_logical: f(10)?,
            eps_dist: f(11)?,
            eps_storage: f(12)?,
            eps_total: f(13)?,
        })
    }
}

pub fn ftre_table(rows: &[FtreRow]) -> Table {
    let mut t = Table::new(&FTRE_HEADER);
    for r in rows {
        t.push(r.cells());
    }
    t
}
