//! Calibration file: logical error law constants and the factory table.
//!
//! Text format, `#` comments. Key/value lines `prefactor <A>` and
//! `lambda <L>` set the error law; every other non-empty line is a factory
//! row `d1 d2 p_t base_tiles tau_d`.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Calibration shipped with the crate.
pub const DEFAULT_CALIBRATION: &str = include_str!("../data/calibration.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactoryCalibration {
    pub d1: u32,
    pub d2: u32,
    pub p_t: f64,
    pub base_tiles: u64,
    pub tau_d: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub prefactor: f64,
    pub lambda: f64,
    rows: Vec<FactoryCalibration>,
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("calibration line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("calibration is missing `{0}`")]
    Missing(&'static str),
    #[error("reading calibration {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Default for Calibration {
    fn default() -> Self {
        Self::parse(DEFAULT_CALIBRATION).expect("bundled calibration parses")
    }
}

impl Calibration {
    pub fn new(prefactor: f64, lambda: f64, rows: Vec<FactoryCalibration>) -> Self {
        Self {
            prefactor,
            lambda,
            rows,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CalibrationError> {
        let text = std::fs::read_to_string(path).map_err(|source| CalibrationError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CalibrationError> {
        let mut prefactor = None;
        let mut lambda = None;
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| CalibrationError::Syntax { line, message };
            let tok: Vec<&str> = content.split_whitespace().collect();
            let float = |s: &str| -> Result<f64, CalibrationError> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| err(format!("expected a positive number, got `{s}`")))
            };
            let int = |s: &str| -> Result<u64, CalibrationError> {
                s.parse::<u64>()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| err(format!("expected a positive integer, got `{s}`")))
            };
            match tok.as_slice() {
                ["prefactor", v] => prefactor = Some(float(v)?),
                ["lambda", v] => {
                    let l = float(v)?;
                    if l <= 1.0 {
                        return Err(err("lambda must exceed 1".into()));
                    }
                    lambda = Some(l);
                }
                [d1, d2, p_t, base, tau_d] => {
                    let row = FactoryCalibration {
                        d1: int(d1)? as u32,
                        d2: int(d2)? as u32,
                        p_t: float(p_t)?,
                        base_tiles: int(base)?,
                        tau_d: int(tau_d)?,
                    };
                    if row.p_t >= 1.0 {
                        return Err(err("p_t must be below 1".into()));
                    }
                    if row.d1.is_multiple_of(2) || row.d2.is_multiple_of(2) || row.d1 > row.d2 {
                        return Err(err(format!(
                            "distances must be odd with d1 <= d2, got ({}, {})",
                            row.d1, row.d2
                        )));
                    }
                    rows.push(row);
                }
                _ => return Err(err(format!("unrecognized line `{content}`"))),
            }
        }
        Ok(Self {
            prefactor: prefactor.ok_or(CalibrationError::Missing("prefactor"))?,
            lambda: lambda.ok_or(CalibrationError::Missing("lambda"))?,
            rows,
        })
    }

    pub fn factory_rows(&self) -> &[FactoryCalibration] {
        &self.rows
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "prefactor {}", self.prefactor);
        let _ = writeln!(out, "lambda {}", self.lambda);
        let _ = writeln!(out, "# d1 d2 p_t base_tiles tau_d");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{} {} {:e} {} {}",
                r.d1, r.d2, r.p_t, r.base_tiles, r.tau_d
            );
        }
        out
    }
}
