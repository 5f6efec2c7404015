//! Job manifests: one TOML document per algorithm run.
//!
//! ```toml
//! application = "TFIM (square)"
//! algorithm = "Trotter"
//! scheme = "spbc"                 # or "direct"
//! layout = "one-lane-condensed"   # direct scheme only
//! budget = 0.01
//! calibration = "cal.txt"         # optional, relative to the manifest
//!
//! [outputs]
//! csv = "row.csv"
//!
//! [[subcircuit]]
//! name = "step"
//! circuit = "step.circ"           # gate list, relative to the manifest
//! occurrences = 1000
//!
//! [[subcircuit]]
//! name = "published"
//! occurrences = 5.37e7
//! summary = { num_lq = 100, num_gates = 7.84e12, num_t = 3.08e12, depth = 1.70e11 }
//! ```
//!
//! Summary counts are totals over all occurrences. A summary may also carry
//! `density` and `t_fraction`; otherwise they are derived from the counts.

use std::path::{Path, PathBuf};

use lsre_core::circuit::{parse_circuit, CircuitSummary};
use lsre_core::estimate::{AlgorithmSpec, Scheme, SubcircuitSource};
use lsre_core::layout::LayoutKind;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{path}")]
    Circuit {
        path: PathBuf,
        #[source]
        source: lsre_core::circuit::ParseError,
    },
}

/// TOML numbers may be written as integers or in scientific notation.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Count {
    Int(u64),
    Float(f64),
}

impl Count {
    pub fn value(self) -> Option<u64> {
        match self {
            Count::Int(v) => Some(v),
            Count::Float(f) if f.is_finite() && f >= 0.0 => Some(f.round() as u64),
            Count::Float(_) => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SummaryFields {
    pub num_lq: Count,
    pub num_gates: Count,
    pub num_t: Count,
    pub depth: Count,
    /// Published derived metrics; recomputed from the counts when absent.
    pub density: Option<f64>,
    pub t_fraction: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SubcircuitEntry {
    pub name: Option<String>,
    pub circuit: Option<PathBuf>,
    pub summary: Option<SummaryFields>,
    pub occurrences: Count,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub text: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobManifest {
    #[serde(default)]
    pub application: String,
    #[serde(default)]
    pub algorithm: String,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    pub layout: Option<String>,
    #[serde(default = "default_budget")]
    pub budget: f64,
    pub calibration: Option<PathBuf>,
    pub register_qubits: Option<u64>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub subcircuit: Vec<SubcircuitEntry>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base: PathBuf,
    #[serde(skip)]
    pub path: PathBuf,
}

fn default_scheme() -> String {
    "spbc".into()
}

fn default_budget() -> f64 {
    0.01
}

/// A resolved sub-circuit with its display name.
#[derive(Debug, Clone)]
pub struct NamedSource {
    pub name: String,
    pub source: SubcircuitSource,
}

impl JobManifest {
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut m = Self::parse(&text).map_err(|source| ManifestError::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        m.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.path = path.to_path_buf();
        Ok(m)
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    fn invalid(&self, message: impl Into<String>) -> ManifestError {
        ManifestError::Invalid {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn scheme(&self) -> Result<Scheme, ManifestError> {
        Scheme::parse(&self.scheme)
            .ok_or_else(|| self.invalid(format!("unknown scheme '{}'", self.scheme)))
    }

    pub fn layout(&self) -> Result<Option<LayoutKind>, ManifestError> {
        self.layout
            .as_deref()
            .map(|l| {
                LayoutKind::parse(l).ok_or_else(|| self.invalid(format!("unknown layout '{l}'")))
            })
            .transpose()
    }

    pub fn calibration_path(&self) -> Option<PathBuf> {
        self.calibration.as_deref().map(|p| self.resolve(p))
    }

    pub fn sources(&self) -> Result<Vec<NamedSource>, ManifestError> {
        if self.subcircuit.is_empty() {
            return Err(self.invalid("no [[subcircuit]] entries"));
        }
        self.subcircuit
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let name = e.name.clone().unwrap_or_else(|| format!("sub{i}"));
                let occurrences = e.occurrences.value().filter(|&n| n >= 1).ok_or_else(|| {
                    self.invalid(format!("{name}: occurrences must be at least 1"))
                })?;
                let source = match (&e.circuit, &e.summary) {
                    (Some(p), None) => {
                        let path = self.resolve(p);
                        let text =
                            std::fs::read_to_string(&path).map_err(|source| ManifestError::Io {
                                path: path.clone(),
                                source,
                            })?;
                        let circuit = parse_circuit(&text)
                            .map_err(|source| ManifestError::Circuit { path, source })?;
                        SubcircuitSource::Circuit {
                            circuit,
                            occurrences,
                        }
                    }
                    (None, Some(s)) => {
                        let get = |c: Count, field: &str| {
                            c.value()
                                .ok_or_else(|| self.invalid(format!("{name}: bad {field}")))
                        };
                        let mut summary = CircuitSummary::from_totals(
                            occurrences,
                            get(s.num_lq, "num_lq")?,
                            get(s.num_gates, "num_gates")?,
                            get(s.num_t, "num_t")?,
                            get(s.depth, "depth")?,
                        );
                        summary.density = s.density.unwrap_or(summary.density);
                        summary.t_fraction = s.t_fraction.unwrap_or(summary.t_fraction);
                        SubcircuitSource::Summary(summary)
                    }
                    _ => {
                        return Err(self.invalid(format!(
                            "{name}: give exactly one of 'circuit' and 'summary'"
                        )))
                    }
                };
                Ok(NamedSource { name, source })
            })
            .collect()
    }

    pub fn algorithm_spec(&self) -> Result<(AlgorithmSpec, Vec<String>), ManifestError> {
        let scheme = self.scheme()?;
        let named = self.sources()?;
        let names = named.iter().map(|n| n.name.clone()).collect();
        let mut spec = AlgorithmSpec::new(named.into_iter().map(|n| n.source).collect(), scheme);
        if let Some(kind) = self.layout()? {
            spec.layout = kind;
        }
        spec.budget = self.budget;
        spec.register_qubits = self.register_qubits;
        Ok((spec, names))
    }
}
