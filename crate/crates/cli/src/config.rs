//! Run configuration: one JSON document with a section per command.
//!
//! Every section rejects unknown keys. Command-line flags are applied on
//! top of the document, and `ISOENT_SEED` replaces the document's seed.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use isoent::equivalence::FitOptions;
use isoent::families::FamilyParams;
use isoent::highdim::LatinMethod;
use isoent::network::{Curve, EdgeKind, Wiring};
use isoent::oracle::SolverOptions;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present, must name the subcommand being run.
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    /// Parameters for `gen`.
    pub gen: Option<FamilyParams>,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub triangle: TriangleSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub embed: EmbedSection,
    #[serde(default)]
    pub highdim: HighdimSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriangleFormat {
    /// `a,b,c,p` for all 64 outcome triples.
    #[default]
    Distribution,
    /// One row of the scan format.
    Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TriangleSection {
    /// Family member measured by all three parties; EJM when absent.
    pub params: Option<FamilyParams>,
    /// Basis file measured by all three parties; excludes `params`.
    pub basis_file: Option<PathBuf>,
    pub epsilon: f64,
    pub edge_state: EdgeKind,
    pub wiring: Wiring,
    pub format: TriangleFormat,
}

impl Default for TriangleSection {
    fn default() -> Self {
        Self {
            params: None,
            basis_file: None,
            epsilon: 0.0,
            edge_state: EdgeKind::PhiPlus,
            wiring: Wiring::Cyclic,
            format: TriangleFormat::Distribution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub curve: Curve,
    pub grid: usize,
    pub wiring: Wiring,
    pub edge_state: EdgeKind,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            curve: Curve::EjmNoise,
            grid: 21,
            wiring: Wiring::Cyclic,
            edge_state: EdgeKind::PhiPlus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedSection {
    /// Points on `φ ∈ [0, π/2]`, endpoints included.
    pub grid: usize,
}

impl Default for EmbedSection {
    fn default() -> Self {
        Self { grid: 11 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    #[default]
    ShiftMultiply,
    /// `|i⟩ ⊗ u_i|j⟩` with seeded Haar-random `u_i`.
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    /// Flat Fourier matrix: the unitary-operator case.
    #[default]
    Fourier,
    /// Circulant robust Hadamard with angle `chi`.
    Robust,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HighdimSection {
    pub d: usize,
    pub construction: Construction,
    pub latin: LatinMethod,
    /// Reads the Latin square from integer CSV instead of generating it.
    pub latin_file: Option<PathBuf>,
    /// Also writes the Latin square used as integer CSV.
    pub latin_out: Option<PathBuf>,
    pub matrix: MatrixKind,
    pub chi: f64,
}

impl Default for HighdimSection {
    fn default() -> Self {
        Self {
            d: 3,
            construction: Construction::ShiftMultiply,
            latin: LatinMethod::Cyclic,
            latin_file: None,
            latin_out: None,
            matrix: MatrixKind::Fourier,
            chi: 1.0,
        }
    }
}

pub fn parse_run_config(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
}

/// Seed precedence: `--seed` flag, then `ISOENT_SEED`, then the document.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, doc: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(text) = env {
        return text
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("ISOENT_SEED is not an unsigned integer: {text:?}")));
    }
    Ok(doc.unwrap_or(0))
}
