use thiserror::Error;

/// Limit families a singular General-family parameter set collapses onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitFamily {
    /// `cos β = 0`: collapses onto a subfamily of the Bell family.
    Bell,
    /// `sin 2δ = 0`: collapses onto the skewed product family.
    SkewedProduct,
}

impl std::fmt::Display for LimitFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitFamily::Bell => f.write_str("bell"),
            LimitFamily::SkewedProduct => f.write_str("skewed-product"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("singular General-family constraint (sin2δ·cosβ = 0); the limit is the {limit} family")]
    SingularConstraint { limit: LimitFamily },

    #[error("phase relation infeasible: |cos φ₁| = {cos_phi:.6} > 1")]
    PhaseInfeasible { cos_phi: f64 },

    #[error("basis is not iso-entangled (max residual {residual:e})")]
    NotIsoEntangled { residual: f64 },

    #[error("degenerate subspace: {0}")]
    DegenerateSubspace(String),

    #[error("no convergence after {iterations} iterations (best residual {best:e})")]
    NonConvergence { iterations: usize, best: f64 },

    #[error("noise parameter {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),

    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
