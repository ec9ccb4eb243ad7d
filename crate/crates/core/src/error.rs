use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ordering parameter s = {s} is out of range (s < 1 required)")]
    OrderingOutOfRange { s: f64 },

    #[error("degenerate geometry: cos(phi) + g sin(phi) = 0")]
    DegenerateGeometry,

    #[error("output P-function is distributional (s2 = {s2} >= 1); use the output Q-function")]
    DistributionalP { s2: f64 },

    #[error("adaptive quadrature did not converge on [{lo}, {hi}] (error estimate {error:e})")]
    QuadratureFailure { lo: f64, hi: f64, error: f64 },

    #[error("{what} = {value} is out of range ({reason})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("thermal truncation at n = {n_trunc} leaves tail weight {tail:e} (>= 1e-8)")]
    TruncationInsufficient { n_trunc: usize, tail: f64 },

    #[error("Fock number {n} exceeds the configured maximum {max}")]
    FockTooLarge { n: u32, max: u32 },

    #[error("cubic has no real root in [0, {g_max}]")]
    NoRealRootInRange { g_max: f64 },

    #[error("invalid bracket [{lo}, {hi}]")]
    BracketInvalid { lo: f64, hi: f64 },

    #[error("rejection sampler stalled: acceptance {acceptance:e} over the last window")]
    RejectionStall { acceptance: f64 },

    #[error("at phi = {phi}: {source}")]
    AtPhi {
        phi: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Numerical failures (as opposed to bad input or IO).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::QuadratureFailure { .. }
            | Error::TruncationInsufficient { .. }
            | Error::NoRealRootInRange { .. }
            | Error::RejectionStall { .. } => true,
            Error::AtPhi { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
