use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Anosov: |trace| = {trace} <= 2")]
    NotAnosov { trace: i64 },
    #[error("matrix is not unimodular: det = {det}")]
    NotUnimodular { det: i64 },
    #[error("lattice is not invariant under the monodromy: {0}")]
    NotInvariant(String),
    #[error("degenerate lattice basis (det = {det:e})")]
    Degenerate { det: f64 },
    #[error("dual vector ({m1}, {m2}) lies on a coordinate axis")]
    AxisMode { m1: i64, m2: i64 },
    #[error("monodromy power {power} does not preserve the sublattice")]
    NotPreserved { power: u32 },
    #[error("invalid spin twist: {0}")]
    InvalidTwist(String),
    #[error("domain too small: boundary potential {boundary:.6} below required {required:.6}")]
    DomainTooSmall { boundary: f64, required: f64 },
    #[error("potential is not confining")]
    NotConfining,
    #[error("no eigenvalue in bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },
    #[error("integrator step control collapsed at z = {z}")]
    StiffnessFailure { z: f64 },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("certificate unavailable: {0}")]
    CertificateUnavailable(String),
    #[error("numeric solve contradicts the analytic bound: {0}")]
    BoundViolated(String),
    #[error("degenerate descent: {0}")]
    DegenerateDescent(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotAnosov { .. } => "NotAnosov",
            Error::NotUnimodular { .. } => "NotUnimodular",
            Error::NotInvariant(_) => "NotInvariant",
            Error::Degenerate { .. } => "Degenerate",
            Error::AxisMode { .. } => "AxisMode",
            Error::NotPreserved { .. } => "NotPreserved",
            Error::InvalidTwist(_) => "InvalidTwist",
            Error::DomainTooSmall { .. } => "DomainTooSmall",
            Error::NotConfining => "NotConfining",
            Error::NoRootInBracket { .. } => "NoRootInBracket",
            Error::StiffnessFailure { .. } => "StiffnessFailure",
            Error::Inconclusive(_) => "Inconclusive",
            Error::CertificateUnavailable(_) => "CertificateUnavailable",
            Error::BoundViolated(_) => "BoundViolated",
            Error::DegenerateDescent(_) => "DegenerateDescent",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
