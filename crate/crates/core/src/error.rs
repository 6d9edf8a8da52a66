use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("natural units need a positive rest mass; use the SI entry points for massless particles")]
    MasslessConversion,
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("unknown particle `{0}`")]
    UnknownParticle(String),
    #[error("malformed registry: {0}")]
    MalformedRegistry(String),
    #[error("non-finite input `{0}`")]
    NonFiniteInput(&'static str),
    #[error("negative eta {0}")]
    NegativeEta(f64),
    #[error("singular point: E+up * E+down vanishes at eta={eta}, delta={delta}")]
    SingularPoint { eta: f64, delta: f64 },
    #[error("singular expansion: |1 - delta^2| vanishes at delta={0}")]
    SingularExpansion(f64),
    #[error("outside expansion domain: {0}")]
    OutsideExpansionDomain(String),
    #[error("superluminal velocity {0} (need |v| < 1 in units of c)")]
    SuperluminalVelocity(f64),
    #[error("velocity {0} must be non-negative")]
    NegativeVelocity(f64),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("Jacobi iteration did not converge (off-diagonal norm {0:e} after cap)")]
    NoConvergence(f64),
    #[error("ambiguous spin labeling: {0}")]
    AmbiguousLabeling(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("oracle validation failed at series {series}, point {point}: |numeric - analytic| = {deviation:e}")]
    ValidationFailed {
        series: f64,
        point: f64,
        deviation: f64,
    },
    #[error("{context} (series {series}, point {point})")]
    SweepPoint {
        series: f64,
        point: f64,
        context: Box<Error>,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by malformed requests rather than physics guards.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::InvalidSweep(_) => true,
            Error::SweepPoint { context, .. } => context.is_usage(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
