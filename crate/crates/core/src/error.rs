use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measurement axis must be a unit vector (|n| = {norm})")]
    NonUnitAxis { norm: f64 },
    #[error("coupling must be non-negative, got lambda = {0}")]
    NegativeCoupling(f64),
    #[error("closed-form expressions require an equatorial measurement axis (n_z = {nz})")]
    EquatorialAxisRequired { nz: f64 },
    #[error("parameter `{name}` must be finite")]
    NonFinite { name: &'static str },
    #[error("invalid oscillator initial state: {0}")]
    InvalidInit(&'static str),
    #[error("invalid physical setup: {0}")]
    InvalidSetup(&'static str),
    #[error("the approximate coupling requires the oscillator density")]
    MissingDensity,
    #[error("no closed form is available for the {0} initial state")]
    UnsupportedInit(&'static str),
    #[error("times must be ordered t1 <= t2 (got t1 = {t1}, t2 = {t2})")]
    TimeOrder { t1: f64, t2: f64 },
    #[error("Fock truncation dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),
    #[error("Hermitian eigendecomposition did not converge")]
    EigenFailure,
    #[error("Fock truncation at n_fock = {n_fock} loses {deficit:e} of the norm")]
    TruncationInsufficient { n_fock: usize, deficit: f64 },
    #[error("state dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("integration step too large: Bloch-vector length drifted by {0:e}")]
    StepTooLarge(f64),
    #[error("time step must be positive and finite")]
    InvalidStep,
    #[error("mean-field two-time statistics require an equatorial measurement axis")]
    NonEquatorialAxis,
    #[error("engine unavailable: {0}")]
    EngineUnavailable(String),
    #[error("scan resolution must be at least 2 (got {0})")]
    InvalidResolution(usize),
    #[error("scan window must satisfy lo < hi with finite bounds")]
    InvalidWindow,
    #[error("seed cell ({row}, {col}) is not a local minimum")]
    NotALocalMin { row: usize, col: usize },
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonUnitAxis { .. } => "NON_UNIT_AXIS",
            Error::NegativeCoupling(_) => "NEGATIVE_COUPLING",
            Error::EquatorialAxisRequired { .. } => "EQUATORIAL_AXIS_REQUIRED",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::InvalidInit(_) => "INVALID_INIT",
            Error::InvalidSetup(_) => "INVALID_SETUP",
            Error::MissingDensity => "MISSING_DENSITY",
            Error::UnsupportedInit(_) => "UNSUPPORTED_INIT",
            Error::TimeOrder { .. } => "TIME_ORDER",
            Error::DimensionTooSmall(_) => "DIMENSION_TOO_SMALL",
            Error::EigenFailure => "EIGEN_FAILURE",
            Error::TruncationInsufficient { .. } => "TRUNCATION_INSUFFICIENT",
            Error::DimensionMismatch(..) => "DIMENSION_MISMATCH",
            Error::NotNormalized(_) => "NOT_NORMALIZED",
            Error::StepTooLarge(_) => "STEP_TOO_LARGE",
            Error::InvalidStep => "INVALID_STEP",
            Error::NonEquatorialAxis => "NON_EQUATORIAL_AXIS",
            Error::EngineUnavailable(_) => "ENGINE_UNAVAILABLE",
            Error::InvalidResolution(_) => "INVALID_RESOLUTION",
            Error::InvalidWindow => "INVALID_WINDOW",
            Error::NotALocalMin { .. } => "NOT_A_LOCAL_MIN",
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure
                | Error::TruncationInsufficient { .. }
                | Error::StepTooLarge(_)
                | Error::NotALocalMin { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
