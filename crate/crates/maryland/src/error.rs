//! Error type shared by every module.

/// Failure modes of the numerical operations. Parameter-domain violations
/// and numerical-guard trips are separated so callers can map them to
/// distinct exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("phase at site {site} is {dist:.3e} from the tangent pole (guard {guard:.1e})")]
    SingularPhase { site: i64, dist: f64, guard: f64 },

    #[error("continued-fraction expansion terminated exactly after {steps} coefficients: input is rational to working precision")]
    RationalInput { steps: usize },

    #[error("coefficient list is empty")]
    EmptyCoefficients,

    #[error("operation needs {needed} convergents, frequency stores {available}")]
    InsufficientConvergents { needed: usize, available: usize },

    #[error("initial data (0, 0) spans only the trivial solution")]
    TrivialInitial,

    #[error("energy window holds {found} eigenvalues, cap is {cap}")]
    WindowTooWide { found: usize, cap: usize },

    #[error("box determinant has log-magnitude {log_mag:.3} below floor {floor:.3}: E is an eigenvalue of the box to resolution")]
    SingularDenominator { log_mag: f64, floor: f64 },

    #[error("interpolation nodes too close: min pairwise separation {min_sep:.3e}")]
    DuplicateNodes { min_sep: f64 },

    #[error("k = {k} is too small for the interval scheme")]
    KTooSmall { k: i64 },

    #[error("characteristic roots have equal modulus")]
    DegenerateRoots,

    #[error("box too small: eigenvector edge/max ratio {edge_ratio:.3e} exceeds {limit:.1e}")]
    BoxTooSmall { edge_ratio: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
