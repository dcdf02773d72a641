use thiserror::Error;

/// Failures reported by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adaptive quadrature on [{a}, {b}] did not converge within {max_depth} bisections")]
    QuadratureNonConvergence { a: f64, b: f64, max_depth: usize },

    #[error("degenerate spectrum: eigenvalue gap {gap:e} is below {threshold:e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    #[error("coefficients violate normalization: |c1|^2 + |c2|^2 = {norm_sq}")]
    NormViolation { norm_sq: f64 },

    #[error("{what} index {index} out of range 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("dimension {total} exceeds the configured cap of {cap} amplitudes")]
    DimensionOverflow { total: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("no oscillation: spectral peak {peak:e} is below 10x the floor {floor:e}")]
    NoOscillation { peak: f64, floor: f64 },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("state has zero norm")]
    ZeroState,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
