use thiserror::Error;

/// Error kinds surfaced by the library. The CLI maps them to exit codes.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("non-invertible series: {0}")]
    NonInvertible(String),
    #[error("composition undefined: {0}")]
    CompositionUndefined(String),
    #[error("not reversible: {0}")]
    NotReversible(String),
    #[error("ramified square root: {0}")]
    RamifiedSqrt(String),
    #[error("insufficient expansion depth: {0}")]
    Depth(String),
    #[error("not a vanishing-cycle expansion: {0}")]
    NotVanishingCycle(String),
    #[error("not representable on this backend: {0}")]
    NotRepresentable(String),
    #[error("non-generic cover: {0}")]
    NonGeneric(String),
    #[error("Morse chart undefined: {0}")]
    ChartUndefined(String),
    #[error("not holomorphic at ramification: {0}")]
    NotHolomorphic(String),
    #[error("logarithmic term, not integrable over vanishing cycle: {0}")]
    Logarithmic(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),
    #[error("non-semisimple point: {0}")]
    NonSemisimple(String),
    #[error("V undefined: numerator not divisible ({0})")]
    NotDivisible(String),
    #[error("gamma not symmetric: {0}")]
    NonSymmetricGamma(String),
    #[error("unsupported coefficient: {0}")]
    UnsupportedCoefficient(String),
    #[error("unsupported spectrum: {0}")]
    UnsupportedSpectrum(String),
    #[error("non-polynomial R_omega: {0}")]
    NonPolynomial(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by degenerate mathematical input rather than a
    /// malformed request.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::NonGeneric(_)
                | Error::ChartUndefined(_)
                | Error::DegenerateKernel(_)
                | Error::NonSemisimple(_)
                | Error::NotHolomorphic(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
