use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent must satisfy p > 1 (got p = {p})")]
    ExponentTooSmall { p: String },

    #[error("dimension must be positive (got n = {n})")]
    InvalidDimension { n: u32 },

    #[error("strict parameters need n >= 5 and n/(n-4) < p < (n+4)/(n-4) (got n = {n}, p = {p})")]
    OutsideWindow { n: u32, p: String },

    #[error("{operation} needs strict parameters (got n = {n}, p = {p})")]
    NotStrict { operation: &'static str, n: u32, p: String },

    #[error("{operation} needs n >= 5 and n/(n-4) <= p <= (n+4)/(n-4) (got n = {n}, p = {p})")]
    OutsideClosedWindow { operation: &'static str, n: u32, p: String },

    #[error("sign lemma violated at n = {n}, p = {p}: {detail}")]
    SignLemmaViolated { n: u32, p: String, detail: String },

    #[error("equilibrium spectrum check failed: {0}")]
    SpectrumMismatch(String),

    #[error("negative state w = {w}; w^p is undefined")]
    NegativeState { w: f64 },

    #[error("non-finite state component at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("scale factor must be positive (got {0})")]
    InvalidScale(f64),

    #[error("radius must be positive (got {0})")]
    NonPositiveRadius(f64),

    #[error("finite-difference stencil needs r > 2h (got r = {r}, h = {h})")]
    StencilTooWide { r: f64, h: f64 },

    #[error("analytic derivatives requested but the function does not supply them")]
    MissingDerivatives,

    #[error("need at least {needed} points (got {got})")]
    TooFewPoints { needed: usize, got: usize },

    #[error("samples span {got:.3} decades of r; need at least {needed}")]
    TooFewDecades { needed: f64, got: f64 },

    #[error("probe t = {t} lies outside the sampled range [{lo}, {hi}]")]
    ProbeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("{0}")]
    DomainMismatch(String),

    #[error("invalid integration request: {0}")]
    InvalidIntegration(String),

    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("cannot parse '{input}' as a number: {reason}")]
    Parse { input: String, reason: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
