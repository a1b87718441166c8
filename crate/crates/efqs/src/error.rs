use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("chain of {l} sites exceeds the dense-storage cap (L <= {cap}); dimension 2^{l} is too large")]
    Capacity { l: usize, cap: usize },

    #[error("shape mismatch: {context} (expected {expected}, got {got})")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not Hermitian: max |M - M^H| entry = {max_dev:.3e}")]
    NotHermitian { max_dev: f64 },

    #[error("numerical consistency violated in {context}: {value:.3e} exceeds {tolerance:.1e}")]
    NumericalConsistency {
        context: &'static str,
        value: f64,
        tolerance: f64,
    },

    #[error("filter is degenerate: every filtered amplitude underflows below 1e-300 (tau too large for this overlap distribution)")]
    DegenerateFilter,

    #[error("iterative filter unstable: spectral-radius bound {bound:.3e} gives bound*dtau/2 = {product:.3e} >= 1; reduce dtau")]
    Divergence { bound: f64, product: f64 },

    #[error("quadrature window too small: half-width {half_width:.3e} leaves Gaussian tail {tail:.3e} >= {tolerance:.1e} and the overlap check failed")]
    WindowTooSmall {
        half_width: f64,
        tail: f64,
        tolerance: f64,
    },

    #[error("time window does not cover the kernel support: need [{need_lo:.3}, {need_hi:.3}], series covers [{have_lo:.3}, {have_hi:.3}]")]
    Coverage {
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid too coarse: {0}; refine the time grid")]
    RefineGrid(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("regions overlap at site {site}")]
    OverlappingRegions { site: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
