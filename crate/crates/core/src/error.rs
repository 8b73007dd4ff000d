use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {what} = {value} (expected {expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("index {index} out of range for {what} (valid: {valid})")]
    Index {
        what: &'static str,
        index: usize,
        valid: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("could not parse copula spec {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("bisection failed to converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// The variance recursion left the admissible region.
    #[error("non-positive variance V_t^2 = {value:e} at t = {t}")]
    NegativeVariance { t: usize, value: f64 },

    #[error("distribution function decreases by {drop:e} near x = {at} (quadrature too coarse)")]
    Monotonicity { at: f64, drop: f64 },

    #[error("copula margin deviates from uniform by {deviation:e} (tolerance {tolerance:e})")]
    MarginViolation { deviation: f64, tolerance: f64 },

    #[error("spectral decomposition failed: {0}")]
    Decomposition(String),

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl Into<f64>, expected: &'static str) -> Self {
        Error::Domain {
            what,
            value: value.into(),
            expected,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
