use serde::Serialize;
use thiserror::Error;

/// Errors raised by the iterate, addiplication and layer machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of the operation (log of zero, a point of
    /// the singular set, a `-inf` intermediate on the real line, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An intermediate `exp` argument exceeded the configured overflow guard.
    #[error("overflow: exp argument {argument} exceeds guard {guard}")]
    Overflow { argument: f64, guard: f64 },

    /// A derivative factor has a vanishing denominator.
    #[error("singular derivative: {0}")]
    SingularDerivative(String),

    #[error("no convergence after {iterations} iterations ({what})")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },

    /// Failure inside a specific neuron of a layer.
    #[error("neuron {index}: {source}")]
    Neuron {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_neuron(self, index: usize) -> Error {
        match self {
            e @ Error::Neuron { .. } => e,
            e => Error::Neuron { index, source: Box::new(e) },
        }
    }

    /// Strips `Neuron` wrappers and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Neuron { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for errors that stem from the operand sitting on a singularity
    /// or branch cut rather than from a misconfiguration.
    pub fn is_singular(&self) -> bool {
        matches!(
            self.root(),
            Error::Domain(_) | Error::SingularDerivative(_) | Error::Overflow { .. } | Error::NoConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Per-sample status used by grid and curve exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFlag {
    Ok,
    Domain,
    Overflow,
    #[serde(rename = "noconv")]
    NoConvergence,
}

impl SampleFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleFlag::Ok => "ok",
            SampleFlag::Domain => "domain",
            SampleFlag::Overflow => "overflow",
            SampleFlag::NoConvergence => "noconv",
        }
    }
}

impl std::fmt::Display for SampleFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&Error> for SampleFlag {
    fn from(e: &Error) -> Self {
        match e.root() {
            Error::Overflow { .. } => SampleFlag::Overflow,
            Error::NoConvergence { .. } => SampleFlag::NoConvergence,
            _ => SampleFlag::Domain,
        }
    }
}
