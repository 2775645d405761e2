use thiserror::Error;

/// Errors produced by model construction, solvers and the detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user-supplied data or parameters was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical routine could not proceed (singular matrix, zero signal, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Two refined break points are too close: the segment between them is
    /// empty after trimming.
    #[error("segment between break points {left} and {right} is empty after trimming")]
    EmptySegment { left: usize, right: usize },

    /// Scenario name not in the catalog.
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    /// A pipeline step failed; carries the step name for attribution.
    #[error("pipeline step `{step}` failed: {source}")]
    Pipeline {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Wrap an error with the pipeline step it occurred in.
    pub fn in_step(self, step: &'static str) -> Self {
        Error::Pipeline {
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
