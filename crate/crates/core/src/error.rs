use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A retrospective comparison exhausted its term budget with the uniform
    /// draw still inside the final bracket.
    #[error("comparison undecided after {max_terms} series levels")]
    Undecided { max_terms: usize },

    /// Same as [`Error::Undecided`], tagged with where in the generation loop
    /// it happened.
    #[error("undecided at generation {generation}, layer {layer}")]
    UndecidedAt { generation: usize, layer: usize },

    #[error("rejection sampler stalled after {iterations} proposals")]
    SamplerStall { iterations: usize },

    #[error("functional bounds lost nesting at step {step}: [{lower}, {upper}]")]
    NonMonotoneBounds { step: usize, lower: f64, upper: f64 },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, Error::Undecided { .. } | Error::UndecidedAt { .. })
    }
}
