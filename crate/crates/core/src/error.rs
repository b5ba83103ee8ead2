use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage an error originated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Model,
    Reduction,
    Cubic,
    Series,
    Reversion,
    Assembly,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Model => "model",
            Stage::Reduction => "reduction",
            Stage::Cubic => "cubic",
            Stage::Series => "series",
            Stage::Reversion => "reversion",
            Stage::Assembly => "assembly",
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration blew up after t = {last_t}")]
    IntegrationBlowup { last_t: f64 },

    #[error("invalid integration constant: {0}")]
    InvalidConstant(String),

    #[error("degenerate cubic: leading coefficient D = {0}")]
    DegenerateCubic(f64),

    #[error("negative discriminant Δ₁ = {delta1:e}; Cardano's formula needs Δ₁ ≥ 0")]
    NegativeDiscriminant { delta1: f64 },

    #[error("complex root pair, Δ₂ = {delta2:e} (roots {re} ± {im}i)")]
    ComplexPair { delta2: f64, re: f64, im: f64 },

    #[error("shift θ{index} = {theta:e} is zero; x₁ = 0 is a root of P")]
    ZeroShift { index: usize, theta: f64 },

    #[error("root refinement failed at y = {root} (residual {residual:e})")]
    RefinementFailed { root: f64, residual: f64 },

    #[error("series is not invertible: leading coefficient σ₁ = 0")]
    NonInvertibleSeries,

    #[error("initial velocity dx₁/dt is zero; v = 1/(dx₁/dt) cannot be formed")]
    ZeroVelocity,

    #[error("requested branch {requested} but the initial data selects branch {matched}")]
    BranchMismatch { requested: char, matched: char },

    #[error("time alignment failed: {0}")]
    TimeAlignment(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{stage}: {source}")]
    AtStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tags the error with the stage it surfaced in. Already-tagged errors
    /// keep their original stage.
    pub fn at(self, stage: Stage) -> Error {
        match self {
            Error::AtStage { .. } => self,
            other => Error::AtStage {
                stage,
                source: Box::new(other),
            },
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::AtStage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The error with any stage tag removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStage { source, .. } => source.root(),
            other => other,
        }
    }
}
