use thiserror::Error;

/// Errors raised anywhere in the metrology pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetroError {
    #[error("invalid dimension {0}: truncated spaces need at least one level")]
    InvalidDimension(usize),

    #[error("truncation overflow: norm deficit {deficit:.3e} at dim {dim} exceeds tolerance {tolerance:.1e}")]
    TruncationOverflow {
        dim: usize,
        deficit: f64,
        tolerance: f64,
    },

    #[error("network matrix is not unitary (|U^dag U - 1| = {0:.3e})")]
    InvalidNetwork(f64),

    #[error("quantum efficiency {0} outside (0, 1]")]
    InvalidEfficiency(f64),

    #[error("parameter {name} = {value} out of range: {reason}")]
    ParameterRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("infeasible energy: N_tot = {requested} is below the minimum {minimum} for this family at the given squeezing")]
    InfeasibleEnergy { requested: f64, minimum: f64 },

    #[error("operator degree {degree} exceeds the supported order {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("moment <a^dag^{m} a^{n}> exceeds table order {order}")]
    TableOrder { m: usize, n: usize, order: usize },

    #[error("degenerate working point: |dO/dphi| = {0:.3e}")]
    DegenerateWorkingPoint(f64),

    #[error("finite-difference Fisher information unstable: F(h) = {coarse}, F(h/2) = {fine}")]
    UnstableDerivative { coarse: f64, fine: f64 },

    #[error("no certifiable threshold on [{lo}, {hi}]: {reason}")]
    BracketFailure {
        lo: f64,
        hi: f64,
        reason: &'static str,
    },

    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),

    #[error("failed to write dataset: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, MetroError>;
