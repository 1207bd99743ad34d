use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid walk parameters: {0}")]
    InvalidParams(&'static str),
    #[error("lattice coordinate overflow on axis {axis}")]
    CoordinateOverflow { axis: usize },
    #[error("need at least two confirmed renewals, found {found}")]
    FewerThanTwoRenewals { found: usize },
    #[error("reference law gives zero probability to step {step}")]
    UndefinedWeight { step: usize },
    #[error("every sample has zero weight")]
    AllWeightsZero,
    #[error("coupling needs beta0 <= beta, got beta0={beta0} beta={beta}")]
    InvalidBiasOrder { beta0: f64, beta: f64 },
    #[error("enumeration of {atoms} paths exceeds budget {budget}")]
    BudgetExceeded { atoms: u128, budget: u128 },
    #[error("cannot merge summary '{left}' with '{right}'")]
    LabelMismatch {
        left: alloc::string::String,
        right: alloc::string::String,
    },
    #[error("rational arithmetic overflowed i128")]
    RationalOverflow,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}
