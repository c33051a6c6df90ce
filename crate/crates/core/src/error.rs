use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("value overflows native range (ln|v| = {ln_mag})")]
    Overflow { ln_mag: f64 },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("outside oscillation region (B = {b})")]
    OutsideOscillation { b: f64 },

    #[error("grid too coarse: {coarse} sign changes at base density, {fine} at 4x")]
    GridTooCoarse { coarse: usize, fine: usize },

    #[error("denominator nonpositive ({0}); bound is vacuous here")]
    DenominatorNonpositive(f64),

    #[error("window degenerate: {0}")]
    WindowDegenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
