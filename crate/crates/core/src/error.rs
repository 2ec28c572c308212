use thiserror::Error;

/// Errors raised by profile evaluation, family construction and the numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GsipError {
    #[error("position {x} lies outside the domain ({lo}, {hi})")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("numerical failure: {message}")]
    Numerics {
        message: String,
        level: Option<usize>,
    },

    #[error("superpotential pole at x = {x}")]
    Pole { x: f64 },

    #[error("level {level} is not in the bound spectrum: {reason}")]
    UnboundLevel { level: usize, reason: String },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("normalizability indeterminate: W/U = {lower} at lower edge, {upper} at upper edge")]
    Indeterminate { lower: f64, upper: f64 },

    #[error("ground state is not normalizable: {0}")]
    Normalizability(String),

    #[error("non-positive mass {value} at x = {x}")]
    Mass { x: f64, value: f64 },

    #[error("non-finite potential {value} at x = {x}")]
    Potential { x: f64, value: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: String, reason: String },
}

impl GsipError {
    pub(crate) fn numerics(message: impl Into<String>) -> Self {
        GsipError::Numerics {
            message: message.into(),
            level: None,
        }
    }

    pub(crate) fn parameter(field: &str, reason: impl Into<String>) -> Self {
        GsipError::Parameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, GsipError>;
