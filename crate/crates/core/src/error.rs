use thiserror::Error;

/// Failure raised anywhere in the analysis pipeline.
///
/// The three variants map onto the CLI exit codes and HTTP statuses used by
/// the front ends: validation and domain problems are caused by the input,
/// computation failures are not.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Structurally invalid or missing input.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    /// Input outside the mathematical domain of the effect type.
    #[error("domain violation in `{field}`: {message}")]
    Domain { field: String, message: String },
    /// Numerical failure that is not attributable to the input.
    #[error("computation failed: {0}")]
    Computation(String),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn domain(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Domain {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Field the error refers to, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::Validation { field, .. } | Error::Domain { field, .. } => Some(field),
            Error::Computation(_) => None,
        }
    }

    /// Prefixes the field path, e.g. `sd` becomes `heterogeneity.sd`.
    pub fn in_field(self, parent: &str) -> Self {
        match self {
            Error::Validation { field, message } => Error::Validation {
                field: join_path(parent, &field),
                message,
            },
            Error::Domain { field, message } => Error::Domain {
                field: join_path(parent, &field),
                message,
            },
            other => other,
        }
    }
}

fn join_path(parent: &str, field: &str) -> String {
    if field.is_empty() {
        parent.to_string()
    } else {
        format!("{parent}.{field}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
