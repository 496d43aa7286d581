use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Numeric {
        context: &'static str,
        #[source]
        source: hermite_core::Error,
    },

    #[error("output error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Csv(#[from] csv::Error),

    #[error("output error: {0}")]
    Json(#[from] serde_json::Error),
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_INSTABILITY: i32 = 4;
pub const EXIT_IO: i32 = 1;

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => EXIT_CONFIG,
            LabError::Numeric { source, .. } => match source {
                hermite_core::Error::Instability { .. } => EXIT_INSTABILITY,
                e if e.is_configuration() => EXIT_CONFIG,
                _ => EXIT_NUMERIC,
            },
            LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => EXIT_IO,
        }
    }
}

/// Attaches the experiment name to a core error.
pub trait Context<T> {
    fn context(self, context: &'static str) -> Result<T, LabError>;
}

impl<T> Context<T> for hermite_core::Result<T> {
    fn context(self, context: &'static str) -> Result<T, LabError> {
        self.map_err(|source| LabError::Numeric { context, source })
    }
}
