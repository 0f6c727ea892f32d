use thiserror::Error;

/// Failure of a subcommand, carrying its exit code class.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),
    /// Unreadable input or unwritable output.
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<ndiv_core::Error> for CliError {
    fn from(e: ndiv_core::Error) -> Self {
        use ndiv_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Io { .. } | E::Parse { .. } => CliError::Io(msg),
            E::Argument(_) | E::Spec(_) => CliError::Usage(msg),
            E::UndefinedMetric(_) => CliError::Runtime(format!(
                "{msg} (evaluation needs at least one anomalous and one normal node among evaluated nodes)"
            )),
            _ => CliError::Runtime(msg),
        }
    }
}
