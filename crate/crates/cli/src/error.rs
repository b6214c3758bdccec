use lecam::io::FileError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Conformance(String),
    /// A verification run finished with failures; carries its report.
    #[error("property failure")]
    PropertyFailure(serde_json::Value),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::PropertyFailure(_) => 1,
            CliError::Input(_) => 2,
            CliError::Conformance(_) => 3,
        }
    }

    /// Wraps a library error, naming what was being computed.
    pub fn from_lib(context: impl std::fmt::Display, e: lecam::Error) -> Self {
        if e.is_conformance() {
            CliError::Conformance(format!("{context}: {e}"))
        } else {
            CliError::Input(format!("{context}: {e}"))
        }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        CliError::Input(e.to_string())
    }
}
