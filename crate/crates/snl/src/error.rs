use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Core(#[from] snl_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("report: {0}")]
    Report(String),
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Field { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// Process exit code: 3 for numerical failures, 2 for everything the
    /// user can fix in the input.
    pub fn exit_code(&self) -> i32 {
        use snl_core::Error as E;
        match self {
            Error::Context { source, .. } => source.exit_code(),
            Error::Core(e) => match e {
                E::NonConvergence { .. }
                | E::HorizonExhausted { .. }
                | E::NotCertified { .. }
                | E::InversionFailed { .. }
                | E::NonFiniteState { .. }
                | E::NonFiniteSample { .. }
                | E::SingularDiffusion { .. } => 3,
                _ => 2,
            },
            _ => 2,
        }
    }
}
