use bipartite_core::Error as CoreError;

/// Failures that abort a command. Scientific failures (a check that ran and
/// did not pass) are not errors; they come back as a failed [`Outcome`].
///
/// [`Outcome`]: crate::Outcome
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad usage, configuration or input data.
    #[error("{0}")]
    Config(String),
    /// A numerical routine broke down mid-run.
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }

    /// Attach `context` and sort the core error into config vs numerical.
    pub fn core(context: &str, e: CoreError) -> Self {
        let msg = format!("{context}: {e}");
        match e {
            CoreError::NoConvergence { .. }
            | CoreError::SvdNoConvergence
            | CoreError::NotHermitian { .. }
            | CoreError::NotStationary { .. }
            | CoreError::TooFewExtrema { .. } => CliError::Numerical(msg),
            _ => CliError::Config(msg),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::core("error", e)
    }
}

/// Shorthand for mapping core results with a context label.
pub(crate) trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for bipartite_core::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::core(what, e))
    }
}
