use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A file could not be read or does not describe valid data.
    #[error("{file}: {field}: {message}")]
    Malformed { file: String, field: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Budget(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("cannot write report: {0}")]
    Io(String),
}

impl CliError {
    pub fn malformed(file: impl Into<String>, field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Malformed { file: file.into(), field: field.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Malformed { .. } | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Budget(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Malformed { .. } => "malformed-input",
            CliError::Usage(_) => "invalid-argument",
            CliError::Budget(_) => "budget",
            CliError::Internal(_) => "internal",
            CliError::Io(_) => "io",
        }
    }
}

impl From<quadrifold::Error> for CliError {
    fn from(e: quadrifold::Error) -> Self {
        use quadrifold::Error as E;
        match e {
            E::BudgetExceeded { .. } | E::SamplingExhausted { .. } | E::ExtensionTooLarge { .. } => CliError::Budget(e.to_string()),
            E::InvariantViolation(msg) => CliError::Internal(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let budget: CliError = quadrifold::Error::SamplingExhausted { tries: 3 }.into();
        assert_eq!(budget.exit_code(), 2);
        let internal: CliError = quadrifold::Error::InvariantViolation("x".into()).into();
        assert_eq!((internal.exit_code(), internal.kind()), (3, "internal"));
        let usage: CliError = quadrifold::Error::InvalidInput("x".into()).into();
        assert_eq!(usage.exit_code(), 1);
        let m = CliError::malformed("a.json", "gram[2]", "too long");
        assert_eq!(m.to_string(), "a.json: gram[2]: too long");
    }
}
