use serde::Serialize;
use ssm_core::SsmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Schema,
    Numeric,
    Io,
    Report,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Schema => 2,
            ErrorKind::Numeric => 3,
            ErrorKind::Io => 4,
            ErrorKind::Report => 5,
        }
    }
}

/// Machine-readable failure, printed to stderr as one JSON line.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CliError {
    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            seed: None,
        }
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Schema, message)
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Numeric, message)
    }

    pub fn io(context: &str, err: impl std::fmt::Display) -> Self {
        Self::new(ErrorKind::Io, format!("{context}: {err}"))
    }

    pub fn report(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Report, message)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind,
            "exit_code": self.exit_code(),
            "message": self.message,
        });
        if let Some(seed) = self.seed {
            v["seed"] = seed.into();
        }
        v.to_string()
    }
}

impl From<SsmError> for CliError {
    /// Argument errors are configuration problems; the rest are numeric.
    fn from(err: SsmError) -> Self {
        match err {
            SsmError::InvalidArgument(_) | SsmError::DimensionMismatch { .. } => Self::schema(err.to_string()),
            _ => Self::numeric(err.to_string()),
        }
    }
}
