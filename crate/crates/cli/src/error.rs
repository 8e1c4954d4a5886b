use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Stage { stage, message: e.to_string() }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// 2 for problems with how the tool was invoked, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Stage { .. } => "runtime",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Stage { stage, .. } = self {
            v["stage"] = json!(stage);
        }
        v.to_string()
    }
}
