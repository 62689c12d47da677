use serde::Serialize;

/// Why a command stopped. Each kind has its own exit code.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum Failure {
    /// The config does not describe a valid problem.
    Schema { path: String, message: String },
    /// The computation itself failed.
    Runtime { message: String },
}

impl Failure {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Failure::Schema { path: path.into(), message: message.into() }
    }

    pub fn runtime(message: impl std::fmt::Display) -> Self {
        Failure::Runtime { message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema { .. } => 2,
            Failure::Runtime { .. } => 3,
        }
    }

    pub fn document(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

impl From<czreach::Error> for Failure {
    fn from(e: czreach::Error) -> Self {
        Failure::runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::runtime(format!("i/o: {e}"))
    }
}
