use std::fmt;

use reid_temporal::dataset::DatasetError;
use reid_temporal::metrics::MetricsError;
use reid_temporal::prior::PriorError;
use reid_temporal::rerank::RerankError;
use reid_temporal::synth::SynthError;
use reid_temporal::temporal::TemporalError;
use serde_json::json;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

/// An error with a machine-readable code, rendered as JSON on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.code == "NonConvergence" {
            EXIT_NONCONVERGENCE
        } else {
            EXIT_INPUT
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "code": self.code,
                "message": self.message,
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

macro_rules! from_lib {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new(e.code(), e.to_string())
            }
        }
    )*};
}

from_lib!(DatasetError, MetricsError, PriorError, RerankError, SynthError, TemporalError);

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::new("Io", format!("{}: {e}", path.display()))
}
