//! Command-line failure type: library errors plus I/O, each with a
//! machine-readable category and a stable process exit code.

use std::fmt;

/// A failed command. Wraps the library error categories and adds `io`
/// for unreadable inputs and unwritable outputs.
#[derive(Debug)]
pub enum Failure {
    Lib(airyline_core::Error),
    Io {
        context: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Failure>;

impl Failure {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Failure::Io {
            context: context.into(),
            source,
        }
    }

    /// Machine-readable category, printed as `error[<category>]: ...`.
    pub fn category(&self) -> &'static str {
        match self {
            Failure::Lib(e) => e.category(),
            Failure::Io { .. } => "io",
        }
    }

    /// Stable nonzero exit code per category. Codes start at 10 so they
    /// never collide with the argument parser's usage-error code.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "domain" => 10,
            "config" => 11,
            "accuracy" => 12,
            "numeric" => 13,
            "infeasible" => 14,
            _ => 15, // io
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl From<airyline_core::Error> for Failure {
    fn from(e: airyline_core::Error) -> Self {
        Failure::Lib(e)
    }
}
