//! Output emission. Every command renders its result to a single string
//! (CSV, JSON, or SVG) and writes it either to `--out` or to stdout, so
//! equal inputs produce byte-identical outputs.

use crate::fail::{Failure, Result};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Output formats. Each command documents which subset it accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Reject formats a command does not produce.
pub fn require_format(format: Format, supported: &[Format], command: &str) -> Result<()> {
    if supported.contains(&format) {
        return Ok(());
    }
    let names: Vec<_> = supported.iter().map(|f| f.name()).collect();
    Err(airyline_core::Error::Config(format!(
        "format {} is not supported by `{command}`; choose one of: {}",
        format.name(),
        names.join(", ")
    ))
    .into())
}

/// Write the rendered output to `path`, or to stdout when absent.
pub fn write_output(path: Option<&PathBuf>, rendered: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, rendered)
            .map_err(|e| Failure::io(format!("cannot write {}", p.display()), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(rendered.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::io("cannot write to stdout", e))
        }
    }
}

/// Shortest round-trip decimal rendering of a float, used for every CSV
/// cell emitted here; parsing the cell back yields the identical bits.
pub fn cell(v: f64) -> String {
    format!("{v}")
}

/// Render rows as CSV with the given header line.
pub fn csv(header: &str, rows: &[Vec<String>]) -> String {
    let mut s = String::with_capacity(header.len() + 1 + rows.len() * 24);
    s.push_str(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Render a serializable value as pretty JSON with a trailing newline.
/// Field order follows the struct declaration, so output is stable.
pub fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| {
        Failure::Lib(airyline_core::Error::Numeric(format!(
            "JSON rendering failed: {e}"
        )))
    })?;
    s.push('\n');
    Ok(s)
}

/// Read a file into a string with an `io`-category failure on error.
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {}", path.display()), e))
}
