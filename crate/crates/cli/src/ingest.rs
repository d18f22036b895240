//! Reading a numeric series from a text file.

use std::path::Path;

use crate::error::{CliError, Result};

/// Read one number per line, or field `column` (zero-based) of
/// comma-separated lines. Blank lines and lines starting with `#` are
/// skipped. Values must be finite.
pub fn ingest_series(path: &Path, column: Option<usize>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    parse_series(&text, column, path)
}

/// [`ingest_series`] on text already in memory; `origin` only labels errors.
pub fn parse_series(text: &str, column: Option<usize>, origin: &Path) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| CliError::Parse { path: origin.to_owned(), line: idx + 1, message };
        let field = match column {
            None => line,
            Some(c) => line
                .split(',')
                .nth(c)
                .map(str::trim)
                .ok_or_else(|| parse_err(format!("no column {c} in `{line}`")))?,
        };
        let value: f64 = field.parse().map_err(|_| parse_err(format!("`{field}` is not a number")))?;
        if !value.is_finite() {
            return Err(parse_err(format!("`{field}` is not finite")));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(CliError::EmptySeries(origin.to_owned()));
    }
    Ok(values)
}
