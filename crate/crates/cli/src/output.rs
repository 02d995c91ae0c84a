//! Table rendering and result writing.
//!
//! CSV floats are printed as `{:.16e}` — 17 significant digits, which
//! pins down an f64 uniquely, so parsing our own output reproduces the
//! exact bits. JSON goes through serde_json, whose shortest-round-trip
//! float encoding has the same property. Neither path consults clocks,
//! RNGs, or thread identity, so identical configurations produce
//! byte-identical output.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use crate::config::CliError;

/// 17-significant-digit rendering used for every CSV number.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Quote a CSV field only when it needs it (commas, quotes, newlines);
/// numeric fields pass through untouched.
pub fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_owned()
    }
}

/// A rendered table: comment lines (leading `#`), one header row, data.
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            let escaped: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
            out.push_str(&escaped.join(","));
            out.push('\n');
        }
        out
    }
}

/// Pretty-printed JSON with a trailing newline (diff- and pipe-friendly).
pub fn render_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("serializing output failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Write to `--out` or stdout.
pub fn write_result(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| {
            CliError::validation(format!("field `--out`: cannot write {}: {e}", path.display()))
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::runtime(format!("writing to stdout failed: {e}")))
        }
    }
}
