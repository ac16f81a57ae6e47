//! Deterministic nested key-value documents for reports.
//!
//! Output is plain text: `key: value` lines indented two spaces per level.
//! Timestamps never appear in a document body; callers that want one prepend
//! the single `# generated_unix_s:` header line.

use std::fmt::Display;

#[derive(Debug, Default)]
pub struct Doc {
    lines: Vec<String>,
}

impl Doc {
    pub fn new() -> Self {
        Doc::default()
    }

    pub fn section(&mut self, level: usize, name: &str) -> &mut Self {
        self.lines.push(format!("{}{}:", "  ".repeat(level), name));
        self
    }

    pub fn kv(&mut self, level: usize, key: &str, value: impl Display) -> &mut Self {
        self.lines
            .push(format!("{}{}: {}", "  ".repeat(level), key, value));
        self
    }

    pub fn note(&mut self, level: usize, text: &str) -> &mut Self {
        self.lines.push(format!("{}{}", "  ".repeat(level), text));
        self
    }

    pub fn finish(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// The single timestamp header line allowed in report files.
pub fn timestamp_header() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated_unix_s: {secs}\n")
}

/// Fixed-precision float formatting used across all documents.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e-3 && v.abs() < 1e7 {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}
