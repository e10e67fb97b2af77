//! Ordered key-value run summaries with reproducible float formatting.

use std::fmt::Display;
use std::path::{Path, PathBuf};

/// 17 significant digits: enough to round-trip any f64, so identical runs
/// emit byte-identical text.
pub fn fmt_float(v: f64) -> String {
    format!("{:.16e}", v)
}

#[derive(Debug, Default)]
pub struct RunSummary {
    entries: Vec<(String, String)>,
    artifacts: Vec<PathBuf>,
}

impl RunSummary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_float(&mut self, key: &str, v: f64) {
        self.entries.push((key.to_string(), fmt_float(v)));
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.to_path_buf());
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        for p in &self.artifacts {
            out.push_str("artifact=");
            out.push_str(&p.display().to_string());
            out.push('\n');
        }
        out
    }
}
