//! CSV reports with a `#` metadata header.

use std::io::Write;
use std::path::Path;

use crate::config::{ConfigError, ExperimentConfig};

pub struct Report {
    command: &'static str,
    columns: String,
    rows: Vec<String>,
    notes: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, columns: impl Into<String>) -> Self {
        Report { command, columns: columns.into(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: String) {
        debug_assert_eq!(row.split(',').count(), self.columns.split(',').count(), "row does not match schema");
        self.rows.push(row);
    }

    /// Extra `# key=value` metadata line.
    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        let mut out = format!(
            "# sphere-approx {}\n# command={}\n# seed={}\n# config_sha256={}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            cfg.seed,
            cfg.hash()
        );
        for n in &self.notes {
            out.push_str("# ");
            out.push_str(n);
            out.push('\n');
        }
        out.push_str(&self.columns);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, cfg: &ExperimentConfig, path: Option<&Path>) -> Result<(), ConfigError> {
        let text = self.render(cfg);
        match path {
            Some(p) => std::fs::write(p, text).map_err(|source| ConfigError::Io { path: p.into(), source }),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|source| ConfigError::Io { path: "<stdout>".into(), source }),
        }
    }
}
