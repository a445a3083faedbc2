//! Document plumbing: every command emits one envelope with the resolved
//! config echoed next to the result, so a payload is reproducible from its
//! own header.  No timestamps anywhere — identical invocations must produce
//! byte-identical output.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

#[derive(Serialize)]
pub struct Envelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
}

/// Row-oriented view of a result for `--format csv`; only tabular reports
/// (the `gaps` family) provide one.
pub struct CsvTable {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// What a command hands back to `main` for rendering and exit-code mapping.
pub struct CommandOutput {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    /// Exit 0 when true, 1 when false (2 is reserved for usage errors).
    pub verified: bool,
    pub table: Option<CsvTable>,
}

pub fn render_json(envelope: &Envelope) -> Result<String> {
    let mut text = serde_json::to_string_pretty(envelope)?;
    text.push('\n');
    Ok(text)
}

/// CSV with the config header folded into a leading comment line.
pub fn render_csv(envelope: &Envelope, table: &CsvTable) -> Result<String> {
    let mut text = format!(
        "# tool={} version={} command={} config={}\n",
        envelope.tool,
        envelope.version,
        envelope.command,
        serde_json::to_string(&envelope.config)?
    );
    text.push_str(&table.headers.join(","));
    text.push('\n');
    for row in &table.rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    Ok(text)
}

pub fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing output to {}", path.display()))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing output to stdout")?,
    }
    Ok(())
}
