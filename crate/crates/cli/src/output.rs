use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Where a setting's value came from.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Flag,
    Config,
    Default,
    Derived,
}

#[derive(Debug, Clone, Serialize)]
pub struct Setting {
    pub name: &'static str,
    pub value: Value,
    pub source: Source,
}

/// Header attached to every report: tool version, command and each
/// effective setting with its origin.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub command: &'static str,
    pub config_file: Option<String>,
    pub settings: Vec<Setting>,
}

impl Provenance {
    pub fn new(command: &'static str, config_file: Option<&Path>) -> Self {
        Provenance {
            tool: concat!("wrn ", env!("CARGO_PKG_VERSION")).to_string(),
            command,
            config_file: config_file.map(|p| p.display().to_string()),
            settings: Vec::new(),
        }
    }

    pub fn set(&mut self, name: &'static str, value: impl Serialize, source: Source) {
        let value = serde_json::to_value(value).expect("settings serialise");
        self.settings.push(Setting { name, value, source });
    }

    /// `# key: value` lines preceding a CSV header.
    pub fn csv_comment(&self) -> String {
        let mut s = format!("# {} {}\n", self.tool, self.command);
        if let Some(c) = &self.config_file {
            s.push_str(&format!("# config: {c}\n"));
        }
        for st in &self.settings {
            s.push_str(&format!("# {}: {} ({})\n", st.name, st.value, source_name(st.source)));
        }
        s
    }
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Flag => "flag",
        Source::Config => "config",
        Source::Default => "default",
        Source::Derived => "derived",
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON of `body` with a `provenance` field in front.
pub fn json_report<T: Serialize>(prov: &Provenance, body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Wrapped { provenance: prov, body })?;
    s.push('\n');
    Ok(s)
}

/// CSV text with the provenance comment block, header and rows.
pub fn csv_report<R: Serialize>(prov: &Provenance, rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().context("flushing csv")?)?;
    Ok(prov.csv_comment() + &body)
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
