use std::io::Write;
use std::path::Path;

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};

const CONFIG_PREFIX: &str = "config: ";

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.push(row.iter().map(|x| fmt_float(*x)).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

pub fn version_line() -> String {
    format!("gie {}", env!("CARGO_PKG_VERSION"))
}

pub fn standard_header(cfg: &ScenarioConfig) -> Vec<String> {
    vec![version_line(), format!("scenario: {}", cfg.scenario.name()), format!("{CONFIG_PREFIX}{}", cfg.to_json())]
}

/// Header lines prefixed with `# `, then the table as CSV.
pub fn render_csv(header: &[String], table: &Table) -> CliResult<String> {
    let mut out = String::new();
    for line in header {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Config(format!("csv encoding: {e}"));
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv encoding: {e}")))?;
    out.push_str(&String::from_utf8(bytes).expect("utf-8 input"));
    Ok(out)
}

/// Write to a temporary file in the target directory, then rename over the
/// destination.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Rebuilds the config echoed in a CSV header.
pub fn read_config_echo(csv_text: &str) -> CliResult<ScenarioConfig> {
    let line = csv_text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# ").and_then(|l| l.strip_prefix(CONFIG_PREFIX)))
        .ok_or_else(|| CliError::Config("no config echo in header".into()))?;
    ScenarioConfig::from_json(line, &[])
}
