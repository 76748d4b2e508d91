//! Self-describing output files. Every CSV starts with `# config:` (the
//! resolved config as JSON) and `# columns:` comment lines, then a header
//! row. Every JSON summary carries `schema` and `config` fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::commands::CliError;

pub type CsvWriter = csv::Writer<BufWriter<File>>;

pub struct Output {
    dir: PathBuf,
    config_json: String,
}

impl Output {
    pub fn new(dir: &Path, config_json: String) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_json,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Opens `name` and writes the comment preamble and `header`.
    pub fn csv(&self, name: &str, columns: &str, header: &[&str]) -> Result<CsvWriter, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| io_error(&path, e))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "# config: {}", self.config_json).map_err(|e| io_error(&path, e))?;
        writeln!(w, "# columns: {columns}").map_err(|e| io_error(&path, e))?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(header).map_err(|e| csv_error(&path, e))?;
        Ok(csv)
    }

    /// Writes `fields` as a pretty JSON object after `schema` and `config`.
    pub fn json(&self, name: &str, schema: &str, fields: Map<String, Value>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut obj = Map::new();
        obj.insert("schema".into(), Value::from(schema));
        let config: Value = serde_json::from_str(&self.config_json).expect("config is JSON");
        obj.insert("config".into(), config);
        obj.extend(fields);
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("summary serialises");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io_error(&path, e))
    }
}

pub fn finish(mut w: CsvWriter, name: &str) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::Io(format!("{name}: {e}")))
}

pub fn row(w: &mut CsvWriter, fields: &[String]) -> Result<(), CliError> {
    w.write_record(fields).map_err(|e| CliError::Io(e.to_string()))
}

/// Shortest round-trip decimal form; empty for missing values.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
