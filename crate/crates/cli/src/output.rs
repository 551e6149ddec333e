use std::path::{Path, PathBuf};

use mprcap::table::{write_rows, CsvRow};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::Format;

/// Output directory plus a record of every file written to it.
pub struct Outputs {
    dir: PathBuf,
    format: Format,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: PathBuf, format: Format) -> CliResult<Self> {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Outputs {
            dir,
            format,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Emit rows as `<stem>.csv` or as a JSON array in `<stem>.json`.
    pub fn rows<R: CsvRow + Serialize>(&mut self, stem: &str, rows: &[R]) -> CliResult<PathBuf> {
        let bytes = match self.format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_rows(&mut buf, rows)?;
                buf
            }
            Format::Json => to_json(rows)?,
        };
        self.write(&format!("{stem}.{}", self.format.extension()), &bytes)
    }

    /// Emit a single record: pretty JSON, or a two-column `field,value`
    /// CSV with nested keys joined by dots.
    pub fn record<T: Serialize>(&mut self, stem: &str, value: &T) -> CliResult<PathBuf> {
        let bytes = match self.format {
            Format::Json => to_json(value)?,
            Format::Csv => {
                let v = serde_json::to_value(value).map_err(|e| CliError::Runtime(e.to_string()))?;
                let mut flat = Vec::new();
                flatten("", &v, &mut flat);
                let mut buf = Vec::new();
                mprcap::table::write_csv(&mut buf, &["field", "value"], flat.into_iter().map(|(k, v)| vec![k, v]))?;
                buf
            }
        };
        self.write(&format!("{stem}.{}", self.format.extension()), &bytes)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
    use serde_json::Value;
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(xs) => xs.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
