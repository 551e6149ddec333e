//! Run manifests: enough to reproduce every output of a run.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{to_json, Outputs};
use crate::scenario::Overrides;
use crate::Cli;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario: Option<PathBuf>,
    pub overrides: Overrides,
    pub outputs: Vec<PathBuf>,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    /// Raw command line as typed.
    pub argv: Vec<String>,
    /// Parsed invocation with the scenario path made absolute; `replay`
    /// runs this.
    pub invocation: Cli,
}

fn unix_ms(t: SystemTime) -> u64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Write `<command>.manifest.json` next to the outputs.
pub fn write(cli: &Cli, out: &Outputs, seeds: &[u64], argv: Vec<String>, started: SystemTime) -> CliResult<PathBuf> {
    let m = RunManifest {
        command: cli.command.name().to_string(),
        scenario: cli.global.scenario.clone(),
        overrides: cli.global.overrides.clone(),
        outputs: out.written().to_vec(),
        seeds: seeds.to_vec(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_ms: unix_ms(started),
        finished_unix_ms: unix_ms(SystemTime::now()),
        argv,
        invocation: cli.clone(),
    };
    let path = out.dir().join(format!("{}.manifest.json", m.command));
    std::fs::write(&path, to_json(&m)?)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn load(path: &Path) -> CliResult<RunManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
