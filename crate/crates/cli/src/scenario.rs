use std::path::Path;

use clap::Args;
use mprcap::{MacParams, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Command-line overrides applied on top of the scenario file.
#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    /// Number of stations.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Reception capability (simultaneous packets decoded).
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Backoff factor.
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Minimum contention window.
    #[arg(long, global = true)]
    pub w0: Option<u32>,
    /// Per-station arrival rate, packets per second.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub retry_limit: Option<u32>,
    #[arg(long, global = true)]
    pub cw_max: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, base: Scenario) -> mprcap::Result<Scenario> {
        let mut s = base;
        if let Some(n) = self.n {
            s.n = n;
        }
        if let Some(m) = self.m {
            s.m = m;
        }
        if let Some(l) = self.lambda {
            s.lambda_pps = l;
        }
        let mac = s.mac;
        s.mac = MacParams::new(
            self.w0.unwrap_or(mac.w0),
            self.r.unwrap_or(mac.r),
            self.retry_limit.or(mac.retry_limit),
            self.cw_max.or(mac.cw_max),
        )?;
        s.validate()?;
        Ok(s)
    }
}

/// Read the scenario file and apply the overrides. Every failure is an
/// input error naming the file.
pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Scenario> {
    let path = path.ok_or_else(|| CliError::Input("--scenario PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read scenario {}: {e}", path.display())))?;
    let s = Scenario::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    overrides
        .apply(s)
        .map_err(|e| CliError::Input(format!("override: {e}")))
}
