use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

/// Envelope shared by every JSON report: the command, its fully resolved
/// configuration, the seed, command-specific metrics and elapsed time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub metrics: Value,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn new(
        command: &str,
        config: &impl Serialize,
        seed: u64,
        metrics: &impl Serialize,
        wall_clock_seconds: f64,
    ) -> Result<Self> {
        Ok(RunReport {
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            metrics: serde_json::to_value(metrics)?,
            wall_clock_seconds,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
