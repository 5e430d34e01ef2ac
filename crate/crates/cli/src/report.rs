use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

/// Serialized result plus enough metadata to re-run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: String,
    pub seed: u64,
    /// Unix seconds.
    pub timestamp: u64,
    pub config: RunConfig,
    pub result: Value,
    pub warnings: Vec<String>,
}

/// Fields that legitimately differ between otherwise identical runs.
const VOLATILE_KEYS: &[&str] = &["elapsed_secs"];

impl ReportDocument {
    pub fn new(config: RunConfig, result: Value, warnings: Vec<String>) -> Self {
        ReportDocument {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.effective_seed(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            result,
            warnings,
        }
    }

    /// The result with timing fields removed; equal across re-runs of the
    /// echoed config.
    pub fn statistics(&self) -> Value {
        let mut v = self.result.clone();
        strip(&mut v);
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are always serializable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

fn strip(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for key in VOLATILE_KEYS {
                map.remove(*key);
            }
            map.values_mut().for_each(strip);
        }
        Value::Array(items) => items.iter_mut().for_each(strip),
        _ => {}
    }
}
