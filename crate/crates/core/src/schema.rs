//! JSON input and output formats.
//!
//! A triplet file looks like
//!
//! ```json
//! {"dim": 1, "A": [[0.0]], "gamma": [0.0],
//!  "nu": {"variant": "finite_atomic", "dim": 1, "atoms": [{"point": [2.0], "mass": 1.0}]}}
//! ```
//!
//! with `nu.variant` one of `finite_atomic`, `block_e2` or `analytic_tail`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::triplet::Triplet;

/// Parses and validates a triplet; errors carry line and column.
pub fn parse_triplet(text: &str) -> Result<Triplet> {
    let mu: Triplet = serde_json::from_str(text)
        .map_err(|e| Error::InvalidTriplet(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    mu.validate()?;
    Ok(mu)
}

pub fn triplet_to_json(mu: &Triplet) -> Result<String> {
    serde_json::to_string_pretty(mu).map_err(|e| Error::InvalidTriplet(e.to_string()))
}

/// Provenance attached to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// SHA-256 of the canonical JSON of `settings`.
    pub config_hash: String,
    /// Effective settings, defaults included.
    pub settings: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Output<T: Serialize> {
    pub meta: RunMeta,
    pub result: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_positions() {
        let text = r#"{"dim": 1, "A": [[0.5]], "gamma": [0.1],
            "nu": {"variant": "finite_atomic", "dim": 1, "atoms": [{"point": [2.0], "mass": 1.0}]}}"#;
        let mu = parse_triplet(text).unwrap();
        assert_eq!(parse_triplet(&triplet_to_json(&mu).unwrap()).unwrap(), mu);
        let bad = "{\"dim\": 1,\n \"A\": [[0.5]], \"gamma\": [0.1], \"extra\": 3, \"nu\": {}}";
        let msg = parse_triplet(bad).unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }
}
