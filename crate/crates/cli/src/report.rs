//! Machine-readable run reports.
//!
//! Everything except `header.generated_at` is a pure function of the inputs
//! and the seed, so two runs can be compared byte for byte once that one
//! line is dropped.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "ordinal";

#[derive(Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Input name to SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch; the only non-reproducible field.
    pub generated_at: u64,
}

#[derive(Debug, Serialize)]
pub struct RunReport<P: Serialize> {
    pub header: Header,
    pub payload: P,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl<P: Serialize> RunReport<P> {
    pub fn new(command: &str, inputs: BTreeMap<String, String>, seed: Option<u64>, payload: P) -> Self {
        let generated_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            header: Header {
                tool: TOOL,
                version: env!("CARGO_PKG_VERSION"),
                command: command.into(),
                inputs,
                seed,
                generated_at,
            },
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
