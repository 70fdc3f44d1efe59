//! JSON report envelope, schema version 1.
//!
//! Fields are snake_case; scalar quantities carry their units in a sibling
//! `units` object. Identical inputs and configuration produce byte-identical
//! JSON apart from the `timestamp` field.

use crate::config::RunConfig;
use serde::Serialize;
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Serialize)]
pub struct ReportEnvelope<T: Serialize> {
    pub schema_version: &'static str,
    /// Echo of the invocation.
    pub command: String,
    pub config: RunConfig,
    /// RFC 3339 UTC; the only nondeterministic field.
    pub timestamp: String,
    pub payload_type: &'static str,
    pub payload: T,
}

impl<T: Serialize> ReportEnvelope<T> {
    pub fn new(command: String, config: &RunConfig, payload_type: &'static str, payload: T) -> Self {
        ReportEnvelope {
            schema_version: SCHEMA_VERSION,
            command,
            config: config.clone(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            payload_type,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report payloads serialize")
    }
}

/// Unit annotations: field name -> unit, sorted for deterministic output.
pub type Units = BTreeMap<&'static str, &'static str>;

pub fn units(entries: &[(&'static str, &'static str)]) -> Units {
    entries.iter().copied().collect()
}

#[derive(Debug, Serialize)]
pub struct CheckPayload {
    pub scan: cara_core::CriterionReport,
    pub rotation: cara_core::preservation::RotationReport,
    pub units: Units,
}

#[derive(Debug, Serialize)]
pub struct FixedPointPayload {
    pub result: cara_core::fixed_point::FixedPointResult,
    /// Max pointwise difference between two seeds after n_terms iterations,
    /// when a seed expression was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_difference: Option<f64>,
    pub units: Units,
}

#[derive(Debug, Serialize)]
pub struct BoundsPayload {
    pub mode: String,
    pub input: f64,
    pub threshold: f64,
    pub units: Units,
}

#[derive(Debug, Serialize)]
pub struct ParsePayload {
    pub canonical: String,
}

/// Carried when a command refuses its input (exit status 1).
#[derive(Debug, Serialize)]
pub struct RefusalPayload {
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<cara_core::fixed_point::RotationClass>,
}

/// Carried when inputs fail to parse or certify (exit status 2).
#[derive(Debug, Serialize)]
pub struct InputErrorPayload {
    /// Which input was at fault, e.g. "--F" or "config".
    pub input: String,
    pub message: String,
    /// Byte offset of a parse diagnostic, when applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub expected: Vec<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct Example1Row {
    pub big_r: f64,
    pub epsilon: f64,
    pub verdict: cara_core::Verdict,
    /// Closed-form threshold `1 - (2/pi) arcsin(2R/(1+R^2))`.
    pub threshold_epsilon: f64,
}

#[derive(Debug, Serialize)]
pub struct Example1Payload {
    pub rows: Vec<Example1Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
    pub units: Units,
}

#[derive(Debug, Serialize)]
pub struct Example2Payload {
    pub verdict_k_9: cara_core::Verdict,
    pub verdict_k_8_28: cara_core::Verdict,
    /// Minimal K admissible on the run grid, found by bisection.
    pub bisected_min_k: f64,
    /// The sufficient bound `4 + sqrt(73)/2`.
    pub sufficient_bound_k: f64,
    pub units: Units,
}

#[derive(Debug, Serialize)]
pub struct TsujiRatioRow {
    pub theta: f64,
    /// `theta^(3/2) * (1 - r(theta))/theta^2`; stabilizes near one.
    pub ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct Example3Payload {
    pub agreement_samples: usize,
    pub agreements: usize,
    /// Samples inside the tie band, excluded from the agreement count.
    pub boundary_band: usize,
    pub boundary_radius_at_half_pi: f64,
    pub tsuji_ratios: Vec<TsujiRatioRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg_path: Option<String>,
    pub units: Units,
}
