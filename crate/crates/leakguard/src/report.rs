//! The JSON document a workflow run prints, and the exit-code table.

use std::collections::BTreeMap;

use leakguard_core::{
    Error, Evidence, Explanation, GuardMode, Leaderboard, Metrics, Partition, Predictions, TuningResult,
};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
/// Malformed workflow file or invalid configuration.
pub const EXIT_SPEC: i32 = 2;
/// A guard, provenance or type-continuity rejection.
pub const EXIT_GUARD: i32 = 3;
/// Unreadable or unsuitable data.
pub const EXIT_DATA: i32 = 4;

/// Exit code for an error raised while executing a parsed workflow.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => EXIT_SPEC,
        e if e.is_guard() => EXIT_GUARD,
        _ => EXIT_DATA,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Declarative,
    Explicit,
}

/// One verb call and what the guards made of it: `pass`, `bypassed`
/// (guards off) or the error name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardEvent {
    pub verb: String,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionInfo {
    pub rows: usize,
    /// Lowercase hex summary of the content fingerprint.
    pub fingerprint: String,
}

pub fn partition_info(p: &Partition) -> BTreeMap<String, PartitionInfo> {
    [("train", p.train()), ("valid", p.valid()), ("test", p.test()), ("dev", p.dev())]
        .into_iter()
        .map(|(k, f)| (k.to_string(), PartitionInfo { rows: f.row_count(), fingerprint: f.fingerprint().summary().to_hex() }))
        .collect()
}

/// A named result of an explicit step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Output {
    Metrics(Metrics),
    Evidence(Evidence),
    Explanation(Explanation),
    Predictions(Predictions),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunError {
    pub name: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub guards: GuardMode,
    #[serde(default)]
    pub split_id: Option<String>,
    #[serde(default)]
    pub partitions: BTreeMap<String, PartitionInfo>,
    /// Per-algorithm mean fold scores.
    #[serde(default)]
    pub cv_scores: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    #[serde(default)]
    pub leaderboard: Option<Leaderboard>,
    #[serde(default)]
    pub tuning: Option<TuningResult>,
    /// Description of the strategy's final model.
    #[serde(default)]
    pub final_model: Option<String>,
    #[serde(default)]
    pub evaluation: Option<Metrics>,
    /// Present iff the workflow reached assess exactly once and it succeeded.
    #[serde(default)]
    pub evidence: Option<Evidence>,
    /// Successful assess calls.
    pub assess_count: u32,
    #[serde(default)]
    pub outputs: BTreeMap<String, Output>,
    pub guard_events: Vec<GuardEvent>,
    pub guards_bypassed: bool,
    #[serde(default)]
    pub error: Option<RunError>,
}

impl RunReport {
    pub fn new(mode: Mode, guards: GuardMode) -> RunReport {
        RunReport {
            mode,
            guards,
            split_id: None,
            partitions: BTreeMap::new(),
            cv_scores: None,
            leaderboard: None,
            tuning: None,
            final_model: None,
            evaluation: None,
            evidence: None,
            assess_count: 0,
            outputs: BTreeMap::new(),
            guard_events: Vec::new(),
            guards_bypassed: false,
            error: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(EXIT_OK, |e| e.exit_code)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<RunReport> {
        serde_json::from_str(text)
    }
}
