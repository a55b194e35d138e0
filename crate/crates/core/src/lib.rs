//! Leakage-safe grammar for supervised learning workflows.
//!
//! Eight guarded primitives connect through a small typed graph:
//!
//! ```text
//! DataFrame --split--> Partition --cv--> CVResult --fit--> Model
//!                          |                                 |
//!                          +--prepare--> PreparedData --fit--+
//!
//! Model --predict--> Predictions     Model --evaluate--> Metrics
//! Model --explain--> Explanation     Model --assess----> Evidence (once per holdout)
//! ```
//!
//! Guards consult a [`Session`], a provenance registry keyed by content
//! fingerprints of the partitions produced by [`split()`]. Frames that were
//! never produced by a split are rejected by [`fit()`] and [`prepare()`];
//! test partitions are rejected everywhere except [`assess()`], and a test
//! holdout yields [`Evidence`] exactly once.
//!
//! ```
//! use leakguard_core::prelude::*;
//!
//! let session = Session::new();
//! let x: Vec<Option<f64>> = (0..40).map(|i| Some(i as f64)).collect();
//! let y: Vec<Option<i64>> = (0..40).map(|i| Some((i >= 20) as i64)).collect();
//! let df = DataFrame::new(vec![
//!     ("x".into(), Column::Float(x)),
//!     ("y".into(), Column::Int(y)),
//! ]).unwrap();
//!
//! let s = split(&session, &df, "y", &SplitOptions::default()).unwrap();
//! let c = cv(&session, &s, 4, 42).unwrap();
//! let model = fit(&session, &c, "y", &FitOptions::new(Algorithm::Logistic)).unwrap();
//! assert!(model.scores().unwrap().contains_key("roc_auc"));
//!
//! let metrics = evaluate(&session, &model, s.valid()).unwrap();
//! assert!(metrics.get("accuracy").is_some());
//! let done = assess(&session, model, s.test()).unwrap();
//! assert_eq!(done.model.assess_count(), 1);
//! ```
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod frame;
pub mod judge;
pub mod learn;
mod math;
pub mod metrics;
pub mod prepare;
pub mod registry;
mod rng;
pub mod rotate;
pub mod split;
pub mod strategy;

pub use error::{Error, GuardError, Result};
pub use frame::{canonical_encode, Column, ColumnKind, DataFrame, Digest, FrameFingerprint, PartitionTag, Value};
pub use judge::{assess, evaluate, explain, predict, Assessment, Evidence, ExplainOptions, Explanation, Metrics, Rejected};
pub use learn::{
    fit, Algorithm, Assessable, Assessed, Estimator, FitData, FitOptions, FoldReport, Fitted, Hyperparameters,
    Lifecycle, LoadedModel, Model, ModelDocument, Predictions,
};
pub use prepare::{prepare, PreparedData, Recipe, Step, StepKind, TargetMap, Task, Transformer};
pub use registry::{GuardMode, ProvenanceRecord, RegistrySnapshot, Role, Session, SplitId};
pub use rotate::{cv, cv_group, cv_temporal, CVResult, CvKind, Fold, Window};
pub use split::{split, split_group, split_temporal, Partition, Ratios, SplitKind, SplitOptions};
pub use strategy::{
    screen, stack, tune, Distribution, Leaderboard, LeaderboardRow, OutOfFold, SearchSpace, StackedModel, Trial,
    TuningResult,
};

/// Everything needed to write a workflow.
pub mod prelude {
    pub use crate::{
        assess, cv, cv_group, cv_temporal, evaluate, explain, fit, predict, prepare, screen, split, split_group,
        split_temporal, stack, tune, Algorithm, CVResult, Column, DataFrame, Error, Estimator, Evidence,
        ExplainOptions, Explanation, FitOptions, GuardError, GuardMode, Metrics, Model, Partition, PreparedData,
        Ratios, Recipe, Role, Session, SplitOptions, Window,
    };
}
