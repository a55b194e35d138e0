//! evaluate, assess, explain and predict.
//!
//! `evaluate` returns [`Metrics`] and may be called any number of times on
//! non-test data. `assess` returns [`Evidence`] once per test holdout and
//! moves the model to [`Assessed`]. The two share the scorer and nothing
//! else.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, GuardError, Result};
use crate::frame::DataFrame;
use crate::learn::{private, Assessable, Estimator, Fitted, Predictions};
use crate::metrics;
use crate::prepare::encode_target;
use crate::registry::{Role, Session};
use crate::rng;

/// Formative scores on train, valid or dev data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "metrics", try_from = "MetricsRepr")]
pub struct Metrics {
    pub values: BTreeMap<String, f64>,
    pub partition_role: Option<Role>,
    pub guards_bypassed: bool,
}

/// Summative scores from the one permitted look at a test holdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "evidence", try_from = "EvidenceRepr")]
pub struct Evidence {
    pub values: BTreeMap<String, f64>,
    /// Hex summary of the holdout's fingerprint.
    pub holdout_fingerprint: String,
    pub guards_bypassed: bool,
}

/// Feature importances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "explanation", try_from = "ExplanationRepr")]
pub struct Explanation {
    pub values: BTreeMap<String, f64>,
}

// Serialized results carry a `kind` tag. Reading checks it, so one result
// type never parses as another.
macro_rules! checked_kind {
    ($name:ident, $repr:ident, $kind:literal, $($field:ident: $ty:ty),*) => {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct $repr {
            kind: String,
            $($field: $ty,)*
        }

        impl TryFrom<$repr> for $name {
            type Error = String;

            fn try_from(r: $repr) -> core::result::Result<Self, String> {
                if r.kind != $kind {
                    return Err(alloc::format!("expected kind {:?}, found {:?}", $kind, r.kind));
                }
                Ok($name { $($field: r.$field,)* })
            }
        }

        impl $name {
            pub fn get(&self, metric: &str) -> Option<f64> {
                self.values.get(metric).copied()
            }
        }
    };
}

checked_kind!(Metrics, MetricsRepr, "metrics", values: BTreeMap<String, f64>, partition_role: Option<Role>, guards_bypassed: bool);
checked_kind!(Evidence, EvidenceRepr, "evidence", values: BTreeMap<String, f64>, holdout_fingerprint: String, guards_bypassed: bool);
checked_kind!(Explanation, ExplanationRepr, "explanation", values: BTreeMap<String, f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainOptions {
    pub repeats: usize,
    pub seed: u64,
    /// Defaults to the task's primary metric.
    pub metric: Option<String>,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        ExplainOptions { repeats: 10, seed: 42, metric: None }
    }
}

/// Successful `assess`: the evidence and the model in its assessed stage.
#[derive(Debug)]
pub struct Assessment<M> {
    pub evidence: Evidence,
    pub model: M,
}

/// Failed `assess`. The model is handed back unchanged.
pub struct Rejected<E> {
    pub error: Error,
    pub model: E,
}

impl<E> fmt::Debug for Rejected<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rejected").field("error", &self.error).finish_non_exhaustive()
    }
}

impl<E> fmt::Display for Rejected<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.error, f)
    }
}

impl<E> core::error::Error for Rejected<E> {}

impl<E> From<Rejected<E>> for Error {
    fn from(r: Rejected<E>) -> Error {
        r.error
    }
}

fn labels<E: Estimator + ?Sized>(model: &E, df: &DataFrame) -> Result<Vec<f64>> {
    let col = df
        .column(model.target())
        .ok_or_else(|| Error::Schema(alloc::format!("target column {:?} not found", model.target())))?;
    encode_target(col, model.task(), model.target_map())
}

/// Guard for verbs that read non-test data: registered, and not test.
fn non_test_guard(session: &Session, df: &DataFrame, verb: &'static str) -> Result<Option<Role>> {
    let rec = session.lookup(df);
    if !session.guards_on() {
        return Ok(rec.ok().flatten().map(|r| r.role));
    }
    match rec? {
        None => Err(Error::unregistered(verb)),
        Some(r) if r.role == Role::Test => Err(GuardError::TestReserved { verb }.into()),
        Some(r) => Ok(Some(r.role)),
    }
}

/// Scores a fitted, unassessed model on a train, valid or dev frame.
pub fn evaluate<E>(session: &Session, model: &E, df: &DataFrame) -> Result<Metrics>
where
    E: Estimator<Stage = Fitted>,
{
    let role = non_test_guard(session, df, "evaluate")?;
    let y = labels(model, df)?;
    let pred = model.predict_values(df)?;
    Ok(Metrics {
        values: metrics::score(model.task(), &y, &pred),
        partition_role: role,
        guards_bypassed: !session.guards_on() || model.guards_bypassed(),
    })
}

/// Scores `model` on its split's test holdout, once.
///
/// The guard checks, in order: the model has not been assessed, the frame is
/// a registered test partition, it belongs to the model's split, and the
/// holdout has not produced evidence before. The check and the holdout's
/// assessed flag are updated under one lock.
pub fn assess<E: Assessable>(
    session: &Session,
    model: E,
    test: &DataFrame,
) -> core::result::Result<Assessment<E::Assessed>, Rejected<E>> {
    let fp = test.fingerprint();
    let split = model.source_split_id().cloned();
    let count = model.assess_count();
    let scored = labels(&model, test).and_then(|y| Ok((y, model.predict_values(test)?)));
    let (y, pred) = match scored {
        Ok(v) => v,
        Err(e) => {
            // Report a guard failure ahead of a data problem, without spending the holdout.
            let error = session.check_holdout(&fp, split.as_ref(), count, false).err().unwrap_or(e);
            return Err(Rejected { error, model });
        }
    };
    let ticket = match session.check_holdout(&fp, split.as_ref(), count, true) {
        Ok(t) => t,
        Err(error) => return Err(Rejected { error, model }),
    };
    let evidence = Evidence {
        values: metrics::score(model.task(), &y, &pred),
        holdout_fingerprint: ticket.holdout.summary().to_hex(),
        guards_bypassed: ticket.bypassed || model.guards_bypassed(),
    };
    Ok(Assessment { evidence, model: model.into_assessed(private::Token(())) })
}

/// Predictions for every row of `df`. No registry check.
pub fn predict<E: Estimator + ?Sized>(model: &E, df: &DataFrame) -> Result<Predictions> {
    Ok(Predictions { values: model.predict_values(df)?, task: model.task() })
}

/// Permutation importance on `df` when given, else the learner's intrinsic
/// importances.
pub fn explain<E: Estimator + ?Sized>(
    session: &Session,
    model: &E,
    df: Option<&DataFrame>,
    opts: &ExplainOptions,
) -> Result<Explanation> {
    let Some(df) = df else {
        return model
            .intrinsic_importance()
            .map(|values| Explanation { values })
            .ok_or_else(|| Error::Config("this learner has no intrinsic importances; pass a frame".into()));
    };
    non_test_guard(session, df, "explain")?;
    if opts.repeats == 0 {
        return Err(Error::Config("explain needs at least one repeat".into()));
    }
    let metric = opts.metric.clone().unwrap_or_else(|| metrics::primary(model.task()).into());
    let y = labels(model, df)?;
    let measure = |frame: &DataFrame| -> Result<f64> {
        let pred = model.predict_values(frame)?;
        let scores = metrics::score(model.task(), &y, &pred);
        match scores.get(&metric) {
            Some(v) => Ok(*v),
            None => Err(Error::Config(alloc::format!("metric {metric:?} is undefined on this frame"))),
        }
    };
    let base = measure(df)?;
    let sign = if metrics::higher_is_better(&metric) { 1.0 } else { -1.0 };
    let mut values = BTreeMap::new();
    for (j, name) in model.input_names().into_iter().enumerate() {
        let col = df.column(&name).ok_or_else(|| Error::Schema(alloc::format!("column {name:?} not found")))?;
        let mut total = 0.0;
        for r in 0..opts.repeats {
            let mut perm: Vec<usize> = (0..df.row_count()).collect();
            perm.shuffle(&mut rng::stream(opts.seed, (j * opts.repeats + r) as u64));
            let shuffled = df.with_column(&name, col.take(&perm))?;
            total += sign * (base - measure(&shuffled)?);
        }
        values.insert(name, total / opts.repeats as f64);
    }
    Ok(Explanation { values })
}
