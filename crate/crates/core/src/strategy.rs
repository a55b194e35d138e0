//! Strategy verbs built from `fit` over one [`CVResult`]: screen, tune and
//! stack. None of them sees test data; a CVResult carries none.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::marker::PhantomData;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Column, DataFrame};
use crate::learn::{
    fit, fit_cv, fit_frame, private, sealed, Algorithm, Assessable, Assessed, Estimator, FitOptions, Fitted,
    Hyperparameters, Lifecycle, Model,
};
use crate::math;
use crate::metrics;
use crate::prepare::{TargetMap, Task};
use crate::registry::{Session, SplitId};
use crate::rng;
use crate::rotate::CVResult;

fn primary_of(scores: &BTreeMap<String, f64>, metric: &str) -> f64 {
    let v = scores.get(metric).copied().unwrap_or(f64::NAN);
    if metrics::higher_is_better(metric) {
        v
    } else {
        -v
    }
}

/// Descending by score with NaN last.
fn rank(a: f64, b: f64) -> Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => b.total_cmp(&a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub algorithm: Algorithm,
    pub scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub rows: Vec<LeaderboardRow>,
    pub best: Algorithm,
    pub metric: String,
    /// Digest of the fold index lists every row was scored on.
    pub folds_digest: String,
}

/// CV-fits each algorithm on the same folds and ranks them by the task's
/// primary metric; ties go to the alphabetically first name.
pub fn screen(session: &Session, c: &CVResult, target: &str, algorithms: &[Algorithm], seed: u64) -> Result<Leaderboard> {
    if algorithms.is_empty() {
        return Err(Error::Config("screen needs at least one algorithm".into()));
    }
    let mut rows = Vec::with_capacity(algorithms.len());
    let mut task = Task::Classification;
    for &algorithm in algorithms {
        let m = fit(session, c, target, &FitOptions::new(algorithm).seed(seed))?;
        task = m.task();
        rows.push(LeaderboardRow { algorithm, scores: m.scores().cloned().unwrap_or_default() });
    }
    let metric = metrics::primary(task);
    rows.sort_by(|a, b| {
        rank(primary_of(&a.scores, metric), primary_of(&b.scores, metric)).then(a.algorithm.name().cmp(b.algorithm.name()))
    });
    Ok(Leaderboard { best: rows[0].algorithm, rows, metric: metric.into(), folds_digest: c.folds_digest().to_hex() })
}

/// Sampling distribution for one hyperparameter in random search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Distribution {
    Uniform { low: f64, high: f64 },
    LogUniform { low: f64, high: f64 },
    /// Inclusive integer range.
    IntUniform { low: i64, high: i64 },
    Choice { values: Vec<f64> },
}

impl Distribution {
    fn check(&self, name: &str) -> Result<()> {
        let ok = match self {
            Distribution::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Distribution::LogUniform { low, high } => *low > 0.0 && high.is_finite() && low <= high,
            Distribution::IntUniform { low, high } => low <= high,
            Distribution::Choice { values } => !values.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(alloc::format!("invalid distribution for {name}")))
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Distribution::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Distribution::LogUniform { low, high } => {
                let (a, b) = (math::ln(*low), math::ln(*high));
                math::exp(a + (b - a) * rng.random::<f64>())
            }
            Distribution::IntUniform { low, high } => rng.random_range(*low..=*high) as f64,
            Distribution::Choice { values } => values[rng.random_range(0..values.len())],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchSpace {
    /// Cross-product in key order, the last key varying fastest.
    Grid(BTreeMap<String, Vec<f64>>),
    Random(BTreeMap<String, Distribution>),
}

impl SearchSpace {
    fn candidates(&self, budget: usize, seed: u64) -> Result<Vec<Hyperparameters>> {
        match self {
            SearchSpace::Grid(grid) => {
                if grid.is_empty() || grid.values().any(Vec::is_empty) {
                    return Err(Error::Config("grid search space is empty".into()));
                }
                let keys: Vec<&String> = grid.keys().collect();
                let mut idx = alloc::vec![0usize; keys.len()];
                let mut out = Vec::new();
                'outer: while out.len() < budget {
                    let mut h = Hyperparameters::new();
                    for (k, i) in keys.iter().zip(&idx) {
                        h = h.with(k, grid[*k][*i]);
                    }
                    out.push(h);
                    for pos in (0..keys.len()).rev() {
                        idx[pos] += 1;
                        if idx[pos] < grid[keys[pos]].len() {
                            continue 'outer;
                        }
                        idx[pos] = 0;
                    }
                    break;
                }
                Ok(out)
            }
            SearchSpace::Random(space) => {
                if space.is_empty() {
                    return Err(Error::Config("random search space is empty".into()));
                }
                for (k, d) in space {
                    d.check(k)?;
                }
                Ok((0..budget)
                    .map(|t| {
                        let mut r = rng::stream(seed, 2_000 + t as u64);
                        space.iter().fold(Hyperparameters::new(), |h, (k, d)| h.with(k, d.sample(&mut r)))
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub hyperparameters: Hyperparameters,
    pub scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub algorithm: Algorithm,
    pub trials: Vec<Trial>,
    pub best: Hyperparameters,
    pub best_index: usize,
    pub metric: String,
    pub folds_digest: String,
}

/// Grid or random search; every trial is a CV fit on the same folds. The
/// best trial maximizes the primary metric, earliest first on ties.
pub fn tune(
    session: &Session,
    c: &CVResult,
    target: &str,
    algorithm: Algorithm,
    space: &SearchSpace,
    budget: usize,
    seed: u64,
) -> Result<TuningResult> {
    if budget == 0 {
        return Err(Error::Config("tune needs a budget of at least 1".into()));
    }
    let candidates = space.candidates(budget, seed)?;
    let mut trials = Vec::with_capacity(candidates.len());
    let mut task = Task::Classification;
    for h in candidates {
        let m = fit(session, c, target, &FitOptions::new(algorithm).hyperparameters(h.clone()).seed(seed))?;
        task = m.task();
        trials.push(Trial { hyperparameters: h, scores: m.scores().cloned().unwrap_or_default() });
    }
    let metric = metrics::primary(task);
    let mut best_index = 0;
    for (i, t) in trials.iter().enumerate() {
        if rank(primary_of(&t.scores, metric), primary_of(&trials[best_index].scores, metric)) == Ordering::Less {
            best_index = i;
        }
    }
    Ok(TuningResult {
        algorithm,
        best: trials[best_index].hyperparameters.clone(),
        best_index,
        trials,
        metric: metric.into(),
        folds_digest: c.folds_digest().to_hex(),
    })
}

/// One base learner's out-of-fold prediction for a dev row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutOfFold {
    pub row: usize,
    pub fold: usize,
    /// One value per base learner, in base order.
    pub predictions: Vec<f64>,
}

/// Base models refit on dev plus a meta model fitted on their out-of-fold
/// predictions. Obeys the same assess-once guard as [`Model`].
#[derive(Debug)]
pub struct StackedModel<S: Lifecycle = Fitted> {
    bases: Vec<Model<Fitted>>,
    meta: Model<Fitted>,
    oof: Vec<OutOfFold>,
    assess_count: u32,
    stage: PhantomData<S>,
}

fn oof_column(algo: Algorithm) -> String {
    alloc::format!("oof_{}", algo.name())
}

/// Stacked ensemble over `bases`, meta learner fitted on the out-of-fold
/// prediction matrix.
pub fn stack(
    session: &Session,
    c: &CVResult,
    target: &str,
    bases: &[Algorithm],
    meta: Algorithm,
    seed: u64,
) -> Result<StackedModel> {
    if bases.len() < 2 {
        return Err(Error::Config("stack needs at least two base algorithms".into()));
    }
    let mut sorted = bases.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != bases.len() {
        return Err(Error::Config("stack base algorithms must be distinct".into()));
    }
    let mut models = Vec::with_capacity(bases.len());
    let mut by_row: BTreeMap<usize, OutOfFold> = BTreeMap::new();
    for (b, &algo) in bases.iter().enumerate() {
        let (model, cells) = fit_cv(session, c, target, &FitOptions::new(algo).seed(seed))?;
        for cell in cells {
            let entry = by_row.entry(cell.row).or_insert_with(|| OutOfFold {
                row: cell.row,
                fold: cell.fold,
                predictions: alloc::vec![f64::NAN; bases.len()],
            });
            entry.predictions[b] = cell.value;
        }
        models.push(model);
    }
    let oof: Vec<OutOfFold> = by_row.into_values().collect();
    let rows: Vec<usize> = oof.iter().map(|o| o.row).collect();
    let mut cols: Vec<(String, Column)> = bases
        .iter()
        .enumerate()
        .map(|(b, &a)| (oof_column(a), Column::Float(oof.iter().map(|o| Some(o.predictions[b])).collect())))
        .collect();
    let labels = c.dev().column(target).ok_or_else(|| Error::Schema(alloc::format!("target {target:?} not found")))?;
    cols.push((target.to_string(), labels.take(&rows)));
    let design = DataFrame::new(cols)?;
    let bypassed = models.iter().any(|m| m.guards_bypassed());
    let meta = fit_frame(&design, target, &FitOptions::new(meta).seed(seed), Some(c.source_split_id().clone()), bypassed)?;
    Ok(StackedModel { bases: models, meta, oof, assess_count: 0, stage: PhantomData })
}

impl<S: Lifecycle> StackedModel<S> {
    pub fn bases(&self) -> &[Model<Fitted>] {
        &self.bases
    }

    pub fn meta(&self) -> &Model<Fitted> {
        &self.meta
    }

    pub fn out_of_fold(&self) -> &[OutOfFold] {
        &self.oof
    }

    pub fn assess_count(&self) -> u32 {
        self.assess_count
    }

    fn design(&self, df: &DataFrame) -> Result<DataFrame> {
        let mut cols = Vec::with_capacity(self.bases.len() + 1);
        for b in &self.bases {
            let v = b.predict_values(df)?;
            cols.push((oof_column(b.algorithm()), Column::Float(v.into_iter().map(Some).collect())));
        }
        DataFrame::new(cols)
    }
}

impl<S: Lifecycle> sealed::Sealed for StackedModel<S> {}

impl<S: Lifecycle> Estimator for StackedModel<S> {
    type Stage = S;

    fn task(&self) -> Task {
        self.meta.task()
    }

    fn target(&self) -> &str {
        self.meta.target()
    }

    fn assess_count(&self) -> u32 {
        self.assess_count
    }

    fn source_split_id(&self) -> Option<&SplitId> {
        self.meta.source_split_id()
    }

    fn guards_bypassed(&self) -> bool {
        self.meta.guards_bypassed()
    }

    fn target_map(&self) -> Option<&TargetMap> {
        Estimator::target_map(&self.meta)
    }

    fn predict_values(&self, df: &DataFrame) -> Result<Vec<f64>> {
        self.meta.predict_values(&self.design(df)?)
    }

    fn input_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for b in &self.bases {
            for n in b.input_names() {
                if !names.contains(&n) {
                    names.push(n);
                }
            }
        }
        names
    }

    fn intrinsic_importance(&self) -> Option<BTreeMap<String, f64>> {
        self.meta.intrinsic_importance()
    }
}

impl Assessable for StackedModel<Fitted> {
    type Assessed = StackedModel<Assessed>;

    fn into_assessed(self, _: private::Token) -> StackedModel<Assessed> {
        StackedModel { bases: self.bases, meta: self.meta, oof: self.oof, assess_count: self.assess_count + 1, stage: PhantomData }
    }
}

impl Assessable for StackedModel<Assessed> {
    type Assessed = StackedModel<Assessed>;

    fn into_assessed(mut self, _: private::Token) -> StackedModel<Assessed> {
        self.assess_count += 1;
        self
    }
}
