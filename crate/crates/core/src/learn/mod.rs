//! `fit` and the [`Model`] typestate.
//!
//! A model is born [`Fitted`]; `assess` consumes it and returns it as
//! [`Assessed`]. Verbs that only make sense before assessment take
//! `Estimator<Stage = Fitted>`, so calling them on an assessed model does not
//! compile.

mod algorithms;
mod tree;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::marker::PhantomData;

use serde::{Deserialize, Serialize};

pub use algorithms::{Algorithm, Hyperparameters};
pub(crate) use algorithms::Learner;

use crate::error::{Error, Result};
use crate::frame::DataFrame;
use crate::metrics;
use crate::prepare::{encode_target, infer_task, training_guard, PreparedData, Recipe, TargetMap, Task, Transformer};
use crate::registry::{Session, SplitId};
use crate::rng;
use crate::rotate::CVResult;

pub(crate) mod sealed {
    pub trait Sealed {}
}

pub(crate) mod private {
    /// Capability token: only this crate can perform the Fitted -> Assessed
    /// transition.
    pub struct Token(pub(crate) ());
}

/// Lifecycle stage marker.
pub trait Lifecycle: sealed::Sealed + core::fmt::Debug + 'static {
    const NAME: &'static str;
}

/// Fitted and not yet assessed.
#[derive(Debug)]
pub enum Fitted {}

/// Assessed once; evaluate and further training verbs are unavailable.
#[derive(Debug)]
pub enum Assessed {}

impl sealed::Sealed for Fitted {}
impl sealed::Sealed for Assessed {}
impl Lifecycle for Fitted {
    const NAME: &'static str = "fitted";
}
impl Lifecycle for Assessed {
    const NAME: &'static str = "assessed";
}

/// Anything that predicts: [`Model`] and [`crate::StackedModel`].
pub trait Estimator: sealed::Sealed {
    type Stage: Lifecycle;

    fn task(&self) -> Task;
    fn target(&self) -> &str;
    fn assess_count(&self) -> u32;
    fn source_split_id(&self) -> Option<&SplitId>;
    fn guards_bypassed(&self) -> bool;
    fn target_map(&self) -> Option<&TargetMap>;
    /// Class-1 probabilities or point predictions for every row of `df`.
    fn predict_values(&self, df: &DataFrame) -> Result<Vec<f64>>;
    /// Source columns the estimator reads.
    fn input_names(&self) -> Vec<String>;
    /// Intrinsic importances by prepared feature, when the learner has them.
    fn intrinsic_importance(&self) -> Option<BTreeMap<String, f64>>;
}

/// Estimators `assess` accepts. The transition itself is crate-private.
pub trait Assessable: Estimator + Sized {
    type Assessed: Estimator<Stage = Assessed>;

    #[doc(hidden)]
    fn into_assessed(self, token: private::Token) -> Self::Assessed;
}

/// One fold of a CV fit: the transformer fitted on fold-train and the
/// fold-valid scores.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub transformer: Transformer,
    pub scores: BTreeMap<String, f64>,
    pub train_rows: usize,
    pub valid_rows: usize,
}

/// A fitted learner with its preprocessing state and lifecycle.
#[derive(Debug)]
pub struct Model<S: Lifecycle = Fitted> {
    algorithm: Algorithm,
    task: Task,
    hyperparameters: Hyperparameters,
    seed: u64,
    assess_count: u32,
    scores: Option<BTreeMap<String, f64>>,
    folds: Vec<FoldReport>,
    transformer: Transformer,
    target_map: Option<TargetMap>,
    learner: Learner,
    target: String,
    source_split_id: Option<SplitId>,
    guards_bypassed: bool,
    stage: PhantomData<S>,
}

impl Clone for Model<Fitted> {
    fn clone(&self) -> Self {
        Model {
            algorithm: self.algorithm,
            task: self.task,
            hyperparameters: self.hyperparameters.clone(),
            seed: self.seed,
            assess_count: self.assess_count,
            scores: self.scores.clone(),
            folds: self.folds.clone(),
            transformer: self.transformer.clone(),
            target_map: self.target_map.clone(),
            learner: self.learner.clone(),
            target: self.target.clone(),
            source_split_id: self.source_split_id.clone(),
            guards_bypassed: self.guards_bypassed,
            stage: PhantomData,
        }
    }
}

impl<S: Lifecycle> Model<S> {
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyperparameters
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assess_count(&self) -> u32 {
        self.assess_count
    }

    pub fn is_assessed(&self) -> bool {
        self.assess_count > 0
    }

    /// Mean cross-validated metrics; present when fitted from a [`CVResult`].
    pub fn scores(&self) -> Option<&BTreeMap<String, f64>> {
        self.scores.as_ref()
    }

    pub fn fold_reports(&self) -> &[FoldReport] {
        &self.folds
    }

    pub fn transformer(&self) -> &Transformer {
        &self.transformer
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn source_split_id(&self) -> Option<&SplitId> {
        self.source_split_id.as_ref()
    }

    pub fn guards_bypassed(&self) -> bool {
        self.guards_bypassed
    }

    pub fn stage(&self) -> &'static str {
        S::NAME
    }

    /// Serializable snapshot, including the assess count.
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            algorithm: self.algorithm,
            task: self.task,
            hyperparameters: self.hyperparameters.clone(),
            seed: self.seed,
            assess_count: self.assess_count,
            scores: self.scores.clone(),
            transformer: self.transformer.clone(),
            target_map: self.target_map.clone(),
            learner: self.learner.clone(),
            target: self.target.clone(),
            source_split_id: self.source_split_id.clone(),
            guards_bypassed: self.guards_bypassed,
        }
    }

    fn restage<T: Lifecycle>(self) -> Model<T> {
        Model {
            algorithm: self.algorithm,
            task: self.task,
            hyperparameters: self.hyperparameters,
            seed: self.seed,
            assess_count: self.assess_count,
            scores: self.scores,
            folds: self.folds,
            transformer: self.transformer,
            target_map: self.target_map,
            learner: self.learner,
            target: self.target,
            source_split_id: self.source_split_id,
            guards_bypassed: self.guards_bypassed,
            stage: PhantomData,
        }
    }

}

impl<S: Lifecycle> sealed::Sealed for Model<S> {}

impl<S: Lifecycle> Estimator for Model<S> {
    type Stage = S;

    fn task(&self) -> Task {
        self.task
    }

    fn target(&self) -> &str {
        &self.target
    }

    fn assess_count(&self) -> u32 {
        self.assess_count
    }

    fn source_split_id(&self) -> Option<&SplitId> {
        self.source_split_id.as_ref()
    }

    fn guards_bypassed(&self) -> bool {
        self.guards_bypassed
    }

    fn target_map(&self) -> Option<&TargetMap> {
        self.target_map.as_ref()
    }

    fn predict_values(&self, df: &DataFrame) -> Result<Vec<f64>> {
        let x = self.transformer.matrix(df)?;
        Ok(self.learner.predict(&x))
    }

    fn input_names(&self) -> Vec<String> {
        self.transformer.inputs().to_vec()
    }

    fn intrinsic_importance(&self) -> Option<BTreeMap<String, f64>> {
        let values = self.learner.intrinsic_importance()?;
        Some(self.transformer.outputs().iter().cloned().zip(values).collect())
    }
}

impl Assessable for Model<Fitted> {
    type Assessed = Model<Assessed>;

    fn into_assessed(mut self, _: private::Token) -> Model<Assessed> {
        self.assess_count += 1;
        self.restage()
    }
}

impl Assessable for Model<Assessed> {
    type Assessed = Model<Assessed>;

    fn into_assessed(mut self, _: private::Token) -> Model<Assessed> {
        self.assess_count += 1;
        self
    }
}

/// Output of `predict`: one value per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    pub values: Vec<f64>,
    pub task: Task,
}

impl Predictions {
    pub fn row_count(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub algorithm: Algorithm,
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
    /// Preprocessing applied per fold and on the final refit.
    pub recipe: Recipe,
}

impl FitOptions {
    pub fn new(algorithm: Algorithm) -> FitOptions {
        FitOptions { algorithm, hyperparameters: Hyperparameters::new(), seed: 42, recipe: Recipe::default() }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn hyperparameters(mut self, hp: Hyperparameters) -> Self {
        self.hyperparameters = hp;
        self
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.hyperparameters = self.hyperparameters.with(name, value);
        self
    }

    pub fn recipe(mut self, recipe: Recipe) -> Self {
        self.recipe = recipe;
        self
    }
}

/// What `fit` accepts.
#[derive(Debug, Clone, Copy)]
pub enum FitData<'a> {
    Frame(&'a DataFrame),
    Cv(&'a CVResult),
    Prepared(&'a PreparedData),
}

impl<'a> From<&'a DataFrame> for FitData<'a> {
    fn from(df: &'a DataFrame) -> Self {
        FitData::Frame(df)
    }
}

impl<'a> From<&'a CVResult> for FitData<'a> {
    fn from(c: &'a CVResult) -> Self {
        FitData::Cv(c)
    }
}

impl<'a> From<&'a PreparedData> for FitData<'a> {
    fn from(p: &'a PreparedData) -> Self {
        FitData::Prepared(p)
    }
}

struct Core {
    transformer: Transformer,
    learner: Learner,
}

fn target_column<'a>(df: &'a DataFrame, target: &str) -> Result<&'a crate::frame::Column> {
    df.column(target).ok_or_else(|| Error::Schema(alloc::format!("target column {target:?} not found")))
}

fn fit_core(
    df: &DataFrame,
    target: &str,
    task: Task,
    map: Option<&TargetMap>,
    opts: &FitOptions,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<Core> {
    let transformer = Transformer::fit(df, target, &opts.recipe)?;
    let x = transformer.matrix(df)?;
    let y = encode_target(target_column(df, target)?, task, map)?;
    let learner = Learner::fit(opts.algorithm, task, &x, &y, hp, seed)?;
    Ok(Core { transformer, learner })
}

fn target_setup(df: &DataFrame, target: &str) -> Result<(Task, Option<TargetMap>)> {
    let col = target_column(df, target)?;
    let task = infer_task(col);
    let map = match task {
        Task::Classification => Some(TargetMap::fit(col)?),
        Task::Regression => None,
    };
    Ok((task, map))
}

/// Mean of each metric defined in every fold.
fn mean_scores(folds: &[FoldReport]) -> BTreeMap<String, f64> {
    let Some(first) = folds.first() else { return BTreeMap::new() };
    first
        .scores
        .keys()
        .filter(|k| folds.iter().all(|f| f.scores.contains_key(*k)))
        .map(|k| (k.clone(), folds.iter().map(|f| f.scores[k]).sum::<f64>() / folds.len() as f64))
        .collect()
}

/// Trains a model.
///
/// * A frame must be a registered train, valid or dev partition (or a column
///   subset of one); the recipe is fitted on it.
/// * A [`CVResult`] is fitted fold by fold with preparation inside each fold;
///   the returned model carries the mean fold scores and is refit on all dev
///   rows.
/// * [`PreparedData`] is used as is.
pub fn fit<'a>(session: &Session, data: impl Into<FitData<'a>>, target: &str, opts: &FitOptions) -> Result<Model> {
    let bypassed = !session.guards_on();
    match data.into() {
        FitData::Frame(df) => {
            let split_id = training_guard(session, df, "fit")?;
            fit_frame(df, target, opts, split_id, bypassed)
        }
        FitData::Cv(c) => fit_cv(session, c, target, opts).map(|(m, _)| m),
        FitData::Prepared(p) => {
            let hp = opts.hyperparameters.resolve(opts.algorithm)?;
            if session.guards_on() {
                match p.split_id() {
                    Some(id) if session.split_is_live(id) => {}
                    _ => return Err(Error::unregistered("fit")),
                }
            }
            if p.target() != target {
                return Err(Error::Config(alloc::format!(
                    "prepared data targets {:?}, fit was asked for {target:?}",
                    p.target()
                )));
            }
            let task = p.task();
            let map = match task {
                Task::Classification => Some(TargetMap::fit(p.labels())?),
                Task::Regression => None,
            };
            let identity = Transformer::fit(p.data(), "", &Recipe::empty())?;
            let matrix = identity.matrix(p.data())?;
            let y = encode_target(p.labels(), task, map.as_ref())?;
            let learner = Learner::fit(opts.algorithm, task, &matrix, &y, &hp, rng::derive(opts.seed, 0))?;
            // Prediction replays the recorded preparation.
            let core = Core { transformer: p.transformer().clone(), learner };
            let split_id = p.split_id().cloned();
            Ok(assemble(opts, hp, task, map, core, None, Vec::new(), target, split_id, bypassed))
        }
    }
}

/// Fits on `df` with no registry check. Callers guard.
pub(crate) fn fit_frame(
    df: &DataFrame,
    target: &str,
    opts: &FitOptions,
    split_id: Option<SplitId>,
    bypassed: bool,
) -> Result<Model> {
    let hp = opts.hyperparameters.resolve(opts.algorithm)?;
    let (task, map) = target_setup(df, target)?;
    let core = fit_core(df, target, task, map.as_ref(), opts, &hp, rng::derive(opts.seed, 0))?;
    Ok(assemble(opts, hp, task, map, core, None, Vec::new(), target, split_id, bypassed))
}

/// Out-of-fold prediction for one dev row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OofCell {
    pub row: usize,
    pub fold: usize,
    pub value: f64,
}

/// CV fit that also returns each fold-valid row's out-of-fold prediction.
pub(crate) fn fit_cv(session: &Session, c: &CVResult, target: &str, opts: &FitOptions) -> Result<(Model, Vec<OofCell>)> {
    let hp = opts.hyperparameters.resolve(opts.algorithm)?;
    if session.guards_on() && !session.split_is_live(c.source_split_id()) {
        return Err(Error::Cv("rotation refers to a split that is not registered in this session".into()));
    }
    let dev = c.dev();
    let (task, map) = target_setup(dev, target)?;
    let mut folds = Vec::with_capacity(c.k());
    let mut oof = Vec::with_capacity(dev.row_count());
    for (i, fold) in c.folds().iter().enumerate() {
        let (tr, va) = c.fold_frames(i);
        let core = fit_core(&tr, target, task, map.as_ref(), opts, &hp, rng::derive(opts.seed, i as u64 + 1))?;
        let xv = core.transformer.matrix(&va)?;
        let yv = encode_target(target_column(&va, target)?, task, map.as_ref())?;
        let pred = core.learner.predict(&xv);
        oof.extend(fold.valid.iter().zip(&pred).map(|(&row, &value)| OofCell { row, fold: i, value }));
        folds.push(FoldReport {
            transformer: core.transformer,
            scores: metrics::score(task, &yv, &pred),
            train_rows: tr.row_count(),
            valid_rows: va.row_count(),
        });
    }
    let scores = mean_scores(&folds);
    let core = fit_core(dev, target, task, map.as_ref(), opts, &hp, rng::derive(opts.seed, 0))?;
    let split_id = Some(c.source_split_id().clone());
    let bypassed = !session.guards_on() || c.guards_bypassed();
    Ok((assemble(opts, hp, task, map, core, Some(scores), folds, target, split_id, bypassed), oof))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    opts: &FitOptions,
    hp: Hyperparameters,
    task: Task,
    map: Option<TargetMap>,
    core: Core,
    scores: Option<BTreeMap<String, f64>>,
    folds: Vec<FoldReport>,
    target: &str,
    source_split_id: Option<SplitId>,
    guards_bypassed: bool,
) -> Model {
    Model {
        algorithm: opts.algorithm,
        task,
        hyperparameters: hp,
        seed: opts.seed,
        assess_count: 0,
        scores,
        folds,
        transformer: core.transformer,
        target_map: map,
        learner: core.learner,
        target: target.to_string(),
        source_split_id,
        guards_bypassed,
        stage: PhantomData,
    }
}

pub const MODEL_FORMAT: &str = "leakguard-model";
pub const MODEL_VERSION: u32 = 1;

/// Versioned, serializable form of a [`Model`].
///
/// Loading a document restores the model and its assess count. It does not
/// touch any session registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    format: String,
    version: u32,
    algorithm: Algorithm,
    task: Task,
    hyperparameters: Hyperparameters,
    seed: u64,
    assess_count: u32,
    #[serde(default)]
    scores: Option<BTreeMap<String, f64>>,
    transformer: Transformer,
    #[serde(default)]
    target_map: Option<TargetMap>,
    learner: Learner,
    target: String,
    #[serde(default)]
    source_split_id: Option<SplitId>,
    guards_bypassed: bool,
}

/// A deserialized model in whichever stage its document recorded.
#[derive(Debug)]
pub enum LoadedModel {
    Fitted(Model<Fitted>),
    Assessed(Model<Assessed>),
}

impl ModelDocument {
    pub fn assess_count(&self) -> u32 {
        self.assess_count
    }

    pub fn into_model(self) -> Result<LoadedModel> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(Error::Data(alloc::format!(
                "unsupported model document {} v{}",
                self.format, self.version
            )));
        }
        let model: Model<Fitted> = Model {
            algorithm: self.algorithm,
            task: self.task,
            hyperparameters: self.hyperparameters,
            seed: self.seed,
            assess_count: self.assess_count,
            scores: self.scores,
            folds: Vec::new(),
            transformer: self.transformer,
            target_map: self.target_map,
            learner: self.learner,
            target: self.target,
            source_split_id: self.source_split_id,
            guards_bypassed: self.guards_bypassed,
            stage: PhantomData,
        };
        Ok(if model.assess_count == 0 { LoadedModel::Fitted(model) } else { LoadedModel::Assessed(model.restage()) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Column;
    use crate::split::{split, SplitOptions};
    use alloc::vec;

    fn data(n: usize) -> DataFrame {
        DataFrame::new(vec![
            ("a".into(), Column::Float((0..n).map(|i| Some(i as f64)).collect())),
            ("b".into(), Column::Float((0..n).map(|i| Some(((i * 37) % 11) as f64)).collect())),
            ("y".into(), Column::Int((0..n).map(|i| Some(i64::from(i * 2 >= n))).collect())),
        ])
        .unwrap()
    }

    #[test]
    fn every_algorithm_fits_a_split_member() {
        let s = Session::new();
        let p = split(&s, &data(60), "y", &SplitOptions::default()).unwrap();
        for algo in [Algorithm::Logistic, Algorithm::DecisionTree, Algorithm::RandomForest, Algorithm::Knn] {
            let m = fit(&s, p.train(), "y", &FitOptions::new(algo)).unwrap();
            let v = m.predict_values(p.valid()).unwrap();
            assert!(v.iter().all(|p| (0.0..=1.0).contains(p)), "{algo}");
            assert_eq!(m.assess_count(), 0);
        }
        assert!(matches!(fit(&s, p.train(), "y", &FitOptions::new(Algorithm::Linear)), Err(Error::Config(_))));
    }

    #[test]
    fn raw_and_test_frames_are_rejected() {
        let s = Session::new();
        let df = data(30);
        let err = fit(&s, &df, "y", &FitOptions::new(Algorithm::Logistic)).unwrap_err();
        assert_eq!(err.name(), "PartitionError");
        let p = split(&s, &df, "y", &SplitOptions::default()).unwrap();
        let err = fit(&s, p.test(), "y", &FitOptions::new(Algorithm::Logistic)).unwrap_err();
        assert_eq!(err.name(), "TestReserved");
    }

    #[test]
    fn document_roundtrip_keeps_stage() {
        let s = Session::new();
        let p = split(&s, &data(40), "y", &SplitOptions::default()).unwrap();
        let m = fit(&s, p.dev(), "y", &FitOptions::new(Algorithm::DecisionTree)).unwrap();
        let doc = m.to_document();
        let LoadedModel::Fitted(back) = doc.clone().into_model().unwrap() else { panic!() };
        assert_eq!(back.to_document(), doc);
        let assessed: Model<Assessed> = m.into_assessed(private::Token(()));
        let LoadedModel::Assessed(back) = assessed.to_document().into_model().unwrap() else { panic!() };
        assert_eq!(back.assess_count(), 1);
    }
}
