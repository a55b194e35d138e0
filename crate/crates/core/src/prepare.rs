//! Fit-time preprocessing: mean imputation, one-hot encoding and
//! standardization, captured in a reusable [`Transformer`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, GuardError, Result};
use crate::frame::{canonical_encode, Column, DataFrame, Value};
use crate::math;
use crate::registry::{Role, Session, SplitId};

/// Targets with at most this many distinct values are classification.
pub const CLASSIFICATION_MAX_CLASSES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

pub(crate) fn infer_task(target: &Column) -> Task {
    if matches!(target, Column::Categorical(_) | Column::Bool(_)) {
        return Task::Classification;
    }
    let mut seen = BTreeSet::new();
    for row in 0..target.len() {
        if !target.is_missing(row) {
            seen.insert(canonical_encode(&target.get(row)));
            if seen.len() > CLASSIFICATION_MAX_CLASSES {
                return Task::Regression;
            }
        }
    }
    Task::Classification
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    ImputeMean,
    OneHot,
    Standardize,
}

/// One recipe step. `columns: None` means the step's default selection:
/// numeric input columns for impute/standardize, categoricals for one-hot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub kind: StepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
}

impl Step {
    pub fn new(kind: StepKind) -> Step {
        Step { kind, columns: None }
    }

    pub fn on<S: Into<String>>(kind: StepKind, columns: impl IntoIterator<Item = S>) -> Step {
        Step { kind, columns: Some(columns.into_iter().map(Into::into).collect()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub steps: Vec<Step>,
}

impl Default for Recipe {
    /// impute_mean, one_hot, standardize.
    fn default() -> Self {
        Recipe {
            steps: alloc::vec![
                Step::new(StepKind::ImputeMean),
                Step::new(StepKind::OneHot),
                Step::new(StepKind::Standardize),
            ],
        }
    }
}

impl Recipe {
    pub fn empty() -> Recipe {
        Recipe { steps: Vec::new() }
    }

    pub fn then(mut self, step: Step) -> Recipe {
        self.steps.push(step);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
enum FittedStep {
    ImputeMean { means: Vec<(String, f64)> },
    OneHot { categories: Vec<(String, Vec<String>)> },
    Standardize { stats: Vec<(String, f64, f64)> },
}

/// Fitted preprocessing state. Every statistic comes from the frame passed
/// to [`Transformer::fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transformer {
    inputs: Vec<String>,
    steps: Vec<FittedStep>,
    fill: Vec<(String, f64)>,
    outputs: Vec<String>,
}

#[derive(Clone)]
enum Work {
    Num(Vec<Option<f64>>),
    Cat(Vec<Option<String>>),
}

fn to_work(col: &Column) -> Work {
    match col {
        Column::Categorical(v) => Work::Cat(v.clone()),
        other => Work::Num((0..other.len()).map(|r| other.f64_at(r)).collect()),
    }
}

fn column_mean(values: &[Option<f64>]) -> f64 {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        0.0
    } else {
        math::mean(&present)
    }
}

fn select<'a>(
    work: &'a [(String, Work)],
    columns: &Option<Vec<String>>,
    default: impl Fn(&str, &Work) -> bool,
) -> Result<Vec<String>> {
    match columns {
        None => Ok(work.iter().filter(|(n, w)| default(n, w)).map(|(n, _)| n.clone()).collect()),
        Some(list) => {
            for name in list {
                if !work.iter().any(|(n, _)| n == name) {
                    return Err(Error::Schema(alloc::format!("recipe column {name:?} not found")));
                }
            }
            Ok(list.clone())
        }
    }
}

fn slot<'a>(work: &'a mut [(String, Work)], name: &str) -> &'a mut Work {
    &mut work.iter_mut().find(|(n, _)| n == name).expect("selected columns exist").1
}

impl Transformer {
    /// Learns the recipe's statistics from the non-target columns of `df`.
    pub fn fit(df: &DataFrame, target: &str, recipe: &Recipe) -> Result<Transformer> {
        let inputs: Vec<String> = df.column_names().iter().filter(|n| *n != target).cloned().collect();
        if inputs.is_empty() {
            return Err(Error::Schema("no feature columns besides the target".into()));
        }
        let mut work: Vec<(String, Work)> =
            inputs.iter().map(|n| (n.clone(), to_work(df.column(n).expect("listed")))).collect();
        let source_numeric: BTreeSet<String> =
            work.iter().filter(|(_, w)| matches!(w, Work::Num(_))).map(|(n, _)| n.clone()).collect();
        let mut steps = Vec::new();
        for step in &recipe.steps {
            let fitted = match step.kind {
                StepKind::ImputeMean => {
                    let cols = select(&work, &step.columns, |_, w| matches!(w, Work::Num(_)))?;
                    let mut means = Vec::new();
                    for name in cols {
                        let Work::Num(v) = slot(&mut work, &name) else {
                            return Err(Error::Schema(alloc::format!("impute_mean needs numeric column {name:?}")));
                        };
                        means.push((name, column_mean(v)));
                    }
                    FittedStep::ImputeMean { means }
                }
                StepKind::OneHot => {
                    let cols = select(&work, &step.columns, |_, w| matches!(w, Work::Cat(_)))?;
                    let mut categories = Vec::new();
                    for name in cols {
                        let Work::Cat(v) = slot(&mut work, &name) else {
                            return Err(Error::Schema(alloc::format!("one_hot needs categorical column {name:?}")));
                        };
                        let mut seen = BTreeSet::new();
                        let cats: Vec<String> = v.iter().flatten().filter(|c| seen.insert(*c)).cloned().collect();
                        categories.push((name, cats));
                    }
                    FittedStep::OneHot { categories }
                }
                StepKind::Standardize => {
                    let cols = select(&work, &step.columns, |n, w| {
                        matches!(w, Work::Num(_)) && source_numeric.contains(n)
                    })?;
                    let mut stats = Vec::new();
                    for name in cols {
                        let Work::Num(v) = slot(&mut work, &name) else {
                            return Err(Error::Schema(alloc::format!("standardize needs numeric column {name:?}")));
                        };
                        let present: Vec<f64> = v.iter().flatten().copied().collect();
                        let (mean, std) = if present.is_empty() {
                            (0.0, 0.0)
                        } else {
                            let m = math::mean(&present);
                            (m, math::population_std(&present, m))
                        };
                        stats.push((name, mean, std));
                    }
                    FittedStep::Standardize { stats }
                }
            };
            apply_step(&fitted, &mut work)?;
            steps.push(fitted);
        }
        let mut fill = Vec::new();
        for (name, w) in &work {
            match w {
                Work::Num(v) => fill.push((name.clone(), column_mean(v))),
                Work::Cat(_) => {
                    return Err(Error::Schema(alloc::format!(
                        "categorical column {name:?} is not encoded by the recipe; add a one_hot step"
                    )))
                }
            }
        }
        let outputs = work.iter().map(|(n, _)| n.clone()).collect();
        Ok(Transformer { inputs, steps, fill, outputs })
    }

    /// Feature columns the transformer reads.
    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    /// Numeric columns the transformer emits, in order.
    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Imputation means by column.
    pub fn means(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for s in &self.steps {
            if let FittedStep::ImputeMean { means } = s {
                out.extend(means.iter().cloned());
            }
        }
        out
    }

    /// Standardization `(mean, std)` by column.
    pub fn standardization(&self) -> BTreeMap<String, (f64, f64)> {
        let mut out = BTreeMap::new();
        for s in &self.steps {
            if let FittedStep::Standardize { stats } = s {
                out.extend(stats.iter().map(|(n, m, sd)| (n.clone(), (*m, *sd))));
            }
        }
        out
    }

    /// One-hot category lists by source column.
    pub fn categories(&self) -> BTreeMap<String, Vec<String>> {
        let mut out = BTreeMap::new();
        for s in &self.steps {
            if let FittedStep::OneHot { categories } = s {
                out.extend(categories.iter().cloned());
            }
        }
        out
    }

    /// Transforms `df` with fit-time statistics only. Extra columns are ignored.
    pub fn apply(&self, df: &DataFrame) -> Result<DataFrame> {
        let work = self.transform(df)?;
        let cols = work
            .into_iter()
            .map(|(n, w)| match w {
                Work::Num(v) => (n, Column::Float(v)),
                Work::Cat(_) => unreachable!("transform rejects categoricals"),
            })
            .collect();
        DataFrame::new(cols)
    }

    /// Row-major feature matrix.
    pub(crate) fn matrix(&self, df: &DataFrame) -> Result<Matrix> {
        let work = self.transform(df)?;
        let rows = df.row_count();
        let cols = work.len();
        let mut data = alloc::vec![0.0; rows * cols];
        for (j, (_, w)) in work.iter().enumerate() {
            let Work::Num(v) = w else { unreachable!() };
            for (i, x) in v.iter().enumerate() {
                data[i * cols + j] = x.expect("filled");
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    fn transform(&self, df: &DataFrame) -> Result<Vec<(String, Work)>> {
        let mut work = Vec::with_capacity(self.inputs.len());
        for name in &self.inputs {
            let col = df
                .column(name)
                .ok_or_else(|| Error::Schema(alloc::format!("column {name:?} seen at fit time is missing")))?;
            work.push((name.clone(), to_work(col)));
        }
        for step in &self.steps {
            apply_step(step, &mut work)?;
        }
        for ((name, w), (fname, m)) in work.iter_mut().zip(&self.fill) {
            match w {
                Work::Num(v) if name == fname => v.iter_mut().for_each(|x| {
                    x.get_or_insert(*m);
                }),
                _ => return Err(Error::Schema(alloc::format!("column {name:?} does not match the fitted schema"))),
            }
        }
        if work.len() != self.outputs.len() {
            return Err(Error::Schema("frame does not match the fitted schema".into()));
        }
        Ok(work)
    }
}

fn apply_step(step: &FittedStep, work: &mut Vec<(String, Work)>) -> Result<()> {
    match step {
        FittedStep::ImputeMean { means } => {
            for (name, m) in means {
                match slot(work, name) {
                    Work::Num(v) => v.iter_mut().for_each(|x| {
                        x.get_or_insert(*m);
                    }),
                    Work::Cat(_) => return Err(kind_mismatch(name)),
                }
            }
        }
        FittedStep::Standardize { stats } => {
            for (name, m, sd) in stats {
                match slot(work, name) {
                    Work::Num(v) => v.iter_mut().flatten().for_each(|x| {
                        *x = if *sd > 0.0 { (*x - m) / sd } else { 0.0 };
                    }),
                    Work::Cat(_) => return Err(kind_mismatch(name)),
                }
            }
        }
        FittedStep::OneHot { categories } => {
            for (name, cats) in categories {
                let pos = work.iter().position(|(n, _)| n == name).expect("fitted column present");
                let Work::Cat(values) = &work[pos].1 else { return Err(kind_mismatch(name)) };
                let encoded: Vec<(String, Work)> = cats
                    .iter()
                    .map(|c| {
                        let v = values.iter().map(|x| Some(if x.as_ref() == Some(c) { 1.0 } else { 0.0 })).collect();
                        (alloc::format!("{name}={c}"), Work::Num(v))
                    })
                    .collect();
                work.splice(pos..=pos, encoded);
            }
        }
    }
    Ok(())
}

fn kind_mismatch(name: &str) -> Error {
    Error::Schema(alloc::format!("column {name:?} changed kind since fit time"))
}

/// Dense row-major matrix of prepared features.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Label encoding for binary classification: classes sorted, the second is
/// positive (1.0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMap {
    classes: Vec<Value>,
}

impl TargetMap {
    pub(crate) fn fit(target: &Column) -> Result<TargetMap> {
        let mut classes: Vec<Value> = Vec::new();
        for r in 0..target.len() {
            let v = target.get(r);
            if v.is_missing() {
                continue;
            }
            if !classes.iter().any(|c| same_label(c, &v)) {
                classes.push(v);
            }
        }
        classes.sort_by(|a, b| a.total_cmp(b));
        match classes.len() {
            0 => Err(Error::Data("target has no non-missing values".into())),
            1 | 2 => Ok(TargetMap { classes }),
            n => Err(Error::Config(alloc::format!(
                "classification target has {n} classes; only binary classification is supported"
            ))),
        }
    }

    pub fn classes(&self) -> &[Value] {
        &self.classes
    }

    fn positive_single(&self) -> bool {
        matches!(self.classes[0], Value::Int(1) | Value::Bool(true)) || self.classes[0].as_f64() == Some(1.0)
    }

    /// 1.0 for the positive class, 0.0 for the other; unseen labels are errors.
    pub fn encode(&self, v: &Value) -> Result<f64> {
        if v.is_missing() {
            return Err(Error::Data("missing target value".into()));
        }
        let idx = self
            .classes
            .iter()
            .position(|c| same_label(c, v))
            .ok_or_else(|| Error::Data(alloc::format!("target label {v} was not seen at fit time")))?;
        Ok(match self.classes.len() {
            1 => f64::from(u8::from(self.positive_single())),
            _ => idx as f64,
        })
    }
}

fn same_label(a: &Value, b: &Value) -> bool {
    canonical_encode(a) == canonical_encode(b)
}

/// Numeric target vector for `task`.
pub(crate) fn encode_target(col: &Column, task: Task, map: Option<&TargetMap>) -> Result<Vec<f64>> {
    (0..col.len())
        .map(|r| match (task, map) {
            (Task::Classification, Some(m)) => m.encode(&col.get(r)),
            _ => col.f64_at(r).ok_or_else(|| Error::Data(alloc::format!("target row {} is missing", r + 1))),
        })
        .collect()
}

/// Output of [`prepare`]: numeric features, the raw target and the state
/// that produced them.
#[derive(Debug, Clone)]
pub struct PreparedData {
    data: DataFrame,
    labels: Column,
    transformer: Transformer,
    target: String,
    task: Task,
    split_id: Option<SplitId>,
}

impl PreparedData {
    /// All-numeric feature frame; contains no target and no missing values.
    pub fn data(&self) -> &DataFrame {
        &self.data
    }

    pub fn labels(&self) -> &Column {
        &self.labels
    }

    pub fn transformer(&self) -> &Transformer {
        &self.transformer
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub(crate) fn split_id(&self) -> Option<&SplitId> {
        self.split_id.as_ref()
    }
}

/// Fit-side guard shared by `prepare` and `fit`: the frame must come from a
/// split and must not be test data.
pub(crate) fn training_guard(session: &Session, df: &DataFrame, verb: &'static str) -> Result<Option<SplitId>> {
    let rec = session.lookup(df);
    if !session.guards_on() {
        return Ok(rec.ok().flatten().filter(|r| r.role != Role::Test).map(|r| r.split_id));
    }
    match rec? {
        None => Err(Error::unregistered(verb)),
        Some(r) if r.role == Role::Test => Err(GuardError::TestReserved { verb }.into()),
        Some(r) => Ok(Some(r.split_id)),
    }
}

/// Guarded preparation of a train/valid/dev frame.
pub fn prepare(session: &Session, df: &DataFrame, target: &str, recipe: &Recipe) -> Result<PreparedData> {
    let split_id = training_guard(session, df, "prepare")?;
    let labels = df
        .column(target)
        .ok_or_else(|| Error::Schema(alloc::format!("target column {target:?} not found")))?
        .clone();
    let transformer = Transformer::fit(df, target, recipe)?;
    let data = transformer.apply(df)?;
    Ok(PreparedData { task: infer_task(&labels), data, labels, transformer, target: target.to_string(), split_id })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn df() -> DataFrame {
        DataFrame::new(vec![
            ("a".into(), Column::Float(vec![Some(1.0), None, Some(3.0)])),
            ("c".into(), Column::Categorical(vec![Some("x".into()), Some("y".into()), Some("x".into())])),
            ("y".into(), Column::Int(vec![Some(0), Some(1), Some(1)])),
        ])
        .unwrap()
    }

    #[test]
    fn standardize_population() {
        let f = DataFrame::new(vec![
            ("a".into(), Column::Float(vec![Some(1.0), Some(2.0), Some(3.0)])),
            ("y".into(), Column::Int(vec![Some(0), Some(1), Some(0)])),
        ])
        .unwrap();
        let t = Transformer::fit(&f, "y", &Recipe::default()).unwrap();
        let out = t.apply(&f).unwrap();
        let Some(Column::Float(v)) = out.column("a") else { panic!() };
        let expect = [-1.224744871391589, 0.0, 1.224744871391589];
        for (got, want) in v.iter().zip(expect) {
            assert!((got.unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn impute_then_one_hot() {
        let t = Transformer::fit(&df(), "y", &Recipe::empty().then(Step::new(StepKind::ImputeMean)).then(Step::new(StepKind::OneHot)))
            .unwrap();
        assert_eq!(t.means()["a"], 2.0);
        assert_eq!(t.outputs(), ["a", "c=x", "c=y"]);
        let out = t.apply(&df()).unwrap();
        assert_eq!(out.value(1, "a"), Some(Value::Float(2.0)));
        assert_eq!(out.value(1, "c=y"), Some(Value::Float(1.0)));
    }

    #[test]
    fn unseen_category_is_all_zeros() {
        let t = Transformer::fit(&df(), "y", &Recipe::default()).unwrap();
        let other = df().with_column("c", Column::Categorical(vec![Some("z".into()), None, Some("x".into())])).unwrap();
        let out = t.apply(&other).unwrap();
        assert_eq!(out.value(0, "c=x"), Some(Value::Float(0.0)));
        assert_eq!(out.value(0, "c=y"), Some(Value::Float(0.0)));
        assert_eq!(out.value(2, "c=x"), Some(Value::Float(1.0)));
    }

    #[test]
    fn zero_variance_maps_to_zero_and_missing_column_errors() {
        let f = DataFrame::new(vec![
            ("a".into(), Column::Float(vec![Some(5.0); 4])),
            ("y".into(), Column::Int(vec![Some(0), Some(1), Some(0), Some(1)])),
        ])
        .unwrap();
        let t = Transformer::fit(&f, "y", &Recipe::default()).unwrap();
        assert_eq!(t.apply(&f).unwrap().value(0, "a"), Some(Value::Float(0.0)));
        let g = f.select_columns(&["y"]).unwrap();
        assert!(matches!(t.apply(&g), Err(Error::Schema(_))));
    }

    #[test]
    fn leftover_categorical_is_schema_error() {
        let r = Recipe::empty().then(Step::new(StepKind::ImputeMean));
        assert!(matches!(Transformer::fit(&df(), "y", &r), Err(Error::Schema(_))));
    }

    #[test]
    fn target_map_binary() {
        let m = TargetMap::fit(&Column::Categorical(vec![Some("no".into()), Some("yes".into())])).unwrap();
        assert_eq!(m.encode(&Value::Text("yes".into())).unwrap(), 1.0);
        assert!(TargetMap::fit(&Column::Int(vec![Some(0), Some(1), Some(2)])).is_err());
        let single = TargetMap::fit(&Column::Int(vec![Some(1), Some(1)])).unwrap();
        assert_eq!(single.encode(&Value::Int(1)).unwrap(), 1.0);
    }

    #[test]
    fn prepare_guards() {
        let s = Session::new();
        assert!(matches!(prepare(&s, &df(), "y", &Recipe::default()), Err(Error::Partition(_))));
    }

    #[test]
    fn task_inference() {
        assert_eq!(infer_task(&Column::Int((0..21).map(Some).collect())), Task::Regression);
        assert_eq!(infer_task(&Column::Int((0..20).map(Some).collect())), Task::Classification);
    }
}
