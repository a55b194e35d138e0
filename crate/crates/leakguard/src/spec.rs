//! Workflow files: a YAML subset of maps, lists and scalars.
//!
//! A file is either declarative (a `split` block, an optional `cv` block and
//! exactly one of `model`, `screen`, `tune`, `stack`) or explicit (a `steps`
//! list binding verb outputs to names). Errors carry the 1-based line of the
//! offending key.

use std::collections::BTreeMap;
use std::path::PathBuf;

use leakguard_core::{Algorithm, ColumnKind, Distribution, Error, GuardMode, Recipe, Result, Step, StepKind, Window};
use serde::{Deserialize, Serialize};

/// Metric names a `report` list may mention.
pub const METRICS: [&str; 6] = ["accuracy", "log_loss", "mae", "r2", "rmse", "roc_auc"];

fn default_seed() -> u64 {
    42
}

fn default_k() -> usize {
    5
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowSpec {
    pub data: DataSpec,
    #[serde(default)]
    pub split: Option<SplitSpec>,
    #[serde(default)]
    pub cv: Option<CvSpec>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub screen: Option<ScreenSpec>,
    #[serde(default)]
    pub tune: Option<TuneSpec>,
    #[serde(default)]
    pub stack: Option<StackSpec>,
    /// Absent: assess the final model once. Empty: never assess.
    #[serde(default)]
    pub assess: Option<Vec<AssessSpec>>,
    #[serde(default)]
    pub report: Vec<String>,
    #[serde(default)]
    pub guards: GuardMode,
    #[serde(default)]
    pub steps: Option<Vec<BTreeMap<String, Option<StepArgs>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// Relative paths resolve against the workflow file's directory.
    pub path: PathBuf,
    pub target: String,
    #[serde(default)]
    pub schema: BTreeMap<String, ColumnKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKindName {
    #[default]
    Random,
    Temporal,
    Group,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    #[serde(default)]
    pub kind: SplitKindName,
    #[serde(default)]
    pub ratios: Option<[f64; 3]>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub stratify: bool,
    #[serde(default)]
    pub time_col: Option<String>,
    #[serde(default)]
    pub group_col: Option<String>,
    #[serde(default)]
    pub embargo: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvKindName {
    #[default]
    Kfold,
    Temporal,
    Group,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvSpec {
    #[serde(default)]
    pub kind: CvKindName,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_window")]
    pub window: Window,
    /// Temporal only; defaults to dev rows / (k + 1).
    #[serde(default)]
    pub min_train: Option<usize>,
    #[serde(default)]
    pub embargo: usize,
}

fn default_window() -> Window {
    Window::Expanding
}

/// A recipe entry: a bare step name or `{step: [columns]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecipeEntry {
    Name(StepKind),
    Filtered(BTreeMap<StepKind, Vec<String>>),
}

pub fn recipe_from(entries: &[RecipeEntry]) -> Result<Recipe> {
    let mut recipe = Recipe::empty();
    for e in entries {
        recipe = match e {
            RecipeEntry::Name(kind) => recipe.then(Step::new(*kind)),
            RecipeEntry::Filtered(m) if m.len() == 1 => {
                let (kind, cols) = m.iter().next().expect("one entry");
                recipe.then(Step::on(*kind, cols.clone()))
            }
            RecipeEntry::Filtered(_) => return Err(Error::Config("recipe entry must name exactly one step".into())),
        };
    }
    Ok(recipe)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub recipe: Option<Vec<RecipeEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenSpec {
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub grid: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default)]
    pub random: Option<BTreeMap<String, Distribution>>,
    pub budget: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    pub base: Vec<Algorithm>,
    pub meta: Algorithm,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

/// `model: final` assesses the strategy's final model; an algorithm name
/// fits that algorithm the same way and assesses it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessSpec {
    #[serde(default = "final_name")]
    pub model: String,
}

fn final_name() -> String {
    "final".into()
}

/// Arguments of one explicit step. Which fields apply depends on the verb.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepArgs {
    #[serde(default)]
    pub input: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default, rename = "as")]
    pub bind: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub algorithm: Option<Algorithm>,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub ratios: Option<[f64; 3]>,
    #[serde(default)]
    pub stratify: Option<bool>,
    #[serde(default)]
    pub recipe: Option<Vec<RecipeEntry>>,
    #[serde(default)]
    pub repeats: Option<usize>,
}

/// Verbs accepted in `steps`. The last two are out-of-grammar frame
/// transforms, kept so invalid workflows can be written down and rejected.
pub const STEP_VERBS: [&str; 10] =
    ["split", "cv", "prepare", "fit", "evaluate", "assess", "explain", "predict", "select_features", "standardize"];

fn spec_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Line of the first top-level `key:`; 1 when absent.
pub fn line_of(text: &str, key: &str) -> usize {
    let prefix = format!("{key}:");
    text.lines().position(|l| l.starts_with(&prefix)).map_or(1, |i| i + 1)
}

/// Line of the `n`th list item under the top-level `key`, when found.
fn item_line(text: &str, key: &str, n: usize) -> usize {
    let start = line_of(text, key);
    text.lines()
        .enumerate()
        .skip(start)
        .filter(|(_, l)| l.trim_start().starts_with("- "))
        .nth(n)
        .map_or(start, |(i, _)| i + 1)
}

impl WorkflowSpec {
    /// Parses and validates. Every error is a [`Error::Parse`] with a line.
    pub fn parse(text: &str) -> Result<WorkflowSpec> {
        let spec: WorkflowSpec = serde_yaml::from_str(text).map_err(|e| {
            let line = e.location().map_or(1, |l| l.line());
            spec_error(line, e.to_string())
        })?;
        spec.validate(text)?;
        Ok(spec)
    }

    pub fn is_explicit(&self) -> bool {
        self.steps.is_some()
    }

    fn validate(&self, text: &str) -> Result<()> {
        for (i, m) in self.report.iter().enumerate() {
            if !METRICS.contains(&m.as_str()) {
                return Err(spec_error(item_line(text, "report", i), format!("unknown metric {m:?} in report")));
            }
        }
        let strategies: Vec<&str> = [
            ("model", self.model.is_some()),
            ("screen", self.screen.is_some()),
            ("tune", self.tune.is_some()),
            ("stack", self.stack.is_some()),
        ]
        .into_iter()
        .filter_map(|(k, present)| present.then_some(k))
        .collect();
        if let Some(steps) = &self.steps {
            for key in ["split", "cv", "assess"].into_iter().chain(strategies.iter().copied()) {
                if text.lines().any(|l| l.starts_with(&format!("{key}:"))) {
                    return Err(spec_error(line_of(text, key), format!("{key} block cannot be combined with steps")));
                }
            }
            for (i, step) in steps.iter().enumerate() {
                let line = item_line(text, "steps", i);
                if step.len() != 1 {
                    return Err(spec_error(line, "each step names exactly one verb"));
                }
                let verb = step.keys().next().expect("one key");
                if !STEP_VERBS.contains(&verb.as_str()) {
                    return Err(spec_error(line, format!("unknown verb {verb:?}; expected one of {STEP_VERBS:?}")));
                }
            }
            return Ok(());
        }
        let Some(split) = &self.split else {
            return Err(spec_error(1, "missing split block (or a steps list)"));
        };
        match strategies.as_slice() {
            [_] => {}
            [] => return Err(spec_error(1, "expected exactly one of model, screen, tune, stack; found none")),
            [_, second, ..] => {
                return Err(spec_error(
                    line_of(text, second),
                    format!("expected exactly one of model, screen, tune, stack; found {}", strategies.join(", ")),
                ))
            }
        }
        let line = line_of(text, "split");
        match split.kind {
            SplitKindName::Temporal if split.time_col.is_none() => {
                return Err(spec_error(line, "temporal split needs time_col"))
            }
            SplitKindName::Group if split.group_col.is_none() => {
                return Err(spec_error(line, "group split needs group_col"))
            }
            _ => {}
        }
        if self.cv.is_none() && strategies[0] != "model" {
            return Err(spec_error(line_of(text, strategies[0]), format!("{} needs a cv block", strategies[0])));
        }
        if let Some(t) = &self.tune {
            if t.grid.is_some() == t.random.is_some() {
                return Err(spec_error(line_of(text, "tune"), "tune needs exactly one of grid, random"));
            }
        }
        if let Some(assess) = &self.assess {
            for (i, a) in assess.iter().enumerate() {
                if a.model != "final" && a.model.parse::<Algorithm>().is_err() {
                    return Err(spec_error(
                        item_line(text, "assess", i),
                        format!("assess model must be `final` or an algorithm, got {:?}", a.model),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "data:\n  path: d.csv\n  target: y\nsplit:\n  seed: 1\n";

    #[test]
    fn minimal_declarative_parses_with_defaults() {
        let s = WorkflowSpec::parse(&format!("{BASE}model:\n  algorithm: logistic\n")).unwrap();
        assert_eq!(s.split.unwrap().seed, 1);
        assert_eq!(s.model.unwrap().seed, 42);
        assert_eq!(s.guards, GuardMode::On);
        assert!(s.assess.is_none());
    }

    #[test]
    fn two_strategies_point_at_the_second() {
        let text = format!("{BASE}model:\n  algorithm: logistic\nscreen:\n  algorithms: [knn]\n");
        let err = WorkflowSpec::parse(&text).unwrap_err();
        assert_eq!(err, spec_error(8, "expected exactly one of model, screen, tune, stack; found model, screen"));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_line_anchored() {
        let err = WorkflowSpec::parse(&format!("{BASE}  colour: red\nmodel:\n  algorithm: knn\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err:?}");
        let err = WorkflowSpec::parse(&format!("{BASE}model:\n  algorithm: svm\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 7, .. }), "{err:?}");
        let err = WorkflowSpec::parse(&format!("{BASE}model:\n  algorithm: knn\nreport: [accuracy, f1]\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 8, .. }), "{err:?}");
    }

    #[test]
    fn strategies_other_than_model_need_cv() {
        let err = WorkflowSpec::parse(&format!("{BASE}screen:\n  algorithms: [knn, logistic]\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err:?}");
    }

    #[test]
    fn steps_exclude_declarative_blocks() {
        let text = "data:\n  path: d.csv\n  target: y\nsteps:\n  - split: {as: s}\n  - frobnicate: {}\n";
        assert!(matches!(WorkflowSpec::parse(text), Err(Error::Parse { line: 6, .. })));
        let text = format!("{BASE}steps:\n  - split: {{as: s}}\n");
        assert!(matches!(WorkflowSpec::parse(&text), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn recipe_entries() {
        let s = WorkflowSpec::parse(&format!(
            "{BASE}model:\n  algorithm: knn\n  recipe: [impute_mean, {{standardize: [a, b]}}]\n"
        ))
        .unwrap();
        let r = recipe_from(s.model.unwrap().recipe.as_deref().unwrap()).unwrap();
        assert_eq!(r, Recipe::empty().then(Step::new(StepKind::ImputeMean)).then(Step::on(StepKind::Standardize, ["a", "b"])));
    }
}
