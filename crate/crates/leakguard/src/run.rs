//! Workflow interpreter.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use leakguard_core::prelude::*;
use leakguard_core::{
    Assessable, Assessed, Column, Evidence, ExplainOptions, GuardMode, Hyperparameters,
    Result, SearchSpace, SplitKind, StackedModel,
};

use crate::io;
use crate::report::{exit_code, partition_info, GuardEvent, Mode, Output, RunError, RunReport, EXIT_SPEC};
use crate::spec::{recipe_from, CvKindName, SplitKindName, StepArgs, WorkflowSpec};

/// Runs a workflow file in a fresh session. `guards` overrides the file.
pub fn run_workflow(path: &Path, guards: Option<GuardMode>) -> RunReport {
    run_workflow_in(&Session::new(), path, guards)
}

pub fn run_workflow_in(session: &Session, path: &Path, guards: Option<GuardMode>) -> RunReport {
    match fs::read_to_string(path) {
        Ok(text) => run_text(session, &text, path.parent().unwrap_or(Path::new(".")), guards),
        Err(e) => {
            let mut report = RunReport::new(Mode::Declarative, guards.unwrap_or_default());
            report.error = Some(RunError {
                name: "ConfigError".into(),
                message: format!("{}: {e}", path.display()),
                exit_code: EXIT_SPEC,
            });
            report
        }
    }
}

/// Runs workflow text; relative data paths resolve against `base`.
pub fn run_text(session: &Session, text: &str, base: &Path, guards: Option<GuardMode>) -> RunReport {
    run_parsed(session, text, guards, |spec| io::read_csv(&base.join(&spec.data.path), &spec.data.schema))
}

/// Runs workflow text on an in-memory frame; `data.path` is not read.
pub fn run_text_on(session: &Session, text: &str, df: DataFrame, guards: Option<GuardMode>) -> RunReport {
    run_parsed(session, text, guards, |_| Ok(df))
}

fn run_parsed(
    session: &Session,
    text: &str,
    guards: Option<GuardMode>,
    load: impl FnOnce(&WorkflowSpec) -> Result<DataFrame>,
) -> RunReport {
    let spec = match WorkflowSpec::parse(text) {
        Ok(s) => s,
        Err(e) => {
            let mut report = RunReport::new(Mode::Declarative, guards.unwrap_or_default());
            report.error = Some(RunError { name: e.name().into(), message: e.to_string(), exit_code: EXIT_SPEC });
            return report;
        }
    };
    let mode = guards.unwrap_or(spec.guards);
    session.set_guards(mode);
    let mut runner = Runner {
        session,
        target: spec.data.target.clone(),
        report: RunReport::new(if spec.is_explicit() { Mode::Explicit } else { Mode::Declarative }, mode),
        evidence: Vec::new(),
    };
    let outcome = load(&spec).and_then(|df| {
        if spec.is_explicit() {
            runner.explicit(&spec, df)
        } else {
            runner.declarative(&spec, df)
        }
    });
    runner.finish(&spec, outcome)
}

/// The model a declarative run carries to assess.
enum Final {
    Model(Model),
    Stacked(StackedModel),
    AssessedModel(Model<Assessed>),
    AssessedStacked(StackedModel<Assessed>),
}

fn assess_with<E: Assessable>(
    session: &Session,
    model: E,
    test: &DataFrame,
    done: fn(E::Assessed) -> Final,
    back: fn(E) -> Final,
) -> (Final, Result<Evidence>) {
    match assess(session, model, test) {
        Ok(a) => (done(a.model), Ok(a.evidence)),
        Err(r) => (back(r.model), Err(r.error)),
    }
}

impl Final {
    fn assess(self, session: &Session, test: &DataFrame) -> (Final, Result<Evidence>) {
        match self {
            Final::Model(m) => assess_with(session, m, test, Final::AssessedModel, Final::Model),
            Final::Stacked(m) => assess_with(session, m, test, Final::AssessedStacked, Final::Stacked),
            Final::AssessedModel(m) => assess_with(session, m, test, Final::AssessedModel, Final::AssessedModel),
            Final::AssessedStacked(m) => assess_with(session, m, test, Final::AssessedStacked, Final::AssessedStacked),
        }
    }

    fn evaluate(&self, session: &Session, df: &DataFrame) -> Result<Metrics> {
        match self {
            Final::Model(m) => evaluate(session, m, df),
            Final::Stacked(m) => evaluate(session, m, df),
            _ => Err(Error::TypeContinuity {
                verb: "evaluate".into(),
                expected: "Model".into(),
                found: "Model<Assessed>".into(),
            }),
        }
    }
}

struct Runner<'a> {
    session: &'a Session,
    target: String,
    report: RunReport,
    evidence: Vec<Evidence>,
}

impl Runner<'_> {
    fn call<T>(&mut self, verb: &str, result: Result<T>) -> Result<T> {
        let verdict = match &result {
            Ok(_) if !self.session.guards_on() => "bypassed",
            Ok(_) => "pass",
            Err(e) => e.name(),
        };
        self.report.guard_events.push(GuardEvent { verb: verb.into(), verdict: verdict.into() });
        result
    }

    fn record_split(&mut self, p: &Partition) {
        self.report.split_id = Some(p.split_id().to_string());
        self.report.partitions = partition_info(p);
    }

    fn finish(mut self, spec: &WorkflowSpec, outcome: Result<()>) -> RunReport {
        let keep = |values: &mut BTreeMap<String, f64>| {
            if !spec.report.is_empty() {
                values.retain(|k, _| spec.report.contains(k));
            }
        };
        let mut report = self.report;
        report.assess_count = self.evidence.len() as u32;
        let attempts = report.guard_events.iter().filter(|e| e.verb == "assess").count();
        if attempts == 1 && self.evidence.len() == 1 {
            report.evidence = self.evidence.pop();
        }
        if let Some(e) = report.evidence.as_mut() {
            keep(&mut e.values);
        }
        if let Some(m) = report.evaluation.as_mut() {
            keep(&mut m.values);
        }
        for scores in report.cv_scores.iter_mut().flat_map(|m| m.values_mut()) {
            keep(scores);
        }
        report.guards_bypassed = !self.session.guards_on();
        if let Err(e) = outcome {
            report.error = Some(RunError { name: e.name().into(), message: e.to_string(), exit_code: exit_code(&e) });
        }
        report
    }

    fn declarative(&mut self, spec: &WorkflowSpec, df: DataFrame) -> Result<()> {
        let session = self.session;
        let target = self.target.clone();
        let sp = spec.split.as_ref().expect("validated");
        let ratios = sp.ratios.map_or_else(Ratios::default, |[a, b, c]| Ratios::new(a, b, c));
        let s = match sp.kind {
            SplitKindName::Random => {
                split(session, &df, &target, &SplitOptions::default().seed(sp.seed).ratios(ratios).stratify(sp.stratify))
            }
            SplitKindName::Temporal => {
                split_temporal(session, &df, &target, sp.time_col.as_deref().expect("validated"), ratios, sp.embargo)
            }
            SplitKindName::Group => {
                split_group(session, &df, &target, sp.group_col.as_deref().expect("validated"), ratios, sp.seed)
            }
        };
        let s = self.call("split", s)?;
        self.record_split(&s);

        let c = match &spec.cv {
            None => None,
            Some(cv) => {
                let r = match cv.kind {
                    CvKindName::Kfold => leakguard_core::cv(session, &s, cv.k, cv.seed),
                    CvKindName::Group => cv_group(session, &s, cv.k, cv.seed),
                    CvKindName::Temporal => {
                        let min_train = cv.min_train.unwrap_or(s.dev().row_count() / (cv.k + 1)).max(1);
                        cv_temporal(session, &s, cv.k, cv.window, min_train, cv.embargo)
                    }
                };
                Some(self.call("cv", r)?)
            }
        };

        // Fits `algo` the way the strategy would: CV on the folds when present,
        // else on train.
        let fit_one = |runner: &mut Self, opts: FitOptions| -> Result<Model> {
            let r = match &c {
                Some(c) => fit(session, c, &target, &opts),
                None => fit(session, s.train(), &target, &opts),
            };
            let m = runner.call("fit", r)?;
            if let Some(scores) = m.scores() {
                runner
                    .report
                    .cv_scores
                    .get_or_insert_with(BTreeMap::new)
                    .entry(opts.algorithm.name().into())
                    .or_insert_with(|| scores.clone());
            }
            Ok(m)
        };

        let mut fin = if let Some(m) = &spec.model {
            let mut opts =
                FitOptions::new(m.algorithm).hyperparameters(Hyperparameters(m.hyperparameters.clone())).seed(m.seed);
            if let Some(r) = &m.recipe {
                opts = opts.recipe(recipe_from(r)?);
            }
            self.report.final_model = Some(m.algorithm.name().into());
            Final::Model(fit_one(self, opts)?)
        } else {
            let c = c.as_ref().expect("validated: strategies need cv");
            if let Some(sc) = &spec.screen {
                let lb = self.call("screen", screen(session, c, &target, &sc.algorithms, sc.seed))?;
                let scores = lb.rows.iter().map(|r| (r.algorithm.name().to_string(), r.scores.clone())).collect();
                self.report.cv_scores = Some(scores);
                let best = lb.best;
                self.report.leaderboard = Some(lb);
                self.report.final_model = Some(best.name().into());
                Final::Model(fit_one(self, FitOptions::new(best).seed(sc.seed))?)
            } else if let Some(t) = &spec.tune {
                let space = match (&t.grid, &t.random) {
                    (Some(g), _) => SearchSpace::Grid(g.clone()),
                    (_, Some(r)) => SearchSpace::Random(r.clone()),
                    _ => unreachable!("validated"),
                };
                let tr = self.call("tune", tune(session, c, &target, t.algorithm, &space, t.budget, t.seed))?;
                let opts = FitOptions::new(t.algorithm).hyperparameters(tr.best.clone()).seed(t.seed);
                self.report.tuning = Some(tr);
                self.report.final_model = Some(t.algorithm.name().into());
                Final::Model(fit_one(self, opts)?)
            } else {
                let st = spec.stack.as_ref().expect("validated: one strategy");
                let m = self.call("stack", stack(session, c, &target, &st.base, st.meta, st.seed))?;
                let names: Vec<&str> = st.base.iter().map(|a| a.name()).collect();
                self.report.final_model = Some(format!("stack({}; meta={})", names.join(", "), st.meta.name()));
                Final::Stacked(m)
            }
        };

        let metrics = fin.evaluate(session, s.valid());
        self.report.evaluation = Some(self.call("evaluate", metrics)?);

        let seed = spec.model.as_ref().map(|m| m.seed).or(spec.screen.as_ref().map(|s| s.seed)).unwrap_or(42);
        let default = [crate::spec::AssessSpec { model: "final".into() }];
        for entry in spec.assess.as_deref().unwrap_or(&default) {
            let evidence = if entry.model == "final" {
                let (back, ev) = fin.assess(session, s.test());
                fin = back;
                ev
            } else {
                let algo: Algorithm = entry.model.parse()?;
                let m = fit_one(self, FitOptions::new(algo).seed(seed))?;
                Final::Model(m).assess(session, s.test()).1
            };
            let ev = self.call("assess", evidence)?;
            self.evidence.push(ev);
        }
        Ok(())
    }

    fn explicit(&mut self, spec: &WorkflowSpec, df: DataFrame) -> Result<()> {
        let mut env = Env::default();
        env.bind("data", Binding::Frame(df), None);
        for (i, step) in spec.steps.as_deref().unwrap_or_default().iter().enumerate() {
            let (verb, args) = step.iter().next().expect("validated: one verb per step");
            let args = args.clone().unwrap_or_default();
            let r = self.step(&mut env, verb, &args, i);
            self.call(verb, r)?;
        }
        Ok(())
    }

    fn step(&mut self, env: &mut Env, verb: &str, a: &StepArgs, i: usize) -> Result<()> {
        let session = self.session;
        let target = self.target.clone();
        let name = a.bind.clone().unwrap_or_else(|| format!("{verb}_{i}"));
        let input = || a.input.as_deref().ok_or_else(|| Error::Config(format!("{verb} needs an input")));
        match verb {
            "split" => {
                let (df, derived) = env.frame(verb, input()?)?;
                let mut opts = SplitOptions::default().seed(a.seed.unwrap_or(42)).stratify(a.stratify.unwrap_or(true));
                if let Some([x, y, z]) = a.ratios {
                    opts = opts.ratios(Ratios::new(x, y, z));
                }
                let p = split(session, df, &target, &opts)?;
                self.record_split(&p);
                env.bind(&name, Binding::Partition(p), derived);
            }
            "cv" => {
                let (b, derived) = env.get(input()?)?;
                let p = match b {
                    View::Whole(Binding::Partition(p)) => p,
                    View::Whole(Binding::Frame(_)) | View::Member(_) => {
                        return Err(Error::Cv("cv rotates a Partition from split; got a DataFrame".into()))
                    }
                    other => return Err(mismatch(verb, "Partition", other.type_name())),
                };
                let (k, seed) = (a.k.unwrap_or(5), a.seed.unwrap_or(42));
                let c = match p.kind() {
                    SplitKind::Random => leakguard_core::cv(session, p, k, seed)?,
                    SplitKind::Temporal { embargo, .. } => {
                        cv_temporal(session, p, k, Window::Expanding, (p.dev().row_count() / (k + 1)).max(1), *embargo)?
                    }
                    SplitKind::Group { .. } => cv_group(session, p, k, seed)?,
                };
                env.bind(&name, Binding::Cv(c), derived);
            }
            "prepare" => {
                let (df, derived) = env.frame(verb, input()?)?;
                refuse_derived(verb, derived.as_deref())?;
                let recipe = a.recipe.as_deref().map(recipe_from).transpose()?.unwrap_or_default();
                let p = prepare(session, df, &target, &recipe)?;
                env.bind(&name, Binding::Prepared(p), None);
            }
            "fit" => {
                let algo = a.algorithm.ok_or_else(|| Error::Config("fit needs an algorithm".into()))?;
                let mut opts = FitOptions::new(algo)
                    .hyperparameters(Hyperparameters(a.hyperparameters.clone()))
                    .seed(a.seed.unwrap_or(42));
                if let Some(r) = &a.recipe {
                    opts = opts.recipe(recipe_from(r)?);
                }
                let (b, derived) = env.get(input()?)?;
                refuse_derived(verb, derived.as_deref())?;
                let m = match b {
                    View::Member(df) | View::Whole(Binding::Frame(df)) => fit(session, df, &target, &opts)?,
                    View::Whole(Binding::Cv(c)) => fit(session, c, &target, &opts)?,
                    View::Whole(Binding::Prepared(p)) => fit(session, p, &target, &opts)?,
                    other => return Err(mismatch(verb, "DataFrame, CVResult or PreparedData", other.type_name())),
                };
                env.bind(&name, Binding::Model(m), None);
            }
            "evaluate" => {
                let model = model_arg(verb, a)?;
                let m = match env.get(model)?.0 {
                    View::Whole(Binding::Model(m)) => m.clone(),
                    other => return Err(mismatch(verb, "Model", other.type_name())),
                };
                let (df, _) = env.frame(verb, input()?)?;
                let out = evaluate(session, &m, df)?;
                self.report.outputs.insert(name.clone(), Output::Metrics(out));
                env.bind(&name, Binding::Result("Metrics"), None);
            }
            "assess" => {
                let model = model_arg(verb, a)?;
                let test = env.frame(verb, input()?)?.0.clone();
                let slot = env.take_model(verb, model)?;
                let (back, ev) = match slot {
                    Binding::Model(m) => match assess(session, m, &test) {
                        Ok(a) => (Binding::Assessed(a.model), Ok(a.evidence)),
                        Err(r) => (Binding::Model(r.model), Err(r.error)),
                    },
                    Binding::Assessed(m) => match assess(session, m, &test) {
                        Ok(a) => (Binding::Assessed(a.model), Ok(a.evidence)),
                        Err(r) => (Binding::Assessed(r.model), Err(r.error)),
                    },
                    _ => unreachable!("take_model returns models"),
                };
                env.bind(model, back, None);
                let ev = ev?;
                self.report.outputs.insert(name, Output::Evidence(ev.clone()));
                self.evidence.push(ev);
            }
            "explain" | "predict" => {
                let model = model_arg(verb, a)?;
                let df = match &a.input {
                    Some(r) => Some(env.frame(verb, r)?.0.clone()),
                    None => None,
                };
                let opts = ExplainOptions { repeats: a.repeats.unwrap_or(10), seed: a.seed.unwrap_or(42), metric: None };
                let out = match (env.get(model)?.0, verb) {
                    (View::Whole(Binding::Model(m)), "explain") => Output::Explanation(explain(session, m, df.as_ref(), &opts)?),
                    (View::Whole(Binding::Assessed(m)), "explain") => Output::Explanation(explain(session, m, df.as_ref(), &opts)?),
                    (View::Whole(Binding::Model(m)), _) => Output::Predictions(predict(m, &needs_frame(df)?)?),
                    (View::Whole(Binding::Assessed(m)), _) => Output::Predictions(predict(m, &needs_frame(df)?)?),
                    (other, _) => return Err(mismatch(verb, "Model", other.type_name())),
                };
                let binding = Binding::Result(if verb == "explain" { "Explanation" } else { "Predictions" });
                self.report.outputs.insert(name.clone(), out);
                env.bind(&name, binding, None);
            }
            "select_features" | "standardize" => {
                let (df, derived) = env.frame(verb, input()?)?;
                let unregistered = session.lookup(df).ok().flatten().is_none();
                let out = if verb == "select_features" {
                    select_features(df, &target, a.k.unwrap_or(2))?
                } else {
                    standardize_all(df, &target)?
                };
                // Remember label or statistics use that happened before split.
                let taint = derived.or_else(|| unregistered.then(|| verb.to_string()));
                env.bind(&name, Binding::Frame(out), taint);
            }
            _ => unreachable!("validated verb list"),
        }
        Ok(())
    }
}

fn needs_frame(df: Option<DataFrame>) -> Result<DataFrame> {
    df.ok_or_else(|| Error::Config("predict needs an input".into()))
}

fn model_arg<'a>(verb: &str, a: &'a StepArgs) -> Result<&'a str> {
    a.model.as_deref().ok_or_else(|| mismatch(verb, "Model", "no model in scope"))
}

fn mismatch(verb: &str, expected: &str, found: &str) -> Error {
    Error::TypeContinuity { verb: verb.into(), expected: expected.into(), found: found.into() }
}

fn refuse_derived(verb: &str, derived: Option<&str>) -> Result<()> {
    match derived {
        None => Ok(()),
        Some(op) => Err(Error::Partition(format!(
            "{verb} requires split provenance of the raw data; this input was derived by {op} before split \
             (move it inside prepare so it runs per fold)"
        ))),
    }
}

enum Binding {
    Frame(DataFrame),
    Partition(Partition),
    Cv(CVResult),
    Prepared(PreparedData),
    Model(Model),
    Assessed(Model<Assessed>),
    /// A verb result kept only in the report; holds its type name.
    Result(&'static str),
}

impl Binding {
    fn type_name(&self) -> &'static str {
        match self {
            Binding::Frame(_) => "DataFrame",
            Binding::Partition(_) => "Partition",
            Binding::Cv(_) => "CVResult",
            Binding::Prepared(_) => "PreparedData",
            Binding::Model(_) => "Model",
            Binding::Assessed(_) => "Model<Assessed>",
            Binding::Result(name) => name,
        }
    }
}

enum View<'a> {
    Whole(&'a Binding),
    Member(&'a DataFrame),
}

impl View<'_> {
    fn type_name(&self) -> &'static str {
        match self {
            View::Whole(b) => b.type_name(),
            View::Member(_) => "DataFrame",
        }
    }
}

/// Named bindings of an explicit run. `derived` names an out-of-grammar
/// transform applied to unregistered data upstream of the binding.
#[derive(Default)]
struct Env {
    slots: BTreeMap<String, (Binding, Option<String>)>,
}

impl Env {
    fn bind(&mut self, name: &str, value: Binding, derived: Option<String>) {
        self.slots.insert(name.to_string(), (value, derived));
    }

    fn get(&self, reference: &str) -> Result<(View<'_>, Option<String>)> {
        let (base, member) = match reference.split_once('.') {
            Some((b, m)) => (b, Some(m)),
            None => (reference, None),
        };
        let (value, derived) =
            self.slots.get(base).ok_or_else(|| Error::Config(format!("no binding named {base:?}")))?;
        let Some(member) = member else { return Ok((View::Whole(value), derived.clone())) };
        let Binding::Partition(p) = value else {
            return Err(Error::TypeContinuity {
                verb: format!(".{member}"),
                expected: "Partition".into(),
                found: value.type_name().into(),
            });
        };
        let df = match member {
            "train" => p.train(),
            "valid" => p.valid(),
            "test" => p.test(),
            "dev" => p.dev(),
            _ => return Err(Error::Config(format!("Partition has no member {member:?}"))),
        };
        Ok((View::Member(df), derived.clone()))
    }

    fn frame(&self, verb: &str, reference: &str) -> Result<(&DataFrame, Option<String>)> {
        match self.get(reference)? {
            (View::Member(df) | View::Whole(Binding::Frame(df)), d) => Ok((df, d)),
            (other, _) => Err(mismatch(verb, "DataFrame", other.type_name())),
        }
    }

    fn take_model(&mut self, verb: &str, name: &str) -> Result<Binding> {
        match self.get(name)?.0 {
            View::Whole(Binding::Model(_) | Binding::Assessed(_)) => {
                Ok(self.slots.remove(name).expect("just looked up").0)
            }
            other => Err(mismatch(verb, "Model", other.type_name())),
        }
    }
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Keeps the `k` numeric columns most correlated with the target. Uses the
/// labels of every row it is given.
pub fn select_features(df: &DataFrame, target: &str, k: usize) -> Result<DataFrame> {
    let y = df.column(target).ok_or_else(|| Error::Schema(format!("target column {target:?} not found")))?;
    let mut ranked: Vec<(f64, String)> = Vec::new();
    for (name, col) in df.columns() {
        if name == target || !col.is_numeric() {
            continue;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            (0..df.row_count()).filter_map(|r| Some((col.f64_at(r)?, y.f64_at(r)?))).unzip();
        ranked.push((pearson(&xs, &ys).abs(), name.to_string()));
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut keep: Vec<String> = ranked.into_iter().take(k).map(|(_, n)| n).collect();
    keep.push(target.to_string());
    df.select_columns(&keep)
}

/// Z-scores every numeric non-target column with statistics of the whole
/// frame.
pub fn standardize_all(df: &DataFrame, target: &str) -> Result<DataFrame> {
    let mut out = df.clone();
    for (name, col) in df.columns() {
        if name == target || !col.is_numeric() {
            continue;
        }
        let xs: Vec<f64> = (0..df.row_count()).filter_map(|r| col.f64_at(r)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len().max(1) as f64;
        let sd = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len().max(1) as f64).sqrt();
        let z = (0..df.row_count())
            .map(|r| col.f64_at(r).map(|x| if sd > 0.0 { (x - mean) / sd } else { 0.0 }))
            .collect();
        out = out.with_column(name, Column::Float(z))?;
    }
    Ok(out)
}
