//! Conformance suite: one runtime check per numbered condition.

use std::any::TypeId;
use std::time::Instant;

use leakguard_core::prelude::*;
use leakguard_core::{GuardMode, Result, Role};
use serde::{Deserialize, Serialize};

use crate::report::Output;
use crate::run::{run_text_on, select_features};
use crate::synth::two_gaussian;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub condition: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub checks: Vec<Check>,
    pub passed: usize,
    pub total: usize,
    pub elapsed_ms: u128,
}

impl ConformanceReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn check(&self, condition: u8) -> Option<&Check> {
        self.checks.iter().find(|c| c.condition == condition)
    }
}

type Outcome = std::result::Result<String, String>;

const CONDITIONS: [(u8, &str, fn(&dyn Fn() -> Session) -> Outcome); 8] = [
    (1, "Produce a Partition from split", c1_split),
    (2, "Require a tagged DataFrame (partition_tag in {train, valid, dev}) for fit", c2_fit_tag),
    (3, "Require a Model for evaluate and assess", c3_model_required),
    (4, "Reject a second assess on the same test holdout, regardless of model", c4_assess_once),
    (5, "Perform preparation per fold in declarative mode", c5_per_fold),
    (6, "Make label-based feature selection before split fail at the API boundary", c6_selection),
    (7, "Return Evidence as a type distinguishable from Metrics", c7_evidence),
    (8, "CVResult blocks access to train, valid, test and dev", c8_cv_result),
];

pub fn run_conformance() -> ConformanceReport {
    run_conformance_with(&Session::new)
}

/// Runs every check with sessions from `new_session`, one or more per check.
pub fn run_conformance_with(new_session: &dyn Fn() -> Session) -> ConformanceReport {
    let start = Instant::now();
    let checks: Vec<Check> = CONDITIONS
        .iter()
        .map(|(condition, name, run)| {
            let (passed, detail) = match run(new_session) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check { condition: *condition, name: (*name).into(), passed, detail }
        })
        .collect();
    ConformanceReport {
        passed: checks.iter().filter(|c| c.passed).count(),
        total: checks.len(),
        checks,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

fn frame() -> DataFrame {
    two_gaussian(120, 3, 1.0, 11)
}

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn expect_error<T>(r: Result<T>, name: &str, what: &str) -> std::result::Result<Error, String> {
    match r {
        Ok(_) => Err(format!("{what}: accepted, expected {name}")),
        Err(e) if e.name() == name => Ok(e),
        Err(e) => Err(format!("{what}: got {}, expected {name}", e.name())),
    }
}

fn ok<T>(r: Result<T>, what: &str) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{what}: unexpected {e}"))
}

fn c1_split(new: &dyn Fn() -> Session) -> Outcome {
    let s = new();
    let df = frame();
    let p = ok(split(&s, &df, "y", &SplitOptions::default()), "split")?;
    let (tr, va, te) = p.sizes();
    ensure(tr + va + te == df.row_count(), "members do not cover the input")?;
    ensure(p.dev().row_count() == tr + va, "dev is not train plus valid")?;
    for (role, f) in [(Role::Train, p.train()), (Role::Valid, p.valid()), (Role::Test, p.test()), (Role::Dev, p.dev())] {
        ensure(f.tag() == role.tag(), format!("{role} member carries tag {}", f.tag()))?;
        let rec = ok(s.lookup(f), "lookup")?.ok_or(format!("{role} member is not registered"))?;
        ensure(rec.role == role && &rec.split_id == p.split_id(), format!("{role} registered with the wrong role"))?;
    }
    Ok(format!("Partition with train/valid/test/dev of {tr}/{va}/{te}/{} rows, all registered", tr + va))
}

fn c2_fit_tag(new: &dyn Fn() -> Session) -> Outcome {
    let s = new();
    let df = frame();
    let opts = FitOptions::new(Algorithm::Logistic);
    let p = ok(split(&s, &df, "y", &SplitOptions::default()), "split")?;
    expect_error(fit(&s, &df, "y", &opts), "PartitionError", "fit(untagged)")?;
    expect_error(fit(&s, p.test(), "y", &opts), "TestReserved", "fit(test)")?;
    for (role, f) in [("train", p.train()), ("valid", p.valid()), ("dev", p.dev())] {
        ok(fit(&s, f, "y", &opts), &format!("fit({role})"))?;
    }
    Ok("untagged -> PartitionError, test -> TestReserved, train/valid/dev accepted".into())
}

fn c3_model_required(new: &dyn Fn() -> Session) -> Outcome {
    // The library signatures take `E: Estimator`; the workflow interpreter
    // is where a non-Model can reach these verbs at runtime.
    let steps = [
        ("evaluate", "  - evaluate: {model: s, input: s.valid}\n"),
        ("assess", "  - assess: {model: data, input: s.test}\n"),
        ("evaluate", "  - evaluate: {input: s.valid}\n"),
    ];
    for (verb, step) in steps {
        let text = format!("data: {{path: x.csv, target: y}}\nsteps:\n  - split: {{input: data, as: s}}\n{step}");
        let r = run_text_on(&new(), &text, frame(), None);
        let name = r.error.as_ref().map(|e| e.name.as_str());
        ensure(name == Some("TypeContinuity"), format!("{verb} without a Model: got {name:?}"))?;
    }
    Ok("evaluate/assess on Partition, DataFrame or nothing -> TypeContinuity; library bounds are E: Estimator".into())
}

fn c4_assess_once(new: &dyn Fn() -> Session) -> Outcome {
    let s = new();
    let p = ok(split(&s, &frame(), "y", &SplitOptions::default()), "split")?;
    let m1 = ok(fit(&s, p.dev(), "y", &FitOptions::new(Algorithm::Logistic)), "fit m1")?;
    let m2 = ok(fit(&s, p.dev(), "y", &FitOptions::new(Algorithm::DecisionTree)), "fit m2")?;
    let first = assess(&s, m1, p.test()).map_err(|r| format!("first assess rejected: {}", r.error))?;
    expect_error(assess(&s, m2, p.test()).map_err(Error::from), "HoldoutSpent", "assess(m2, same holdout)")?;
    expect_error(
        assess(&s, first.model, p.test()).map_err(Error::from),
        "AlreadyAssessedModel",
        "assess(m1) again",
    )?;
    Ok("second model on the same holdout -> HoldoutSpent; same model again -> AlreadyAssessedModel".into())
}

fn c5_per_fold(new: &dyn Fn() -> Session) -> Outcome {
    let s = new();
    let p = ok(split(&s, &frame(), "y", &SplitOptions::default()), "split")?;
    let c = ok(cv(&s, &p, 5, 42), "cv")?;
    let m = ok(fit(&s, &c, "y", &FitOptions::new(Algorithm::Logistic)), "fit(cv)")?;
    ensure(m.fold_reports().len() == c.k(), "one transformer per fold")?;
    let mut distinct = std::collections::BTreeSet::new();
    for (i, (fold, report)) in c.folds().iter().zip(m.fold_reports()).enumerate() {
        let rows = p.dev().take_rows(&fold.train);
        for (col, (mean, sd)) in report.transformer.standardization() {
            let xs: Vec<f64> = (0..rows.row_count()).filter_map(|r| rows.column(&col)?.f64_at(r)).collect();
            let mu = xs.iter().sum::<f64>() / xs.len() as f64;
            let sigma = (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64).sqrt();
            ensure(
                (mean - mu).abs() <= 1e-12 && (sd - sigma).abs() <= 1e-12,
                format!("fold {i} column {col}: stored ({mean}, {sd}), fold-train ({mu}, {sigma})"),
            )?;
            distinct.insert(mean.to_bits());
        }
    }
    ensure(distinct.len() > 1, "fold transformers are identical")?;
    Ok(format!("{} fold transformers match fold-train statistics", c.k()))
}

fn c6_selection(new: &dyn Fn() -> Session) -> Outcome {
    let s = new();
    let df = frame();
    let selected = ok(select_features(&df, "y", 2), "select_features")?;
    let e = expect_error(
        fit(&s, &selected, "y", &FitOptions::new(Algorithm::Logistic)),
        "PartitionError",
        "fit(select_features(X, y))",
    )?;
    ensure(e.to_string().contains("split"), format!("message does not point at split: {e}"))?;
    let text = "data: {path: x.csv, target: y}\nsteps:\n  - select_features: {input: data, k: 2, as: sel}\n  \
                - split: {input: sel, as: s}\n  - fit: {input: s.train, algorithm: logistic}\n";
    let r = run_text_on(&new(), text, df, None);
    let name = r.error.as_ref().map(|e| e.name.as_str());
    ensure(name == Some("PartitionError"), format!("select_features -> split -> fit: got {name:?}"))?;
    Ok("fit rejects selected data with PartitionError naming split, directly and after a later split".into())
}

fn c7_evidence(new: &dyn Fn() -> Session) -> Outcome {
    let s = new();
    let p = ok(split(&s, &frame(), "y", &SplitOptions::default()), "split")?;
    let m = ok(fit(&s, p.dev(), "y", &FitOptions::new(Algorithm::Logistic)), "fit")?;
    let metrics = ok(evaluate(&s, &m, p.valid()), "evaluate")?;
    let evidence = assess(&s, m, p.test()).map_err(|r| r.error.to_string())?.evidence;
    ensure(TypeId::of::<Evidence>() != TypeId::of::<Metrics>(), "Evidence and Metrics share a type")?;
    let ev_json = serde_json::to_string(&evidence).map_err(|e| e.to_string())?;
    let me_json = serde_json::to_string(&metrics).map_err(|e| e.to_string())?;
    ensure(serde_json::from_str::<Metrics>(&ev_json).is_err(), "Evidence JSON reads as Metrics")?;
    ensure(serde_json::from_str::<Evidence>(&me_json).is_err(), "Metrics JSON reads as Evidence")?;
    ensure(
        matches!(serde_json::from_str::<Output>(&ev_json), Ok(Output::Evidence(_))),
        "Evidence JSON is not recognised as Evidence",
    )?;
    Ok("distinct types; serialized forms carry kind=evidence vs kind=metrics and do not cross-parse".into())
}

fn c8_cv_result(new: &dyn Fn() -> Session) -> Outcome {
    let s = new();
    let df = frame();
    let p = ok(split(&s, &df, "y", &SplitOptions::default()), "split")?;
    let c = ok(cv(&s, &p, 5, 42), "cv")?;
    let dev_rows = p.dev().row_count();
    ensure(c.folds().iter().flat_map(|f| f.train.iter().chain(&f.valid)).all(|&i| i < dev_rows), "fold index outside dev")?;
    let shown = format!("{c:?}");
    for field in ["train:", "valid:", "test:", "dev:", "DataFrame"] {
        ensure(!shown.contains(field), format!("CVResult debug output exposes {field}"))?;
    }
    for member in ["train", "valid", "test", "dev"] {
        let text = format!(
            "data: {{path: x.csv, target: y}}\nsteps:\n  - split: {{input: data, as: s}}\n  - cv: {{input: s, as: c}}\n  \
             - fit: {{input: c.{member}, algorithm: logistic}}\n"
        );
        let r = run_text_on(&new(), &text, df.clone(), Some(GuardMode::On));
        let name = r.error.as_ref().map(|e| e.name.as_str());
        ensure(name == Some("TypeContinuity"), format!("c.{member}: got {name:?}"))?;
    }
    ensure(s.lookup(p.test()).ok().flatten().is_some_and(|r| r.role == Role::Test), "test left the Partition")?;
    Ok("no member accessors; c.train/.valid/.test/.dev rejected; folds index dev only".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes_all_eight_in_order() {
        let r = run_conformance();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
        assert!(r.all_passed(), "{failed:#?}");
        assert_eq!(r.checks.iter().map(|c| c.condition).collect::<Vec<_>>(), (1..=8).collect::<Vec<_>>());
    }
}
